#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

Times the individual hot kernels (dense layer forward/backward at the
shapes the agents actually use, plus environment steps) and a short
end-to-end DQN training slice under each backend.

Usage::

    python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

from drheal import _kernels
from drheal.agents import DqnHyperparams, train_dqn
from drheal.envs import EnvSpec, evaluate


def _time(fn, repeats, number):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - start) / number)
    return best


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    x64 = np.ascontiguousarray(rng.normal(size=(64, 64)))
    x1 = np.ascontiguousarray(rng.normal(size=(1, 4)))
    w_in = np.ascontiguousarray(rng.normal(size=(64, 4)))
    w_hid = np.ascontiguousarray(rng.normal(size=(64, 64)))
    b = np.zeros(64)
    dz = np.ascontiguousarray(rng.normal(size=(64, 64)))

    cases = {
        "dense_forward 1x4->64 (act select)":
            lambda: _kernels.dense_forward(x1, w_in, b, _kernels.ACT_RELU),
        "dense_forward 64x64->64 (train batch)":
            lambda: _kernels.dense_forward(x64, w_hid, b, _kernels.ACT_RELU),
        "dense_backward 64x64":
            lambda: _kernels.dense_backward(dz, x64, w_hid),
        "cart_pole_step":
            lambda: _kernels.cart_pole_step(0.1, 0.2, 0.05, -0.1, 1,
                                            0.1, 0.5, 1.0, 0.0),
        "mountain_car_step":
            lambda: _kernels.mountain_car_step(-0.5, 0.01, 2,
                                               1e-3, 2.5e-3, 0.0),
        "acrobot_step":
            lambda: _kernels.acrobot_step(0.1, -0.1, 0.5, -0.5, 2,
                                          1.0, 0.5, 1.0, 1.0),
    }
    numbers = {"cart_pole_step": 20_000, "mountain_car_step": 20_000,
               "acrobot_step": 5_000}
    results = {}
    for backend in _kernels.available_backends():
        _kernels.set_backend(backend)
        for name, fn in cases.items():
            n = numbers.get(name, 2_000)
            results.setdefault(name, {})[backend] = _time(fn, repeats, n)
    return results


def bench_training(repeats):
    spec = EnvSpec.defaults("cartpole")
    hp = DqnHyperparams(max_train_episodes=10, warmup_transitions=200,
                        eval_every_episodes=0, replay_capacity=4096,
                        epsilon_anneal_steps=500)
    results = {}
    for backend in _kernels.available_backends():
        _kernels.set_backend(backend)
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            train_dqn(spec, hp, seed=0)
            best = min(best, time.perf_counter() - start)
        results[backend] = best
    return results


def bench_evaluation(repeats):
    # Greedy rollouts: per-step physics + single-observation forwards,
    # the paths the compiled core targets.
    spec = EnvSpec.defaults("cartpole")
    hp = DqnHyperparams(max_train_episodes=1, warmup_transitions=100,
                        eval_every_episodes=0, replay_capacity=512)
    agent, _, _ = train_dqn(spec, hp, seed=0)
    results = {}
    for backend in _kernels.available_backends():
        _kernels.set_backend(backend)
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            evaluate(spec, agent, episodes=100, seed=1)
            best = min(best, time.perf_counter() - start)
        results[backend] = best
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"available backends: {backends}")
    if len(backends) < 2:
        print("compiled core not built; benchmarking the fallback only")

    kernel_results = bench_kernels(args.repeats)
    width = max(len(name) for name in kernel_results) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print("\n" + header)
    print("-" * len(header))
    for name, per_backend in kernel_results.items():
        row = f"{name:<{width}}"
        for b in backends:
            row += f"{per_backend[b] * 1e6:>12.2f}us"
        if len(backends) == 2:
            row += f"{per_backend['python'] / per_backend['compiled']:>9.1f}x"
        print(row)

    print("\nend-to-end: 10-episode DQN training slice (CartPole)")
    training = bench_training(max(1, args.repeats - 1))
    for b, seconds in training.items():
        print(f"  {b:>9}: {seconds:.2f}s")
    if len(training) == 2:
        print(f"  speedup: {training['python'] / training['compiled']:.1f}x")

    print("\nend-to-end: 100-episode greedy evaluation (CartPole)")
    evaluation = bench_evaluation(max(1, args.repeats - 1))
    for b, seconds in evaluation.items():
        print(f"  {b:>9}: {seconds:.2f}s")
    if len(evaluation) == 2:
        print(f"  speedup: {evaluation['python'] / evaluation['compiled']:.1f}x")

    _kernels.set_backend(backends[-1])


if __name__ == "__main__":
    main()
