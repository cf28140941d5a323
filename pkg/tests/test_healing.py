import math

import numpy as np
import pytest

from drheal.agents import (
    DqnHyperparams,
    PpoHyperparams,
    train_dqn,
    train_ppo,
)
from drheal.envs import EnvSpec, is_solved
from drheal.errors import BindingError
from drheal.healing import (
    METHOD_DRDRL,
    METHOD_VANILLA_CL,
    HealingConfig,
    detect_failure,
    forget_minor_behavior,
    heal_drdrl,
    heal_vanilla_cl,
)
from drheal.nn import (
    InitializerSpec,
    init_network,
    initializer_bound,
    mlp_layers,
    network_fingerprint,
)
from drheal.tracing import (
    HypoactiveMask,
    collect_observations,
    compute_activation_trace,
    trace_agent_networks,
)
from synthetic_task import run_dual_speed_trial

CARTPOLE = EnvSpec.defaults("cartpole")


def quick_dqn_agent(seed=0, episodes=2):
    hp = DqnHyperparams(max_train_episodes=episodes, warmup_transitions=16,
                        eval_every_episodes=0, replay_capacity=512,
                        batch_size=16)
    return train_dqn(CARTPOLE, hp, seed=seed)


def quick_ppo_agent(seed=0, episodes=3):
    hp = PpoHyperparams(max_train_episodes=episodes, rollout_steps=64,
                        epochs_per_update=1, eval_every_episodes=0)
    agent, _ = train_ppo(CARTPOLE, hp, seed=seed)
    return agent


def full_mask(net, fingerprint=None):
    return HypoactiveMask(
        [np.arange(net.layers[l].out_dim) for l in net.hidden_layer_indices()],
        fingerprint or network_fingerprint(net), 100.0)


class TestForgetMinorBehavior:
    def _net(self, seed=0):
        return init_network(mlp_layers(4, [16, 16], "linear", 2),
                            InitializerSpec("glorot_uniform", seed))

    def test_empty_mask_bit_identical(self):
        net = self._net()
        mask = HypoactiveMask([np.array([], dtype=np.int64)] * 2,
                              network_fingerprint(net), 0.0)
        out = forget_minor_behavior(net, mask, 0.1,
                                    InitializerSpec("glorot_uniform", 5))
        assert out.equal_params(net)
        assert out is not net

    def test_locality_bitwise_audit(self):
        net = self._net(1)
        rows = [np.array([1, 4, 7]), np.array([0, 15])]
        mask = HypoactiveMask(rows, network_fingerprint(net), 20.0)
        out = forget_minor_behavior(net, mask, 0.5,
                                    InitializerSpec("glorot_uniform", 6))
        for l in range(net.n_layers):
            w_diff = {i for i in range(net.layers[l].out_dim)
                      if not np.array_equal(out.weights[l][i], net.weights[l][i])}
            b_diff = {i for i in range(net.layers[l].out_dim)
                      if out.biases[l][i] != net.biases[l][i]}
            if l < 2:
                assert w_diff == set(rows[l].tolist())
                # biases were already zero at init here, so only rows move
                assert b_diff <= set(rows[l].tolist())
            else:
                assert not w_diff and not b_diff

    def test_masked_biases_reset_to_zero(self):
        net = self._net(2)
        net.biases[0][:] = 1.5
        net = net.copy()  # re-snapshot fingerprint source
        mask = HypoactiveMask([np.array([3]), np.array([], dtype=np.int64)],
                              network_fingerprint(net), 5.0)
        out = forget_minor_behavior(net, mask, 0.1,
                                    InitializerSpec("glorot_uniform", 7))
        assert out.biases[0][3] == 0.0
        assert out.biases[0][0] == 1.5

    def test_fingerprint_mismatch_rejected(self):
        net = self._net(3)
        with pytest.raises(BindingError):
            forget_minor_behavior(net, full_mask(net, fingerprint="f" * 64),
                                  0.1, InitializerSpec("glorot_uniform", 0))

    def test_scale_rate_validated(self):
        net = self._net(4)
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                forget_minor_behavior(net, full_mask(net), bad,
                                      InitializerSpec("glorot_uniform", 0))

    @pytest.mark.parametrize("scale_rate", [1.0, 0.1])
    def test_scale_law(self, scale_rate):
        # 100x100 layer, all rows masked: 1e4 reinitialized entries.
        net = init_network(mlp_layers(100, [100], "linear", 1),
                           InitializerSpec("glorot_uniform", 8))
        out = forget_minor_behavior(net, full_mask(net), scale_rate,
                                    InitializerSpec("glorot_uniform", 9))
        native_std = initializer_bound("glorot_uniform", 100, 100) / math.sqrt(3)
        sample_std = out.weights[0].std()
        assert abs(sample_std - scale_rate * native_std) <= \
            0.05 * scale_rate * native_std

    def test_reset_outgoing_switch(self):
        net = self._net(5)
        rows = [np.array([2]), np.array([], dtype=np.int64)]
        mask = HypoactiveMask(rows, network_fingerprint(net), 10.0)
        out = forget_minor_behavior(net, mask, 0.01,
                                    InitializerSpec("glorot_uniform", 10),
                                    reset_outgoing=True)
        # outgoing column of neuron 2 in the next layer changed, others not
        changed_cols = {j for j in range(16)
                        if not np.array_equal(out.weights[1][:, j],
                                              net.weights[1][:, j])}
        assert changed_cols == {2}


class TestDetectFailure:
    def test_easy_threshold_means_no_failure(self):
        agent, _, _ = quick_dqn_agent()
        easy = EnvSpec.defaults("cartpole", solve_threshold=1.0)
        failed, avg = detect_failure(agent, easy, eval_episodes=5, seed=0)
        assert not failed and avg >= 1.0

    def test_impossible_threshold_means_failure(self):
        agent, _, _ = quick_dqn_agent()
        hard = EnvSpec.defaults("cartpole", solve_threshold=1e9)
        failed, _ = detect_failure(agent, hard, eval_episodes=5, seed=0)
        assert failed

    def test_zero_episodes_rejected(self):
        agent, _, _ = quick_dqn_agent()
        with pytest.raises(ValueError):
            detect_failure(agent, CARTPOLE, eval_episodes=0, seed=0)


class TestDualSpeedCl:
    def test_budget_validated(self):
        with pytest.raises(ValueError):
            HealingConfig(max_heal_episodes=0)

    def test_already_adapted_short_circuits(self):
        agent, _, _ = quick_dqn_agent()
        easy = EnvSpec.defaults("cartpole", solve_threshold=1.0)
        config = HealingConfig(max_heal_episodes=10, eval_window=5,
                               use_tolerance=True)
        report = heal_vanilla_cl(agent, easy, config, seed=0)
        assert report.adapted
        assert report.fine_tune_episodes == 0

    def test_budget_respected_and_report_shape(self):
        agent, _, replay = quick_dqn_agent(seed=1)
        hard = EnvSpec.defaults("cartpole", solve_threshold=1e9)
        config = HealingConfig(max_heal_episodes=4, eval_window=3,
                               eval_every_episodes=2)
        report = heal_vanilla_cl(agent, hard, config, seed=1, replay=replay)
        assert report.method == METHOD_VANILLA_CL
        assert not report.adapted
        assert report.fine_tune_episodes <= 4
        assert len(report.reward_curve) == report.fine_tune_episodes
        assert report.seed == 1

    def test_adapted_consistent_with_is_solved(self):
        agent, _, _ = quick_dqn_agent(seed=2)
        spec = EnvSpec.defaults("cartpole", solve_threshold=15.0)
        config = HealingConfig(max_heal_episodes=6, eval_window=4,
                               eval_every_episodes=3, use_tolerance=True)
        report = heal_vanilla_cl(agent, spec, config, seed=2)
        assert report.adapted == is_solved(spec, report.final_avg_reward,
                                           use_tolerance=True)

    def test_nonfinite_loss_marks_report_failed(self):
        # Steps of +-1e200 overflow the forward pass within a batch or two.
        hp = DqnHyperparams(max_train_episodes=2, warmup_transitions=8,
                            eval_every_episodes=0, replay_capacity=128,
                            batch_size=8, learning_rate=1e200)
        agent, _, replay = train_dqn(
            CARTPOLE,
            DqnHyperparams(max_train_episodes=1, warmup_transitions=8,
                           eval_every_episodes=0, replay_capacity=128,
                           batch_size=8),
            seed=3)
        agent.hyperparams = hp
        config = HealingConfig(max_heal_episodes=5, eval_window=2,
                               eval_every_episodes=5)
        report = heal_vanilla_cl(agent, CARTPOLE, config, seed=3,
                                 replay=replay)
        assert report.failure
        assert not report.adapted


class TestHealPipelines:
    def _agent_with_traces(self, seed=0):
        agent, _, replay = quick_dqn_agent(seed=seed, episodes=3)
        obs_set = collect_observations(agent, CARTPOLE, 128, seed=seed)
        return agent, trace_agent_networks(agent, obs_set), replay

    def test_reduction_to_baseline_bit_identical(self):
        # Zero forget rate: identical seeds give bit-identical curves.
        agent, traces, replay = self._agent_with_traces()
        hard = EnvSpec.defaults("cartpole", solve_threshold=1e9)
        config = HealingConfig(forget_rate=0.0, scale_rate=0.1,
                               max_heal_episodes=6, eval_window=3,
                               eval_every_episodes=3)
        a = heal_drdrl(agent, CARTPOLE, hard, traces, config, seed=5,
                       replay=replay)
        b = heal_vanilla_cl(agent, hard, config, seed=5, replay=replay)
        assert a.method == METHOD_DRDRL and b.method == METHOD_VANILLA_CL
        assert a.reward_curve == b.reward_curve
        assert a.fine_tune_episodes == b.fine_tune_episodes
        assert a.final_avg_reward == b.final_avg_reward

    def test_input_agent_not_mutated(self):
        agent, traces, replay = self._agent_with_traces(seed=4)
        before = {name: net.copy() for name, net in agent.networks.items()}
        config = HealingConfig(forget_rate=50.0, scale_rate=0.1,
                               max_heal_episodes=3, eval_window=2,
                               eval_every_episodes=2)
        heal_drdrl(agent, CARTPOLE,
                   EnvSpec.defaults("cartpole", solve_threshold=1e9),
                   traces, config, seed=6, replay=replay)
        for name, net in agent.networks.items():
            assert net.equal_params(before[name])

    def test_trace_binding_enforced(self):
        agent, traces, replay = self._agent_with_traces(seed=5)
        other_agent, _, _ = quick_dqn_agent(seed=99)
        config = HealingConfig(max_heal_episodes=2, eval_window=2)
        with pytest.raises(BindingError):
            heal_drdrl(other_agent, CARTPOLE, CARTPOLE, traces, config,
                       seed=0, replay=replay)

    def test_env_binding_enforced(self):
        agent, traces, replay = self._agent_with_traces(seed=6)
        other_env = EnvSpec.defaults("cartpole",
                                     params={"masspole": 0.2})
        config = HealingConfig(max_heal_episodes=2, eval_window=2)
        with pytest.raises(BindingError):
            heal_drdrl(agent, other_env, CARTPOLE, traces, config, seed=0,
                       replay=replay)

    def test_ppo_heals_both_networks(self):
        agent = quick_ppo_agent(seed=7)
        obs_set = collect_observations(agent, CARTPOLE, 64, seed=7)
        traces = trace_agent_networks(agent, obs_set)
        assert set(traces) == {"policy", "value"}
        config = HealingConfig(forget_rate=50.0, scale_rate=0.1,
                               max_heal_episodes=3, eval_window=2,
                               eval_every_episodes=2)
        report = heal_drdrl(agent, CARTPOLE,
                            EnvSpec.defaults("cartpole", solve_threshold=1e9),
                            traces, config, seed=8)
        assert report.method == METHOD_DRDRL
        assert report.fine_tune_episodes <= 3

    def test_ppo_single_trace_rejected(self):
        agent = quick_ppo_agent(seed=8)
        obs_set = collect_observations(agent, CARTPOLE, 32, seed=8)
        trace = compute_activation_trace(agent.networks["policy"], obs_set)
        config = HealingConfig(max_heal_episodes=2, eval_window=2)
        with pytest.raises(ValueError):
            heal_drdrl(agent, CARTPOLE, CARTPOLE, trace, config, seed=0)


class TestDualSpeedSignature:
    def test_masked_rows_update_less_three_seeds(self):
        # Full 10-seed sweep runs in the acceptance suite.
        for seed in range(3):
            masked, unmasked = run_dual_speed_trial(seed, scale_rate=1e-4)
            assert masked < unmasked


class TestAdaptationSoundness:
    @pytest.mark.slow
    def test_healed_agent_repasses_fresh_evaluations(self):
        from drheal.envs import evaluate

        hp = DqnHyperparams(max_train_episodes=60, eval_every_episodes=0)
        agent, _, replay = train_dqn(CARTPOLE, hp, seed=42)
        target = EnvSpec.defaults("cartpole", solve_threshold=60.0)
        config = HealingConfig(max_heal_episodes=150, eval_window=40,
                               eval_every_episodes=10, use_tolerance=True)
        report = heal_vanilla_cl(agent, target, config, seed=1, replay=replay)
        assert report.adapted
        assert report.healed_agent is not None
        passes = sum(
            is_solved(target,
                      evaluate(target, report.healed_agent, 40,
                               seed=90_000 + i), True)
            for i in range(10))
        assert passes >= 8
