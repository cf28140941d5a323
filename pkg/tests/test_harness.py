import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drheal.agents import DqnHyperparams
from drheal.envs import DEFAULT_DRIFT_RANGES
from drheal.harness import (
    ExperimentPlan,
    PairOutcome,
    adaptability_ratio,
    decrease_ratio,
    increase_ratio,
    quadrant_classify,
    read_quadrants_csv,
    read_runs_csv,
    read_summary_csv,
    render_tables,
    run_experiment,
    summarize_cell,
    vargha_delaney_a12,
    wilcoxon_rank_sum,
    write_quadrants_csv,
    write_runs_csv,
    write_summary_csv,
)
from drheal.harness.stats import a12_magnitude
from drheal.healing import HealingConfig, HealingReport


def report(method, adapted, episodes=10, wall=1.0, reward=100.0, seed=0,
           failure=""):
    return HealingReport(method, adapted, episodes, wall, reward, [],
                         None, seed, failure)


def pair(adapted_drdrl, adapted_cl, drift_id="d0", seed=0, **kw):
    return PairOutcome(
        "cartpole", "dqn", drift_id, seed,
        report("drdrl", adapted_drdrl, episodes=kw.get("e_drdrl", 10),
               wall=kw.get("w_drdrl", 1.0), reward=kw.get("r_drdrl", 100.0)),
        report("vanilla_cl", adapted_cl, episodes=kw.get("e_cl", 12),
               wall=kw.get("w_cl", 1.5), reward=kw.get("r_cl", 90.0)))


class TestMetricFormulas:
    def test_worked_examples(self):
        assert decrease_ratio(236, 185) == pytest.approx(21.610169491525422)
        assert decrease_ratio(100, 120) == pytest.approx(-20.0)
        assert increase_ratio(-122.3, -123.7) == pytest.approx(
            (-122.3 - (-123.7)) / (-123.7) * 100.0)
        assert adaptability_ratio(12, 54) == pytest.approx(22.22222222222222)
        assert adaptability_ratio(0, 5) == 0.0
        assert adaptability_ratio(5, 5) == 100.0

    def test_identity_inputs_are_zero(self):
        for x in (3.7, -12.0, 1e9):
            assert increase_ratio(x, x) == 0.0
            assert decrease_ratio(x, x) == 0.0

    def test_zero_denominators(self):
        with pytest.raises(ZeroDivisionError):
            increase_ratio(1.0, 0.0)
        with pytest.raises(ZeroDivisionError):
            decrease_ratio(0.0, 1.0)
        with pytest.raises(ValueError):
            adaptability_ratio(0, 0)

    @settings(max_examples=100, deadline=None)
    @given(drdrl=st.floats(-1e6, 1e6),
           cl=st.floats(-1e6, 1e6).filter(lambda v: abs(v) >= 1e-6))
    def test_closed_forms_exact(self, drdrl, cl):
        assert abs(increase_ratio(drdrl, cl)
                   - (drdrl - cl) / cl * 100.0) <= 1e-12
        assert abs(decrease_ratio(cl, drdrl)
                   - (cl - drdrl) / cl * 100.0) <= 1e-12


def _oracle_rank_sum_p(a, b):
    """Exhaustive two-sided rank-sum p-value over all C(n, n_a) label
    assignments, independent of the implementation (doubled mid-ranks)."""
    pooled = np.concatenate([a, b])
    n = len(pooled)
    n_a = len(a)
    order = sorted(range(n), key=lambda i: pooled[i])
    ranks2 = [0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks2[order[k]] = (i + j) + 2  # doubled mid-rank
        i = j + 1
    mu2 = n_a * (n + 1)
    w2_obs = sum(ranks2[:n_a])
    dev_obs = abs(w2_obs - mu2)
    extreme = 0
    total = 0
    for subset in itertools.combinations(range(n), n_a):
        total += 1
        w2 = sum(ranks2[i] for i in subset)
        if abs(w2 - mu2) >= dev_obs:
            extreme += 1
    return extreme / total


class TestWilcoxon:
    def test_identical_multisets_p_one(self):
        result = wilcoxon_rank_sum([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert result.p_value == 1.0

    def test_separated_samples_match_enumeration(self):
        a = [1.0, 2.0, 3.0, 4.0]
        b = [10.0, 11.0, 12.0, 13.0]
        result = wilcoxon_rank_sum(a, b)
        assert result.p_value == pytest.approx(2.0 / 70.0, abs=1e-15)
        assert result.p_value == pytest.approx(_oracle_rank_sum_p(a, b),
                                               abs=1e-12)

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_degenerate_flagged(self):
        result = wilcoxon_rank_sum([5.0] * 4, [5.0] * 4)
        assert result.p_value == 1.0
        assert result.degenerate

    def test_exact_matches_enumeration_all_small_sizes(self):
        # Every (n_a, n_b) with sizes >= 3 and combined n <= 12, with
        # tie-heavy integer data to stress mid-rank handling.
        rng = np.random.default_rng(23)
        for n_a in range(3, 10):
            for n_b in range(3, 13 - n_a):
                for _ in range(3):
                    a = rng.integers(0, 5, size=n_a).astype(float)
                    b = rng.integers(0, 5, size=n_b).astype(float)
                    got = wilcoxon_rank_sum(a, b)
                    if got.degenerate:
                        assert np.all(a == b[0]) and np.all(b == b[0])
                        continue
                    expected = _oracle_rank_sum_p(a, b)
                    assert got.p_value == pytest.approx(expected, abs=1e-12), \
                        (a, b)

    def test_normal_approximation_sane(self):
        rng = np.random.default_rng(29)
        same = wilcoxon_rank_sum(rng.normal(size=30), rng.normal(size=30))
        assert 0.0 <= same.p_value <= 1.0
        shifted = wilcoxon_rank_sum(rng.normal(size=30),
                                    rng.normal(size=30) + 3.0)
        assert shifted.p_value < 1e-6
        assert shifted.p_value < same.p_value


class TestA12:
    def test_identical_distributions(self):
        result = vargha_delaney_a12([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert result.a12 == 0.5
        assert result.magnitude == "negligible"

    def test_complete_dominance(self):
        result = vargha_delaney_a12([4.0, 5.0], [1.0, 2.0])
        assert result.a12 == 1.0
        assert result.magnitude == "large"

    def test_hand_counted_case(self):
        result = vargha_delaney_a12([1.0, 2.0], [1.0, 3.0])
        assert result.a12 == pytest.approx(0.375)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            vargha_delaney_a12([], [1.0])

    def test_magnitude_bands(self):
        assert a12_magnitude(0.56) == "negligible"
        assert a12_magnitude(0.561) == "small"
        assert a12_magnitude(0.64) == "small"
        assert a12_magnitude(0.641) == "medium"
        assert a12_magnitude(0.71) == "medium"
        assert a12_magnitude(0.711) == "large"
        assert a12_magnitude(0.29) == "medium"  # symmetric with 0.71
        assert a12_magnitude(0.289) == "large"

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=12, unique=True),
           st.lists(st.floats(-100, 100), min_size=1, max_size=12, unique=True))
    def test_bounds_and_symmetry(self, a, b):
        if set(a) & set(b):
            return  # no cross ties for the symmetry law
        fwd = vargha_delaney_a12(a, b).a12
        rev = vargha_delaney_a12(b, a).a12
        assert 0.0 <= fwd <= 1.0
        assert fwd + rev == pytest.approx(1.0, abs=1e-12)

    def test_brute_force_oracle_random_instances(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            a = rng.integers(0, 6, size=rng.integers(1, 9)).astype(float)
            b = rng.integers(0, 6, size=rng.integers(1, 9)).astype(float)
            expected = sum((1.0 if x > y else 0.5 if x == y else 0.0)
                           for x in a for y in b) / (len(a) * len(b))
            assert vargha_delaney_a12(a, b).a12 == pytest.approx(
                expected, abs=1e-12)


class TestQuadrants:
    def test_all_adapted(self):
        q = quadrant_classify([pair(True, True) for _ in range(5)])
        assert tuple(q) == (5, 0, 0, 0)
        assert q.total == 5

    def test_partition_exact(self):
        pairs = ([pair(True, True)] * 3 + [pair(True, False)] * 2
                 + [pair(False, True)] * 1 + [pair(False, False)] * 4)
        q = quadrant_classify(pairs)
        assert tuple(q) == (3, 2, 1, 4)
        assert q.total == len(pairs)

    def test_missing_counterpart_rejected(self):
        with pytest.raises(ValueError):
            PairOutcome("cartpole", "dqn", "d0", 0, report("drdrl", True), None)

    def test_rendering_fixture_global_split(self):
        # Synthetic outcome fixture with the 35/20/4/41 split; checks the
        # quadrant bookkeeping and the table renderer end to end.
        pairs = ([pair(True, True)] * 35 + [pair(True, False)] * 20
                 + [pair(False, True)] * 4 + [pair(False, False)] * 41)
        cell = summarize_cell("cartpole", "dqn", pairs)
        assert tuple(cell.quadrants) == (35, 20, 4, 41)
        assert cell.ar_drdrl_pct == pytest.approx(55.0)
        assert cell.ar_cl_pct == pytest.approx(39.0)
        from drheal.harness import ComparisonSummary
        text = render_tables(ComparisonSummary([cell]))
        assert "55.0%" in text and "39.0%" in text
        assert "Episodes DR (%)" in text


def tiny_plan(tmp_path=None, seeds=3, drifts=2, workers=1):
    dqn = DqnHyperparams(max_train_episodes=1, warmup_transitions=16,
                         eval_every_episodes=0, replay_capacity=128,
                         batch_size=8, epsilon_anneal_steps=100)
    healing = {"cartpole": HealingConfig(
        forget_rate=50.0, scale_rate=0.1, max_heal_episodes=2,
        eval_window=2, eval_every_episodes=2, use_tolerance=True)}
    return ExperimentPlan(
        env_kinds=["cartpole"], agent_kinds=["dqn"], seeds=seeds,
        drifts_per_cell=drifts, heal_budget=2, healing_configs=healing,
        dqn_hyperparams=dqn, trace_samples=32, master_seed=7,
        workers=workers)


class TestRunExperiment:
    def test_cardinality_and_quadrant_sum(self):
        summary, outcomes = run_experiment(tiny_plan())
        assert len(outcomes) == 6  # 2 drifts x 3 seeds
        reports = [r for p in outcomes for r in (p.drdrl, p.cl)]
        assert len(reports) == 12  # 2 methods x 2 drifts x 3 seeds
        cell = summary.cell("cartpole", "dqn")
        assert cell.quadrants.total == cell.n_pairs == 6
        assert not cell.failures

    def test_rerun_deterministic_except_wall_time(self):
        summary_a, outcomes_a = run_experiment(tiny_plan())
        summary_b, outcomes_b = run_experiment(tiny_plan())
        for pa, pb in zip(outcomes_a, outcomes_b):
            assert pa.drift_id == pb.drift_id and pa.seed == pb.seed
            for ra, rb in ((pa.drdrl, pb.drdrl), (pa.cl, pb.cl)):
                assert ra.adapted == rb.adapted
                assert ra.fine_tune_episodes == rb.fine_tune_episodes
                assert ra.final_avg_reward == rb.final_avg_reward
                assert ra.reward_curve == rb.reward_curve
        cell_a = summary_a.cell("cartpole", "dqn")
        cell_b = summary_b.cell("cartpole", "dqn")
        assert cell_a.quadrants == cell_b.quadrants
        for ma, mb in zip(cell_a.metrics, cell_b.metrics):
            if ma.metric == "wall_time":
                continue
            assert (ma.drdrl_mean == mb.drdrl_mean
                    or (math.isnan(ma.drdrl_mean) and math.isnan(mb.drdrl_mean)))

    def test_cell_isolation_on_failure(self, monkeypatch):
        import drheal.harness.experiment as exp

        real_sample = exp.sample_drifts

        def exploding(kind, *args, **kwargs):
            if kind == "mountaincar":
                raise RuntimeError("boom")
            return real_sample(kind, *args, **kwargs)

        monkeypatch.setattr(exp, "sample_drifts", exploding)
        plan = tiny_plan()
        plan.env_kinds = ["cartpole", "mountaincar"]
        plan.healing_configs["mountaincar"] = plan.healing_configs["cartpole"]
        plan.drift_ranges["mountaincar"] = DEFAULT_DRIFT_RANGES["mountaincar"]
        summary, outcomes = run_experiment(plan)
        good = summary.cell("cartpole", "dqn")
        bad = summary.cell("mountaincar", "dqn")
        assert good.n_pairs == 6 and not good.failures
        assert bad.n_pairs == 0 and bad.failures


class TestCsvRoundTrips:
    def test_runs_csv(self, tmp_path):
        _, outcomes = run_experiment(tiny_plan(seeds=2, drifts=1))
        path = tmp_path / "runs.csv"
        write_runs_csv(path, outcomes)
        rows = read_runs_csv(path)
        assert len(rows) == 4
        by_key = {(r["method"], r["drift_id"], r["seed"]): r for r in rows}
        for p in outcomes:
            for rep in (p.drdrl, p.cl):
                row = by_key[(rep.method, p.drift_id, p.seed)]
                assert row["adapted"] == rep.adapted
                assert row["episodes"] == rep.fine_tune_episodes
                assert row["wall_time_s"] == rep.wall_time_seconds
                assert row["final_avg_reward"] == rep.final_avg_reward

    def test_summary_and_quadrants_csv(self, tmp_path):
        summary, _ = run_experiment(tiny_plan(seeds=2, drifts=1))
        spath = tmp_path / "summary.csv"
        qpath = tmp_path / "quadrants.csv"
        write_summary_csv(spath, summary)
        write_quadrants_csv(qpath, summary)

        restored = read_summary_csv(spath)
        original = summary.cell("cartpole", "dqn")
        loaded = restored.cell("cartpole", "dqn")
        for m_orig, m_load in zip(original.metrics, loaded.metrics):
            assert m_orig.metric == m_load.metric
            for attr in ("drdrl_mean", "cl_mean", "ratio_pct", "p_value",
                         "a12"):
                a, b = getattr(m_orig, attr), getattr(m_load, attr)
                assert a == b or (math.isnan(a) and math.isnan(b))

        qrows = read_quadrants_csv(qpath)
        assert qrows[0]["both"] == original.quadrants.both
        assert qrows[0]["ar_drdrl_pct"] == original.ar_drdrl_pct

    def test_format_line_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("method,env_kind\n")
        with pytest.raises(ValueError):
            read_runs_csv(path)
