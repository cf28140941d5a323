"""CSV artifacts and text-table rendering.

Every CSV starts with a ``# format: <id>`` comment naming its schema
version, followed by a header row. Floats are written with ``repr`` so a
re-parse reproduces the in-memory values exactly.

Schemas:

runs (``drheal-runs-v1``), one row per healing report::

    method,env_kind,drift_id,seed,adapted,episodes,wall_time_s,
    final_avg_reward,failure

summary (``drheal-summary-v1``), one row per cell x metric::

    env_kind,agent_kind,metric,ratio_kind,scope,n_pairs,drdrl_mean,
    cl_mean,ratio_pct,wilcoxon_statistic,p_value,degenerate,a12,magnitude

quadrants (``drheal-quadrants-v1``), one row per cell::

    env_kind,agent_kind,both,drdrl_only,cl_only,neither,ar_drdrl_pct,
    ar_cl_pct

curve (``drheal-curve-v1``), one row per fine-tuning episode::

    episode,reward
"""

import csv
import math

from .experiment import (
    CellSummary,
    ComparisonSummary,
    MetricComparison,
    QuadrantCounts,
)

RUNS_FORMAT = "drheal-runs-v1"
SUMMARY_FORMAT = "drheal-summary-v1"
QUADRANTS_FORMAT = "drheal-quadrants-v1"
CURVE_FORMAT = "drheal-curve-v1"

RUNS_COLUMNS = ["method", "env_kind", "drift_id", "seed", "adapted",
                "episodes", "wall_time_s", "final_avg_reward", "failure"]
SUMMARY_COLUMNS = ["env_kind", "agent_kind", "metric", "ratio_kind", "scope",
                   "n_pairs", "drdrl_mean", "cl_mean", "ratio_pct",
                   "wilcoxon_statistic", "p_value", "degenerate", "a12",
                   "magnitude"]
QUADRANTS_COLUMNS = ["env_kind", "agent_kind", "both", "drdrl_only",
                     "cl_only", "neither", "ar_drdrl_pct", "ar_cl_pct"]


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # plain-float repr (numpy scalars subclass float but repr differently)
        return repr(float(value))
    return str(value)


def _write_csv(path, format_id, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# format: {format_id}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _read_csv(path, format_id, columns):
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# format: {format_id}":
            raise ValueError(f"{path}: expected '# format: {format_id}', "
                             f"got {first!r}")
        reader = csv.reader(fh)
        header = next(reader)
        if header != columns:
            raise ValueError(f"{path}: unexpected header {header}")
        return [dict(zip(columns, row)) for row in reader]


def _report_row(report, env_kind):
    drift_id = report.drift.drift_id if report.drift is not None else ""
    return {
        "method": report.method,
        "env_kind": env_kind,
        "drift_id": drift_id,
        "seed": report.seed,
        "adapted": report.adapted,
        "episodes": report.fine_tune_episodes,
        "wall_time_s": report.wall_time_seconds,
        "final_avg_reward": report.final_avg_reward,
        "failure": report.failure,
    }


def report_to_csv_row(report, env_kind):
    """One healing report as its documented CSV row (list of strings)."""
    row = _report_row(report, env_kind)
    return [_fmt(row[c]) for c in RUNS_COLUMNS]


def write_runs_csv(path, outcomes):
    rows = []
    for pair in outcomes:
        rows.append(_report_row(pair.drdrl, pair.env_kind))
        rows.append(_report_row(pair.cl, pair.env_kind))
    _write_csv(path, RUNS_FORMAT, RUNS_COLUMNS, rows)


def read_runs_csv(path):
    rows = _read_csv(path, RUNS_FORMAT, RUNS_COLUMNS)
    for row in rows:
        row["seed"] = int(row["seed"])
        row["adapted"] = row["adapted"] == "true"
        row["episodes"] = int(row["episodes"])
        row["wall_time_s"] = float(row["wall_time_s"])
        row["final_avg_reward"] = float(row["final_avg_reward"])
    return rows


def write_summary_csv(path, summary: ComparisonSummary):
    rows = []
    for cell in summary.cells:
        for m in cell.metrics:
            rows.append({
                "env_kind": cell.env_kind,
                "agent_kind": cell.agent_kind,
                "metric": m.metric,
                "ratio_kind": m.ratio_kind,
                "scope": m.scope,
                "n_pairs": m.n_pairs,
                "drdrl_mean": m.drdrl_mean,
                "cl_mean": m.cl_mean,
                "ratio_pct": m.ratio_pct,
                "wilcoxon_statistic": m.statistic,
                "p_value": m.p_value,
                "degenerate": m.degenerate,
                "a12": m.a12,
                "magnitude": m.magnitude,
            })
    _write_csv(path, SUMMARY_FORMAT, SUMMARY_COLUMNS, rows)


def read_summary_csv(path) -> ComparisonSummary:
    """Rebuild cell metric comparisons (quadrants live in their own file)."""
    rows = _read_csv(path, SUMMARY_FORMAT, SUMMARY_COLUMNS)
    cells = {}
    for row in rows:
        key = (row["env_kind"], row["agent_kind"])
        cell = cells.get(key)
        if cell is None:
            cell = CellSummary(env_kind=key[0], agent_kind=key[1], n_pairs=0,
                               metrics=[], quadrants=QuadrantCounts(0, 0, 0, 0),
                               ar_drdrl_pct=math.nan, ar_cl_pct=math.nan)
            cells[key] = cell
        cell.metrics.append(MetricComparison(
            metric=row["metric"],
            ratio_kind=row["ratio_kind"],
            scope=row["scope"],
            n_pairs=int(row["n_pairs"]),
            drdrl_mean=float(row["drdrl_mean"]),
            cl_mean=float(row["cl_mean"]),
            ratio_pct=float(row["ratio_pct"]),
            statistic=float(row["wilcoxon_statistic"]),
            p_value=float(row["p_value"]),
            degenerate=row["degenerate"] == "true",
            a12=float(row["a12"]),
            magnitude=row["magnitude"],
        ))
        cell.n_pairs = max(cell.n_pairs, int(row["n_pairs"]))
    return ComparisonSummary([cells[k] for k in sorted(cells)])


def write_quadrants_csv(path, summary: ComparisonSummary):
    rows = []
    for cell in summary.cells:
        q = cell.quadrants
        rows.append({
            "env_kind": cell.env_kind,
            "agent_kind": cell.agent_kind,
            "both": q.both,
            "drdrl_only": q.drdrl_only,
            "cl_only": q.cl_only,
            "neither": q.neither,
            "ar_drdrl_pct": cell.ar_drdrl_pct,
            "ar_cl_pct": cell.ar_cl_pct,
        })
    _write_csv(path, QUADRANTS_FORMAT, QUADRANTS_COLUMNS, rows)


def read_quadrants_csv(path):
    rows = _read_csv(path, QUADRANTS_FORMAT, QUADRANTS_COLUMNS)
    for row in rows:
        for key in ("both", "drdrl_only", "cl_only", "neither"):
            row[key] = int(row[key])
        row["ar_drdrl_pct"] = float(row["ar_drdrl_pct"])
        row["ar_cl_pct"] = float(row["ar_cl_pct"])
    return rows


def write_curve_csv(path, report):
    with open(path, "w", newline="") as fh:
        fh.write(f"# format: {CURVE_FORMAT}\n")
        writer = csv.writer(fh)
        writer.writerow(["episode", "reward"])
        for episode, reward in enumerate(report.reward_curve):
            writer.writerow([episode, repr(float(reward))])


def _metric(cell, name):
    for m in cell.metrics:
        if m.metric == name:
            return m
    return None


def render_tables(summary: ComparisonSummary) -> str:
    """Text tables: ratio per metric by environment x agent kind, then the
    adaptability quadrant counts."""
    env_kinds = sorted({c.env_kind for c in summary.cells})
    agent_kinds = sorted({c.agent_kind for c in summary.cells})
    blocks = []
    for metric, label in (("episodes", "Episodes DR (%)"),
                          ("wall_time", "Time DR (%)"),
                          ("reward", "Reward IR (%)")):
        lines = [label, "-" * len(label)]
        header = f"{'':<14}" + "".join(f"{a:>12}" for a in agent_kinds)
        lines.append(header)
        for env in env_kinds:
            row = f"{env:<14}"
            for agent in agent_kinds:
                try:
                    m = _metric(summary.cell(env, agent), metric)
                except KeyError:
                    m = None
                if m is None or math.isnan(m.ratio_pct):
                    row += f"{'-':>12}"
                else:
                    mark = "*" if (not math.isnan(m.p_value)
                                   and m.p_value < 0.05) else ""
                    row += f"{m.ratio_pct:>11.2f}{mark or ' '}"
            lines.append(row)
        blocks.append("\n".join(lines))

    lines = ["Adaptability quadrants", "-" * 22]
    lines.append(f"{'cell':<24}{'both':>8}{'drdrl':>8}{'cl':>8}{'neither':>9}"
                 f"{'AR drdrl':>10}{'AR cl':>8}")
    for cell in summary.cells:
        q = cell.quadrants
        lines.append(
            f"{cell.env_kind + '/' + cell.agent_kind:<24}"
            f"{q.both:>8}{q.drdrl_only:>8}{q.cl_only:>8}{q.neither:>9}"
            f"{cell.ar_drdrl_pct:>9.1f}%{cell.ar_cl_pct:>7.1f}%")
    blocks.append("\n".join(lines))
    return ("\n\n".join(blocks)
            + "\n\n(* = Wilcoxon p < 0.05; DR > 0 and IR > 0 favor drdrl)\n")
