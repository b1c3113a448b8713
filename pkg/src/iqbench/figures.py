"""Figure rendering for the report paths.

Every report-producing subcommand drops a PNG next to its CSVs unless
figures are switched off.  The CSVs remain the machine-readable contract;
figures are rendered from the same in-memory results.
"""
from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be pinned first

from .altmeasures import ComplexityTermSeries, SeparationReport
from .fatal import AuditFinding
from .metrics import ConvergenceSeries, IqReport


def _save(fig, path) -> None:
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_eval_figure(report: IqReport, path, threshold: float = 0.7) -> None:
    values = [float(v) for _, v in report.per_world]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(values, bins=min(20, max(5, len(values) // 5)), color="#4878d0",
            edgecolor="white")
    ax.axvline(float(report.estimate), color="#d65f5f", lw=2,
               label=f"IQ = {float(report.estimate):.4f}")
    ax.axvline(threshold, color="#555555", ls="--", lw=1, label=f"threshold {threshold}")
    ax.set_xlabel("per-world success")
    ax.set_ylabel("worlds")
    ax.set_title(f"{report.params.agent or 'agent'}: IQ over {report.params.suite_size} worlds")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_compare_figure(reports: Sequence[IqReport], path, threshold: float = 0.7) -> None:
    names = [r.params.agent or f"agent{i}" for i, r in enumerate(reports)]
    estimates = [float(r.estimate) for r in reports]
    errors = [1.96 * r.stderr for r in reports]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(names, estimates, yerr=errors, capsize=4, color="#4878d0")
    ax.axhline(threshold, color="#555555", ls="--", lw=1, label=f"threshold {threshold}")
    ax.axhline(0.5, color="#d65f5f", ls=":", lw=1, label="oblivious baseline 1/2")
    ax.set_ylabel("IQ estimate (95% CI)")
    ax.set_ylim(0, 1)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def render_series_figure(series: ConvergenceSeries, limits: tuple, path,
                         title: str = "limit IQ series") -> None:
    means = [float(m) for m in series.running_means]
    lower, upper, new_iq = (float(x) for x in limits)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(means) + 1), means, marker="o", ms=3, color="#4878d0",
            label="running mean")
    ax.axhline(lower, color="#6acc64", ls="--", lw=1, label=f"lower {lower:.3f}")
    ax.axhline(upper, color="#d65f5f", ls="--", lw=1, label=f"upper {upper:.3f}")
    ax.axhline(new_iq, color="#555555", lw=1, label=f"new IQ {new_iq:.3f}")
    ax.set_xlabel("lives")
    ax.set_ylabel("mean success")
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_terms_figure(series: ComplexityTermSeries, path) -> None:
    cs = [row.c for row in series.rows]
    terms = [row.log2_term for row in series.rows]
    finite = [t if math.isfinite(t) else None for t in terms]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(cs, finite, marker="o", color="#d65f5f")
    ax.set_xlabel("world complexity (machine states)")
    ax.set_ylabel("log2 term")
    ax.set_title("naive universal sum: per-complexity terms diverge")
    fig.tight_layout()
    _save(fig, path)


def render_separation_figure(report: SeparationReport, path) -> None:
    measures = sorted({row.measure for row in report.rows})
    agents = []
    for row in report.rows:
        if row.agent not in agents:
            agents.append(row.agent)
    fig, axes = plt.subplots(1, len(measures), figsize=(4 * len(measures), 4), sharey=False)
    if len(measures) == 1:
        axes = [axes]
    for ax, measure in zip(axes, measures):
        values = [next(r.value for r in report.rows
                       if r.agent == a and r.measure == measure) for a in agents]
        ax.bar(agents, values, color="#4878d0")
        ax.set_title(measure)
        ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    _save(fig, path)


def render_audit_figure(anticipated: Sequence[float], findings: Sequence[AuditFinding],
                        path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(len(anticipated)), anticipated, color="#4878d0", lw=1,
            label="anticipated final success")
    for f in findings:
        ax.axvline(f.step + 1, color="#d65f5f", lw=1, alpha=0.7)
    if findings:
        ax.plot([], [], color="#d65f5f", label="fatal steps")
    ax.set_xlabel("big step")
    ax.set_ylabel("anticipated success")
    ax.set_ylim(-0.05, 1.05)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
