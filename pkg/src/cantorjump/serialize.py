"""Text forms (CSV and JSON payloads) shared by the CLI and tests.

All emitters are deterministic: floats are written with repr (shortest
round-trip form), rows follow the bit-pattern index order of the words, and
no timestamps or environment data are included, so equal inputs produce
byte-identical output.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .analysis import MixingReport, MomentCurve
from .generator import GeneratorMatrix, TransitionKernel
from .simulate import PathSample
from .words import Word


def word_labels(n: int) -> list[str]:
    """The 2**n level-n word strings in bit-pattern index order."""
    if n == 0:
        return [""]
    return [format(i, f"0{n}b") for i in range(1 << n)]


def _fmt(x: float) -> str:
    return repr(float(x))


def matrix_csv(entries: np.ndarray, n: int) -> str:
    """Row-major CSV with a header row of level-n word strings."""
    lines = [",".join(word_labels(n))]
    for row in entries:
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def generator_payload(g: GeneratorMatrix) -> dict:
    return {
        "level": g.level,
        "gamma": g.params.gamma,
        "theta": g.params.theta,
        "entries": [[float(x) for x in row] for row in g.entries],
    }


def kernel_payload(k: TransitionKernel) -> dict:
    return {
        "level": k.level,
        "t": k.time,
        "gamma": k.params.gamma,
        "theta": k.params.theta,
        "entries": [[float(x) for x in row] for row in k.entries],
    }


def eigenvalues_csv(lams: Iterable[float]) -> str:
    lines = ["m,lambda_m"]
    for m, lam in enumerate(lams):
        lines.append(f"{m},{_fmt(lam)}")
    return "\n".join(lines) + "\n"


def eigenvalues_payload(lams: Iterable[float]) -> dict:
    return {"eigenvalues": [float(x) for x in lams]}


def path_csv(path: PathSample) -> str:
    """Event rows time,level,state; row 0 is (0, -, start word)."""
    lines = ["time,level,state", f"0,-,{path.start}"]
    for e in path.events:
        lines.append(f"{_fmt(e.time)},{e.level},{e.state}")
    return "\n".join(lines) + "\n"


def path_payload(path: PathSample) -> dict:
    return {
        "start": str(path.start),
        "horizon": path.horizon,
        "depth": path.depth,
        "events": [
            {"time": e.time, "level": e.level, "state": str(e.state)}
            for e in path.events
        ],
    }


def frequency_csv(freq: np.ndarray, n: int) -> str:
    """word,frequency rows over the level-n words, index order."""
    labels = word_labels(n)
    lines = ["word,frequency"]
    for label, f in zip(labels, freq):
        lines.append(f"{label},{_fmt(f)}")
    return "\n".join(lines) + "\n"


def frequency_payload(freq: np.ndarray, n: int, words: list[Word] | None = None) -> dict:
    labels = [str(w) for w in words] if words is not None else word_labels(n)
    return {
        "frequencies": [
            {"word": label, "frequency": float(f)} for label, f in zip(labels, freq)
        ]
    }


def mixing_csv(report: MixingReport) -> str:
    """n,t,tv,bound,pass rows across all curves of the report."""
    lines = ["n,t,tv,bound,pass"]
    for curve in report.curves:
        for t, tv in curve.points:
            bound = report.bound(t)
            ok = "true" if tv <= bound else "false"
            lines.append(f"{curve.level},{_fmt(t)},{_fmt(tv)},{_fmt(bound)},{ok}")
    return "\n".join(lines) + "\n"


def mixing_payload(report: MixingReport) -> dict:
    return {
        "curves": [
            {
                "level": curve.level,
                "points": [{"t": t, "tv": tv} for t, tv in curve.points],
            }
            for curve in report.curves
        ],
        "violations": [
            {"n": n, "t": t, "tv": tv, "bound": bound}
            for n, t, tv, bound in report.violations
        ],
        "level_one_residuals": [
            {"t": t, "beta": beta, "bound": bound}
            for t, beta, bound in report.residuals
        ],
        "passed": report.passed,
    }


def moment_csv(curve: MomentCurve) -> str:
    """r,t,M_r,truncation_K,tail_bound rows."""
    lines = ["r,t,M_r,truncation_K,tail_bound"]
    for t, m in curve.points:
        lines.append(
            f"{_fmt(curve.r)},{_fmt(t)},{_fmt(m)},{curve.truncation},{_fmt(curve.tail_bound)}"
        )
    return "\n".join(lines) + "\n"


def moment_payload(curve: MomentCurve) -> dict:
    return {
        "r": curve.r,
        "truncation_K": curve.truncation,
        "tail_bound": curve.tail_bound,
        "points": [{"t": t, "M_r": m} for t, m in curve.points],
    }
