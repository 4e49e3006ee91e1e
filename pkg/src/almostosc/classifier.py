"""Finite-window evidence for the branches of almost oscillation.

A solution is almost oscillatory when ``x`` oscillates, or ``Δx``
oscillates, or ``x -> 0``. None of this can be decided from finitely many
terms, so every function here reports *evidence* over a window together
with the raw statistics it was derived from.

Sign changes follow the non-strict convention: index ``m`` is recorded
whenever ``x_m * x_{m+1} <= 0``, so an exact zero counts.
"""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .equation import SeqWindow, Trajectory

#: default tolerance on the tail maximum of ``|x|`` for the tends-to-zero test
DEFAULT_ZERO_TOL = 0.02


class WindowTooShortError(ValueError):
    pass


class Tag(str, enum.Enum):
    X_OSCILLATORY = "XOscillatoryEvidence"
    DX_OSCILLATORY = "DeltaXOscillatoryEvidence"
    TENDS_TO_ZERO = "TendsToZeroEvidence"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class WindowReport:
    kind: str
    window: tuple[int, int]
    sign_changes: tuple[int, ...]
    max_gap: int | None
    tail_max_abs: float
    quarter_max_abs: tuple[float, ...]
    quarters_nonincreasing: bool
    evidence: bool
    thresholds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["sign_changes"] = list(self.sign_changes)
        d["quarter_max_abs"] = list(self.quarter_max_abs)
        return d


@dataclass(frozen=True)
class Verdict:
    tag: Tag
    reports: dict

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "reports": {k: v.to_dict() for k, v in self.reports.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _values(seq, a: int, b: int):
    if isinstance(seq, SeqWindow):
        return list(seq.span(a, b))
    return [seq[n] for n in range(a, b + 1)]


def _signs(values) -> np.ndarray:
    return np.array([int(v > 0) - int(v < 0) for v in values], dtype=np.int64)


def _window_stats(values, a: int, b: int):
    signs = _signs(values)
    changes = tuple(int(a + m) for m in _kernels.sign_changes(signs))
    if changes:
        # the lead-in from the window start counts as a gap, so a single
        # late crossing is not mistaken for sustained oscillation
        gaps = np.diff(np.array((a,) + changes))
        max_gap = int(gaps.max())
    else:
        max_gap = None
    mags = np.abs(np.array([float(v) for v in values]))
    quarters = tuple(float(part.max()) for part in np.array_split(mags, 4))
    nonincreasing = all(quarters[i + 1] <= quarters[i] for i in range(3))
    return changes, max_gap, quarters, nonincreasing


def _check_window(window, minimum: int) -> tuple[int, int]:
    a, b = int(window[0]), int(window[1])
    if b - a + 1 < minimum:
        raise WindowTooShortError(f"window [{a}, {b}] is shorter than {minimum}")
    return a, b


def oscillation_report(seq, window: tuple[int, int], gap_bound: float | None = None) -> WindowReport:
    """Sign-change report for ``seq`` on the inclusive ``window``.

    Evidence of oscillation requires the last sign change to fall in the
    final quarter of the window and no gap between changes (counting the
    lead-in from the window start) to exceed ``gap_bound``, which defaults
    to one eighth of the window length.
    """
    a, b = _check_window(window, 4)
    length = b - a + 1
    bound = length / 8 if gap_bound is None else gap_bound
    values = _values(seq, a, b)
    changes, max_gap, quarters, nonincreasing = _window_stats(values, a, b)
    evidence = bool(changes) and changes[-1] >= b - length / 4 and max_gap <= bound
    return WindowReport(
        kind="oscillation",
        window=(a, b),
        sign_changes=changes,
        max_gap=max_gap,
        tail_max_abs=quarters[-1],
        quarter_max_abs=quarters,
        quarters_nonincreasing=nonincreasing,
        evidence=bool(evidence),
        thresholds={"gap_bound": bound, "final_quarter_from": b - length / 4},
    )


def tends_to_zero_report(seq, window: tuple[int, int], tol: float = DEFAULT_ZERO_TOL) -> WindowReport:
    """Evidence that ``seq`` decays to zero.

    Set when the maximum of ``|x|`` over the final quarter is below ``tol``
    and the quarter-wise maxima never increase.
    """
    a, b = _check_window(window, 8)
    values = _values(seq, a, b)
    changes, max_gap, quarters, nonincreasing = _window_stats(values, a, b)
    return WindowReport(
        kind="tends_to_zero",
        window=(a, b),
        sign_changes=changes,
        max_gap=max_gap,
        tail_max_abs=quarters[-1],
        quarter_max_abs=quarters,
        quarters_nonincreasing=nonincreasing,
        evidence=bool(quarters[-1] < tol and nonincreasing),
        thresholds={"tol": tol},
    )


def differences(x, a: int, b: int) -> SeqWindow:
    """``Δx_n = x_{n+1} - x_n`` for ``n`` in ``[a, b]``."""
    vals = _values(x, a, b + 1)
    diffs = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    dtype = np.float64 if all(isinstance(v, float) for v in diffs) else object
    return SeqWindow(a, np.array(diffs, dtype=dtype))


def classify_almost_oscillatory(traj: Trajectory | SeqWindow, window: tuple[int, int] | None = None,
                                tol: float = DEFAULT_ZERO_TOL,
                                gap_bound: float | None = None) -> Verdict:
    """Tag a trajectory with the first branch that shows evidence.

    The order is fixed: ``x`` oscillatory, then ``Δx`` oscillatory, then
    tends to zero, else inconclusive. All three reports are attached
    whichever tag wins. ``x`` must extend one index past the window.
    """
    x = traj.x if isinstance(traj, Trajectory) else traj
    if window is None:
        window = (x.start, x.stop - 1)
    a, b = int(window[0]), int(window[1])
    dx = differences(x, a, b)
    reports = {
        "x_oscillation": oscillation_report(x, (a, b), gap_bound),
        "dx_oscillation": oscillation_report(dx, (a, b), gap_bound),
        "tends_to_zero": tends_to_zero_report(x, (a, b), tol),
    }
    if reports["x_oscillation"].evidence:
        tag = Tag.X_OSCILLATORY
    elif reports["dx_oscillation"].evidence:
        tag = Tag.DX_OSCILLATORY
    elif reports["tends_to_zero"].evidence:
        tag = Tag.TENDS_TO_ZERO
    else:
        tag = Tag.INCONCLUSIVE
    return Verdict(tag, reports)
