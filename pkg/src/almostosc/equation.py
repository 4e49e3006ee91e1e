"""Neutral second-order difference equations with a quasidifference.

The equation handled here is::

    Δ( r_n (Δ z_n)^γ ) + q_n x_{n+1}^α = e_n,    z_n = x_n + c x_{n-k},

with ``γ`` and ``α`` odd-ratio exponents, ``c >= 0`` and ``k >= 0``. The
quantity ``r_n (Δz_n)^γ`` is called the quasidifference (``qd`` below).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import _kernels
from .numerics import (
    Mode,
    NumericOverflowError,
    OddRatio,
    Value,
    as_mode,
    is_exact,
    odd_ratio_pow,
    odd_ratio_root,
    to_value,
)
from .seqlang import SeqExpr, as_expr, eval_seq, eval_seq_array, first_nonpositive, to_text

log = logging.getLogger(__name__)

DEFAULT_HORIZON = 1000
MAX_HORIZON = 10**6


class MissingIndexError(KeyError):
    pass


class NonPositiveCoefficientError(ValueError):
    def __init__(self, name: str, n: int):
        self.name = name
        self.n = n
        super().__init__(f"{name}_n is not positive at n={n}")


class InexactError(ArithmeticError):
    """Exact mode was requested but a power has no rational value."""


@dataclass(frozen=True)
class EquationSpec:
    r: SeqExpr
    q: SeqExpr
    e: SeqExpr
    c: Fraction = Fraction(0)
    k: int = 0
    gamma: OddRatio = OddRatio(1)
    alpha: OddRatio = OddRatio(1)

    def __post_init__(self):
        object.__setattr__(self, "r", as_expr(self.r))
        object.__setattr__(self, "q", as_expr(self.q))
        object.__setattr__(self, "e", as_expr(self.e))
        object.__setattr__(self, "c", to_value(self.c))
        object.__setattr__(self, "gamma", OddRatio.parse(self.gamma))
        object.__setattr__(self, "alpha", OddRatio.parse(self.alpha))
        if self.c < 0:
            raise ValueError(f"c must be nonnegative, got {self.c}")
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a nonnegative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def hypotheses_hold(self) -> bool:
        """``alpha > gamma >= 1``."""
        return self.alpha > self.gamma and self.gamma >= 1

    def hypothesis_violation(self, start: int = 1, stop: int = DEFAULT_HORIZON) -> str | None:
        """Describe the first violated standing hypothesis on ``[start, stop]``, if any."""
        if not self.gamma >= 1:
            return f"gamma >= 1 fails (gamma = {self.gamma})"
        if not self.alpha > self.gamma:
            return f"alpha > gamma fails (alpha = {self.alpha}, gamma = {self.gamma})"
        for name in ("r", "q", "e"):
            n = first_nonpositive(getattr(self, name), start, stop)
            if n is not None:
                return f"{name}_n > 0 fails at n = {n}"
        return None

    def coefficients(self, n: int, mode: Mode | str = Mode.EXACT) -> tuple[Value, Value, Value]:
        return (eval_seq(self.r, n, mode), eval_seq(self.q, n, mode), eval_seq(self.e, n, mode))

    def describe(self) -> dict:
        return {
            "r": to_text(self.r),
            "q": to_text(self.q),
            "e": to_text(self.e),
            "c": str(self.c),
            "k": self.k,
            "gamma": str(self.gamma),
            "alpha": str(self.alpha),
        }


@dataclass(frozen=True)
class InitialData:
    """Values ``x_{n0}, ..., x_{n0+k+1}``."""

    n0: int
    x_init: tuple

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError(f"n0 must be >= 1, got {self.n0}")
        object.__setattr__(self, "x_init", tuple(self.x_init))

    def validate(self, k: int) -> None:
        if len(self.x_init) != k + 2:
            raise ValueError(f"initial data needs k+2 = {k + 2} values, got {len(self.x_init)}")


class SeqWindow:
    """A finite stretch of a sequence, addressed by absolute index."""

    def __init__(self, start: int, values):
        self.start = int(start)
        self.values = np.asarray(values) if not isinstance(values, np.ndarray) else values
        self.values.setflags(write=False)

    @classmethod
    def from_function(cls, f, start: int, stop: int, mode: Mode | str = Mode.EXACT) -> "SeqWindow":
        vals = [to_value(f(n), mode) for n in range(start, stop + 1)]
        dtype = object if as_mode(mode) is Mode.EXACT else np.float64
        return cls(start, np.array(vals, dtype=dtype))

    @property
    def stop(self) -> int:
        return self.start + len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n: int):
        i = int(n) - self.start
        if i < 0 or i >= len(self.values):
            raise MissingIndexError(f"index {n} outside [{self.start}, {self.stop}]")
        return self.values[i]

    def __contains__(self, n) -> bool:
        return self.start <= n <= self.stop

    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop + 1)

    def span(self, a: int, b: int) -> np.ndarray:
        """Values for indices ``a..b`` inclusive."""
        self[a], self[b]
        return self.values[a - self.start : b - self.start + 1]

    def floats(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def __repr__(self):
        return f"SeqWindow(start={self.start}, len={len(self)})"


@dataclass(frozen=True)
class Trajectory:
    n0: int
    horizon: int
    mode: Mode
    x: SeqWindow
    z: SeqWindow
    dz: SeqWindow
    qd: SeqWindow
    max_residual: float = field(default=0.0)

    @property
    def interior(self) -> range:
        """Indices at which the equation itself can be evaluated."""
        return range(self.z.start, self.horizon)

    def to_csv(self) -> str:
        return trajectory_to_csv(self)


def _fmt(v) -> str:
    if is_exact(v):
        return str(v)
    return repr(float(v))


def trajectory_to_csv(traj: Trajectory) -> str:
    lines = ["n,x,z,dz,qd"]
    for n in range(traj.x.start, traj.x.stop + 1):
        row = [str(n), _fmt(traj.x[n])]
        row.append(_fmt(traj.z[n]) if n in traj.z else "")
        row.append(_fmt(traj.dz[n]) if n in traj.dz else "")
        row.append(_fmt(traj.qd[n]) if n in traj.qd else "")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _get(x, n):
    try:
        return x[n]
    except (KeyError, IndexError):
        raise MissingIndexError(f"window does not supply x_{n}") from None


def _coerce(v, mode: Mode):
    if mode is Mode.FLOAT:
        return float(v)
    return v if isinstance(v, float) else Fraction(v)


def quasidifference(spec: EquationSpec, x, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    """``r_n (Δz_n)^γ`` recomputed from the raw values of ``x``."""
    mode = as_mode(mode)
    c = _coerce(spec.c, mode)
    z0 = _coerce(_get(x, n), mode) + c * _coerce(_get(x, n - spec.k), mode)
    z1 = _coerce(_get(x, n + 1), mode) + c * _coerce(_get(x, n + 1 - spec.k), mode)
    return eval_seq(spec.r, n, mode) * odd_ratio_pow(z1 - z0, spec.gamma)


def residual(spec: EquationSpec, x: Mapping[int, Value] | SeqWindow, n: int,
             mode: Mode | str = Mode.EXACT) -> Value:
    """``Δ(r_n (Δz_n)^γ) + q_n x_{n+1}^α - e_n`` at index ``n``.

    ``x`` is anything indexable by absolute index (a dict, a
    :class:`SeqWindow`) and must supply ``x_{n-k}`` through ``x_{n+2}``.
    Zero exactly when the window satisfies the equation at ``n``.
    """
    mode = as_mode(mode)
    lhs = quasidifference(spec, x, n + 1, mode) - quasidifference(spec, x, n, mode)
    xa = odd_ratio_pow(_coerce(_get(x, n + 1), mode), spec.alpha)
    return lhs + eval_seq(spec.q, n, mode) * xa - eval_seq(spec.e, n, mode)


def telescoping_defect(spec: EquationSpec, traj: Trajectory, n2: int, n: int) -> Value:
    """``(qd_n - qd_{n2}) - Σ_{i=n2}^{n-1} (e_i - q_i x_{i+1}^α)``.

    The quasidifferences are recomputed from ``x`` rather than read from the
    trajectory, so a zero result is a genuine check of the recursion.
    """
    mode = traj.mode
    total = Fraction(0) if mode is Mode.EXACT else 0.0
    for i in range(n2, n):
        total += eval_seq(spec.e, i, mode) - eval_seq(spec.q, i, mode) * odd_ratio_pow(traj.x[i + 1], spec.alpha)
    jump = quasidifference(spec, traj.x, n, mode) - quasidifference(spec, traj.x, n2, mode)
    return jump - total


def _residual_scale(spec, traj, n, mode):
    qd1 = quasidifference(spec, traj.x, n + 1, mode)
    qd0 = quasidifference(spec, traj.x, n, mode)
    qx = eval_seq(spec.q, n, mode) * odd_ratio_pow(traj.x[n + 1], spec.alpha)
    return max(abs(float(qd1)), abs(float(qd0)), abs(float(qx)), abs(float(eval_seq(spec.e, n, mode))))


def residuals(spec: EquationSpec, traj: Trajectory) -> np.ndarray:
    """Residual at every interior index of ``traj`` (object array in exact mode)."""
    if traj.mode is Mode.EXACT:
        return np.array([residual(spec, traj.x, n, Mode.EXACT) for n in traj.interior], dtype=object)
    ns = np.arange(traj.n0, traj.horizon + 2)
    x = traj.x.floats()
    k = spec.k
    c = float(spec.c)
    g, a = spec.gamma.value(), spec.alpha.value()
    z = x[k:] + c * x[: len(x) - k]
    dz = np.diff(z)
    r = eval_seq_array(spec.r, ns[k : k + len(dz)])
    qd = r * np.sign(dz) * np.abs(dz) ** g
    m = len(qd) - 1
    idx = ns[k : k + m]
    xa = np.sign(x[k + 1 : k + 1 + m]) * np.abs(x[k + 1 : k + 1 + m]) ** a
    return np.diff(qd) + eval_seq_array(spec.q, idx) * xa - eval_seq_array(spec.e, idx)


def max_relative_residual(spec: EquationSpec, traj: Trajectory) -> float:
    """Largest ``|residual| / (1 + term magnitude)`` over the interior (0 for exact zeros)."""
    res = residuals(spec, traj)
    if res.size == 0:
        return 0.0
    worst = 0.0
    if traj.mode is Mode.EXACT:
        for n, v in zip(traj.interior, res):
            if v != 0:
                worst = max(worst, abs(float(v)) / (1.0 + _residual_scale(spec, traj, n, Mode.EXACT)))
        return worst
    for n in np.flatnonzero(np.abs(res) > 0):
        idx = traj.z.start + int(n)
        worst = max(worst, abs(float(res[n])) / (1.0 + _residual_scale(spec, traj, idx, Mode.FLOAT)))
    return worst


def simulate(spec: EquationSpec, init: InitialData, horizon: int = DEFAULT_HORIZON,
             mode: Mode | str = Mode.EXACT, allow_float_fallback: bool = False,
             check: bool = True) -> Trajectory:
    """Run the forward recursion from ``init`` up to index ``horizon``.

    The returned trajectory holds ``x`` on ``[n0, horizon+1]``, ``z`` on
    ``[n0+k, horizon+1]`` and ``dz``/``qd`` on ``[n0+k, horizon]``.

    In exact mode every step must stay rational; if a root is irrational,
    :class:`InexactError` is raised unless ``allow_float_fallback`` is set,
    in which case the whole run is redone in float mode.
    """
    mode = as_mode(mode)
    init.validate(spec.k)
    n0, k = init.n0, spec.k
    if horizon > MAX_HORIZON:
        raise ValueError(f"horizon {horizon} exceeds the maximum {MAX_HORIZON}")
    if horizon <= n0 + k + 1:
        raise ValueError(f"horizon must exceed n0 + k + 1 = {n0 + k + 1}")
    for name in ("q", "e"):
        bad = first_nonpositive(getattr(spec, name), n0, horizon)
        if bad is not None:
            log.warning("%s_n is not positive at n=%d; simulating anyway", name, bad)

    if mode is Mode.EXACT:
        try:
            traj = _simulate_exact(spec, init, horizon)
        except InexactError:
            if not allow_float_fallback:
                raise
            log.warning("exact simulation hit an irrational root; redoing in float mode")
            return simulate(spec, init, horizon, Mode.FLOAT, check=check)
    else:
        traj = _simulate_float(spec, init, horizon)
    if check:
        traj = replace(traj, max_residual=max_relative_residual(spec, traj))
    return traj


def _exact_only(v: Value, what: str, n: int) -> Fraction:
    if not is_exact(v):
        raise InexactError(f"{what} is irrational at n={n}")
    return v


def _simulate_exact(spec, init, horizon):
    n0, k = init.n0, spec.k
    c = spec.c
    x = {n0 + i: to_value(v, Mode.EXACT) for i, v in enumerate(init.x_init)}
    z, dz, qd = {}, {}, {}
    for m in (n0 + k, n0 + k + 1):
        z[m] = x[m] + c * x[m - k]
    start = n0 + k
    dz[start] = z[start + 1] - z[start]
    r0 = eval_seq(spec.r, start)
    if r0 <= 0:
        raise NonPositiveCoefficientError("r", start)
    qd[start] = r0 * _exact_only(odd_ratio_pow(dz[start], spec.gamma), "(Δz)^γ", start)
    for n in range(start, horizon):
        xa = _exact_only(odd_ratio_pow(x[n + 1], spec.alpha), "x^α", n + 1)
        qd[n + 1] = qd[n] + eval_seq(spec.e, n) - eval_seq(spec.q, n) * xa
        rn = eval_seq(spec.r, n + 1)
        if rn <= 0:
            raise NonPositiveCoefficientError("r", n + 1)
        dz[n + 1] = _exact_only(odd_ratio_root(qd[n + 1] / rn, spec.gamma), "root of qd/r", n + 1)
        z[n + 2] = z[n + 1] + dz[n + 1]
        x[n + 2] = z[n + 2] / (1 + c) if k == 0 else z[n + 2] - c * x[n + 2 - k]

    def win(d, a, b):
        return SeqWindow(a, np.array([d[m] for m in range(a, b + 1)], dtype=object))

    return Trajectory(n0, horizon, Mode.EXACT,
                      win(x, n0, horizon + 1), win(z, start, horizon + 1),
                      win(dz, start, horizon), win(qd, start, horizon))


def _simulate_float(spec, init, horizon):
    n0, k = init.n0, spec.k
    ns = np.arange(n0, horizon + 2)
    r = eval_seq_array(spec.r, ns)
    q = eval_seq_array(spec.q, ns)
    e = eval_seq_array(spec.e, ns)
    x0 = np.array([float(to_value(v, Mode.FLOAT)) for v in init.x_init])
    x, z, dz, qd, status, pos = _kernels.simulate_float(
        r, q, e, float(spec.c), k, spec.gamma.value(), spec.alpha.value(), x0)
    if status == _kernels.NONPOSITIVE_R:
        raise NonPositiveCoefficientError("r", n0 + int(pos))
    if status == _kernels.OVERFLOW:
        raise NumericOverflowError(f"trajectory overflowed at n={n0 + int(pos)}")
    start = n0 + k
    last = len(ns) - 1
    return Trajectory(n0, horizon, Mode.FLOAT,
                      SeqWindow(n0, x), SeqWindow(start, z[k:]),
                      SeqWindow(start, dz[k:last]), SeqWindow(start, qd[k:last]))


def closed_form_window(expr: SeqExpr, start: int, stop: int, mode: Mode | str = Mode.EXACT) -> SeqWindow:
    """Evaluate a closed-form candidate solution on ``[start, stop]``."""
    mode = as_mode(mode)
    if mode is Mode.FLOAT:
        return SeqWindow(start, eval_seq_array(expr, np.arange(start, stop + 1)))
    return SeqWindow(start, np.array([eval_seq(expr, n) for n in range(start, stop + 1)], dtype=object))


def initial_data_from(expr: SeqExpr, n0: int, k: int) -> InitialData:
    return InitialData(n0, tuple(eval_seq(expr, n) for n in range(n0, n0 + k + 2)))


__all__ = [
    "EquationSpec",
    "InitialData",
    "SeqWindow",
    "Trajectory",
    "residual",
    "residuals",
    "simulate",
    "telescoping_defect",
    "quasidifference",
    "trajectory_to_csv",
    "closed_form_window",
    "initial_data_from",
    "max_relative_residual",
    "MissingIndexError",
    "NonPositiveCoefficientError",
    "InexactError",
]
