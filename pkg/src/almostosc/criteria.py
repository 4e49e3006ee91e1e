"""Almost-oscillation criteria and the Riccati diagnostic.

The criterion asks for a positive weight sequence ``p`` such that

* ``S1(n) = Σ_{i<=n} (p_i Q_i - R (Δp_i)^2 / (4 p_i))`` has ``limsup = ∞``
  (``Q_i = min(Q*_i, Q**_i)``, ``R`` a bound on ``r``), and
* ``S2(n) = Σ_{i<=n} Σ_{j<i} (M q_j ± e_j)^{1/γ}`` diverges for both signs.

Divergence cannot be observed from a finite table, so the series reports
carry the raw partial sums plus a heuristic verdict with fixed thresholds.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .equation import EquationSpec, Trajectory
from .numerics import (
    DEFAULT_ATOL,
    Mode,
    OddRatio,
    Value,
    as_mode,
    is_exact,
    odd_ratio_pow,
    pos_pow,
    to_value,
)
from .seqlang import SeqExpr, as_expr, eval_seq, eval_seq_array, first_nonpositive, to_text

DIVERGENCE_ABS_THRESHOLD = 1.0
DIVERGENCE_SLOPE_THRESHOLD = 1e-3
BOUNDED_REL_THRESHOLD = 1e-6


class HypothesisError(ValueError):
    """A standing hypothesis of the criterion is violated."""


class Verdict(str, enum.Enum):
    DIVERGENT = "DivergentEvidence"
    BOUNDED = "BoundedEvidence"
    INCONCLUSIVE = "Inconclusive"


# --- minimum of the shifted objective, power difference inequality ---


def _check_exponents(alpha: OddRatio, gamma: OddRatio) -> None:
    if not (alpha > gamma and gamma >= 1):
        raise HypothesisError(f"need alpha > gamma >= 1, got alpha={alpha}, gamma={gamma}")


def shifted_objective(x, a: float, b: float, alpha: OddRatio, gamma: OddRatio):
    """``F(x) = a x^(α-γ) + b / x^γ`` for ``x > 0`` (numpy-aware)."""
    g, al = gamma.value(), alpha.value()
    return a * x ** (al - g) + b / x ** g


def f_min(a: float, b: float, alpha: OddRatio, gamma: OddRatio) -> float:
    """Minimum over ``x > 0`` of ``a x^(α-γ) + b/x^γ`` in closed form."""
    alpha, gamma = OddRatio.parse(alpha), OddRatio.parse(gamma)
    _check_exponents(alpha, gamma)
    if a < 0 or b < 0:
        raise HypothesisError(f"need a >= 0 and b >= 0, got a={a}, b={b}")
    t = gamma.value() / alpha.value()
    diff = alpha.value() - gamma.value()
    num = alpha.value() * float(a) ** t * float(b) ** (1 - t)
    return num / (gamma.value() ** t * diff ** (1 - t))


def check_lemma2(x: Value, y: Value, gamma: OddRatio, atol: float = DEFAULT_ATOL) -> bool:
    """Whether ``x^γ - y^γ >= (x - y)^γ`` holds for ``x >= y >= 0``.

    Exact for rational inputs with integer ``γ``; float comparisons allow a
    slack of ``atol * (1 + x^γ)``.
    """
    gamma = OddRatio.parse(gamma)
    if gamma < 1:
        raise HypothesisError(f"need gamma >= 1, got {gamma}")
    if y < 0 or x < y:
        raise HypothesisError(f"need x >= y >= 0, got x={x}, y={y}")
    lhs = odd_ratio_pow(x, gamma) - odd_ratio_pow(y, gamma)
    rhs = odd_ratio_pow(x - y, gamma)
    if is_exact(lhs) and is_exact(rhs):
        return lhs >= rhs
    return float(lhs) - float(rhs) >= -atol * (1.0 + abs(float(odd_ratio_pow(x, gamma))))


def riccati_g(spec: EquationSpec, n: int, x: float) -> float:
    """``q_n x^(α-γ)/(1+c)^α - e_n/x^γ``, increasing in ``x > 0``."""
    _, q, e = spec.coefficients(n, Mode.FLOAT)
    g, al = spec.gamma.value(), spec.alpha.value()
    return q * x ** (al - g) / (1 + float(spec.c)) ** al - e / x ** g


# --- Q sequences ---------------------------------------------------------


def q_star(spec: EquationSpec, d: Value, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    """``d^(α-γ) q_n / (1+c)^α - d^(-γ) e_n``; may be negative."""
    mode = as_mode(mode)
    _check_exponents(spec.alpha, spec.gamma)
    d = to_value(d, mode)
    if d <= 0:
        raise HypothesisError(f"d must be positive, got {d}")
    q = eval_seq(spec.q, n, mode)
    e = eval_seq(spec.e, n, mode)
    a, g = spec.alpha.fraction(), spec.gamma.fraction()
    one_c = 1 + to_value(spec.c, mode)
    return pos_pow(d, a - g) * q / pos_pow(one_c, a) - pos_pow(d, -g) * e


def q_dstar(spec: EquationSpec, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    """Closed-form minimum of the shifted objective, nonnegative."""
    mode = as_mode(mode)
    _check_exponents(spec.alpha, spec.gamma)
    q = eval_seq(spec.q, n, mode)
    e = eval_seq(spec.e, n, mode)
    if q < 0 or e < 0:
        raise HypothesisError(f"q_n and e_n must be nonnegative, got q={q}, e={e} at n={n}")
    a, g = spec.alpha.fraction(), spec.gamma.fraction()
    one_c = 1 + to_value(spec.c, mode)
    # one radicand, so a rational result stays exact
    base = pos_pow(q, g) * pos_pow(e, a - g) / (pos_pow(to_value(g, mode), g) * pos_pow(to_value(a - g, mode), a - g))
    return to_value(a, mode) * pos_pow(base, 1 / a) / pos_pow(one_c, g)


def q_min(spec: EquationSpec, d: Value, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    return min(q_star(spec, d, n, mode), q_dstar(spec, n, mode))


def q_star_array(spec: EquationSpec, d: float, ns) -> np.ndarray:
    ns = np.asarray(ns)
    a, g = spec.alpha.value(), spec.gamma.value()
    q = eval_seq_array(spec.q, ns)
    e = eval_seq_array(spec.e, ns)
    return d ** (a - g) * q / (1 + float(spec.c)) ** a - d ** (-g) * e


def q_dstar_array(spec: EquationSpec, ns) -> np.ndarray:
    ns = np.asarray(ns)
    a, g = spec.alpha.value(), spec.gamma.value()
    t = g / a
    q = eval_seq_array(spec.q, ns)
    e = eval_seq_array(spec.e, ns)
    den = g ** t * (a - g) ** (1 - t) * (1 + float(spec.c)) ** g
    return a * q ** t * e ** (1 - t) / den


# --- parameters and reports --------------------------------------------


@dataclass(frozen=True)
class CriterionParams:
    """Weight sequence ``p`` and the constants ``d``, ``M``, ``R``.

    ``R=None`` means: use the maximum of ``r_n`` over the working window.
    ``defaulted`` lists the constants that were not chosen by the user.
    """

    p: SeqExpr = field(default_factory=lambda: as_expr("1"))
    d: Value = Fraction(1)
    M: Value = Fraction(1)
    R: Value | None = None
    defaulted: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "p", as_expr(self.p))
        object.__setattr__(self, "d", to_value(self.d))
        object.__setattr__(self, "M", to_value(self.M))
        if self.R is not None:
            object.__setattr__(self, "R", to_value(self.R))
        if self.d <= 0:
            raise HypothesisError(f"d must be positive, got {self.d}")
        if self.M <= 0:
            raise HypothesisError(f"M must be positive, got {self.M}")
        if self.R is not None and self.R <= 0:
            raise HypothesisError(f"R must be positive, got {self.R}")
        object.__setattr__(self, "defaulted", frozenset(self.defaulted))


def default_d(traj: Trajectory, indices: Iterable[int]) -> Value | None:
    """Smallest ``z_{n+1}`` over ``indices``; ``None`` if it is not positive."""
    vals = [traj.z[n + 1] for n in indices if (n + 1) in traj.z]
    if not vals:
        return None
    d = min(vals)
    return d if d > 0 else None


def default_m(traj: Trajectory, alpha: OddRatio, tail: int = 10) -> Value:
    """``(tail minimum of x)^α`` for a positive decreasing tail, else 1."""
    x = list(traj.x.values[-tail:])
    if len(x) >= 2 and all(v > 0 for v in x) and all(x[i + 1] < x[i] for i in range(len(x) - 1)):
        return odd_ratio_pow(min(x), alpha)
    return Fraction(1)


@dataclass(frozen=True)
class CriterionReport:
    name: str
    ns: np.ndarray
    S: np.ndarray
    verdict: Verdict
    last: float
    slope: float
    loglog_slope: float | None
    meta: dict = field(default_factory=dict)

    def value_at(self, n: int) -> float:
        return float(self.S[int(n) - int(self.ns[0])])

    def to_dict(self, table: bool = True) -> dict:
        d = {
            "name": self.name,
            "verdict": self.verdict.value,
            "last": self.last,
            "slope": self.slope,
            "loglog_slope": self.loglog_slope,
            "meta": self.meta,
        }
        if table:
            d["n"] = [int(v) for v in self.ns]
            d["S"] = [float(v) for v in self.S]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        rows = ["n,S"] + [f"{int(n)},{float(s)!r}" for n, s in zip(self.ns, self.S)]
        return "\n".join(rows) + "\n"


def divergence_verdict(ns, S, abs_threshold: float = DIVERGENCE_ABS_THRESHOLD,
                       slope_threshold: float = DIVERGENCE_SLOPE_THRESHOLD):
    """Heuristic verdict plus (slope, log-log slope) over the final half."""
    ns = np.asarray(ns, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    half = len(S) // 2
    tail_n, tail_s = ns[half:], S[half:]
    slope = float(np.polyfit(tail_n, tail_s, 1)[0]) if len(tail_s) >= 2 else 0.0
    pos = (tail_s > 0) & (tail_n > 0)
    loglog = None
    if pos.sum() >= 2:
        loglog = float(np.polyfit(np.log(tail_n[pos]), np.log(tail_s[pos]), 1)[0])
    s_end, s_mid = float(S[-1]), float(S[half - 1] if half >= 1 else S[0])
    if s_end > s_mid + abs_threshold and slope > slope_threshold:
        verdict = Verdict.DIVERGENT
    elif s_end - s_mid < BOUNDED_REL_THRESHOLD * (1 + abs(s_end)):
        verdict = Verdict.BOUNDED
    else:
        verdict = Verdict.INCONCLUSIVE
    return verdict, slope, loglog


def _require(spec: EquationSpec, stop: int) -> None:
    problem = spec.hypothesis_violation(1, stop)
    if problem:
        raise HypothesisError(problem)


def _report(name, ns, S, meta):
    verdict, slope, loglog = divergence_verdict(ns, S)
    return CriterionReport(name, ns, S, verdict, float(S[-1]), slope, loglog, meta)


def criterion1_series(spec: EquationSpec, params: CriterionParams, N: int) -> CriterionReport:
    """Partial sums ``S1(n)`` for ``n = 1..N``."""
    if N < 2:
        raise ValueError("N must be at least 2")
    _require(spec, N + 1)
    bad = first_nonpositive(params.p, 1, N + 1)
    if bad is not None:
        raise HypothesisError(f"p_n > 0 fails at n = {bad}")
    ns = np.arange(1, N + 1)
    r_max = float(eval_seq_array(spec.r, np.arange(1, N + 2)).max())
    if params.R is None:
        R = r_max
    else:
        R = float(params.R)
        if R < r_max:
            raise HypothesisError(f"r_n <= R fails: max r_n = {r_max} exceeds R = {R}")
    d = float(params.d)
    Q = np.minimum(q_star_array(spec, d, ns), q_dstar_array(spec, ns))
    p = eval_seq_array(params.p, np.arange(1, N + 2))
    dp = np.diff(p)
    terms = p[:-1] * Q - R * dp ** 2 / (4 * p[:-1])
    S = np.cumsum(terms)
    meta = {"p": to_text(params.p), "d": d, "R": R, "defaulted": sorted(params.defaulted)}
    return _report("s1", ns, S, meta)


def criterion2_series(spec: EquationSpec, params: CriterionParams, sign: str, N: int) -> CriterionReport:
    """Partial sums ``S2(n) = Σ_{i<=n} Σ_{j<i} (M q_j ± e_j)^{1/γ}``.

    Negative inner values go through the odd real root unchanged.
    """
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    if N < 2:
        raise ValueError("N must be at least 2")
    _require(spec, N + 1)
    ns = np.arange(1, N + 1)
    M = float(params.M)
    q = eval_seq_array(spec.q, ns)
    e = eval_seq_array(spec.e, ns)
    inner = M * q + e if sign == "plus" else M * q - e
    t = np.sign(inner) * np.abs(inner) ** (1.0 / spec.gamma.value())
    S = _kernels.double_prefix(t)
    meta = {"sign": sign, "M": M, "defaulted": sorted(params.defaulted)}
    return _report(f"s2_{sign}", ns, S, meta)


def conjunction(verdicts: Iterable[Verdict]) -> Verdict:
    """Divergent only if all are; bounded if any is."""
    verdicts = list(verdicts)
    if all(v is Verdict.DIVERGENT for v in verdicts):
        return Verdict.DIVERGENT
    if any(v is Verdict.BOUNDED for v in verdicts):
        return Verdict.BOUNDED
    return Verdict.INCONCLUSIVE


# --- Riccati diagnostic ------------------------------------------------------


class RiccatiDomainError(ZeroDivisionError):
    pass


def riccati_w(spec: EquationSpec, traj: Trajectory, p: SeqExpr, n: int) -> Value:
    """``w_n = p_n r_n (Δz_n)^γ / z_{n+1}^γ``."""
    p = as_expr(p)
    denom = odd_ratio_pow(traj.z[n + 1], spec.gamma)
    if denom == 0:
        raise RiccatiDomainError(f"z_{n + 1} = 0")
    return eval_seq(p, n, traj.mode) * traj.qd[n] / denom


@dataclass(frozen=True)
class Violation:
    n: int
    lhs: float
    rhs: float
    margin: float


@dataclass(frozen=True)
class RiccatiCheck:
    violations: tuple[Violation, ...]
    applicable: tuple[int, ...]
    excluded: dict
    d: float | None
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> str:
        return json.dumps({
            "violations": [v.__dict__ for v in self.violations],
            "applicable": list(self.applicable),
            "excluded": {str(k): v for k, v in self.excluded.items()},
            "d": self.d,
            "note": self.note,
        }, indent=2) + "\n"


def _precondition_failure(spec, traj, n) -> str | None:
    k = spec.k
    try:
        xs = [traj.x[m] for m in range(n - k, n + 3)]
        traj.qd[n + 1], traj.z[n + 2]
    except KeyError:
        return "outside trajectory"
    if any(v <= 0 for v in xs):
        return "x not positive"
    if any(xs[i + 1] <= xs[i] for i in range(len(xs) - 1)):
        return "x not increasing"
    return None


def riccati_inequality_check(spec: EquationSpec, traj: Trajectory, params: CriterionParams | None,
                             indices: Iterable[int], w: Mapping[int, Value] | None = None,
                             tol: float = DEFAULT_ATOL) -> RiccatiCheck:
    """Check the first-order Riccati inequality along a positive increasing stretch.

    For each ``n``, verifies::

        Δw_n <= -p_n Q*_n + (Δp_n / p_{n+1}) w_{n+1} - p_n w_{n+1}^2 / (p_{n+1}^2 r_{n+1})

    Indices where ``x`` is not positive and increasing on ``[n-k, n+2]``,
    or where ``z_{n+1} < d``, are excluded and listed, not counted as
    failures. If ``params.d`` is in ``params.defaulted`` (or ``params`` is
    None), ``d`` is the smallest ``z_{n+1}`` over the usable indices. ``w``
    overrides the computed Riccati values (used to self-test the checker).
    In float mode a violation needs ``margin < -tol * max(1, |lhs|, |rhs|)``.
    """
    _check_exponents(spec.alpha, spec.gamma)
    mode = traj.mode
    excluded = {}
    usable = []
    for n in indices:
        why = _precondition_failure(spec, traj, n)
        if why:
            excluded[n] = why
        else:
            usable.append(n)
    if params is None:
        params = CriterionParams(defaulted={"p", "d", "M", "R"})
    if "d" in params.defaulted:
        d = default_d(traj, usable)
    else:
        d = to_value(params.d, mode)
    if d is None:
        return RiccatiCheck((), (), excluded, None, "no applicable indices")
    applicable = []
    for n in usable:
        if traj.z[n + 1] < d:
            excluded[n] = "z_{n+1} < d"
        else:
            applicable.append(n)
    if not applicable:
        return RiccatiCheck((), (), excluded, float(d), "no applicable indices")

    def wv(m):
        if w is not None and m in w:
            return w[m]
        return riccati_w(spec, traj, params.p, m)

    violations = []
    for n in applicable:
        p0 = eval_seq(params.p, n, mode)
        p1 = eval_seq(params.p, n + 1, mode)
        r1 = eval_seq(spec.r, n + 1, mode)
        w0, w1 = wv(n), wv(n + 1)
        lhs = w1 - w0
        rhs = -p0 * q_star(spec, d, n, mode) + (p1 - p0) / p1 * w1 - p0 * w1 * w1 / (p1 * p1 * r1)
        margin = rhs - lhs
        if is_exact(margin):
            bad = margin < 0
        else:
            bad = float(margin) < -tol * max(1.0, abs(float(lhs)), abs(float(rhs)))
        if bad:
            violations.append(Violation(n, float(lhs), float(rhs), float(margin)))
    return RiccatiCheck(tuple(violations), tuple(applicable), excluded, float(d))


# --- Sturm-Liouville specialization --------------------------------------------


def sturm_liouville_q_star(spec: EquationSpec, d: Value, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    """``(d^α q_n - e_n) / d``."""
    mode = as_mode(mode)
    d = to_value(d, mode)
    q = eval_seq(spec.q, n, mode)
    e = eval_seq(spec.e, n, mode)
    return (pos_pow(d, spec.alpha.fraction()) * q - e) / d


def sturm_liouville_q_dstar(spec: EquationSpec, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    """``α q_n^(1/α) e_n^(1-1/α) / (α-1)^(1-1/α)``."""
    mode = as_mode(mode)
    a = spec.alpha.fraction()
    q = eval_seq(spec.q, n, mode)
    e = eval_seq(spec.e, n, mode)
    base = q * pos_pow(e, a - 1) / pos_pow(to_value(a - 1, mode), a - 1)
    return to_value(a, mode) * pos_pow(base, 1 / a)


@dataclass(frozen=True)
class SpecializationReport:
    spec: EquationSpec
    params: CriterionParams | None
    window: tuple[int, int]
    q_star_exact: bool
    q_dstar_exact: bool
    q_star_max_gap: float
    q_dstar_max_rel_gap: float
    ok: bool


def corollary_specialize(spec: EquationSpec, params: CriterionParams | None = None,
                         d: Value | None = None, window: tuple[int, int] = (1, 100),
                         rtol: float = 1e-12) -> SpecializationReport:
    """Set ``c = 0`` and ``γ = 1`` and confirm the Q-sequences reduce.

    The general ``Q*`` and ``Q**`` of the specialized equation are compared
    pointwise on ``window`` with the standalone Sturm-Liouville forms:
    exactly where both sides are rational, within ``rtol`` otherwise.
    """
    sl = EquationSpec(spec.r, spec.q, spec.e, Fraction(0), spec.k, OddRatio(1), spec.alpha)
    _check_exponents(sl.alpha, sl.gamma)
    if d is None:
        d = params.d if params is not None else Fraction(1)
    all_exact = True
    dstar_exact = True
    star_gap = 0.0
    dstar_gap = 0.0
    ok = True
    for n in range(window[0], window[1] + 1):
        g_star, c_star = q_star(sl, d, n), sturm_liouville_q_star(sl, d, n)
        if is_exact(g_star) and is_exact(c_star):
            ok &= g_star == c_star
            star_gap = max(star_gap, abs(float(g_star - c_star)))
        else:
            all_exact = False
            gap = abs(float(g_star) - float(c_star))
            star_gap = max(star_gap, gap)
            ok &= gap <= rtol * max(1.0, abs(float(c_star)))
        g2, c2 = q_dstar(sl, n), sturm_liouville_q_dstar(sl, n)
        if is_exact(g2) and is_exact(c2):
            ok &= g2 == c2
        else:
            dstar_exact = False
            rel = abs(float(g2) - float(c2)) / max(1.0, abs(float(c2)))
            dstar_gap = max(dstar_gap, rel)
            ok &= rel <= rtol
    return SpecializationReport(sl, params, tuple(window), all_exact, dstar_exact, star_gap, dstar_gap, bool(ok))


__all__ = [
    "HypothesisError",
    "Verdict",
    "f_min",
    "shifted_objective",
    "check_lemma2",
    "riccati_g",
    "q_star",
    "q_dstar",
    "q_min",
    "q_star_array",
    "q_dstar_array",
    "CriterionParams",
    "CriterionReport",
    "criterion1_series",
    "criterion2_series",
    "conjunction",
    "divergence_verdict",
    "default_d",
    "default_m",
    "riccati_w",
    "riccati_inequality_check",
    "RiccatiCheck",
    "Violation",
    "sturm_liouville_q_star",
    "sturm_liouville_q_dstar",
    "corollary_specialize",
    "SpecializationReport",
]
