"""Closed-form volumes, rigorous tail bounds, predicted exponents, and the
conjectured limiting-constant curve.

Volumes of the ordered compatible configuration sets:

* entropy   Vol = 2^k (1/a)^k Gamma(1/a)^k / Gamma(k/a + 1)
                  * Gamma((a+b)/a)^k / Gamma(k(a+b)/a + 1)
                  * B^(k/a) t^(k(a+b)/a)
* Holder    Vol = (2A)^k Gamma(1+g)^k / Gamma(k(1+g) + 1) * t^(k(1+g))
* non-dir   Vol = (2 pi g)^k Gamma(2g)^k / Gamma(2kg + 1) * D^(2kg),
            with g = (b+1)/a and D the additive length budget.

All formulas are evaluated in log space via lgamma; the float forms
saturate to inf on overflow.  The bound evaluators use the proofs' explicit
pre-Stirling displays, never the theorems' unspecified constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .constraints import Entropy, Holder, NonDirEntropy, NonDirHolder
from .rng import stream


# ----------------------------------------------------------------------
# closed forms (log space)

def _check_ab(a, b):
    if not (a > 0 and a >= b >= 0):
        raise ValueError("need a >= b >= 0 with a > 0")


def log_vol_entropy(k: int, t: float, B: float, a: float, b: float) -> float:
    _check_ab(a, b)
    if k < 1 or t <= 0:
        raise ValueError("need k >= 1 and t > 0")
    if B <= 0:
        return -math.inf
    r = (a + b) / a
    return (k * (math.log(2.0) - math.log(a) + math.lgamma(1.0 / a)
                 + math.lgamma(r))
            - math.lgamma(k / a + 1.0) - math.lgamma(k * r + 1.0)
            + (k / a) * math.log(B) + k * r * math.log(t))


def log_vol_holder(k: int, t: float, A: float, gamma: float) -> float:
    if k < 1 or t <= 0 or gamma < 0:
        raise ValueError("need k >= 1, t > 0, gamma >= 0")
    if A <= 0:
        return -math.inf
    g1 = 1.0 + gamma
    return (k * (math.log(2.0 * A) + math.lgamma(g1))
            - math.lgamma(k * g1 + 1.0) + k * g1 * math.log(t))


def log_vol_nondir(k: int, D: float, a: float, b: float) -> float:
    _check_ab(a, b)
    if k < 1:
        raise ValueError("need k >= 1")
    if D <= 0:
        return -math.inf
    g = (b + 1.0) / a
    return (k * (math.log(2.0 * math.pi * g) + math.lgamma(2.0 * g))
            - math.lgamma(2.0 * k * g + 1.0) + 2.0 * k * g * math.log(D))


def _exp_sat(logv: float) -> float:
    if logv == -math.inf:
        return 0.0
    try:
        return math.exp(logv)
    except OverflowError:
        return math.inf


def vol_entropy(k: int, t: float, B: float, a: float, b: float) -> float:
    """Exact volume of the k-point entropy-compatible set."""
    return _exp_sat(log_vol_entropy(k, t, B, a, b))


def vol_holder(k: int, t: float, A: float, gamma: float) -> float:
    return _exp_sat(log_vol_holder(k, t, A, gamma))


def vol_nondir(k: int, D: float, a: float, b: float) -> float:
    return _exp_sat(log_vol_nondir(k, D, a, b))


def nondir_length_budget(B: float, t: float, b: float) -> float:
    """Additive length budget D = (B t^b)^(1/(b+1))."""
    return (B * t ** b) ** (1.0 / (b + 1.0))


# ----------------------------------------------------------------------
# induction recursions (numerical self-consistency oracles)

def entropy_volume_recursion(k: int, t: float, B: float, a: float,
                             b: float) -> float:
    """Evaluate Vol via the peel-the-first-point recursion

        2 * int_0^t int_0^(B u^b)^(1/a) Vol(k-1, t-u, B - y^a/u^b) dy du,

    with the closed form plugged in at level k-1.  The inner integral is
    smoothed by the substitution y = (B u^b)^(1/a) v before quadrature."""
    if k < 2:
        raise ValueError("the recursion starts at k = 2")

    def inner(u):
        ymax = (B * u ** b) ** (1.0 / a)

        def f(v):
            rem = B * (1.0 - v ** a)
            if rem <= 0.0:
                return 0.0
            return vol_entropy(k - 1, t - u, rem, a, b)

        val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-11,
                                limit=200)
        return 2.0 * ymax * val

    val, _ = integrate.quad(inner, 0.0, t, epsabs=1e-14, epsrel=1e-11,
                            limit=200)
    return val


def holder_volume_recursion(k: int, t: float, A: float,
                            gamma: float) -> float:
    """2 A int_0^t u^gamma Vol(k-1, t-u) du with the closed form inside."""
    if k < 2:
        raise ValueError("the recursion starts at k = 2")

    def f(u):
        return u ** gamma * vol_holder(k - 1, t - u, A, gamma)

    val, _ = integrate.quad(f, 0.0, t, epsabs=1e-14, epsrel=1e-11, limit=200)
    return 2.0 * A * val


def nondir_volume_recursion(k: int, D: float, a: float, b: float) -> float:
    """int_0^(D^g) 2 pi r Vol(k-1, D - r^(1/g)) dr with g = (b+1)/a."""
    if k < 2:
        raise ValueError("the recursion starts at k = 2")
    g = (b + 1.0) / a

    def f(r):
        rem = D - r ** (1.0 / g)
        if rem <= 0.0:
            return 0.0
        return 2.0 * math.pi * r * vol_nondir(k - 1, rem, a, b)

    val, _ = integrate.quad(f, 0.0, D ** g, epsabs=1e-14, epsrel=1e-11,
                            limit=200)
    return val


# ----------------------------------------------------------------------
# hit-or-miss Monte Carlo volume oracle

@dataclass(frozen=True)
class EntropyRegion:
    k: int
    t: float
    B: float
    a: float
    b: float


@dataclass(frozen=True)
class HolderRegion:
    k: int
    t: float
    A: float
    gamma: float


@dataclass(frozen=True)
class NonDirRegion:
    k: int
    D: float
    a: float
    b: float


Region = Union[EntropyRegion, HolderRegion, NonDirRegion]

MC_DIMENSION_CAP = 6


def mc_volume(region: Region, samples: int, seed: int,
              chunk: int = 1_000_000):
    """Hit-or-miss estimate of a configuration-set volume.

    Samples uniformly from a bounding box (time coordinates in [0, t]^k,
    space coordinate i in a band that grows linearly with i) and counts the
    points that are ordered and within budget.  Returns (estimate, stderr)
    with the binomial standard error.
    """
    if region.k > MC_DIMENSION_CAP:
        raise ValueError(f"mc_volume caps at k = {MC_DIMENSION_CAP}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    g = stream(seed)
    k = region.k
    hits = 0
    total = 0
    if isinstance(region, (EntropyRegion, HolderRegion)):
        t = region.t
        if isinstance(region, EntropyRegion):
            if region.B <= 0:
                return 0.0, 0.0
            dx = (region.B * t ** region.b) ** (1.0 / region.a)
        else:
            if region.A <= 0:
                return 0.0, 0.0
            dx = region.A * t ** region.gamma
        bands = dx * np.arange(1, k + 1)
        boxvol = t ** k * float(np.prod(2.0 * bands))
        while total < samples:
            n = min(chunk, samples - total)
            ts = g.uniform(0.0, t, size=(n, k))
            xs = g.uniform(-bands, bands, size=(n, k))
            ordered = np.all(np.diff(ts, axis=1) > 0, axis=1) if k > 1 \
                else np.ones(n, dtype=bool)
            dts = np.diff(np.hstack([np.zeros((n, 1)), ts]), axis=1)
            dxs = np.diff(np.hstack([np.zeros((n, 1)), xs]), axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                if isinstance(region, EntropyRegion):
                    vals = np.sum(np.abs(dxs) ** region.a
                                  / dts ** region.b, axis=1)
                    inside = ordered & (vals <= region.B)
                else:
                    ratios = np.abs(dxs) / dts ** region.gamma
                    inside = ordered & (np.max(ratios, axis=1) <= region.A)
            hits += int(np.count_nonzero(inside))
            total += n
    else:
        if region.D <= 0:
            return 0.0, 0.0
        gexp = (region.b + 1.0) / region.a
        step = region.D ** gexp
        bands = step * np.arange(1, k + 1)
        boxvol = float(np.prod((2.0 * bands) ** 2))
        p = 1.0 / gexp
        while total < samples:
            n = min(chunk, samples - total)
            xs = g.uniform(-bands, bands, size=(n, k))
            ys = g.uniform(-bands, bands, size=(n, k))
            dxs = np.diff(np.hstack([np.zeros((n, 1)), xs]), axis=1)
            dys = np.diff(np.hstack([np.zeros((n, 1)), ys]), axis=1)
            sums = np.sum(np.hypot(dxs, dys) ** p, axis=1)
            hits += int(np.count_nonzero(sums <= region.D))
            total += n
    phat = hits / total
    est = boxvol * phat
    stderr = boxvol * math.sqrt(max(phat * (1.0 - phat), 0.0) / total)
    return est, stderr


# ----------------------------------------------------------------------
# rigorous probability bounds

DirectedSpec = Union[Holder, Entropy]


def _log_vol_spec(k, t, spec):
    if isinstance(spec, Holder):
        return log_vol_holder(k, t, spec.A, spec.gamma)
    if isinstance(spec, Entropy):
        return log_vol_entropy(k, t, spec.B, spec.a, spec.b)
    raise TypeError("first-moment bounds cover directed specs only")


def first_moment_log(k: int, m: int, t: float, x: float,
                     spec: DirectedSpec) -> float:
    """log E[N_k], N_k = number of compatible ordered k-subsets:
    m!/(m-k)! * Vol / (2tx)^k, exactly, in log space."""
    if not 1 <= k <= m:
        raise ValueError("need 1 <= k <= m")
    logfall = math.lgamma(m + 1.0) - math.lgamma(m - k + 1.0)
    return logfall + _log_vol_spec(k, t, spec) - k * math.log(2.0 * t * x)


def first_moment_bound(k: int, m: int, t: float, x: float,
                       spec: DirectedSpec) -> float:
    """Rigorous upper bound for P(L >= k), clamped to 1."""
    return min(1.0, _exp_sat(first_moment_log(k, m, t, x, spec)))


def _box_band_halfwidth(k, t, spec):
    if isinstance(spec, Holder):
        return spec.A * (t / (4.0 * k)) ** spec.gamma / 2.0
    return (spec.B ** (1.0 / spec.a) * (t / 4.0) ** (spec.b / spec.a)
            / (2.0 * k ** ((spec.b + 1.0) / spec.a)))


def lower_tail_bound(k: int, m: int, t: float, x: float,
                     spec: DirectedSpec) -> float:
    """Rigorous upper bound for P(L <= k) from the alternate-box
    construction: 2^(2k) (1 - q)^m where q is the exact probability that a
    uniform point lands in the union of the first k boxes,
    q = min(h, x) / (4x) <= 1/4 with h the admissible band half-width."""
    if not 1 <= k <= m:
        raise ValueError("need 1 <= k <= m")
    if not isinstance(spec, (Holder, Entropy)):
        raise TypeError("lower-tail bounds cover directed specs only")
    h = _box_band_halfwidth(k, t, spec)
    q = min(h, x) / (4.0 * x)
    logb = 2.0 * k * math.log(2.0) + m * math.log1p(-q)
    return min(1.0, _exp_sat(logb))


@dataclass(frozen=True)
class BoundReport:
    """Per-k rigorous bounds, with clamping flagged."""

    ks: tuple
    upper: tuple            # P(L >= k) bounds
    lower: tuple            # P(L <= k) bounds
    upper_clamped: tuple
    lower_clamped: tuple
    params: dict = field(default_factory=dict)


def bound_report(m: int, t: float, x: float, spec: DirectedSpec,
                 ks: Optional[Sequence[int]] = None) -> BoundReport:
    if ks is None:
        ks = range(1, m + 1)
    ks = tuple(int(k) for k in ks)
    upper = []
    lower = []
    uc = []
    lc = []
    for k in ks:
        lu = first_moment_log(k, m, t, x, spec)
        upper.append(min(1.0, _exp_sat(lu)))
        uc.append(lu > 0.0)
        lb = lower_tail_bound(k, m, t, x, spec)
        lower.append(lb)
        lc.append(lb >= 1.0)
    return BoundReport(ks, tuple(upper), tuple(lower), tuple(uc), tuple(lc),
                       {"m": m, "t": t, "x": x, "spec": repr(spec)})


# ----------------------------------------------------------------------
# predicted exponents and conjectured constants

def predicted_exponent(spec) -> float:
    """Growth exponent kappa with L ~ m^kappa."""
    if isinstance(spec, Holder):
        return 1.0 / (1.0 + spec.gamma)
    if isinstance(spec, Entropy):
        return spec.a / (spec.a + spec.b + 1.0)
    if isinstance(spec, NonDirEntropy):
        return min(spec.a / (2.0 * (spec.b + 1.0)), 1.0)
    if isinstance(spec, NonDirHolder):
        return min(1.0 / (2.0 * spec.gamma), 1.0)
    raise TypeError(f"unknown spec {spec!r}")


@dataclass(frozen=True)
class ConjecturedConstant:
    value: float
    conjecture: bool = True
    note: str = ""


def conjectured_constant_holder(gamma: float) -> ConjecturedConstant:
    """Conjectured limiting constant 2^(3/2)/(1+gamma) Gamma(1+gamma)^(1/(1+gamma)).

    The curve is normalized to hit sqrt(2) at gamma = 1 (the Lipschitz
    case).  It is a conjecture, not ground truth; at gamma = 0 it gives
    2^(3/2) ~ 2.83 while simulations measure ~2.75, and the note records
    that discrepancy.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    g1 = 1.0 + gamma
    value = 2.0 ** 1.5 / g1 * math.gamma(g1) ** (1.0 / g1)
    note = ("conjectured curve; known to overshoot at gamma=0 "
            "(curve 2.828 vs measured ~2.75)")
    return ConjecturedConstant(value, True, note)


def holder_constant_from_unit(c11: float, lam: float, A: float,
                              gamma: float) -> float:
    """C(lam, A) = (lam A)^(1/(1+gamma)) * C(1, 1)."""
    return (lam * A) ** (1.0 / (1.0 + gamma)) * c11


def entropy_constant_from_unit(c11: float, lam: float, B: float, a: float,
                               b: float) -> float:
    """C(lam, B) = (lam B^(1/a))^(a/(a+b+1)) * C(1, 1)."""
    return (lam * B ** (1.0 / a)) ** (a / (a + b + 1.0)) * c11
