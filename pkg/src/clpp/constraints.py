"""Exact evaluation of chain functionals and compatibility checks.

Directed chains implicitly start at the origin (0, 0) and may carry a
terminal point (T, 0).  The local Holder norm is the max over consecutive
segments of |dx| / |dt|^gamma; the (a, b)-entropy is the sum over consecutive
segments of |dx|^a / |dt|^b.  Non-directed sequences of planar points are
scored by the optimal time subdivision of a horizon t, which has the closed
form t^(-b) (sum of |segment|^(a/(b+1)))^(b+1).

Budget comparisons everywhere use an absolute slack of 1e-12 so that
configurations constructed exactly on a budget boundary classify as
compatible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .model import PointCloud

SLACK = 1e-12


class DegenerateChainError(ValueError):
    """A zero time increment makes the functional ill-defined."""


@dataclass(frozen=True)
class Holder:
    gamma: float
    A: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.A <= 0:
            raise ValueError("A must be positive")


@dataclass(frozen=True)
class Entropy:
    a: float
    b: float
    B: float

    def __post_init__(self):
        if not (self.a > 0 and self.a >= self.b >= 0):
            raise ValueError("entropy requires a >= b >= 0 and a > 0")
        if self.B <= 0:
            raise ValueError("B must be positive")


@dataclass(frozen=True)
class NonDirEntropy:
    a: float
    b: float
    B: float
    t: float

    def __post_init__(self):
        if not (self.a > 0 and self.a >= self.b >= 0):
            raise ValueError("entropy requires a >= b >= 0 and a > 0")
        if self.B <= 0 or self.t <= 0:
            raise ValueError("B and t must be positive")


@dataclass(frozen=True)
class NonDirHolder:
    gamma: float
    A: float
    t: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("the non-directed Holder form needs gamma > 0")
        if self.A <= 0 or self.t <= 0:
            raise ValueError("A and t must be positive")


ConstraintSpec = Union[Holder, Entropy, NonDirEntropy, NonDirHolder]


@dataclass(frozen=True)
class Chain:
    """Ordered selection of cloud points, with the origin convention.

    ``terminal`` is the time T of a forced endpoint (T, 0) for directed
    point-to-point chains, or None.
    """

    cloud: PointCloud
    indices: Tuple[int, ...]
    terminal: Optional[float] = None
    include_origin: bool = True

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(set(idx)) != len(idx):
            raise ValueError("chain indices must be duplicate-free")
        if any(i < 0 or i >= self.cloud.n for i in idx):
            raise ValueError("chain index out of range")
        if self.cloud.kind == "directed" and len(idx) > 1:
            ts = self.cloud.ts[list(idx)]
            if not np.all(np.diff(ts) > 0):
                raise ValueError("directed chain must increase in t")

    def __len__(self) -> int:
        return len(self.indices)

    def coords(self) -> np.ndarray:
        """Chain rows in visit order (no origin, no terminal)."""
        return self.cloud.pts[list(self.indices)]


# ----------------------------------------------------------------------
# directed functionals on raw coordinates

def _directed_segments(ts, xs, terminal, include_origin):
    """Consecutive (dt, dx) pairs including origin and optional terminal."""
    ts = np.asarray(ts, dtype=float)
    xs = np.asarray(xs, dtype=float)
    tt = list(ts)
    xx = list(xs)
    if include_origin:
        tt = [0.0] + tt
        xx = [0.0] + xx
    if terminal is not None:
        tt = tt + [float(terminal)]
        xx = xx + [0.0]
    dts = np.diff(np.asarray(tt))
    dxs = np.diff(np.asarray(xx))
    return dts, dxs


def holder_norm_xy(ts, xs, gamma, terminal=None, include_origin=True):
    dts, dxs = _directed_segments(ts, xs, terminal, include_origin)
    if dts.size == 0:
        return 0.0
    if np.any(dts <= 0):
        raise DegenerateChainError("zero or negative time increment")
    return float(np.max(np.abs(dxs) / dts ** gamma))


def entropy_xy(ts, xs, a, b, terminal=None, include_origin=True):
    dts, dxs = _directed_segments(ts, xs, terminal, include_origin)
    if dts.size == 0:
        return 0.0
    adx = np.abs(dxs)
    if b > 0:
        if np.any(dts <= 0):
            raise DegenerateChainError("zero time increment with b > 0")
        return float(np.sum(adx ** a / dts ** b))
    # b == 0: a zero space increment contributes 0 for any a > 0
    return float(np.sum(adx ** a))


def holder_norm(chain: Chain, gamma: float) -> float:
    """Max over consecutive segments of |dx| / |dt|^gamma."""
    if chain.cloud.kind != "directed":
        raise ValueError("holder_norm needs a directed chain")
    pts = chain.coords()
    return holder_norm_xy(pts[:, 0], pts[:, 1], gamma, chain.terminal,
                          chain.include_origin)


def entropy_ab(chain: Chain, a: float, b: float) -> float:
    """Sum over consecutive segments of |dx|^a / |dt|^b."""
    if chain.cloud.kind != "directed":
        raise ValueError("entropy_ab needs a directed chain")
    pts = chain.coords()
    return entropy_xy(pts[:, 0], pts[:, 1], a, b, chain.terminal,
                      chain.include_origin)


# ----------------------------------------------------------------------
# non-directed functionals

def _segment_lengths(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    prev = np.vstack([[0.0, 0.0], pts[:-1]])
    return np.hypot(pts[:, 0] - prev[:, 0], pts[:, 1] - prev[:, 1])


def nondir_entropy(t: float, points, a: float, b: float) -> float:
    """t^(-b) (sum of |segment|^(a/(b+1)))^(b+1) over the ordered sequence.

    The sequence starts at the origin; this closed form is the infimum of
    the segment-wise entropy over all time subdivisions of [0, t].
    """
    if t <= 0:
        raise ValueError("t must be positive")
    seg = _segment_lengths(points)
    if seg.size == 0:
        return 0.0
    s = float(np.sum(seg ** (a / (b + 1.0))))
    return s ** (b + 1.0) / t ** b


def optimal_subdivision(t: float, points, a: float, b: float) -> np.ndarray:
    """Time increments attaining the non-directed entropy infimum.

    Increment i is proportional to |segment_i|^(a/(b+1)); the increments sum
    to t exactly (the last one is computed by subtraction).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    seg = _segment_lengths(points)
    w = seg ** (a / (b + 1.0))
    total = float(np.sum(w))
    if total <= 0.0:
        raise DegenerateChainError("all segments have zero length")
    inc = t * w / total
    inc[-1] = t - float(np.sum(inc[:-1]))
    return inc


def subdivision_entropy(t: float, points, a: float, b: float,
                        increments) -> float:
    """Segment-wise entropy sum for an explicit time subdivision."""
    seg = _segment_lengths(points)
    inc = np.asarray(increments, dtype=float)
    if inc.shape != seg.shape:
        raise ValueError("one increment per segment required")
    if np.any(inc <= 0):
        raise DegenerateChainError("subdivision increments must be positive")
    return float(np.sum(seg ** a / inc ** b))


def nondir_holder(t: float, points, gamma: float) -> float:
    """t^(-gamma) (sum of |segment|^(1/gamma))^gamma."""
    if gamma <= 0:
        raise ValueError("the non-directed Holder form needs gamma > 0")
    if t <= 0:
        raise ValueError("t must be positive")
    seg = _segment_lengths(points)
    if seg.size == 0:
        return 0.0
    s = float(np.sum(seg ** (1.0 / gamma)))
    return s ** gamma / t ** gamma


# ----------------------------------------------------------------------
# compatibility

def is_compatible(chain, spec: ConstraintSpec):
    """(compatible, achieved value) under the given constraint.

    ``chain`` is a Chain for directed specs, or a Chain over a planar cloud
    (equivalently a raw point sequence) for non-directed specs.  A chain is
    compatible when the relevant functional is <= budget + 1e-12.
    """
    if isinstance(spec, Holder):
        value = holder_norm(_require_directed(chain, spec), spec.gamma)
        return value <= spec.A + SLACK, value
    if isinstance(spec, Entropy):
        value = entropy_ab(_require_directed(chain, spec), spec.a, spec.b)
        return value <= spec.B + SLACK, value
    if isinstance(spec, NonDirEntropy):
        pts = _planar_points(chain, spec)
        value = nondir_entropy(spec.t, pts, spec.a, spec.b)
        return value <= spec.B + SLACK, value
    if isinstance(spec, NonDirHolder):
        pts = _planar_points(chain, spec)
        value = nondir_holder(spec.t, pts, spec.gamma)
        return value <= spec.A + SLACK, value
    raise TypeError(f"unknown constraint spec {spec!r}")


def _require_directed(chain, spec) -> Chain:
    if not isinstance(chain, Chain) or chain.cloud.kind != "directed":
        raise ValueError(f"{type(spec).__name__} applies to directed chains")
    return chain


def _planar_points(chain, spec):
    if isinstance(chain, Chain):
        if chain.cloud.kind != "planar":
            raise ValueError(
                f"{type(spec).__name__} applies to planar sequences")
        return chain.coords()
    return np.asarray(chain, dtype=float).reshape(-1, 2)


def budget_of(spec: ConstraintSpec) -> float:
    if isinstance(spec, (Holder, NonDirHolder)):
        return spec.A
    return spec.B
