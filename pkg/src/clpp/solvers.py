"""Exact and heuristic maximization of compatible-set cardinality.

Exact directed solvers:

* ``solve_holder_exact`` runs longest-chain DP on the DAG whose edge
  (j -> i) exists iff t_j < t_i and |x_i - x_j| <= A (t_i - t_j)^gamma.
  The constraint is local, so a chain is compatible iff every consecutive
  edge is, and the DP value is the true supremum.
* ``solve_entropy_exact`` runs the budgeted-cardinality DP
  f(i, k) = min entropy of a k-chain ending at i; entropy is additive over
  segments, so the largest k with a within-budget row is the true optimum.
* ``solve_polymer_directed`` maximizes beta |chain| - entropy(chain) with a
  forced terminal (t, 0), again exactly by DP.

Non-directed solving is Held-Karp exact up to m = 20 and simulated
annealing beyond; annealed results are feasible lower bounds.  Every
returned chain is re-validated through ``constraints.is_compatible``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _kernels as K
from .constraints import (SLACK, Chain, ConstraintSpec, Entropy, Holder,
                          NonDirEntropy, NonDirHolder, entropy_xy,
                          holder_norm_xy, is_compatible, nondir_entropy)
from .model import Box, PointCloud, Strip
from .rng import derive_key

BRUTE_DIRECTED_CAP = 10
BRUTE_NONDIR_CAP = 9
BRUTE_HEAVY_CAP = 12
HELDKARP_CAP = 20
HEAVY_REFINE_CAP = 18


class SizeCapError(ValueError):
    """Instance exceeds the exact solver's size cap."""


@dataclass(frozen=True)
class LppSolution:
    cardinality: int
    chain: Chain
    achieved: float
    method: str
    work: dict = field(default_factory=dict)
    lower_bound: bool = False


@dataclass(frozen=True)
class VariationalSolution:
    value: float
    chain: Chain
    energy: float
    entropy: float
    method: str
    work: dict = field(default_factory=dict)
    lower_bound: bool = False


@dataclass(frozen=True)
class AnnealConfig:
    """Geometric-cooling schedule.

    ``initial_temp`` None calibrates so ~80% of uphill proposals accept on a
    short probe sweep.  ``moves_per_temp`` None means 200 * m moves per
    temperature level, which is meant for small instances; experiment plans
    override it at scale.
    """

    initial_temp: Optional[float] = None
    cooling: float = 0.97
    moves_per_temp: Optional[int] = None
    temp_levels: int = 160
    move_weights: Tuple[float, float, float, float] = (0.4, 0.2, 0.2, 0.2)
    restarts: int = 8
    seed: int = 0
    knn: int = 12
    tie_weight: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.cooling < 1.0):
            raise ValueError("cooling ratio must be in (0, 1)")
        if self.restarts < 1 or self.temp_levels < 1:
            raise ValueError("counts must be >= 1")
        if self.moves_per_temp is not None and self.moves_per_temp < 1:
            raise ValueError("counts must be >= 1")
        if abs(sum(self.move_weights) - 1.0) > 1e-9:
            raise ValueError("move weights must sum to 1")


def _require_kind(cloud: PointCloud, kind: str):
    if cloud.kind != kind:
        raise ValueError(f"solver needs a {kind} cloud, got {cloud.kind}")


def _certify(chain: Chain, spec: ConstraintSpec):
    ok, value = is_compatible(chain, spec)
    budget = spec.A if isinstance(spec, (Holder, NonDirHolder)) else spec.B
    if not ok and value > budget * (1.0 + 1e-13) + SLACK:
        raise AssertionError(
            f"solver produced an incompatible chain: {value} > {budget}")
    return value


# ----------------------------------------------------------------------
# exact directed solvers

def solve_holder_exact(cloud: PointCloud, gamma: float, A: float,
                       endpoint: Optional[float] = None) -> LppSolution:
    _require_kind(cloud, "directed")
    if gamma < 0 or A <= 0:
        raise ValueError("need gamma >= 0 and A > 0")
    T = float(endpoint) if endpoint is not None else 0.0
    L, idx = K.holder_dp(cloud.ts, cloud.xs, float(gamma), float(A), T,
                         endpoint is not None, K.holder_mode(float(gamma)))
    chain = Chain(cloud, tuple(int(i) for i in idx), terminal=endpoint)
    achieved = _certify(chain, Holder(gamma, A))
    return LppSolution(int(L), chain, achieved, "exact-dp",
                       {"points": cloud.n})


def solve_entropy_exact(cloud: PointCloud, a: float, b: float,
                        B_total: float,
                        endpoint: Optional[float] = None) -> LppSolution:
    """Exact E-LPP with absolute budget B_total.

    Point-to-point callers pass B_total = B * t, matching the linear growth
    of the entropy budget with the horizon.
    """
    _require_kind(cloud, "directed")
    if not (a > 0 and a >= b >= 0):
        raise ValueError("entropy requires a >= b >= 0 and a > 0")
    if B_total < 0:
        raise ValueError("budget must be >= 0")
    T = float(endpoint) if endpoint is not None else 0.0
    L, idx = K.entropy_dp(cloud.ts, cloud.xs, float(a), float(b),
                          float(B_total), T, endpoint is not None, SLACK,
                          K.entropy_mode(float(a), float(b)))
    chain = Chain(cloud, tuple(int(i) for i in idx), terminal=endpoint)
    coords = chain.coords()
    achieved = entropy_xy(coords[:, 0], coords[:, 1], a, b, endpoint)
    if achieved > B_total * (1.0 + 1e-13) + SLACK:
        raise AssertionError("entropy DP exceeded its budget")
    return LppSolution(int(L), chain, achieved, "exact-dp",
                       {"points": cloud.n})


def solve_entropy_anneal(cloud: PointCloud, a: float, b: float,
                         B_total: float, endpoint: Optional[float] = None,
                         config: AnnealConfig = AnnealConfig()
                         ) -> LppSolution:
    """Annealed directed E-LPP, the protocol used for the reference
    constant estimates; returns a feasible chain, so the cardinality is a
    lower bound for ``solve_entropy_exact``.  Point order is forced by
    time, so the move mix is insert / delete / replace."""
    _require_kind(cloud, "directed")
    if not (a > 0 and a >= b >= 0):
        raise ValueError("entropy requires a >= b >= 0 and a > 0")
    T = float(endpoint) if endpoint is not None else 0.0
    knn = _knn_table(cloud.pts, config.knn)
    moves = config.moves_per_temp
    if moves is None:
        moves = 200 * max(cloud.n, 1)
    t0 = -1.0 if config.initial_temp is None else config.initial_temp
    w = config.move_weights
    best = None
    for r in range(config.restarts):
        key = np.uint64(derive_key(config.seed, r))
        ln, order = K.anneal_entropy_directed(
            cloud.ts, cloud.xs, float(a), float(b), float(B_total), T,
            endpoint is not None, K.entropy_mode(float(a), float(b)), knn,
            key, t0, config.cooling, config.temp_levels, moves,
            w[0], w[1], config.tie_weight)
        cand = (int(ln), -r, order)
        if best is None or cand[:2] > best[:2]:
            best = cand
    chain = Chain(cloud, tuple(int(i) for i in best[2]), terminal=endpoint)
    coords = chain.coords()
    achieved = entropy_xy(coords[:, 0], coords[:, 1], a, b, endpoint)
    if achieved > B_total * (1.0 + 1e-13) + SLACK:
        raise AssertionError("annealed chain exceeded its budget")
    return LppSolution(best[0], chain, achieved, "anneal",
                       {"restarts": config.restarts,
                        "moves_per_temp": moves,
                        "temp_levels": config.temp_levels},
                       lower_bound=True)


def solve_polymer_directed(cloud: PointCloud, beta: float, a: float,
                           b: float,
                           t: Optional[float] = None) -> VariationalSolution:
    """Exact max of beta |chain| - Ent(chain + (t, 0)) over directed chains.

    The continuum problem over paths reduces to chains because the entropy
    of a path through a fixed point set is minimized by the set itself.
    """
    _require_kind(cloud, "directed")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if t is None:
        t = cloud.domain.t
    value, idx = K.polymer_dp(cloud.ts, cloud.xs, float(a), float(b),
                              float(beta), float(t),
                              K.entropy_mode(float(a), float(b)))
    chain = Chain(cloud, tuple(int(i) for i in idx), terminal=float(t))
    ent = entropy_xy(chain.coords()[:, 0], chain.coords()[:, 1], a, b, t)
    energy = float(len(chain))
    if abs((beta * energy - ent) - value) > 1e-9 * max(1.0, abs(value)):
        raise AssertionError("polymer DP value does not match its chain")
    return VariationalSolution(float(value), chain, energy, ent, "exact-dp",
                               {"points": cloud.n})


# ----------------------------------------------------------------------
# non-directed solvers

def _nondir_length_budget(a, b, B, t, headroom=0.5):
    # entropy <= B + headroom*SLACK on the additive length scale
    return ((B + headroom * SLACK) * t ** b) ** (1.0 / (b + 1.0))


def solve_nondir_heldkarp(cloud: PointCloud, a: float, b: float, B: float,
                          t: float) -> LppSolution:
    _require_kind(cloud, "planar")
    if cloud.n > HELDKARP_CAP:
        raise SizeCapError(
            f"Held-Karp handles m <= {HELDKARP_CAP}; use annealing")
    p = a / (b + 1.0)
    Dlim = _nondir_length_budget(a, b, B, t)
    L, idx = K.heldkarp_path(cloud.pts[:, 0].copy(), cloud.pts[:, 1].copy(),
                             p, Dlim)
    chain = Chain(cloud, tuple(int(i) for i in idx))
    achieved = _certify(chain, NonDirEntropy(a, b, B, t))
    return LppSolution(int(L), chain, achieved, "held-karp",
                       {"states": (1 << cloud.n) * max(cloud.n, 1)})


def _knn_table(pts: np.ndarray, k: int) -> np.ndarray:
    """k nearest neighbors for the origin plus every point (row 0 = origin).

    Neighbor choice is rank-based, so annealing move proposals are invariant
    under the exact scaling maps used in the distribution identities.
    """
    from scipy.spatial import cKDTree

    m = pts.shape[0]
    k = min(k, m)
    table = np.full((m + 1, max(k, 1)), -1, dtype=np.int64)
    if m == 0:
        return table
    tree = cKDTree(pts)
    q = np.vstack([[0.0, 0.0], pts])
    _, idx = tree.query(q, k=k)
    idx = np.asarray(idx)
    if idx.ndim == 1:
        idx = idx[:, None]
    table[:, :k] = idx
    return table


def solve_nondir_anneal(cloud: PointCloud, a: float, b: float, B: float,
                        t: float,
                        config: AnnealConfig = AnnealConfig()) -> LppSolution:
    """Feasible annealed solution; cardinality <= the true optimum.

    Restarts use independent streams derived from (seed, restart), so the
    best over 2r restarts can never fall below the best over r.
    """
    _require_kind(cloud, "planar")
    p = a / (b + 1.0)
    Dlim = _nondir_length_budget(a, b, B, t)
    px = cloud.pts[:, 0].copy()
    py = cloud.pts[:, 1].copy()
    knn = _knn_table(cloud.pts, config.knn)
    moves = config.moves_per_temp
    if moves is None:
        moves = 200 * max(cloud.n, 1)
    t0 = -1.0 if config.initial_temp is None else config.initial_temp
    w = config.move_weights
    best = None
    for r in range(config.restarts):
        key = np.uint64(derive_key(config.seed, r))
        ln, order, total = K.anneal_nondir(px, py, p, Dlim, knn, key, t0,
                                           config.cooling, config.temp_levels,
                                           moves, w[0], w[1], w[2],
                                           config.tie_weight)
        cand = (int(ln), -float(total), -r, order)
        if best is None or cand[:3] > best[:3]:
            best = cand
    chain = Chain(cloud, tuple(int(i) for i in best[3]))
    achieved = _certify(chain, NonDirEntropy(a, b, B, t))
    return LppSolution(best[0], chain, achieved, "anneal",
                       {"restarts": config.restarts,
                        "moves_per_temp": moves,
                        "temp_levels": config.temp_levels},
                       lower_bound=True)


def solve_heavy_tail_anneal(cloud: PointCloud, beta: float, nu: float,
                            config: AnnealConfig = AnnealConfig()
                            ) -> VariationalSolution:
    """Annealed lower bound for the heavy-tail energy/length problem.

    Maximizes beta * sum(collected w) - (path length)^nu over ordered
    subsets.  The empty path keeps the value >= 0.  Supports of size <= 18
    get an exact Held-Karp order-refinement pass, followed by a greedy
    drop/add hill climb.
    """
    _require_kind(cloud, "weighted")
    if beta <= 0 or nu <= 1:
        raise ValueError("need beta > 0 and nu > 1")
    ws = cloud.pts[:, 0].copy()
    px = cloud.pts[:, 1].copy()
    py = cloud.pts[:, 2].copy()
    knn = _knn_table(cloud.pts[:, 1:], config.knn)
    topw = np.argsort(-ws)[:min(64, ws.size)].astype(np.int64)
    moves = config.moves_per_temp
    if moves is None:
        moves = 200 * max(cloud.n, 1)
    t0 = -1.0 if config.initial_temp is None else config.initial_temp
    w = config.move_weights
    best_val = 0.0
    best_order = np.empty(0, dtype=np.int64)
    for r in range(config.restarts):
        key = np.uint64(derive_key(config.seed, r))
        val, order = K.anneal_heavy(ws, px, py, float(beta), float(nu), knn,
                                    topw, key, t0, config.cooling,
                                    config.temp_levels, moves, w[0], w[1],
                                    w[2])
        if val > best_val:
            best_val = float(val)
            best_order = order
    # recompute before refining: the kernel's running value can drift
    best_val = _heavy_value(ws, px, py, np.asarray(best_order, np.int64),
                            beta, nu)
    best_order, best_val = _heavy_refine(ws, px, py, beta, nu, best_order,
                                         best_val)
    chain = Chain(cloud, tuple(int(i) for i in best_order))
    energy = float(np.sum(ws[best_order])) if best_order.size else 0.0
    length = _path_length(px, py, best_order)
    value = beta * energy - length ** nu if best_order.size else 0.0
    if abs(value - best_val) > 1e-9 * max(1.0, abs(best_val)):
        raise AssertionError("heavy-tail refinement bookkeeping mismatch")
    return VariationalSolution(value, chain, energy, length ** nu, "anneal",
                               {"restarts": config.restarts,
                                "moves_per_temp": moves},
                               lower_bound=True)


def _path_length(px, py, order):
    if order.size == 0:
        return 0.0
    xs = np.concatenate([[0.0], px[order]])
    ys = np.concatenate([[0.0], py[order]])
    return float(np.sum(np.hypot(np.diff(xs), np.diff(ys))))


def _heavy_value(ws, px, py, order, beta, nu):
    if order.size == 0:
        return 0.0
    return beta * float(np.sum(ws[order])) - _path_length(px, py, order) ** nu


def _heavy_refine(ws, px, py, beta, nu, order, val):
    order = np.asarray(order, dtype=np.int64)
    if 1 <= order.size <= HEAVY_REFINE_CAP:
        _, perm = K.heldkarp_full_order(px[order].copy(), py[order].copy())
        cand = order[perm]
        cval = _heavy_value(ws, px, py, cand, beta, nu)
        if cval > val:
            order, val = cand, cval
    improved = True
    while improved and order.size:
        improved = False
        for q in range(order.size):
            cand = np.delete(order, q)
            cval = _heavy_value(ws, px, py, cand, beta, nu)
            if cval > val:
                order, val = cand, cval
                improved = True
                break
    if val < 0.0:
        return np.empty(0, dtype=np.int64), 0.0
    return order, val


# ----------------------------------------------------------------------
# oracles and constructive lower bounds

def brute_force_oracle(cloud: PointCloud, spec: ConstraintSpec,
                       endpoint: Optional[float] = None) -> LppSolution:
    """Exact optimum by exhaustive enumeration (small m only)."""
    if isinstance(spec, (Holder, Entropy)):
        _require_kind(cloud, "directed")
        if cloud.n > BRUTE_DIRECTED_CAP:
            raise SizeCapError(f"brute force caps at m = {BRUTE_DIRECTED_CAP}")
        T = float(endpoint) if endpoint is not None else 0.0
        if isinstance(spec, Holder):
            L, val = K.brute_directed(cloud.ts, cloud.xs, False, spec.gamma,
                                      0.0, spec.A, T, endpoint is not None,
                                      SLACK, K.holder_mode(spec.gamma), 0)
        else:
            L, val = K.brute_directed(cloud.ts, cloud.xs, True, spec.a,
                                      spec.b, spec.B, T, endpoint is not None,
                                      SLACK, 0, K.entropy_mode(spec.a, spec.b))
        chain = _rebuild_directed_chain(cloud, spec, int(L), endpoint)
        return LppSolution(int(L), chain, val, "brute-force",
                           {"subsets": 1 << cloud.n})
    if isinstance(spec, NonDirEntropy):
        _require_kind(cloud, "planar")
        if cloud.n > BRUTE_NONDIR_CAP:
            raise SizeCapError(f"brute force caps at m = {BRUTE_NONDIR_CAP}")
        p = spec.a / (spec.b + 1.0)
        Dlim = _nondir_length_budget(spec.a, spec.b, spec.B, spec.t)
        L = K.brute_nondir(cloud.pts[:, 0].copy(), cloud.pts[:, 1].copy(),
                           p, Dlim)
        # recover one optimal chain through Held-Karp (same feasible set)
        sol = solve_nondir_heldkarp(cloud, spec.a, spec.b, spec.B, spec.t)
        if sol.cardinality != int(L):
            raise AssertionError("brute-force DFS and Held-Karp disagree")
        return LppSolution(int(L), sol.chain, sol.achieved, "brute-force",
                           {"method": "ordered-subset DFS"})
    raise TypeError(f"unsupported spec for brute force: {spec!r}")


def _rebuild_directed_chain(cloud, spec, L, endpoint):
    """Recover a witness chain of the brute-force cardinality via the DP."""
    if isinstance(spec, Holder):
        sol = solve_holder_exact(cloud, spec.gamma, spec.A, endpoint)
    else:
        sol = solve_entropy_exact(cloud, spec.a, spec.b, spec.B, endpoint)
    if sol.cardinality != L:
        raise AssertionError("exact DP disagrees with brute force")
    return sol.chain


def brute_force_polymer(cloud: PointCloud, beta: float, a: float, b: float,
                        t: float) -> float:
    _require_kind(cloud, "directed")
    if cloud.n > BRUTE_DIRECTED_CAP:
        raise SizeCapError(f"brute force caps at m = {BRUTE_DIRECTED_CAP}")
    return float(K.brute_polymer(cloud.ts, cloud.xs, float(a), float(b),
                                 float(beta), float(t),
                                 K.entropy_mode(float(a), float(b))))


def brute_force_heavy(cloud: PointCloud, beta: float, nu: float) -> float:
    _require_kind(cloud, "weighted")
    if cloud.n > BRUTE_HEAVY_CAP:
        raise SizeCapError(f"brute force caps at m = {BRUTE_HEAVY_CAP}")
    return float(K.brute_heavy(cloud.pts[:, 0].copy(),
                               cloud.pts[:, 1].copy(),
                               cloud.pts[:, 2].copy(), float(beta),
                               float(nu)))


# ----------------------------------------------------------------------
# proof-geometry constructive lower bound

def greedy_box_lower_bound(cloud: PointCloud, spec: ConstraintSpec,
                           k: int) -> LppSolution:
    """Select one point per non-empty alternate box of the lower-bound
    partition; the box dimensions certify compatibility by construction.

    Directed case: 4k time slabs of width t/4k; a point is taken from the
    first k non-empty even slabs whose |x| lies inside the admissible band.
    Non-directed case: squares of side pi*r/sqrt(m) enumerated along a
    clockwise spiral from the origin, trimmed to the budget.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(spec, (Holder, Entropy)):
        return _greedy_box_directed(cloud, spec, k)
    if isinstance(spec, NonDirEntropy):
        return _greedy_box_spiral(cloud, spec, k)
    raise TypeError(f"unsupported spec for box construction: {spec!r}")


def _domain_extent(cloud):
    d = cloud.domain
    if isinstance(d, Box):
        return d.t, d.halfwidth
    if isinstance(d, Strip):
        return d.t, d.window
    raise ValueError("directed box construction needs a box or strip domain")


def _greedy_box_directed(cloud, spec, k):
    _require_kind(cloud, "directed")
    t, x = _domain_extent(cloud)
    if isinstance(spec, Holder):
        half = spec.A * (t / (4.0 * k)) ** spec.gamma / 2.0
    else:
        half = (spec.B ** (1.0 / spec.a) * (t / 4.0) ** (spec.b / spec.a)
                / (2.0 * k ** ((spec.b + 1.0) / spec.a)))
    half = min(half, x)
    slab = t / (4.0 * k)
    ts, xs = cloud.ts, cloud.xs
    picked = []
    for i in range(1, 2 * k + 1):   # even slabs B_2, B_4, ...
        lo = (2 * i - 1) * slab
        hi = 2 * i * slab
        inside = np.nonzero((ts >= lo) & (ts < hi) & (np.abs(xs) <= half))[0]
        if inside.size:
            picked.append(int(inside[0]))
        if len(picked) == k:
            break
    chain = Chain(cloud, tuple(picked))
    achieved = _certify(chain, spec)
    return LppSolution(len(picked), chain, achieved, "greedy-box",
                       {"k": k, "band_halfwidth": half})


def _spiral_cells(n_ring_limit):
    """Clockwise square-spiral cell coordinates starting at the origin;
    consecutive cells share an edge."""
    cells = [(0, 0)]
    x = y = 0
    step = 1
    while True:
        for dx, dy in ((1, 0), (0, -1)):
            for _ in range(step):
                x += dx
                y += dy
                cells.append((x, y))
        step += 1
        for dx, dy in ((-1, 0), (0, 1)):
            for _ in range(step):
                x += dx
                y += dy
                cells.append((x, y))
        step += 1
        if step // 2 > n_ring_limit:
            return cells


def _greedy_box_spiral(cloud, spec, k):
    _require_kind(cloud, "planar")
    m = cloud.n
    if m == 0:
        raise ValueError("empty cloud has no box partition")
    r = cloud.domain.r
    delta = math.pi * r / math.sqrt(m)
    half_side = r / math.sqrt(2.0)
    rings = int((half_side / delta - 0.5))
    n_cells = (2 * rings + 1) ** 2 if rings >= 0 else 0
    n_cells = min(n_cells, max(m // 4, 1))
    if k > n_cells:
        raise ValueError(
            f"k = {k} exceeds the {n_cells} spiral boxes available")
    cells = _spiral_cells(rings + 1)[:n_cells]
    xs = cloud.pts[:, 0]
    ys = cloud.pts[:, 1]
    ix = np.floor(xs / delta + 0.5).astype(np.int64)
    iy = np.floor(ys / delta + 0.5).astype(np.int64)
    occupants = {}
    for i in range(m):
        keyc = (int(ix[i]), int(iy[i]))
        if keyc not in occupants:
            occupants[keyc] = i
    picked = []
    for cell in cells:
        if cell in occupants:
            picked.append(occupants[cell])
        if len(picked) == k:
            break
    # trim to the budget (the theorem regime makes trimming unlikely)
    while picked and nondir_entropy(spec.t, cloud.pts[picked], spec.a,
                                    spec.b) > spec.B + SLACK:
        picked.pop()
    chain = Chain(cloud, tuple(picked))
    achieved = _certify(chain, spec)
    return LppSolution(len(picked), chain, achieved, "greedy-box",
                       {"k": k, "cell_side": delta, "cells": n_cells})
