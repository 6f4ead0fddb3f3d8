"""Numba kernels backing the solvers.

Everything here is nopython, nogil, and deterministic: random moves use an
explicit splitmix64 counter stream, and all tie-breaks are fixed by scan
order.  The wrappers in ``solvers`` own validation and chain certification.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf

_U = np.uint64


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = z + _U(0x9E3779B97F4A7C15)
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


@njit(cache=True, nogil=True, inline="always")
def _rand_u64(key, counter):
    return _mix64(key + _U(0x632BE59BD9B4E019) * counter)


@njit(cache=True, nogil=True, inline="always")
def _rand_unit(key, counter):
    # uniform in [0, 1) from the (key, counter) stream
    return (_rand_u64(key, counter) >> _U(11)) * 1.1102230246251565e-16


@njit(cache=True, nogil=True, inline="always")
def _rand_below(key, counter, n):
    # explicit int64 cast: uint64 results unify with signed ints as float64
    return np.int64(_rand_u64(key, counter) % _U(n))


# ----------------------------------------------------------------------
# segment costs

@njit(cache=True, nogil=True, inline="always")
def _holder_rhs(dt, gamma, mode, A):
    # A * dt**gamma with fast paths for the common exponents
    if mode == 0:
        return A
    if mode == 1:
        return A * dt
    if mode == 2:
        return A * np.sqrt(dt)
    if mode == 3:
        return A * dt * np.sqrt(dt)
    if mode == 4:
        return A * dt * dt
    return A * dt ** gamma


def holder_mode(gamma: float) -> int:
    if gamma == 0.0:
        return 0
    if gamma == 1.0:
        return 1
    if gamma == 0.5:
        return 2
    if gamma == 1.5:
        return 3
    if gamma == 2.0:
        return 4
    return 5


@njit(cache=True, nogil=True, inline="always")
def _segcost(dt, dx, a, b, mode):
    # |dx|**a / dt**b with fast paths
    if mode == 1:                       # a=2, b=1
        return dx * dx / dt
    if mode == 2:                       # a=2, b=0
        return dx * dx
    if mode == 3:                       # a=1, b=0
        return abs(dx)
    if mode == 4:                       # b=0
        return abs(dx) ** a
    if mode == 5:                       # a=1
        return abs(dx) / dt ** b
    return abs(dx) ** a / dt ** b


def entropy_mode(a: float, b: float) -> int:
    if a == 2.0 and b == 1.0:
        return 1
    if a == 2.0 and b == 0.0:
        return 2
    if a == 1.0 and b == 0.0:
        return 3
    if b == 0.0:
        return 4
    if a == 1.0:
        return 5
    return 0


# ----------------------------------------------------------------------
# Holder longest chain

@njit(cache=True, nogil=True)
def holder_dp(ts, xs, gamma, A, T, has_term, hmode):
    """Longest chain under the local Holder constraint.

    Returns (L, chain indices ascending in t).  ln[i] is the best chain
    length ending at i; the descending scan breaks as soon as the prefix
    maximum cannot improve, and ties between equal-length predecessors pick
    the largest index (first found in the descending scan).
    """
    n = ts.size
    ln = np.full(n, -1, dtype=np.int64)
    par = np.full(n, -2, dtype=np.int64)
    pref = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        ti = ts[i]
        xi = xs[i]
        best = -1
        bestj = -2
        if ti > 0.0 and abs(xi) <= _holder_rhs(ti, gamma, hmode, A):
            best = 1
            bestj = -1
        for j in range(i - 1, -1, -1):
            if pref[j] + 1 <= best:
                break
            lj = ln[j]
            if lj >= 1 and lj + 1 > best:
                dt = ti - ts[j]
                if dt > 0.0 and abs(xi - xs[j]) <= _holder_rhs(dt, gamma,
                                                               hmode, A):
                    best = lj + 1
                    bestj = j
        ln[i] = best
        par[i] = bestj
        pref[i] = best if i == 0 else max(pref[i - 1], best)

    L = 0
    besti = -1
    for i in range(n):
        if ln[i] < 1 or ln[i] <= L:
            continue
        if has_term:
            dt = T - ts[i]
            if dt <= 0.0 or abs(xs[i]) > _holder_rhs(dt, gamma, hmode, A):
                continue
        L = ln[i]
        besti = i

    chain = np.empty(L, dtype=np.int64)
    k = L - 1
    i = besti
    while k >= 0:
        chain[k] = i
        i = par[i]
        k -= 1
    return L, chain


# ----------------------------------------------------------------------
# entropy budgeted cardinality DP

@njit(cache=True, nogil=True)
def _entropy_layer_generic(ts, xs, fprev, a, b, B, slack, mode, fcur, par,
                           warm):
    """One min-plus layer, scanning predecessors in ascending fprev order.

    The scan stops as soon as fprev[j] >= best because segment costs are
    nonnegative.  ``warm`` carries each point's parent from the previous
    layer; evaluating it (and the point's own previous parent chain entry)
    first tightens ``best`` before the ordered scan, which shortens it a lot
    in the bulk.
    """
    n = ts.size
    order = np.argsort(fprev)
    any_alive = False
    for i in range(n):
        ti = ts[i]
        xi = xs[i]
        best = INF
        bestj = -2
        j0 = warm[i]
        if j0 >= 0 and ts[j0] < ti and fprev[j0] < INF:
            best = fprev[j0] + _segcost(ti - ts[j0], xi - xs[j0], a, b, mode)
            bestj = j0
        for oi in range(n):
            j = order[oi]
            fj = fprev[j]
            if fj >= best:
                break
            if ts[j] >= ti:
                continue
            c = fj + _segcost(ti - ts[j], xi - xs[j], a, b, mode)
            if c < best:
                best = c
                bestj = j
        if best <= B + slack:
            fcur[i] = best
            par[i] = bestj
            any_alive = True
        else:
            fcur[i] = INF
            par[i] = -2
    return any_alive


@njit(cache=True, nogil=True)
def _entropy_layer_parab(ts, xs, xrank, gx, fprev, B, slack, fcur, par):
    """(a=2, b=0) layer via the convex hull trick.

    f_j + (x - x_j)^2 = x^2 + (-2 x_j) x + (f_j + x_j^2): equal-curvature
    parabolas reduce to lines, maintained in a Li Chao tree over the sorted
    query grid gx.  Points are inserted in time order so only j with
    t_j < t_i are present when i is queried.
    """
    n = ts.size
    tree = np.full(4 * n + 4, -1, dtype=np.int64)
    Ms = np.empty(n)
    Cs = np.empty(n)
    owner = np.empty(n, dtype=np.int64)
    nlines = 0
    any_alive = False
    for i in range(n):
        xi = xs[i]
        # query lower envelope at xi
        best = INF
        bestj = -2
        node = 1
        lo = 0
        hi = n - 1
        pos = xrank[i]
        while True:
            cur = tree[node]
            if cur >= 0:
                v = Ms[cur] * xi + Cs[cur]
                if v < best:
                    best = v
                    bestj = owner[cur]
            if lo == hi:
                break
            mid = (lo + hi) >> 1
            if pos <= mid:
                node = 2 * node
                hi = mid
            else:
                node = 2 * node + 1
                lo = mid + 1
        if bestj >= 0:
            c = best + xi * xi
            if c <= B + slack:
                fcur[i] = c
                par[i] = bestj
                any_alive = True
            else:
                fcur[i] = INF
                par[i] = -2
        else:
            fcur[i] = INF
            par[i] = -2
        # insert line for i (available to later, strictly larger t)
        if fprev[i] < INF:
            nid = nlines
            Ms[nid] = -2.0 * xs[i]
            Cs[nid] = fprev[i] + xs[i] * xs[i]
            owner[nid] = i
            nlines += 1
            node = 1
            lo = 0
            hi = n - 1
            while True:
                mid = (lo + hi) >> 1
                cur = tree[node]
                if cur == -1:
                    tree[node] = nid
                    break
                xm = gx[mid]
                if Ms[nid] * xm + Cs[nid] < Ms[cur] * xm + Cs[cur]:
                    tree[node] = nid
                    tmp = cur
                    cur = nid
                    nid = tmp
                if lo == hi:
                    break
                xl = gx[lo]
                if Ms[nid] * xl + Cs[nid] < Ms[cur] * xl + Cs[cur]:
                    node = 2 * node
                    hi = mid
                else:
                    xh = gx[hi]
                    if Ms[nid] * xh + Cs[nid] < Ms[cur] * xh + Cs[cur]:
                        node = 2 * node + 1
                        lo = mid + 1
                    else:
                        break
    return any_alive


@njit(cache=True, nogil=True)
def _entropy_layer_abs(ts, xs, xrank, fprev, B, slack, fcur, par):
    """(a=1, b=0) layer: f_j + |x - x_j| via two Fenwick min trees."""
    n = ts.size
    left = np.full(n + 1, INF)    # min of f_j - x_j over xrank <= r
    right = np.full(n + 1, INF)   # min of f_j + x_j over xrank >= r
    lidx = np.full(n + 1, -2, dtype=np.int64)
    ridx = np.full(n + 1, -2, dtype=np.int64)
    any_alive = False
    for i in range(n):
        xi = xs[i]
        best = INF
        bestj = -2
        # prefix min over ranks <= xrank[i]
        r = xrank[i] + 1
        while r > 0:
            if left[r] < INF:
                v = left[r] + xi
                if v < best:
                    best = v
                    bestj = lidx[r]
            r -= r & (-r)
        # suffix min over ranks >= xrank[i]  (stored reversed)
        r = n - xrank[i]
        while r > 0:
            if right[r] < INF:
                v = right[r] - xi
                if v < best:
                    best = v
                    bestj = ridx[r]
            r -= r & (-r)
        if bestj >= 0 and best <= B + slack:
            fcur[i] = best
            par[i] = bestj
            any_alive = True
        else:
            fcur[i] = INF
            par[i] = -2
        if fprev[i] < INF:
            vl = fprev[i] - xi
            r = xrank[i] + 1
            while r <= n:
                if vl < left[r]:
                    left[r] = vl
                    lidx[r] = i
                r += r & (-r)
            vr = fprev[i] + xi
            r = n - xrank[i]
            while r <= n:
                if vr < right[r]:
                    right[r] = vr
                    ridx[r] = i
                r += r & (-r)
    return any_alive


@njit(cache=True, nogil=True)
def entropy_dp(ts, xs, a, b, B, T, has_term, slack, mode):
    """Budgeted-cardinality DP: f(i, k) = minimal entropy of a k-chain
    ending at i.  Returns (L, chain indices).

    Layers advance while some f stays within budget, which is monotone in k
    because a (k+1)-chain's k-prefix is cheaper.  With a terminal point the
    feasible k need not be contiguous, so the best feasible k is tracked
    across all layers.
    """
    n = ts.size
    chain0 = np.empty(0, dtype=np.int64)
    if n == 0:
        return 0, chain0

    use_parab = mode == 2
    use_abs = mode == 3
    xrank = np.empty(n, dtype=np.int64)
    gx = np.empty(n)
    if use_parab or use_abs:
        xorder = np.argsort(xs)
        for r in range(n):
            xrank[xorder[r]] = r
            gx[r] = xs[xorder[r]]

    cap = 64
    par = np.full((cap, n), -2, dtype=np.int32)
    fprev = np.empty(n)
    fcur = np.empty(n)
    lpar = np.full(n, -2, dtype=np.int64)
    warm = np.full(n, -2, dtype=np.int64)

    # layer 1: origin -> i
    any_alive = False
    for i in range(n):
        c = _segcost(ts[i], xs[i], a, b, mode) if ts[i] > 0.0 else INF
        if c <= B + slack:
            fprev[i] = c
            par[0, i] = -1
            any_alive = True
        else:
            fprev[i] = INF

    bestL = 0
    bestk = 0
    besti = -1
    k = 1
    while any_alive:
        # terminal feasibility at layer k
        if has_term:
            for i in range(n):
                if fprev[i] == INF:
                    continue
                dt = T - ts[i]
                if dt <= 0.0:
                    continue
                if fprev[i] + _segcost(dt, -xs[i], a, b, mode) <= B + slack:
                    if k > bestL:
                        bestL = k
                        bestk = k
                        besti = i
                    break
        else:
            if k > bestL:
                for i in range(n):
                    if fprev[i] < INF:
                        bestL = k
                        bestk = k
                        besti = i
                        break
        if k >= n:
            break
        # transition to layer k+1
        if k >= cap:
            newpar = np.full((cap * 2, n), -2, dtype=np.int32)
            newpar[:cap] = par
            par = newpar
            cap *= 2
        if use_parab:
            any_alive = _entropy_layer_parab(ts, xs, xrank, gx, fprev, B,
                                             slack, fcur, lpar)
        elif use_abs:
            any_alive = _entropy_layer_abs(ts, xs, xrank, fprev, B, slack,
                                           fcur, lpar)
        else:
            any_alive = _entropy_layer_generic(ts, xs, fprev, a, b, B, slack,
                                               mode, fcur, lpar, warm)
        for i in range(n):
            warm[i] = lpar[i]
        for i in range(n):
            par[k, i] = np.int32(lpar[i])
            fprev[i] = fcur[i]
        k += 1

    if bestL == 0:
        return 0, chain0
    chain = np.empty(bestL, dtype=np.int64)
    i = besti
    for kk in range(bestk - 1, -1, -1):
        chain[kk] = i
        i = par[kk, i]
    return bestL, chain


# ----------------------------------------------------------------------
# directed polymer variational DP

@njit(cache=True, nogil=True)
def polymer_dp(ts, xs, a, b, beta, T, mode):
    """max over chains of beta * |chain| - entropy(chain + terminal (T, 0)).

    g(i) is the best value of a chain ending at i, before the terminal
    segment.  The empty chain has value 0.
    """
    n = ts.size
    g = np.full(n, -INF)
    par = np.full(n, -2, dtype=np.int64)
    pref = np.full(n, -INF)
    for i in range(n):
        ti = ts[i]
        xi = xs[i]
        best = -INF
        bestj = -2
        if ti > 0.0:
            best = beta - _segcost(ti, xi, a, b, mode)
            bestj = -1
        for j in range(i - 1, -1, -1):
            if pref[j] + beta <= best:
                break
            if ts[j] >= ti:
                continue
            c = g[j] + beta - _segcost(ti - ts[j], xi - xs[j], a, b, mode)
            if c > best:
                best = c
                bestj = j
        g[i] = best
        par[i] = bestj
        pref[i] = best if i == 0 else max(pref[i - 1], best)

    value = 0.0
    besti = -1
    for i in range(n):
        dt = T - ts[i]
        if dt <= 0.0 or g[i] == -INF:
            continue
        v = g[i] - _segcost(dt, -xs[i], a, b, mode)
        if v > value:
            value = v
            besti = i

    length = 0
    i = besti
    while i >= 0:
        length += 1
        i = par[i]
    chain = np.empty(length, dtype=np.int64)
    i = besti
    for kk in range(length - 1, -1, -1):
        chain[kk] = i
        i = par[i]
    return value, chain


# ----------------------------------------------------------------------
# brute-force oracles

@njit(cache=True, nogil=True)
def brute_directed(ts, xs, is_entropy, p1, p2, budget, T, has_term, slack,
                   hmode, emode):
    """Exhaustive subset enumeration in time order.  p1, p2 = (gamma, A)
    for Holder or (a, b) for entropy.  Returns (L, best achieved at L)."""
    n = ts.size
    bestL = 0
    bestval = 0.0
    for mask in range(1 << n):
        # evaluate the chain of set bits in index (= time) order
        k = 0
        val = 0.0
        tprev = 0.0
        xprev = 0.0
        ok = True
        for i in range(n):
            if not (mask >> i) & 1:
                continue
            dt = ts[i] - tprev
            if dt <= 0.0:
                ok = False
                break
            if is_entropy:
                val += _segcost(dt, xs[i] - xprev, p1, p2, emode)
            else:
                seg = abs(xs[i] - xprev) / _holder_rhs(dt, p1, hmode, 1.0)
                if seg > val:
                    val = seg
            if val > budget + slack:
                ok = False
                break
            tprev = ts[i]
            xprev = xs[i]
            k += 1
        if not ok:
            continue
        if has_term:
            dt = T - tprev
            if dt <= 0.0:
                continue
            if is_entropy:
                val += _segcost(dt, -xprev, p1, p2, emode)
            else:
                seg = abs(xprev) / _holder_rhs(dt, p1, hmode, 1.0)
                if seg > val:
                    val = seg
            if val > budget + slack:
                continue
        if k > bestL or (k == bestL and val < bestval):
            bestL = k
            bestval = val
    return bestL, bestval


@njit(cache=True, nogil=True)
def brute_polymer(ts, xs, a, b, beta, T, emode):
    n = ts.size
    best = 0.0
    for mask in range(1 << n):
        k = 0
        ent = 0.0
        tprev = 0.0
        xprev = 0.0
        ok = True
        for i in range(n):
            if not (mask >> i) & 1:
                continue
            dt = ts[i] - tprev
            if dt <= 0.0:
                ok = False
                break
            ent += _segcost(dt, xs[i] - xprev, a, b, emode)
            tprev = ts[i]
            xprev = xs[i]
            k += 1
        if not ok:
            continue
        dt = T - tprev
        if dt <= 0.0:
            continue
        ent += _segcost(dt, -xprev, a, b, emode)
        v = beta * k - ent
        if v > best:
            best = v
    return best


@njit(cache=True, nogil=True)
def brute_nondir(px, py, p, Dlim):
    """Exact max cardinality over ordered subsets with additive length
    budget: sum of |segment|**p <= Dlim.  DFS with partial-sum pruning."""
    m = px.size
    best = 0
    if m == 0:
        return 0
    cand = np.zeros(m + 1, dtype=np.int64)
    chosen = np.full(m + 1, -1, dtype=np.int64)
    csum = np.zeros(m + 1)
    last = np.full(m + 1, -1, dtype=np.int64)
    used = 0
    depth = 0
    while depth >= 0:
        advanced = False
        c = cand[depth]
        lx = 0.0 if last[depth] < 0 else px[last[depth]]
        ly = 0.0 if last[depth] < 0 else py[last[depth]]
        while c < m:
            if not (used >> c) & 1:
                step = np.hypot(px[c] - lx, py[c] - ly) ** p
                news = csum[depth] + step
                if news <= Dlim:
                    cand[depth] = c + 1
                    chosen[depth] = c
                    used |= 1 << c
                    depth += 1
                    last[depth] = c
                    csum[depth] = news
                    cand[depth] = 0
                    if depth > best:
                        best = depth
                    advanced = True
                    break
            c += 1
        if not advanced:
            depth -= 1
            if depth >= 0:
                used &= ~(1 << chosen[depth])
    return best


@njit(cache=True, nogil=True)
def brute_heavy(ws, px, py, beta, nu):
    """Exact max of beta * sum(w) - length^nu over ordered subsets.

    Prunes a branch when even collecting every remaining weight for free
    cannot beat the incumbent."""
    m = px.size
    best = 0.0
    if m == 0:
        return 0.0
    total_w = 0.0
    for i in range(m):
        total_w += ws[i]
    cand = np.zeros(m + 1, dtype=np.int64)
    chosen = np.full(m + 1, -1, dtype=np.int64)
    clen = np.zeros(m + 1)
    cw = np.zeros(m + 1)
    last = np.full(m + 1, -1, dtype=np.int64)
    used = 0
    usedw = 0.0
    depth = 0
    while depth >= 0:
        advanced = False
        c = cand[depth]
        lx = 0.0 if last[depth] < 0 else px[last[depth]]
        ly = 0.0 if last[depth] < 0 else py[last[depth]]
        # upper bound for any completion of this prefix
        ub = beta * total_w - clen[depth] ** nu
        if ub > best:
            while c < m:
                if not (used >> c) & 1:
                    newlen = clen[depth] + np.hypot(px[c] - lx, py[c] - ly)
                    neww = cw[depth] + ws[c]
                    v = beta * neww - newlen ** nu
                    if v > best:
                        best = v
                    if beta * total_w - newlen ** nu > best:
                        cand[depth] = c + 1
                        chosen[depth] = c
                        used |= 1 << c
                        depth += 1
                        last[depth] = c
                        clen[depth] = newlen
                        cw[depth] = neww
                        cand[depth] = 0
                        advanced = True
                        break
                c += 1
        if not advanced:
            depth -= 1
            if depth >= 0:
                used &= ~(1 << chosen[depth])
    return best


# ----------------------------------------------------------------------
# Held-Karp over (subset, endpoint) states

@njit(cache=True, nogil=True)
def heldkarp_path(px, py, p, Dlim):
    """Min additive-length paths from the origin over all subsets.

    Returns (L, chain) where L is the max subset size whose cheapest
    visiting path stays within Dlim."""
    m = px.size
    chain0 = np.empty(0, dtype=np.int64)
    if m == 0:
        return 0, chain0
    size = 1 << m
    d0 = np.empty(m)
    for j in range(m):
        d0[j] = np.hypot(px[j], py[j]) ** p
    dmat = np.empty((m, m))
    for j in range(m):
        for k2 in range(m):
            dmat[j, k2] = np.hypot(px[k2] - px[j], py[k2] - py[j]) ** p
    popc = np.zeros(size, dtype=np.uint8)
    for S in range(1, size):
        popc[S] = popc[S >> 1] + (S & 1)
    g = np.full((size, m), INF)
    parent = np.full((size, m), -1, dtype=np.int8)
    for j in range(m):
        if d0[j] <= Dlim:
            g[1 << j, j] = d0[j]
    bestL = 0
    bestS = 0
    bestj = -1
    for S in range(1, size):
        for j in range(m):
            gs = g[S, j]
            if gs > Dlim:
                continue
            if int(popc[S]) > bestL:
                bestL = int(popc[S])
                bestS = S
                bestj = j
            for k2 in range(m):
                if (S >> k2) & 1:
                    continue
                c = gs + dmat[j, k2]
                if c <= Dlim:
                    S2 = S | (1 << k2)
                    if c < g[S2, k2]:
                        g[S2, k2] = c
                        parent[S2, k2] = np.int8(j)
    if bestL == 0:
        return 0, chain0
    chain = np.empty(bestL, dtype=np.int64)
    S = bestS
    j = bestj
    for kk in range(bestL - 1, -1, -1):
        chain[kk] = j
        pj = parent[S, j]
        S &= ~(1 << j)
        j = pj
    return bestL, chain


@njit(cache=True, nogil=True)
def heldkarp_full_order(px, py):
    """Min euclidean path length from origin visiting all points; returns
    (length, order).  Used as the exact order-refinement pass."""
    m = px.size
    order0 = np.empty(0, dtype=np.int64)
    if m == 0:
        return 0.0, order0
    size = 1 << m
    d0 = np.empty(m)
    for j in range(m):
        d0[j] = np.hypot(px[j], py[j])
    dmat = np.empty((m, m))
    for j in range(m):
        for k2 in range(m):
            dmat[j, k2] = np.hypot(px[k2] - px[j], py[k2] - py[j])
    g = np.full((size, m), INF)
    parent = np.full((size, m), -1, dtype=np.int8)
    for j in range(m):
        g[1 << j, j] = d0[j]
    for S in range(1, size):
        for j in range(m):
            gs = g[S, j]
            if gs == INF:
                continue
            for k2 in range(m):
                if (S >> k2) & 1:
                    continue
                c = gs + dmat[j, k2]
                S2 = S | (1 << k2)
                if c < g[S2, k2]:
                    g[S2, k2] = c
                    parent[S2, k2] = np.int8(j)
    full = size - 1
    best = INF
    bestj = -1
    for j in range(m):
        if g[full, j] < best:
            best = g[full, j]
            bestj = j
    order = np.empty(m, dtype=np.int64)
    S = full
    j = bestj
    for kk in range(m - 1, -1, -1):
        order[kk] = j
        pj = parent[S, j]
        S &= ~(1 << j)
        j = pj
    return best, order


# ----------------------------------------------------------------------
# simulated annealing

@njit(cache=True, nogil=True, inline="always")
def _dist(px, py, u, v):
    ux = 0.0 if u < 0 else px[u]
    uy = 0.0 if u < 0 else py[u]
    return np.hypot(px[v] - ux, py[v] - uy)


@njit(cache=True, nogil=True)
def _greedy_budget_init(px, py, p, Dlim, cur):
    """Nearest-neighbor extension from the origin while within budget."""
    m = px.size
    member = np.zeros(m, dtype=np.bool_)
    clen = 0
    total = 0.0
    last = -1
    while clen < m:
        bestd = INF
        bestc = -1
        for c in range(m):
            if member[c]:
                continue
            d = _dist(px, py, last, c) ** p
            if d < bestd:
                bestd = d
                bestc = c
        if bestc < 0 or total + bestd > Dlim:
            break
        cur[clen] = bestc
        member[bestc] = True
        total += bestd
        last = bestc
        clen += 1
    return clen, total, member


@njit(cache=True, nogil=True)
def _insert_delta(px, py, p, cur, clen, c, pos):
    prev = cur[pos - 1] if pos > 0 else -1
    if pos < clen:
        nxt = cur[pos]
        return (_dist(px, py, prev, c) ** p + _dist(px, py, c, nxt) ** p
                - _dist(px, py, prev, nxt) ** p)
    return _dist(px, py, prev, c) ** p


@njit(cache=True, nogil=True)
def _delete_delta(px, py, p, cur, clen, pos):
    prev = cur[pos - 1] if pos > 0 else -1
    c = cur[pos]
    if pos + 1 < clen:
        nxt = cur[pos + 1]
        return (_dist(px, py, prev, nxt) ** p
                - _dist(px, py, prev, c) ** p - _dist(px, py, c, nxt) ** p)
    return -(_dist(px, py, prev, c) ** p)


@njit(cache=True, nogil=True)
def _pick_candidate(knn, member, anchor, key, ctr, m):
    """A non-member near the anchor (or a uniform fallback scan)."""
    K = knn.shape[1]
    off = _rand_below(key, ctr, K)
    for s in range(K):
        c = knn[anchor, (off + s) % K]
        if c >= 0 and not member[c]:
            return c
    start = _rand_below(key, ctr + _U(1), m)
    for s in range(m):
        c = (start + s) % m
        if not member[c]:
            return c
    return -1


@njit(cache=True, nogil=True)
def anneal_nondir(px, py, p, Dlim, knn, key, t0, cooling, ntemps,
                  moves_per_temp, w_ins, w_del, w_rep, tie_w):
    """Budgeted-cardinality annealing.  Energy = -count + tie_w*total/Dlim;
    insertions beyond the budget are rejected outright, so every visited
    state is feasible.  Returns (best count, best order, best total)."""
    m = px.size
    cur = np.empty(m, dtype=np.int64)
    clen, total, member = _greedy_budget_init(px, py, p, Dlim, cur)
    best_order = cur[:clen].copy()
    best_len = clen
    best_total = total
    ctr = _U(1)

    # calibration sweep: ~80% of uphill proposals should accept at t0
    if t0 <= 0.0:
        up = 0.0
        nup = 0
        for s in range(128):
            if clen > 0:
                pos = _rand_below(key, ctr, clen)
                ctr += _U(1)
                de = 1.0 + tie_w * _delete_delta(px, py, p, cur, clen,
                                                 pos) / Dlim
                if de > 0.0:
                    up += de
                    nup += 1
        t0 = (up / nup) / 0.22314355131420976 if nup > 0 else 1.0

    T = t0
    for _lvl in range(ntemps):
        for _mv in range(moves_per_temp):
            u = _rand_unit(key, ctr)
            ctr += _U(1)
            if u < w_ins:
                move = 0
            elif u < w_ins + w_del:
                move = 1
            elif u < w_ins + w_del + w_rep:
                move = 2
            else:
                move = 3
            if move == 0 or (move == 2 and clen > 0):
                # choose candidate near a random member (origin if empty)
                if clen == 0:
                    anchor_knn = 0
                else:
                    anchor_knn = cur[_rand_below(key, ctr, clen)] + 1
                ctr += _U(1)
                delpos = -1
                ddel = 0.0
                vict = -1
                if move == 2:
                    delpos = _rand_below(key, ctr, clen)
                    ctr += _U(1)
                    ddel = _delete_delta(px, py, p, cur, clen, delpos)
                    vict = cur[delpos]
                    for q in range(delpos, clen - 1):
                        cur[q] = cur[q + 1]
                    clen -= 1
                    member[vict] = False
                    total += ddel
                c = _pick_candidate(knn, member, anchor_knn, key, ctr, m)
                ctr += _U(2)
                accepted = False
                if c >= 0:
                    bestpos = 0
                    bestd = INF
                    for pos in range(clen + 1):
                        d = _insert_delta(px, py, p, cur, clen, c, pos)
                        if d < bestd:
                            bestd = d
                            bestpos = pos
                    if total + bestd <= Dlim:
                        de = -1.0 + tie_w * bestd / Dlim
                        if move == 2:
                            de += 1.0 + tie_w * ddel / Dlim
                        if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                            for q in range(clen, bestpos, -1):
                                cur[q] = cur[q - 1]
                            cur[bestpos] = c
                            clen += 1
                            member[c] = True
                            total += bestd
                            accepted = True
                        ctr += _U(1)
                if move == 2 and not accepted:
                    # put the deleted point back where it was
                    dre = _insert_delta(px, py, p, cur, clen, vict, delpos)
                    for q in range(clen, delpos, -1):
                        cur[q] = cur[q - 1]
                    cur[delpos] = vict
                    clen += 1
                    member[vict] = True
                    total += dre
            elif move == 1 and clen > 0:
                pos = _rand_below(key, ctr, clen)
                ctr += _U(1)
                d = _delete_delta(px, py, p, cur, clen, pos)
                de = 1.0 + tie_w * d / Dlim
                if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                    vict = cur[pos]
                    for q in range(pos, clen - 1):
                        cur[q] = cur[q + 1]
                    clen -= 1
                    member[vict] = False
                    total += d
                ctr += _U(1)
            elif move == 3 and clen > 1:
                i = _rand_below(key, ctr, clen)
                j = _rand_below(key, ctr + _U(1), clen)
                ctr += _U(2)
                if i > j:
                    i, j = j, i
                if i < j:
                    prev = cur[i - 1] if i > 0 else -1
                    d = (_dist(px, py, prev, cur[j]) ** p
                         - _dist(px, py, prev, cur[i]) ** p)
                    if j + 1 < clen:
                        nxt = cur[j + 1]
                        d += (_dist(px, py, cur[i], nxt) ** p
                              - _dist(px, py, cur[j], nxt) ** p)
                    de = tie_w * d / Dlim
                    if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                        lo = i
                        hi = j
                        while lo < hi:
                            cur[lo], cur[hi] = cur[hi], cur[lo]
                            lo += 1
                            hi -= 1
                        total += d
                    ctr += _U(1)
            if clen > best_len or (clen == best_len and total < best_total):
                # re-sum exactly: the incremental total drifts over many moves
                exact = 0.0
                last = -1
                for q in range(clen):
                    exact += _dist(px, py, last, cur[q]) ** p
                    last = cur[q]
                total = exact
                if exact <= Dlim and (clen > best_len
                                      or exact < best_total):
                    best_len = clen
                    best_total = exact
                    best_order = cur[:clen].copy()
        T *= cooling
    return best_len, best_order, best_total


@njit(cache=True, nogil=True, inline="always")
def _dir_cost(ts, xs, u, v, T, a, b, mode):
    """Segment cost between chain nodes; -1 is the origin, -2 the terminal."""
    t0 = 0.0 if u == -1 else ts[u]
    x0 = 0.0 if u == -1 else xs[u]
    t1 = T if v == -2 else ts[v]
    x1 = 0.0 if v == -2 else xs[v]
    return _segcost(t1 - t0, x1 - x0, a, b, mode)


@njit(cache=True, nogil=True)
def anneal_entropy_directed(ts, xs, a, b, Btot, T, has_term, mode, knn, key,
                            t0, cooling, ntemps, moves_per_temp, w_ins,
                            w_del, tie_w):
    """Annealed directed E-LPP: feasible chains only, so the result is a
    lower bound for the exact DP.  Chain order is forced by time, so moves
    are insert / delete / replace; energy = -count + tie_w*entropy/Btot."""
    n = ts.size
    cur = np.empty(n, dtype=np.int64)
    member = np.zeros(n, dtype=np.bool_)
    clen = 0
    ent = 0.0
    best_len = 0
    best_order = np.empty(0, dtype=np.int64)
    ctr = _U(1)
    if t0 <= 0.0:
        t0 = 1.0 / 0.22314355131420976   # ~80% acceptance for dE = +1

    Tcur = t0
    for _lvl in range(ntemps):
        for _mv in range(moves_per_temp):
            u = _rand_unit(key, ctr)
            ctr += _U(1)
            if u < w_ins:
                move = 0
            elif u < w_ins + w_del:
                move = 1
            else:
                move = 2
            if move == 2 and clen == 0:
                move = 0
            if move == 0 or move == 2:
                delpos = -1
                ddel = 0.0
                vict = -1
                anchor = 0 if clen == 0 else \
                    cur[_rand_below(key, ctr, clen)] + 1
                ctr += _U(1)
                if move == 2:
                    delpos = _rand_below(key, ctr, clen)
                    ctr += _U(1)
                    vict = cur[delpos]
                    prev = cur[delpos - 1] if delpos > 0 else -1
                    nxt = cur[delpos + 1] if delpos + 1 < clen else \
                        (-2 if has_term else -3)
                    ddel = -_dir_cost(ts, xs, prev, vict, T, a, b, mode)
                    if nxt != -3:
                        ddel += (_dir_cost(ts, xs, prev, nxt, T, a, b, mode)
                                 - _dir_cost(ts, xs, vict, nxt, T, a, b,
                                             mode))
                    for q in range(delpos, clen - 1):
                        cur[q] = cur[q + 1]
                    clen -= 1
                    member[vict] = False
                    ent += ddel
                c = _pick_candidate(knn, member, anchor, key, ctr, n)
                ctr += _U(2)
                accepted = False
                if c >= 0 and (not has_term or ts[c] < T):
                    # position forced by time order
                    pos = 0
                    lo = 0
                    hi = clen
                    while lo < hi:
                        mid = (lo + hi) >> 1
                        if cur[mid] < c:
                            lo = mid + 1
                        else:
                            hi = mid
                    pos = lo
                    prev = cur[pos - 1] if pos > 0 else -1
                    nxt = cur[pos] if pos < clen else \
                        (-2 if has_term else -3)
                    dins = _dir_cost(ts, xs, prev, c, T, a, b, mode)
                    if nxt != -3:
                        dins += (_dir_cost(ts, xs, c, nxt, T, a, b, mode)
                                 - _dir_cost(ts, xs, prev, nxt, T, a, b,
                                             mode))
                    if ent + dins <= Btot + 1e-12:
                        de = -1.0 + tie_w * dins / Btot
                        if move == 2:
                            de += 1.0 + tie_w * ddel / Btot
                        if de <= 0.0 or _rand_unit(key, ctr) < np.exp(
                                -de / Tcur):
                            for q in range(clen, pos, -1):
                                cur[q] = cur[q - 1]
                            cur[pos] = c
                            clen += 1
                            member[c] = True
                            ent += dins
                            accepted = True
                        ctr += _U(1)
                if move == 2 and not accepted:
                    prev = cur[delpos - 1] if delpos > 0 else -1
                    nxt = cur[delpos] if delpos < clen else \
                        (-2 if has_term else -3)
                    dre = _dir_cost(ts, xs, prev, vict, T, a, b, mode)
                    if nxt != -3:
                        dre += (_dir_cost(ts, xs, vict, nxt, T, a, b, mode)
                                - _dir_cost(ts, xs, prev, nxt, T, a, b,
                                            mode))
                    for q in range(clen, delpos, -1):
                        cur[q] = cur[q - 1]
                    cur[delpos] = vict
                    clen += 1
                    member[vict] = True
                    ent += dre
            elif move == 1 and clen > 0:
                pos = _rand_below(key, ctr, clen)
                ctr += _U(1)
                vict = cur[pos]
                prev = cur[pos - 1] if pos > 0 else -1
                nxt = cur[pos + 1] if pos + 1 < clen else \
                    (-2 if has_term else -3)
                d = -_dir_cost(ts, xs, prev, vict, T, a, b, mode)
                if nxt != -3:
                    d += (_dir_cost(ts, xs, prev, nxt, T, a, b, mode)
                          - _dir_cost(ts, xs, vict, nxt, T, a, b, mode))
                de = 1.0 + tie_w * d / Btot
                if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / Tcur):
                    for q in range(pos, clen - 1):
                        cur[q] = cur[q + 1]
                    clen -= 1
                    member[vict] = False
                    ent += d
                ctr += _U(1)
            if clen > best_len:
                exact = 0.0
                prev = -1
                for q in range(clen):
                    exact += _dir_cost(ts, xs, prev, cur[q], T, a, b, mode)
                    prev = cur[q]
                if has_term:
                    exact += _dir_cost(ts, xs, prev, -2, T, a, b, mode)
                ent = exact
                if exact <= Btot + 1e-12:
                    best_len = clen
                    best_order = cur[:clen].copy()
        Tcur *= cooling
    return best_len, best_order


@njit(cache=True, nogil=True)
def _heavy_value(ws, px, py, order, clen, nu, beta):
    sw = 0.0
    ln = 0.0
    last = -1
    for q in range(clen):
        c = order[q]
        sw += ws[c]
        ln += _dist(px, py, last, c)
        last = c
    return beta * sw - ln ** nu, ln


@njit(cache=True, nogil=True)
def anneal_heavy(ws, px, py, beta, nu, knn, topw, key, t0, cooling, ntemps,
                 moves_per_temp, w_ins, w_del, w_rep):
    """Annealing for beta * sum(w) - length^nu over ordered subsets.

    Energy is the negated objective.  The empty path (value 0) is always a
    candidate, so the returned value is >= 0.  Returns (value, order)."""
    m = px.size
    cur = np.empty(m, dtype=np.int64)
    member = np.zeros(m, dtype=np.bool_)
    clen = 0
    length = 0.0
    sumw = 0.0
    value = 0.0
    best_value = 0.0
    best_order = np.empty(0, dtype=np.int64)
    ctr = _U(1)

    if t0 <= 0.0:
        # crude uphill scale: losing a typical top weight
        t0 = beta * ws[topw[0]] * 0.25 if topw.size > 0 else 1.0
        if t0 <= 0.0:
            t0 = 1.0

    T = t0
    for _lvl in range(ntemps):
        for _mv in range(moves_per_temp):
            u = _rand_unit(key, ctr)
            ctr += _U(1)
            if u < w_ins:
                move = 0
            elif u < w_ins + w_del:
                move = 1
            elif u < w_ins + w_del + w_rep:
                move = 2
            else:
                move = 3
            if move == 0:
                # half the time: a heavy point; otherwise near the path
                if _rand_unit(key, ctr) < 0.5 and topw.size > 0:
                    c = topw[_rand_below(key, ctr + _U(1), topw.size)]
                    if member[c]:
                        c = -1
                else:
                    anchor_knn = 0 if clen == 0 else \
                        cur[_rand_below(key, ctr + _U(1), clen)] + 1
                    c = _pick_candidate(knn, member, anchor_knn, key,
                                        ctr + _U(2), m)
                ctr += _U(4)
                if c >= 0:
                    bestpos = 0
                    bestd = INF
                    for pos in range(clen + 1):
                        d = _insert_delta(px, py, 1.0, cur, clen, c, pos)
                        if d < bestd:
                            bestd = d
                            bestpos = pos
                    nl = length + bestd
                    nv = beta * (sumw + ws[c]) - nl ** nu
                    de = value - nv
                    if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                        for q in range(clen, bestpos, -1):
                            cur[q] = cur[q - 1]
                        cur[bestpos] = c
                        clen += 1
                        member[c] = True
                        length = nl
                        sumw += ws[c]
                        value = nv
                    ctr += _U(1)
            elif move == 1 and clen > 0:
                pos = _rand_below(key, ctr, clen)
                ctr += _U(1)
                d = _delete_delta(px, py, 1.0, cur, clen, pos)
                c = cur[pos]
                nv = beta * (sumw - ws[c]) - (length + d) ** nu
                de = value - nv
                if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                    for q in range(pos, clen - 1):
                        cur[q] = cur[q + 1]
                    clen -= 1
                    member[c] = False
                    length += d
                    sumw -= ws[c]
                    value = nv
                ctr += _U(1)
            elif move == 2 and clen > 0:
                pos = _rand_below(key, ctr, clen)
                anchor_knn = cur[pos] + 1
                vict = cur[pos]
                d = _delete_delta(px, py, 1.0, cur, clen, pos)
                for q in range(pos, clen - 1):
                    cur[q] = cur[q + 1]
                clen -= 1
                member[vict] = False
                c = _pick_candidate(knn, member, anchor_knn, key,
                                    ctr + _U(1), m)
                ctr += _U(3)
                accepted = False
                if c >= 0:
                    bestpos = 0
                    bestd = INF
                    for pos2 in range(clen + 1):
                        dd = _insert_delta(px, py, 1.0, cur, clen, c, pos2)
                        if dd < bestd:
                            bestd = dd
                            bestpos = pos2
                    nl = length + d + bestd
                    nv = beta * (sumw - ws[vict] + ws[c]) - nl ** nu
                    de = value - nv
                    if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                        for q in range(clen, bestpos, -1):
                            cur[q] = cur[q - 1]
                        cur[bestpos] = c
                        clen += 1
                        member[c] = True
                        length = nl
                        sumw += ws[c] - ws[vict]
                        value = nv
                        accepted = True
                    ctr += _U(1)
                if not accepted:
                    dre = _insert_delta(px, py, 1.0, cur, clen, vict, pos)
                    for q in range(clen, pos, -1):
                        cur[q] = cur[q - 1]
                    cur[pos] = vict
                    clen += 1
                    member[vict] = True
                    length += d + dre
            elif move == 3 and clen > 1:
                i = _rand_below(key, ctr, clen)
                j = _rand_below(key, ctr + _U(1), clen)
                ctr += _U(2)
                if i > j:
                    i, j = j, i
                if i < j:
                    prev = cur[i - 1] if i > 0 else -1
                    d = (_dist(px, py, prev, cur[j])
                         - _dist(px, py, prev, cur[i]))
                    if j + 1 < clen:
                        nxt = cur[j + 1]
                        d += (_dist(px, py, cur[i], nxt)
                              - _dist(px, py, cur[j], nxt))
                    nv = beta * sumw - (length + d) ** nu
                    de = value - nv
                    if de <= 0.0 or _rand_unit(key, ctr) < np.exp(-de / T):
                        lo = i
                        hi = j
                        while lo < hi:
                            cur[lo], cur[hi] = cur[hi], cur[lo]
                            lo += 1
                            hi -= 1
                        length += d
                        value = nv
                    ctr += _U(1)
            if value > best_value:
                best_value = value
                best_order = cur[:clen].copy()
        T *= cooling
    return best_value, best_order
