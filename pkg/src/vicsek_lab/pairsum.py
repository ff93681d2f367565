"""Ball-restricted pair sums over level vertices.

Computes S = sum over ordered vertex pairs (x, y) with d(x, y) < rho_n of
|u(x) - u(y)|^p, the kernel behind every discrete Besov functional.  Two
routes are provided:

* a brute-force double loop, the oracle, kept deliberately simple;
* a cell-tree route: vertices are grouped by the cell that first created
  them (an ownership partition), cells form nested axis-aligned squares on
  the scaled lattice, and square-vs-square distance bounds classify cell
  pairs as all-in (closed form / moments), all-out (pruned), or straddling
  (recursed, brute-forced on small blocks).

All geometric predicates are exact integer comparisons: at scale m the
pair (x, y) qualifies iff (dx^2 + dy^2) * L_n^2 < 8 * L_m^2 (open ball).
In exact mode values are integers over a common denominator and the kernel
returns an integer, so the result is independent of summation order and
can be compared bit-for-bit against the brute-force oracle.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, ScaleMismatchError
from .geometry import VicsekLevel, _cell_centers

_LEAF_MAX = 256


class CellPairIndex:
    """Vertices of one level grouped by owner-cell ancestry at every level."""

    def __init__(self, level: VicsekLevel):
        self.level = level
        ratios = level.ratios
        m = level.n
        order = np.argsort(level.owner_word, kind="stable").astype(np.int64)
        self.order = order
        owner_sorted = level.owner_word[order]
        self.xs = level.coords[order, 0].copy()
        self.ys = level.coords[order, 1].copy()
        self.bounds: list[np.ndarray] = []
        self.centers_x: list[np.ndarray] = []
        self.centers_y: list[np.ndarray] = []
        self.half: list[int] = []
        self.children: list[int] = []  # alphabet size at each level
        Lm = level.L
        for k in range(m + 1):
            stride = 1
            for j in range(k + 1, m + 1):
                stride *= 2 * ratios.ratio(j) - 1
            num_k = ratios.num_words(k)
            starts = np.searchsorted(
                owner_sorted, np.arange(num_k + 1, dtype=np.int64) * stride
            )
            self.bounds.append(starts.astype(np.int64))
            f = Lm // ratios.length_product(k)
            centers = _cell_centers(ratios, k)
            cx = np.fromiter((c[0] for c in centers), dtype=np.int64, count=num_k)
            cy = np.fromiter((c[1] for c in centers), dtype=np.int64, count=num_k)
            self.centers_x.append(cx * f)
            self.centers_y.append(cy * f)
            self.half.append(f)
            self.children.append(2 * ratios.ratio(k + 1) - 1 if k < m else 0)
        self.max_level = m


def _pair_index(level: VicsekLevel) -> CellPairIndex:
    idx = getattr(level, "_pair_index_cache", None)
    if idx is None:
        idx = CellPairIndex(level)
        level._pair_index_cache = idx
    return idx


def _qualify_threshold(level: VicsekLevel, n: int) -> tuple[int, int]:
    """(Ln2, T): pair qualifies iff ds2 * Ln2 < T."""
    if n < 0 or n > level.n:
        raise ScaleMismatchError(
            f"radius index {n} invalid for level {level.n} vertices"
        )
    Ln = level.ratios.length_product(n)
    Lm = level.L
    return Ln * Ln, 8 * Lm * Lm


# ---------------------------------------------------------------------------
# brute force (oracle)
# ---------------------------------------------------------------------------


def ball_pair_sum_bruteforce(level: VicsekLevel, values, p, n: int):
    """O(V^2) double loop; exact when given (den, ints), float on arrays.

    Exact mode returns the integer sum of |di - dj|^p over qualifying pairs
    (denominators are applied by the caller); float mode returns a float.
    """
    Ln2, T = _qualify_threshold(level, n)
    if isinstance(values, tuple):
        den, ints = values
        p = int(p)
        xs = level.coords[:, 0].tolist()
        ys = level.coords[:, 1].tolist()
        V = level.num_vertices
        total = 0
        for i in range(V):
            xi = xs[i]
            yi = ys[i]
            vi = ints[i]
            for j in range(i + 1, V):
                dx = xi - xs[j]
                dy = yi - ys[j]
                if (dx * dx + dy * dy) * Ln2 < T:
                    d = vi - ints[j]
                    total += d * d if p == 2 else abs(d) ** p
        return 2 * total
    vals = np.asarray(values, dtype=np.float64)
    squeeze = vals.ndim == 1
    if squeeze:
        vals = vals[:, None]
    xs = level.coords[:, 0]
    ys = level.coords[:, 1]
    V = level.num_vertices
    pf = float(p)
    chunk = max(1, min(V, 8_000_000 // max(V, 1)))
    partials = []
    for lo in range(0, V, chunk):
        hi = min(lo + chunk, V)
        dx = xs[lo:hi, None] - xs[None, :]
        dy = ys[lo:hi, None] - ys[None, :]
        mask = (dx * dx + dy * dy) * Ln2 < T
        dv = np.abs(vals[lo:hi, None, :] - vals[None, :, :])
        if pf == 2.0:
            dv *= dv
        else:
            dv **= pf
        partials.append(np.einsum("ij,ijf->f", mask, dv))
    total = np.zeros(vals.shape[1])
    for part in partials:
        total += part
    return float(total[0]) if squeeze else total


def ball_row_stats(level: VicsekLevel, values, p, n: int):
    """Per-vertex ball counts and |du|^p row sums (brute force, float)."""
    Ln2, T = _qualify_threshold(level, n)
    vals = np.asarray(values, dtype=np.float64)
    xs = level.coords[:, 0]
    ys = level.coords[:, 1]
    V = level.num_vertices
    pf = float(p)
    counts = np.zeros(V, dtype=np.int64)
    sums = np.zeros(V)
    chunk = max(1, min(V, 8_000_000 // max(V, 1)))
    for lo in range(0, V, chunk):
        hi = min(lo + chunk, V)
        dx = xs[lo:hi, None] - xs[None, :]
        dy = ys[lo:hi, None] - ys[None, :]
        mask = (dx * dx + dy * dy) * Ln2 < T
        dv = np.abs(vals[lo:hi, None] - vals[None, :]) ** pf
        counts[lo:hi] = mask.sum(axis=1)
        sums[lo:hi] = (dv * mask).sum(axis=1)
    return counts, sums


# ---------------------------------------------------------------------------
# cell-tree route
# ---------------------------------------------------------------------------


def ball_pair_sum_indexed(
    level: VicsekLevel, values, p, n: int, leaf_max: int = _LEAF_MAX
):
    """Cell-tree pair sum; same contract as the brute-force route.

    Identical summands, different organization: the traversal classifies
    square pairs by exact min/max distance bounds, takes closed forms on
    fully-inside blocks, and only enumerates pairs near the critical sphere.
    """
    Ln2, T = _qualify_threshold(level, n)
    idx = _pair_index(level)
    if isinstance(values, tuple):
        den, ints = values
        return _indexed_exact(idx, ints, int(p), Ln2, T, leaf_max)
    vals = np.asarray(values, dtype=np.float64)
    squeeze = vals.ndim == 1
    if squeeze:
        vals = vals[:, None]
    out = _indexed_float(idx, vals, float(p), Ln2, T, leaf_max)
    return float(out[0]) if squeeze else out


def _box_bounds(idx: CellPairIndex, ka, ia, kb, ib):
    ax = int(idx.centers_x[ka][ia])
    ay = int(idx.centers_y[ka][ia])
    bx = int(idx.centers_x[kb][ib])
    by = int(idx.centers_y[kb][ib])
    hh = idx.half[ka] + idx.half[kb]
    dx = abs(ax - bx)
    dy = abs(ay - by)
    dx_min = dx - hh if dx > hh else 0
    dy_min = dy - hh if dy > hh else 0
    dx_max = dx + hh
    dy_max = dy + hh
    return dx_min * dx_min + dy_min * dy_min, dx_max * dx_max + dy_max * dy_max


def _indexed_float(idx, vals, pf, Ln2, T, leaf_max):
    F = vals.shape[1]
    vs = vals[idx.order]
    P1 = np.zeros((vs.shape[0] + 1, F))
    np.cumsum(vs, axis=0, out=P1[1:])
    if pf == 2.0:
        P2 = np.zeros_like(P1)
        np.cumsum(vs * vs, axis=0, out=P2[1:])
    xs = idx.xs
    ys = idx.ys
    total = np.zeros(F)

    def full_block(loa, hia, lob, hib, w):
        cnta = hia - loa
        cntb = hib - lob
        if pf == 2.0:
            Sa = P1[hia] - P1[loa]
            Sb = P1[hib] - P1[lob]
            Qa = P2[hia] - P2[loa]
            Qb = P2[hib] - P2[lob]
            return w * (cntb * Qa - 2.0 * Sa * Sb + cnta * Qb)
        dv = np.abs(vs[loa:hia, None, :] - vs[None, lob:hib, :]) ** pf
        return w * dv.sum(axis=(0, 1))

    def leaf_block(loa, hia, lob, hib, w):
        dx = xs[loa:hia, None] - xs[None, lob:hib]
        dy = ys[loa:hia, None] - ys[None, lob:hib]
        mask = (dx * dx + dy * dy) * Ln2 < T
        if not mask.any():
            return None
        if pf == 2.0:
            # masked sum of (vi - vj)^2 via matrix products
            M = mask.astype(np.float64)
            va = vs[loa:hia]
            vb = vs[lob:hib]
            rows = M.sum(axis=1)
            cols = M.sum(axis=0)
            cross = (va * (M @ vb)).sum(axis=0)
            return w * (rows @ (va * va) + cols @ (vb * vb) - 2.0 * cross)
        dv = np.abs(vs[loa:hia, None, :] - vs[None, lob:hib, :]) ** pf
        return w * np.einsum("ij,ijf->f", mask, dv)

    bounds = idx.bounds
    children = idx.children
    mlev = idx.max_level
    stack = [(0, 0, 0, 0, 1)]
    while stack:
        ka, ia, kb, ib, w = stack.pop()
        dmin2, dmax2 = _box_bounds(idx, ka, ia, kb, ib)
        if dmin2 * Ln2 >= T:
            continue
        loa, hia = int(bounds[ka][ia]), int(bounds[ka][ia + 1])
        lob, hib = int(bounds[kb][ib]), int(bounds[kb][ib + 1])
        if dmax2 * Ln2 < T:
            total += full_block(loa, hia, lob, hib, w)
            continue
        same = ka == kb and ia == ib
        sa = hia - loa
        sb = hib - lob
        if same:
            if ka == mlev or sa <= leaf_max:
                out = leaf_block(loa, hia, lob, hib, w)
                if out is not None:
                    total += out
                continue
            c = children[ka]
            base = ia * c
            for i in range(c):
                stack.append((ka + 1, base + i, ka + 1, base + i, w))
                for j in range(i + 1, c):
                    stack.append((ka + 1, base + i, ka + 1, base + j, 2 * w))
            continue
        a_leaf = ka == mlev or sa <= leaf_max
        b_leaf = kb == mlev or sb <= leaf_max
        if a_leaf and b_leaf:
            out = leaf_block(loa, hia, lob, hib, w)
            if out is not None:
                total += out
            continue
        if not a_leaf and (b_leaf or sa >= sb):
            c = children[ka]
            base = ia * c
            for i in range(c):
                stack.append((ka + 1, base + i, kb, ib, w))
        else:
            c = children[kb]
            base = ib * c
            for i in range(c):
                stack.append((ka, ia, kb + 1, base + i, w))
    return total


def _indexed_exact(idx, ints, p, Ln2, T, leaf_max):
    order = idx.order.tolist()
    vs = [ints[i] for i in order]
    V = len(vs)
    P1 = [0] * (V + 1)
    P2 = [0] * (V + 1)
    acc1 = 0
    acc2 = 0
    for i, v in enumerate(vs):
        acc1 += v
        acc2 += v * v
        P1[i + 1] = acc1
        P2[i + 1] = acc2
    xs = idx.xs.tolist()
    ys = idx.ys.tolist()
    total = 0
    bounds = [b.tolist() for b in idx.bounds]
    children = idx.children
    mlev = idx.max_level

    def full_block(loa, hia, lob, hib):
        cnta = hia - loa
        cntb = hib - lob
        if p == 2:
            Sa = P1[hia] - P1[loa]
            Sb = P1[hib] - P1[lob]
            Qa = P2[hia] - P2[loa]
            Qb = P2[hib] - P2[lob]
            return cntb * Qa - 2 * Sa * Sb + cnta * Qb
        return sum(
            abs(vs[i] - vs[j]) ** p
            for i in range(loa, hia)
            for j in range(lob, hib)
        )

    def leaf_block(loa, hia, lob, hib):
        out = 0
        for i in range(loa, hia):
            xi = xs[i]
            yi = ys[i]
            vi = vs[i]
            for j in range(lob, hib):
                dx = xi - xs[j]
                dy = yi - ys[j]
                if (dx * dx + dy * dy) * Ln2 < T:
                    d = vi - vs[j]
                    out += d * d if p == 2 else abs(d) ** p
        return out

    stack = [(0, 0, 0, 0, 1)]
    while stack:
        ka, ia, kb, ib, w = stack.pop()
        dmin2, dmax2 = _box_bounds(idx, ka, ia, kb, ib)
        if dmin2 * Ln2 >= T:
            continue
        loa, hia = bounds[ka][ia], bounds[ka][ia + 1]
        lob, hib = bounds[kb][ib], bounds[kb][ib + 1]
        if dmax2 * Ln2 < T:
            total += w * full_block(loa, hia, lob, hib)
            continue
        same = ka == kb and ia == ib
        sa = hia - loa
        sb = hib - lob
        if same:
            if ka == mlev or sa <= leaf_max:
                total += w * leaf_block(loa, hia, lob, hib)
                continue
            c = children[ka]
            base = ia * c
            for i in range(c):
                stack.append((ka + 1, base + i, ka + 1, base + i, w))
                for j in range(i + 1, c):
                    stack.append((ka + 1, base + i, ka + 1, base + j, 2 * w))
            continue
        a_leaf = ka == mlev or sa <= leaf_max
        b_leaf = kb == mlev or sb <= leaf_max
        if a_leaf and b_leaf:
            total += w * leaf_block(loa, hia, lob, hib)
            continue
        if not a_leaf and (b_leaf or sa >= sb):
            c = children[ka]
            base = ia * c
            for i in range(c):
                stack.append((ka + 1, base + i, kb, ib, w))
        else:
            c = children[kb]
            base = ib * c
            for i in range(c):
                stack.append((ka, ia, kb + 1, base + i, w))
    return total


def ball_pair_sum(level: VicsekLevel, values, p, n: int, method: str = "auto"):
    """Dispatch between the indexed route and the brute-force oracle."""
    if method == "auto":
        if isinstance(values, tuple):
            method = "indexed"
        else:
            pf = float(p)
            method = "indexed" if pf == 2.0 or level.num_vertices <= 3000 else "bruteforce"
    if method == "indexed":
        return ball_pair_sum_indexed(level, values, p, n)
    if method == "bruteforce":
        return ball_pair_sum_bruteforce(level, values, p, n)
    raise InvalidArgumentError(f"unknown method {method!r}")
