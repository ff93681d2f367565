"""Discrete p-energies, piecewise-affine functions, gradients, resistances.

The test-function class is the space of base-level piecewise-affine
functions: stored as exact rational values on the base-level vertices,
extended to finer levels by linear interpolation along subdivided edges and
constant continuation into hanging branches.  For these functions every
discrete energy is exact when p is an integer: values are carried as
integers over a common denominator, so monotonicity and plateau statements
can be asserted with equality rather than tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    LevelError,
    RegionError,
)
from .geometry import Hierarchy, VicsekLevel
from .ratios import p_is_integer
from .words import ancestor_index_stride, word_index


class AffineFunction:
    """A base-level piecewise-affine function, one exact value per vertex."""

    def __init__(self, base_level: int, values: Sequence):
        self.base_level = base_level
        self.values = tuple(Fraction(v) for v in values)

    def __len__(self) -> int:
        return len(self.values)

    def scaled(self) -> tuple[int, list[int]]:
        """(denominator, integer numerators) over the common denominator."""
        den = math.lcm(*(v.denominator for v in self.values)) if self.values else 1
        return den, [int(v * den) for v in self.values]

    def sup_norm(self) -> Fraction:
        """Exact C(K)-norm: affine functions attain extrema on base vertices."""
        return max((abs(v) for v in self.values), default=Fraction(0))

    def scale(self, c) -> "AffineFunction":
        c = Fraction(c)
        return AffineFunction(self.base_level, [c * v for v in self.values])

    def shift(self, c) -> "AffineFunction":
        c = Fraction(c)
        return AffineFunction(self.base_level, [v + c for v in self.values])


def combine(hier: Hierarchy, a: AffineFunction, b: AffineFunction, fn) -> AffineFunction:
    """Pointwise combination at the common refinement of the base levels."""
    base = max(a.base_level, b.base_level)
    va = exact_values_at(hier, a, base)
    vb = exact_values_at(hier, b, base)
    return AffineFunction(base, [fn(x, y) for x, y in zip(va, vb)])


def add(hier: Hierarchy, a: AffineFunction, b: AffineFunction) -> AffineFunction:
    return combine(hier, a, b, lambda x, y: x + y)


def subtract(hier: Hierarchy, a: AffineFunction, b: AffineFunction) -> AffineFunction:
    return combine(hier, a, b, lambda x, y: x - y)


def multiply(hier: Hierarchy, a: AffineFunction, b: AffineFunction) -> AffineFunction:
    """Pointwise product sampled at the common base level.

    The true product is not piecewise affine; this is its affine
    interpolation, which is what the level-n energies of the product are
    evaluated on (a monotone lower bound of the product's energy).
    """
    return combine(hier, a, b, lambda x, y: x * y)


def compose(u: AffineFunction, fn) -> AffineFunction:
    """fn applied to the base values (exact when fn maps rationals to rationals)."""
    return AffineFunction(u.base_level, [Fraction(fn(v)) for v in u.values])


def diagonal_ramp() -> AffineFunction:
    """The canonical ramp: 0 at the lower-left corner, 1 at the upper-right,
    1/2 at the center and on both side corners (base level 0).

    Level-0 vertex ids follow cell slot order: 0 center, then corners in
    diagonal directions 1..4.
    """
    h = Fraction(1, 2)
    return AffineFunction(0, [h, 1, h, 0, h])


def corner_indicator(direction: int = 1) -> AffineFunction:
    """1 at one level-0 corner, 0 elsewhere (base level 0)."""
    vals = [Fraction(0)] * 5
    vals[direction] = Fraction(1)
    return AffineFunction(0, vals)


# ---------------------------------------------------------------------------
# value extension / restriction
# ---------------------------------------------------------------------------


def _check_function(hier: Hierarchy, u: AffineFunction) -> None:
    lv = hier.level(u.base_level)
    if len(u.values) != lv.num_vertices:
        raise InvalidArgumentError(
            f"function has {len(u.values)} values, level {u.base_level} has "
            f"{lv.num_vertices} vertices"
        )


def scaled_values_at(hier: Hierarchy, u: AffineFunction, n: int) -> tuple[int, list[int]]:
    """Exact values on V_n as integers over a common denominator."""
    _check_function(hier, u)
    den, ints = u.scaled()
    base = u.base_level
    if n <= base:
        idx = list(range(hier.level(n).num_vertices))
        for k in range(n, base):
            lift = hier.lift_ids(k)
            idx = [int(lift[i]) for i in idx]
        return den, [ints[i] for i in idx]
    vals = ints
    for k in range(base, n):
        vals, den = _extend_exact(hier, vals, den, k)
    return den, vals


def _extend_exact(hier: Hierarchy, vals: list[int], den: int, k: int):
    ratios = hier.ratios
    l = ratios.ratio(k + 1)
    fine = hier.level(k + 1)
    lift, interior, hang = hier._lift[k], hier._interior[k], hier._hang[k]
    coarse = hier.level(k)
    new = [0] * fine.num_vertices
    lift_l = hier._lists(k, "lift")
    for i, nid in enumerate(lift_l):
        new[nid] = vals[i] * l
    tails = hier._lists(k, "tails")
    heads = hier._lists(k, "heads")
    interior_l = hier._lists(k, "interior")
    for e in range(coarse.num_edges):
        vt = vals[tails[e]]
        d = vals[heads[e]] - vt
        base_v = vt * l
        row = interior_l[e]
        for i in range(1, l):
            new[row[i - 1]] = base_v + i * d
    for v, par in hier._lists(k, "hang"):
        new[v] = new[par]
    return new, den * l


def float_values_at(hier: Hierarchy, u: AffineFunction, n: int) -> np.ndarray:
    """Values on V_n as float64 (exact for dyadic inputs at shallow depth)."""
    _check_function(hier, u)
    base = u.base_level
    vals = np.array([float(v) for v in u.values], dtype=np.float64)
    if n <= base:
        idx = np.arange(hier.level(n).num_vertices, dtype=np.int64)
        for k in range(n, base):
            idx = hier.lift_ids(k)[idx]
        return vals[idx]
    for k in range(base, n):
        vals = _extend_float_step(hier, vals, k)
    return vals


def exact_values_at(hier: Hierarchy, u: AffineFunction, n: int) -> list[Fraction]:
    den, ints = scaled_values_at(hier, u, n)
    return [Fraction(v, den) for v in ints]


def evaluate_affine(hier: Hierarchy, u: AffineFunction, n: int, vertex_id: int) -> Fraction:
    """Exact value of the affine extension at one level-n vertex (n >= base)."""
    if n < u.base_level:
        raise LevelError(
            f"evaluation level {n} below the base level {u.base_level}"
        )
    den, ints = scaled_values_at(hier, u, n)
    return Fraction(ints[vertex_id], den)


# ---------------------------------------------------------------------------
# discrete energies
# ---------------------------------------------------------------------------


def _region_edge_indices(
    level: VicsekLevel, region: Optional[Iterable], region_level: Optional[int]
) -> Optional[np.ndarray]:
    """Indices of edges whose cell descends from one of the region words."""
    if region is None:
        return None
    words = list(region)
    if not words:
        return np.empty(0, dtype=np.int64)
    if region_level is None:
        first = words[0]
        if not isinstance(first, tuple):
            raise RegionError("region words must be letter tuples or indices with region_level")
        region_level = len(first)
    if region_level > level.n:
        raise RegionError(
            f"region words at level {region_level} are deeper than level {level.n}"
        )
    idx = []
    for w in words:
        if isinstance(w, tuple):
            if len(w) != region_level:
                raise RegionError("region words must share one level")
            idx.append(word_index(level.ratios, w))
        else:
            idx.append(int(w))
    stride = ancestor_index_stride(level.ratios, level.n, region_level)
    anc = level.edge_word // stride
    return np.flatnonzero(np.isin(anc, np.asarray(sorted(set(idx)), dtype=np.int64)))


def _int_power_sum(diffs: Iterable[int], p: int) -> int:
    if p == 2:
        return sum(d * d for d in diffs)
    return sum(abs(d) ** p for d in diffs)


def discrete_energy_exact(
    level: VicsekLevel,
    den: int,
    ints: Sequence[int],
    p: int,
    region: Optional[Iterable] = None,
    region_level: Optional[int] = None,
) -> Fraction:
    """(1/2) (prod l_j^{p-1}) * sum over ordered adjacent pairs |du|^p, exact."""
    if not (isinstance(p, int) and p > 1):
        raise InvalidArgumentError(f"exact energies need integer p > 1, got {p}")
    sel = _region_edge_indices(level, region, region_level)
    tails, heads = level._edge_lists()
    if sel is None:
        diffs = (ints[heads[e]] - ints[tails[e]] for e in range(level.num_edges))
    else:
        diffs = (ints[heads[e]] - ints[tails[e]] for e in sel.tolist())
    s = _int_power_sum(diffs, p)
    return Fraction(level.L ** (p - 1) * s, den**p)


def discrete_energy_float(
    level: VicsekLevel,
    values: np.ndarray,
    p: float,
    region: Optional[Iterable] = None,
    region_level: Optional[int] = None,
) -> float:
    sel = _region_edge_indices(level, region, region_level)
    tails = level.edge_tail if sel is None else level.edge_tail[sel]
    heads = level.edge_head if sel is None else level.edge_head[sel]
    d = np.abs(values[heads] - values[tails])
    terms = d ** float(p)
    return float(level.L) ** (float(p) - 1.0) * math.fsum(terms.tolist())


def discrete_energy(
    level: VicsekLevel,
    values,
    p,
    region: Optional[Iterable] = None,
    region_level: Optional[int] = None,
):
    """Dispatch on the value container: (den, ints) exact or float array."""
    if isinstance(values, tuple) and len(values) == 2:
        den, ints = values
        return discrete_energy_exact(level, den, ints, int(p), region, region_level)
    if isinstance(values, np.ndarray):
        return discrete_energy_float(level, values, float(p), region, region_level)
    # a plain sequence of rationals
    u = [Fraction(v) for v in values]
    den = math.lcm(*(v.denominator for v in u)) if u else 1
    ints = [int(v * den) for v in u]
    return discrete_energy_exact(level, den, ints, int(p), region, region_level)


@dataclass(frozen=True)
class GradientField:
    """Constant slope per oriented level-n edge, tail-to-head direction."""

    level: int
    length_product: int
    den: Optional[int] = None  # exact mode: slope_e = ints[e] * L / den
    ints: Optional[tuple[int, ...]] = None
    array: Optional[np.ndarray] = None  # float mode

    def slopes(self):
        if self.ints is not None:
            return [Fraction(v * self.length_product, self.den) for v in self.ints]
        return self.array * float(self.length_product)

    def slope(self, e: int):
        if self.ints is not None:
            return Fraction(self.ints[e] * self.length_product, self.den)
        return float(self.array[e]) * float(self.length_product)


def gradient_field(hier: Hierarchy, u: AffineFunction, n: int, exact: bool = True) -> GradientField:
    """Per-edge slopes of the affine extension at level n >= base level."""
    if n < u.base_level:
        raise LevelError(
            f"gradient level {n} below base level {u.base_level}"
        )
    level = hier.level(n)
    if exact:
        den, ints = scaled_values_at(hier, u, n)
        tails, heads = level._edge_lists()
        diffs = tuple(ints[heads[e]] - ints[tails[e]] for e in range(level.num_edges))
        return GradientField(n, level.L, den=den, ints=diffs)
    vals = float_values_at(hier, u, n)
    return GradientField(
        n, level.L, array=(vals[level.edge_head] - vals[level.edge_tail])
    )


def energy_of_gradient(g: GradientField, p) -> Fraction | float:
    """sum_e |slope_e|^p * edge_length; equals the discrete energy exactly."""
    L = g.length_product
    if g.ints is not None and p_is_integer(p):
        pi = int(p)
        s = _int_power_sum(g.ints, pi)
        # |i * L / den|^p * (1/L) summed
        return Fraction(s * L ** (pi - 1), g.den**pi)
    slopes = g.array * float(L) if g.array is not None else [float(x) for x in g.slopes()]
    terms = np.abs(np.asarray(slopes, dtype=np.float64)) ** float(p) / float(L)
    return math.fsum(terms.tolist())


@dataclass(frozen=True)
class EnergyReport:
    """Per-level energies with plateau detection."""

    p: float | int
    levels: tuple[int, ...]
    energies: tuple
    plateau_level: Optional[int]
    limit: object
    region: Optional[tuple] = None

    def to_json_dict(self) -> dict:
        return {
            "p": str(self.p),
            "levels": list(self.levels),
            "energies": [str(e) for e in self.energies],
            "energies_float": [float(e) for e in self.energies],
            "plateau_level": self.plateau_level,
            "limit": str(self.limit),
            "limit_float": float(self.limit),
        }


def energy_levels_multi(
    hier: Hierarchy,
    u: AffineFunction,
    ps: Sequence,
    max_level: int,
    exact: bool = True,
) -> dict:
    """E_{p,n} for every p in ``ps`` and n = 0..max_level in one sweep.

    Values are extended level by level once; per-level edge differences are
    shared across exponents.  Exact mode needs integer exponents.
    """
    _check_function(hier, u)
    base = u.base_level
    out = {p: [] for p in ps}
    if exact:
        den, ints = u.scaled()
        for p in ps:
            if not (isinstance(p, int) or (isinstance(p, float) and p.is_integer())):
                raise InvalidArgumentError(f"exact sweep needs integer p, got {p}")
        cur_den, cur = den, ints
        cur_level = base
        for n in range(max_level + 1):
            if n < base:
                idx = list(range(hier.level(n).num_vertices))
                for k in range(n, base):
                    lift = hier._lists(k, "lift")
                    idx = [lift[i] for i in idx]
                vals_n, den_n = [ints[i] for i in idx], den
            else:
                while cur_level < n:
                    cur, cur_den = _extend_exact(hier, cur, cur_den, cur_level)
                    cur_level += 1
                vals_n, den_n = cur, cur_den
            level = hier.level(n)
            tails, heads = level._edge_lists()
            diffs = [vals_n[heads[e]] - vals_n[tails[e]] for e in range(level.num_edges)]
            for p in ps:
                pi = int(p)
                s = _int_power_sum(diffs, pi)
                out[p].append(Fraction(level.L ** (pi - 1) * s, den_n**pi))
        return out
    vals_f = np.array([float(v) for v in u.values], dtype=np.float64)
    cur = vals_f
    cur_level = base
    for n in range(max_level + 1):
        if n < base:
            idx = np.arange(hier.level(n).num_vertices, dtype=np.int64)
            for k in range(n, base):
                idx = hier.lift_ids(k)[idx]
            vals_n = vals_f[idx]
        else:
            while cur_level < n:
                cur = _extend_float_step(hier, cur, cur_level)
                cur_level += 1
            vals_n = cur
        level = hier.level(n)
        d = np.abs(vals_n[level.edge_head] - vals_n[level.edge_tail])
        for p in ps:
            pf = float(p)
            out[p].append(
                float(level.L) ** (pf - 1.0) * math.fsum((d**pf).tolist())
            )
    return out


def _extend_float_step(hier: Hierarchy, vals: np.ndarray, k: int) -> np.ndarray:
    l = hier.ratios.ratio(k + 1)
    fine = hier.level(k + 1)
    coarse = hier.level(k)
    new = np.empty(fine.num_vertices, dtype=np.float64)
    new[hier._lift[k]] = vals
    vt = vals[coarse.edge_tail]
    dh = vals[coarse.edge_head] - vt
    interior = hier._interior[k]
    for i in range(1, l):
        new[interior[:, i - 1]] = vt + (i / l) * dh
    hang = hier._hang[k]
    for lo, hi in hier.hang_waves(k):
        new[hang[lo:hi, 0]] = new[hang[lo:hi, 1]]
    return new


def energy_limit(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    max_level: int,
    exact: Optional[bool] = None,
    rel_tol: float = 1e-12,
    region: Optional[Iterable] = None,
    region_level: Optional[int] = None,
) -> EnergyReport:
    """E_{p,n} for n = 0..max_level; constant from the base level on.

    With a region, energies are restricted to edges inside the listed cell
    words; the first level must then be at least the region level.
    """
    if exact is None:
        exact = p_is_integer(p)
    region_words = list(region) if region is not None else None
    if region_words is not None and region_level is None:
        region_level = len(region_words[0])
    start = region_level if region_words is not None else 0
    if start > max_level:
        raise RegionError("region level exceeds max level")
    energies = []
    for n in range(start, max_level + 1):
        level = hier.level(n)
        if exact:
            den, ints = scaled_values_at(hier, u, n)
            energies.append(
                discrete_energy_exact(level, den, ints, int(p), region_words, region_level)
            )
        else:
            energies.append(
                discrete_energy_float(
                    level, float_values_at(hier, u, n), p, region_words, region_level
                )
            )
    plateau = None
    for i in range(len(energies) - 1):
        a, b = energies[i], energies[i + 1]
        if exact:
            flat = a == b
        else:
            flat = abs(b - a) <= rel_tol * max(1.0, abs(float(b)))
        if flat:
            plateau = start + i
            break
    return EnergyReport(
        p=p,
        levels=tuple(range(start, max_level + 1)),
        energies=tuple(energies),
        plateau_level=plateau,
        limit=energies[-1],
        region=tuple(region_words) if region_words is not None else None,
    )


# ---------------------------------------------------------------------------
# p-resistance
# ---------------------------------------------------------------------------


def resistance(level: VicsekLevel, a: int, b: int, p):
    """R_p(a, b) = geodesic(a, b)^{p-1} on vertices (exact for integer p)."""
    if a == b:
        return Fraction(0) if p_is_integer(p) else 0.0
    d = level.geodesic_distance(a, b)
    if p_is_integer(p):
        return d ** (int(p) - 1)
    return float(d) ** (float(p) - 1.0)


def resistance_oracle(
    level: VicsekLevel,
    a: int,
    b: int,
    p: float,
    max_iter: int = 120,
    tol: float = 1e-10,
) -> float:
    """Independent variational value: 1 / min E_p(u) over u(a)=1, u(b)=0.

    Iteratively reweighted least squares on the p-Dirichlet sum with an
    annealed smoothing parameter; the returned value uses the unsmoothed
    energy of the final iterate, hence is a certified lower bound of R_p up
    to solver accuracy.
    """
    if not 1.0 < float(p) <= 8.0:
        raise InvalidArgumentError(f"oracle supports p in (1, 8], got {p}")
    if a == b:
        return 0.0
    p = float(p)
    theta = 1.0 if p <= 2.0 else 1.0 / (p - 1.0)  # damping; plain IRLS cycles for p > 2
    V = level.num_vertices
    tails = level.edge_tail
    heads = level.edge_head
    free = np.ones(V, dtype=bool)
    free[a] = free[b] = False

    u = np.full(V, 0.5)
    u[a] = 1.0
    u[b] = 0.0
    coef = float(level.L) ** (p - 1.0)

    def energy(vec: np.ndarray) -> float:
        d = np.abs(vec[heads] - vec[tails])
        return coef * math.fsum((d**p).tolist())

    flat_tt = tails * V + tails
    flat_hh = heads * V + heads
    flat_th = tails * V + heads
    flat_ht = heads * V + tails

    def irls_step(w: np.ndarray) -> np.ndarray:
        lap = np.zeros(V * V)
        np.add.at(lap, flat_tt, w)
        np.add.at(lap, flat_hh, w)
        np.add.at(lap, flat_th, -w)
        np.add.at(lap, flat_ht, -w)
        lap = lap.reshape(V, V)
        A = lap[np.ix_(free, free)]
        rhs = -lap[np.ix_(free, ~free)] @ u[~free]
        return np.linalg.solve(A, rhs)

    if p == 2.0:
        sol = irls_step(np.ones(tails.size))
        u = u.copy()
        u[free] = sol
        return 1.0 / energy(u)

    eps = 0.01
    prev = energy(u)
    cur = prev
    for _ in range(max_iter):
        d = u[heads] - u[tails]
        w = (d * d + eps * eps) ** ((p - 2.0) / 2.0)
        sol = irls_step(w)
        u = u.copy()
        u[free] = (1.0 - theta) * u[free] + theta * sol
        cur = energy(u)
        if eps <= 1e-13 and abs(cur - prev) <= tol * max(cur, 1e-300):
            return 1.0 / cur
        prev = cur
        eps = max(eps * 0.2, 1e-14)
    residual = abs(cur - prev) / max(cur, 1e-300)
    raise ConvergenceError("resistance oracle did not converge", residual)


# ---------------------------------------------------------------------------
# structural property checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyCheckReport:
    p: object
    level: int
    product_lhs: object
    product_rhs: object
    product_ok: bool
    contraction_ok: tuple[bool, ...]
    spectral_gap_constant: float
    morrey_constant: float
    locality_lhs: object
    locality_rhs: object
    locality_exact: bool
    clarkson_residual: float
    clarkson_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "p": str(self.p),
            "level": self.level,
            "product": {
                "lhs": float(self.product_lhs),
                "rhs": float(self.product_rhs),
                "ok": self.product_ok,
            },
            "contraction_ok": list(self.contraction_ok),
            "spectral_gap_constant": self.spectral_gap_constant,
            "morrey_constant": self.morrey_constant,
            "locality": {
                "lhs": float(self.locality_lhs),
                "rhs": float(self.locality_rhs),
                "exact": self.locality_exact,
            },
            "clarkson": {
                "residual": self.clarkson_residual,
                "ok": self.clarkson_ok,
            },
        }


def sup_norm(u: AffineFunction) -> Fraction:
    return u.sup_norm()


def morrey_constant(hier: Hierarchy, u: AffineFunction, p, n: int, energy=None) -> float:
    """max |u(x)-u(y)|^p / (d(x,y)^{p-1} E_p(u)) over a deterministic pair set.

    The pair set is all pairs of V_K for K = min(3, n) (which captures the
    large-separation maximizers) plus all level-n adjacent pairs (the
    small-separation ones).  Euclidean distance in the denominator.
    """
    p = float(p)
    if energy is None:
        den, ints = scaled_values_at(hier, u, max(n, u.base_level))
        energy = discrete_energy_exact(hier.level(max(n, u.base_level)), den, ints, int(p))
    E = float(energy)
    if E == 0.0:
        return 0.0
    K = min(3, n)
    lvK = hier.level(K)
    vals = float_values_at(hier, u, K)
    coords = lvK.coords.astype(np.float64) / (math.sqrt(2.0) * lvK.L)
    dx = coords[:, 0][:, None] - coords[:, 0][None, :]
    dy = coords[:, 1][:, None] - coords[:, 1][None, :]
    dist = np.sqrt(dx * dx + dy * dy)
    dv = np.abs(vals[:, None] - vals[None, :])
    mask = dist > 0
    ratios_sq = np.zeros_like(dist)
    ratios_sq[mask] = dv[mask] ** p / (dist[mask] ** (p - 1.0) * E)
    best = float(ratios_sq.max())

    lvN = hier.level(n)
    valsN = float_values_at(hier, u, n)
    d_edge = 1.0 / lvN.L
    dv_e = np.abs(valsN[lvN.edge_head] - valsN[lvN.edge_tail])
    if dv_e.size:
        best = max(best, float((dv_e**p).max()) / (d_edge ** (p - 1.0) * E))
    return best


def spectral_gap_constant(hier: Hierarchy, u: AffineFunction, p, n: int, energy=None) -> float:
    """Empirical constant in the mean-deviation bound, vertex-uniform mean."""
    p = float(p)
    vals = float_values_at(hier, u, n)
    if energy is None:
        energy = discrete_energy_float(hier.level(n), vals, p)
    E = float(energy)
    if E == 0.0:
        return 0.0
    mean = math.fsum(vals.tolist()) / vals.size
    lhs = math.fsum((np.abs(vals - mean) ** p).tolist()) / vals.size
    return lhs / (2.0 ** (p - 1.0) * E)


def clarkson_residual(hier: Hierarchy, f: AffineFunction, g: AffineFunction, p, n: int):
    """Signed residual of the p-Clarkson inequality at level n.

    Returns (residual, ok): residual = E(f+g) + E(f-g) - 2 (E(f)^{1/(p-1)}
    + E(g)^{1/(p-1)})^{p-1}; 'ok' checks the sign required by the case
    split (>= 0 for p <= 2, <= 0 for p >= 2; both at p = 2).
    """
    pf = float(p)
    fs = add(hier, f, g)
    fd = subtract(hier, f, g)
    if p_is_integer(p):
        E = lambda w: float(
            discrete_energy_exact(
                hier.level(n), *scaled_values_at(hier, w, n), int(p)
            )
        )
    else:
        E = lambda w: discrete_energy_float(hier.level(n), float_values_at(hier, w, n), pf)
    lhs = E(fs) + E(fd)
    q = 1.0 / (pf - 1.0)
    rhs = 2.0 * (E(f) ** q + E(g) ** q) ** (pf - 1.0)
    residual = lhs - rhs
    slack = 1e-9 * max(1.0, abs(lhs), abs(rhs))
    if pf < 2.0:
        ok = residual >= -slack
    elif pf > 2.0:
        ok = residual <= slack
    else:
        ok = abs(residual) <= slack
    return residual, ok


def restrict_to_arm(hier: Hierarchy, u: AffineFunction, direction: int) -> AffineFunction:
    """Zero the function outside the open union of one arm's base cells.

    A base vertex keeps its value only if every cell containing it has a
    first letter pointing along ``direction``; attachment corners shared
    with other cells are zeroed, so two restrictions to different arms have
    disjoint supports separated by whole cells.
    """
    base = u.base_level
    lv = hier.level(base)
    if base == 0:
        vals = [Fraction(0)] * 5
        vals[direction] = u.values[direction]
        return AffineFunction(0, vals)
    offsets, cells = lv.vertex_cells
    stride = ancestor_index_stride(lv.ratios, base, 1)
    half = (lv.ratios.ratio(1) - 1) // 2
    vals = []
    for vid, v in enumerate(u.values):
        own = cells[offsets[vid] : offsets[vid + 1]]
        first_letters = own // stride
        lo = 1 + (direction - 1) * half
        hi = lo + half
        vals.append(v if np.all((first_letters >= lo) & (first_letters < hi)) else Fraction(0))
    return AffineFunction(base, vals)


def energy_property_checks(
    hier: Hierarchy,
    u: AffineFunction,
    v: AffineFunction,
    p,
    n: int,
    lipschitz_maps: Sequence[Callable] = (abs,),
) -> PropertyCheckReport:
    """Structural checks of the energy form at one truncation level.

    The product and contraction inequalities hold level-by-level, so the
    booleans are rigorous; the spectral-gap and Morrey constants are
    empirical values to be tracked across levels, not asserted against any
    particular constant.  The locality comparison is exact and meaningful
    when the caller supplies functions with separated supports.
    """
    exact = p_is_integer(p)
    level = hier.level(n)

    def E_of(w: AffineFunction):
        if exact:
            den, ints = scaled_values_at(hier, w, n)
            return discrete_energy_exact(level, den, ints, int(p))
        return discrete_energy_float(level, float_values_at(hier, w, n), float(p))

    Eu = E_of(u)
    Ev = E_of(v)

    uv = multiply(hier, u, v)
    lhs = E_of(uv)
    if exact:
        pi = int(p)
        rhs = Fraction(2) ** (pi - 1) * (
            u.sup_norm() ** pi * Ev + v.sup_norm() ** pi * Eu
        )
        product_ok = lhs <= rhs
    else:
        pf = float(p)
        rhs = 2.0 ** (pf - 1.0) * (
            float(u.sup_norm()) ** pf * float(Ev)
            + float(v.sup_norm()) ** pf * float(Eu)
        )
        product_ok = float(lhs) <= rhs * (1 + 1e-12)

    contraction = []
    for fn in lipschitz_maps:
        w = compose(u, fn)
        Ew = E_of(w)
        if exact:
            contraction.append(Ew <= Eu)
        else:
            contraction.append(float(Ew) <= float(Eu) * (1 + 1e-12))

    sg = spectral_gap_constant(hier, u, p, n, energy=Eu)
    mc = morrey_constant(hier, u, p, n, energy=Eu)

    s = add(hier, u, v)
    loc_lhs = E_of(s)
    loc_rhs = Eu + Ev
    locality_exact = (
        loc_lhs == loc_rhs if exact else abs(loc_lhs - loc_rhs) <= 1e-12 * max(1.0, abs(loc_rhs))
    )

    res, ok = clarkson_residual(hier, u, v, p, n)
    return PropertyCheckReport(
        p=p,
        level=n,
        product_lhs=lhs,
        product_rhs=rhs,
        product_ok=bool(product_ok),
        contraction_ok=tuple(bool(c) for c in contraction),
        spectral_gap_constant=sg,
        morrey_constant=mc,
        locality_lhs=loc_lhs,
        locality_rhs=loc_rhs,
        locality_exact=bool(locality_exact),
        clarkson_residual=float(res),
        clarkson_ok=bool(ok),
    )


def random_affine(hier: Hierarchy, seed: int, max_base_level: int = 3) -> AffineFunction:
    """Seeded test function: dyadic values i.i.d. in [-1, 1) on a random base.

    Values come from SplitMix64 (see prng module); the base level is the
    seed's first draw modulo (max_base_level + 1).
    """
    from .prng import SplitMix64

    rng = SplitMix64(seed)
    base = rng.next_below(max_base_level + 1)
    count = hier.level(base).num_vertices
    return AffineFunction(base, [rng.next_unit_fraction() for _ in range(count)])
