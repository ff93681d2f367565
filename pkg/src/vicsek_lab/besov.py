"""Besov-Lipschitz functionals, discrete beta-energies, and BBM curves.

Conventions.  The level-n beta-energy is defined through the energy scale
function: E_n^beta := phi(rho_n)^(1 - beta/beta*) * E_{p,n}, so that at
beta = beta* it coincides with the discrete p-energy exactly.  The ball
functional is estimated by the proxy

    Phi^beta(rho_n) = phi(rho_n)^(-beta/beta*) * psi(rho_n)^(-1) * I_{m,n}

with I_{m,n} the vertex-measure ball energy; an empirical-mean variant that
normalizes each inner sum by the actual ball count is available for
cross-checks on small levels.  Geometric tails are summed in log space
because phi(rho_n) underflows doubles long before the tail becomes
negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, LevelError, ScaleMismatchError
from .geometry import Hierarchy, VicsekLevel
from .measure import derived_constants, scale_values
from .ratios import RatioSequence, p_is_integer
from .energy import (
    AffineFunction,
    discrete_energy_exact,
    discrete_energy_float,
    float_values_at,
    scaled_values_at,
)
from .pairsum import ball_pair_sum, ball_row_stats

_EMPIRICAL_MAX_VERTICES = 4000


def vertex_measure_weight(level: VicsekLevel) -> Fraction:
    """Uniform weight of the vertex measure: 1/#V_m per vertex."""
    return Fraction(1, level.num_vertices)


def ball_energy(
    level: VicsekLevel, values, p, n: int, method: str = "auto"
) -> Fraction | float:
    """I_{m,n}: the double vertex-measure integral of |du|^p over open balls."""
    if n > level.n:
        raise ScaleMismatchError(
            f"ball scale {n} finer than vertex level {level.n}"
        )
    V = level.num_vertices
    s = ball_pair_sum(level, values, p, n, method=method)
    if isinstance(values, tuple):
        den, _ = values
        return Fraction(s, den ** int(p) * V * V)
    return s / float(V) ** 2


def _phi_psi_factors(ratios: RatioSequence, n: int, beta: float):
    """(phi(rho_n)^(-beta/beta*) * psi(rho_n)^(-1)) as float, plus exact at beta*."""
    rho, psi, phi = scale_values(ratios, n)
    expo = -float(beta) / float(ratios.beta_star)
    return float(phi) ** expo / float(psi)


@dataclass(frozen=True)
class BesovProfile:
    p: object
    beta: float
    beta_star: float
    vertex_level: int
    max_scale: int
    ball_energies: tuple  # I_{m,n} for n = 0..N
    phi_proxy: tuple  # estimator (a)
    phi_empirical: Optional[tuple] = None  # estimator (b)

    def rows(self):
        out = []
        for n in range(self.max_scale + 1):
            row = {
                "n": n,
                "ball_energy": float(self.ball_energies[n]),
                "phi_proxy": float(self.phi_proxy[n]),
            }
            if self.phi_empirical is not None:
                row["phi_empirical"] = float(self.phi_empirical[n])
            out.append(row)
        return out


def phi_profile(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    beta: float,
    m: int,
    max_scale: int,
    include_empirical: bool = False,
    method: str = "auto",
    exact: Optional[bool] = None,
) -> BesovProfile:
    """Ball-functional estimators at scales rho_0 .. rho_N on V_m vertices."""
    if m < max_scale:
        raise LevelError(f"vertex level {m} must be >= max scale {max_scale}")
    level = hier.level(m)
    ratios = hier.ratios
    if exact is None:
        # exact pair sums are pure Python; sensible only on small levels
        exact = (
            p_is_integer(p)
            and float(beta) == float(ratios.beta_star)
            and not include_empirical
            and level.num_vertices <= 600
        )
    if exact:
        den, ints = scaled_values_at(hier, u, m)
        values = (den, ints)
    else:
        values = float_values_at(hier, u, m)
    Is = []
    proxy = []
    for n in range(max_scale + 1):
        I = ball_energy(level, values, p, n, method=method)
        Is.append(I)
        if exact:
            rho, psi, phi = scale_values(ratios, n)
            proxy.append(I / (phi * psi))
        else:
            proxy.append(_phi_psi_factors(ratios, n, beta) * float(I))
    empirical = None
    if include_empirical:
        if level.num_vertices > _EMPIRICAL_MAX_VERTICES:
            raise InvalidArgumentError(
                "empirical estimator is brute force; use a level with at most "
                f"{_EMPIRICAL_MAX_VERTICES} vertices"
            )
        empirical = []
        vals = float_values_at(hier, u, m)
        V = level.num_vertices
        for n in range(max_scale + 1):
            counts, sums = ball_row_stats(level, vals, p, n)
            mean = math.fsum((sums / counts).tolist()) / V
            rho, psi, phi = scale_values(ratios, n)
            empirical.append(
                float(phi) ** (-float(beta) / float(ratios.beta_star)) * mean
            )
    return BesovProfile(
        p=p,
        beta=float(beta),
        beta_star=float(ratios.beta_star),
        vertex_level=m,
        max_scale=max_scale,
        ball_energies=tuple(Is),
        phi_proxy=tuple(proxy),
        phi_empirical=tuple(empirical) if empirical is not None else None,
    )


def besov_seminorm(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    q,
    beta: float,
    m: int,
    max_scale: int,
    method: str = "auto",
) -> float:
    """[u]_{B_{p,q}^beta} discretized over the dyadic-like scale partition.

    For q < infinity the dr/r integral over (rho_{n+1}, rho_n] contributes
    log l_{n+1} with the functional frozen at rho_n; q = infinity takes the
    sup of the p-th roots.
    """
    if not (q == math.inf or q > 1):
        raise InvalidArgumentError(f"q must be in (1, inf], got {q}")
    prof = phi_profile(hier, u, p, beta, m, max_scale, method=method)
    phis = [float(x) for x in prof.phi_proxy]
    pf = float(p)
    if q == math.inf:
        return max(x ** (1.0 / pf) for x in phis)
    qf = float(q)
    terms = [
        phis[n] ** (qf / pf) * math.log(hier.ratios.ratio(n + 1))
        for n in range(max_scale + 1)
    ]
    return math.fsum(terms) ** (1.0 / qf)


# ---------------------------------------------------------------------------
# discrete beta-energies
# ---------------------------------------------------------------------------


def _edge_power_sums(hier: Hierarchy, u: AffineFunction, p, max_scale: int, exact: bool):
    """E_{p,n} for n = 0..N (exact Fractions when possible, else floats)."""
    out = []
    for n in range(max_scale + 1):
        level = hier.level(n)
        if exact:
            den, ints = scaled_values_at(hier, u, n)
            out.append(discrete_energy_exact(level, den, ints, int(p)))
        else:
            out.append(discrete_energy_float(level, float_values_at(hier, u, n), float(p)))
    return out


def _log_phi(ratios: RatioSequence, n: int) -> float:
    """log phi(rho_n) accumulated in floats (safe far past double underflow)."""
    p1 = float(ratios.p) - 1.0
    out = p1 * math.log(2.0)
    for k in range(1, n + 1):
        l = ratios.ratio(k)
        out -= p1 * math.log(l) + math.log(2 * l - 1)
    return out


@dataclass(frozen=True)
class DiscreteBetaProfile:
    p: object
    beta: float
    beta_star: float
    max_scale: int
    base_energies: tuple  # E_{p,n} = E_n^{beta*}
    beta_energies: tuple  # E_n^beta
    sup_energy: object  # E_{p,inf}^beta over n <= N
    sum_energy: object  # E_{p,p}^beta, tail included when requested
    tail: Optional[float] = None


def discrete_profiles(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    beta: float,
    max_scale: int,
    tail: Optional[str] = None,
    exact: Optional[bool] = None,
) -> DiscreteBetaProfile:
    """E_n^beta for n <= N plus the sup and sum aggregates.

    ``tail="plateau"`` appends the closed geometric tail sum_{n>N}
    phi(rho_n)^{1-beta/beta*} * E_plateau, valid because the base energies
    of an affine function are exactly constant beyond the base level; it
    requires beta < beta* and a ratio sequence extendable beyond the prefix.
    """
    if beta < 0:
        raise InvalidArgumentError(f"beta must be >= 0, got {beta}")
    if tail not in (None, "plateau"):
        raise InvalidArgumentError(f"unknown tail mode {tail!r}")
    ratios = hier.ratios
    beta_star = float(ratios.beta_star)
    exactable = p_is_integer(p)
    if exact is None:
        exact = exactable
    base = _edge_power_sums(hier, u, p, max_scale, exact)
    at_star = float(beta) == beta_star
    if at_star:
        beta_energies = list(base)
    else:
        expo = 1.0 - float(beta) / beta_star
        beta_energies = [
            math.exp(expo * _log_phi(ratios, n)) * float(e) for n, e in enumerate(base)
        ]
    sup_e = max(beta_energies) if not at_star else max(base)
    sum_e = (
        math.fsum(float(x) for x in beta_energies)
        if not (at_star and exact)
        else sum(base, Fraction(0))
    )
    tail_value = None
    if tail == "plateau":
        if u.base_level > max_scale:
            raise InvalidArgumentError(
                "plateau tail needs the base level within the computed range"
            )
        if float(beta) >= beta_star:
            raise InvalidArgumentError(
                "plateau tail diverges unless beta < beta_star"
            )
        expo = 1.0 - float(beta) / beta_star
        plateau = float(base[max_scale])
        acc = 0.0
        log_phi = _log_phi(ratios, max_scale)
        n = max_scale
        while True:
            n += 1
            l = ratios.ratio(n)
            log_phi -= (float(ratios.p) - 1.0) * math.log(l) + math.log(2 * l - 1)
            term = math.exp(expo * log_phi) * plateau
            acc += term
            if term <= 1e-18 * max(acc, 1e-300) and n > max_scale + 4:
                break
            if n > max_scale + 2_000_000:
                raise InvalidArgumentError("plateau tail did not converge")
        tail_value = acc
        sum_e = float(sum_e) + acc
    return DiscreteBetaProfile(
        p=p,
        beta=float(beta),
        beta_star=beta_star,
        max_scale=max_scale,
        base_energies=tuple(base),
        beta_energies=tuple(beta_energies),
        sup_energy=sup_e,
        sum_energy=sum_e,
        tail=tail_value,
    )


def jump_kernel_energy(
    hier: Hierarchy, u: AffineFunction, p, beta: float, max_scale: int
) -> Fraction | float:
    """The non-local pair-sum form: levelwise weighted sums of |du|^p.

    Each adjacent pair at level n carries kernel weight
    phi(rho_n)^(-beta/beta*) * 2^{p-1} * psi(rho_n); summing over levels
    0..N reproduces sum_{n<=N} E_n^beta.  Exact at beta = beta* with
    integer p (the weight reduces to L_n^{p-1}).
    """
    ratios = hier.ratios
    at_star = float(beta) == float(ratios.beta_star)
    if at_star and p_is_integer(p):
        total = Fraction(0)
        for n in range(max_scale + 1):
            level = hier.level(n)
            den, ints = scaled_values_at(hier, u, n)
            tails, heads = level._edge_lists()
            s = sum(
                (ints[heads[e]] - ints[tails[e]]) ** 2
                if int(p) == 2
                else abs(ints[heads[e]] - ints[tails[e]]) ** int(p)
                for e in range(level.num_edges)
            )
            total += Fraction(level.L ** (int(p) - 1) * s, den ** int(p))
        return total
    pf = float(p)
    total = 0.0
    for n in range(max_scale + 1):
        level = hier.level(n)
        vals = float_values_at(hier, u, n)
        d = np.abs(vals[level.edge_head] - vals[level.edge_tail]) ** pf
        rho, psi, phi = scale_values(ratios, n)
        w = float(phi) ** (-float(beta) / float(ratios.beta_star)) * (
            2.0 ** (pf - 1.0)
        ) * float(psi)
        total += w * math.fsum(d.tolist())
    return total


# ---------------------------------------------------------------------------
# BBM convergence curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BBMPoint:
    epsilon: float
    beta: float
    value: float  # (beta* - beta) * E_{p,p}^beta
    bracket_low: float
    bracket_high: float
    within_bracket: bool


@dataclass(frozen=True)
class BBMCurve:
    points: tuple[BBMPoint, ...]
    limit_low: float  # E * beta* / log(sup t)
    limit_high: float  # E * beta* / log(inf t)
    energy: float  # E_{p,inf}^{beta*}(u) = E_p(u)


def bbm_curve(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    epsilons: Sequence[float],
    max_scale: int,
    tail: Optional[str] = "plateau",
    bracket_tol: float = 1e-9,
) -> BBMCurve:
    """(beta* - beta) E_{p,p}^beta for beta = beta* - epsilon, with brackets.

    The finite-epsilon brackets come from the geometric-sum estimate with
    per-level factors t_l = (2l-1) l^{p-1}: with delta = eps/beta* and n0
    the plateau level, the value lies in
    [eps E phi(rho_n0)^delta / (1 - sup_t^-delta),
     eps E phi(rho_0)^delta / (1 - inf_t^-delta)].
    As eps -> 0 both ends converge to E beta* / log t.
    """
    ratios = hier.ratios
    beta_star = float(ratios.beta_star)
    for eps in epsilons:
        if not 0 < eps < beta_star:
            raise InvalidArgumentError(
                f"epsilon must lie in (0, beta_star), got {eps}"
            )
    consts = derived_constants(ratios.with_p(p))
    base = _edge_power_sums(hier, u, p, max_scale, p_is_integer(p))
    E = float(base[max_scale])
    n0 = u.base_level
    points = []
    for eps in epsilons:
        beta = beta_star - eps
        prof = discrete_profiles(hier, u, p, beta, max_scale, tail=tail)
        value = eps * float(prof.sum_energy)
        delta = eps / beta_star
        lo = (
            eps
            * E
            * math.exp(delta * _log_phi(ratios, n0))
            / (1.0 - consts.sup_t ** (-delta))
        )
        hi = (
            eps
            * E
            * math.exp(delta * _log_phi(ratios, 0))
            / (1.0 - consts.inf_t ** (-delta))
        )
        ok = lo * (1.0 - bracket_tol) - bracket_tol <= value <= hi * (1.0 + bracket_tol) + bracket_tol
        points.append(BBMPoint(eps, beta, value, lo, hi, bool(ok)))
    return BBMCurve(
        points=tuple(points),
        limit_low=E * beta_star / math.log(consts.sup_t),
        limit_high=E * beta_star / math.log(consts.inf_t),
        energy=E,
    )


# ---------------------------------------------------------------------------
# critical exponent sweep and weak monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    beta: float
    classification: str  # divergent | plateau | vanishing
    trend: str  # increasing | constant | decreasing | flat-zero
    beta_energies: tuple[float, ...]
    growth_factors: tuple[float, ...]


def critical_sweep(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    beta_grid: Sequence[float],
    max_scale: int,
) -> list[SweepRow]:
    """Classify E_n^beta trends across a beta grid around beta*."""
    beta_star = float(hier.ratios.beta_star)
    rows = []
    for beta in beta_grid:
        prof = discrete_profiles(hier, u, p, beta, max_scale)
        vals = [float(x) for x in prof.beta_energies]
        growth = tuple(
            math.exp((1.0 - beta / beta_star) * _log_phi(hier.ratios, n))
            for n in range(max_scale + 1)
        )
        if beta > beta_star:
            cls = "divergent"
        elif beta == beta_star:
            cls = "plateau"
        else:
            cls = "vanishing"
        start = min(u.base_level, max_scale)
        seg = vals[start:]
        if all(v == 0.0 for v in seg):
            trend = "flat-zero"
        elif all(b > a * (1 + 1e-12) for a, b in zip(seg, seg[1:])):
            trend = "increasing"
        elif all(b < a * (1 - 1e-12) for a, b in zip(seg, seg[1:])):
            trend = "decreasing"
        elif all(abs(b - a) <= 1e-12 * max(abs(a), 1e-300) for a, b in zip(seg, seg[1:])):
            trend = "constant"
        else:
            trend = "mixed"
        rows.append(SweepRow(float(beta), cls, trend, tuple(vals), growth))
    return rows


@dataclass(frozen=True)
class WeakMonotonicityReport:
    vertex_level: int
    max_scale: int
    window: tuple[int, int]
    phi_values: tuple[float, ...]
    sup_value: float
    window_min: float
    ratio: Optional[float]
    degenerate: bool


def weak_monotonicity_report(
    hier: Hierarchy,
    u: AffineFunction,
    p,
    m: int,
    max_scale: int,
    window: tuple[int, int],
    method: str = "auto",
) -> WeakMonotonicityReport:
    """sup_n Phi(rho_n) / min over a window: finite surrogate of sup/liminf."""
    lo, hi = window
    if not (0 <= lo <= hi <= max_scale):
        raise InvalidArgumentError(f"window {window} not within [0, {max_scale}]")
    prof = phi_profile(
        hier, u, p, float(hier.ratios.beta_star), m, max_scale, method=method
    )
    phis = [float(x) for x in prof.phi_proxy]
    sup_v = max(phis)
    win_min = min(phis[lo : hi + 1])
    degenerate = win_min == 0.0
    return WeakMonotonicityReport(
        vertex_level=m,
        max_scale=max_scale,
        window=(lo, hi),
        phi_values=tuple(phis),
        sup_value=sup_v,
        window_min=win_min,
        ratio=None if degenerate else sup_v / win_min,
        degenerate=degenerate,
    )
