"""Invariant suite run by the CLI: every check returns (name, ok, detail).

The checks mirror the structural identities the library is built on:
counting and tree invariants of the geometry, exact mass additivity,
energy plateaus and gradient identities, energy-measure coincidence,
kernel-vs-oracle equality for ball sums, the beta-energy scaling identity,
and the BBM closed form on constant ratio sequences.  All exact statements
are asserted with equality in rational mode.
"""

from __future__ import annotations

import math
from fractions import Fraction
import numpy as np

from .besov import (
    _log_phi,
    bbm_curve,
    discrete_profiles,
    jump_kernel_energy,
    weak_monotonicity_report,
)
from .config import ExperimentConfig
from .energy import (
    diagonal_ramp,
    energy_limit,
    energy_of_gradient,
    float_values_at,
    gradient_field,
    random_affine,
    resistance,
    resistance_oracle,
    scaled_values_at,
)
from .energy_measure import coincidence_check, gamma_cells, pushforward_profile
from .geometry import Hierarchy
from .measure import mu_ball_bounds, psi_of, regularized_scales, scale_values
from .parallel import OrderedPool
from .pairsum import ball_pair_sum_bruteforce, ball_pair_sum_indexed
from .ratios import p_is_integer

Check = tuple[str, bool, str]


def run_selftest(config: ExperimentConfig, pool: OrderedPool) -> tuple[list[Check], dict]:
    ratios = config.ratio_sequence()
    N = config.depth
    m = config.vertex_level
    p = config.p
    exact = config.mode == "rational" and p_is_integer(p)
    hier = Hierarchy(ratios, max(m, N + 1), budget=config.cell_budget)
    checks: list[Check] = []
    artifacts: dict = {}

    def record(name: str, ok: bool, detail: str = ""):
        checks.append((name, bool(ok), detail))

    # -- geometry ---------------------------------------------------------
    ok = True
    detail = []
    for n in range(min(N, 4) + 1):
        lv = hier.level(n)
        w = ratios.num_words(n)
        if lv.num_vertices != 4 * w + 1 or lv.num_edges != 4 * w:
            ok = False
            detail.append(f"counts at level {n}")
        d = lv.coords[lv.edge_head] - lv.coords[lv.edge_tail]
        if not np.all((d * d).sum(axis=1) == 2):
            ok = False
            detail.append(f"edge length at level {n}")
        if int(lv.multiplicity.max()) > 2:
            ok = False
            detail.append(f"corner multiplicity at level {n}")
        dd = np.abs(lv.depth[lv.edge_head] - lv.depth[lv.edge_tail])
        if not np.all(dd == 1):
            ok = False
            detail.append(f"orientation at level {n}")
    record("geometry_invariants", ok, ";".join(detail))

    # -- measure ----------------------------------------------------------
    ok = True
    for n in range(min(N, 5)):
        parent = Fraction(1, ratios.num_words(n))
        child = Fraction(1, ratios.num_words(n + 1))
        if child * (2 * ratios.ratio(n + 1) - 1) != parent:
            ok = False
    record("measure_additivity", ok)

    rho0, psi0, phi0 = scale_values(ratios, 0)
    record("scale_level0", rho0 == 2 and psi0 == 1, f"{rho0},{psi0}")

    ok = True
    r = Fraction(2)
    for _ in range(3 * min(N, 3)):
        r = r * Fraction(9, 10)
        psi_t, _ = regularized_scales(ratios, r)
        psi_r = psi_of(ratios, r)
        sup_l = max(ratios.distinct_ratios())
        if not (psi_r / (2 * sup_l - 1) <= psi_t <= psi_r):
            ok = False
    record("regularized_sandwich", ok)

    lv0 = hier.level(0)
    origin = lv0.vertex_point(lv0.origin)
    prev = None
    ok = True
    for d in range(min(N, 3) + 1):
        lo, hi = mu_ball_bounds(ratios, origin, Fraction(1, 3), d)
        if prev is not None and not (prev[0] <= lo and hi <= prev[1]):
            ok = False
        prev = (lo, hi)
    record("ball_bounds_nested", ok, f"last=({prev[0]},{prev[1]})")

    # -- energy -----------------------------------------------------------
    u_star = diagonal_ramp()
    golden = (
        Fraction(2) ** (1 - int(p)) if exact else 2.0 ** (1.0 - float(p))
    )
    rep = energy_limit(hier, u_star, p, N, exact=exact)
    ok = all(e == golden for e in rep.energies) if exact else all(
        abs(e - golden) <= 1e-12 for e in rep.energies
    )
    record("ramp_energy_golden", ok, f"limit={rep.limit}")
    artifacts["energy_report"] = rep

    g = gradient_field(hier, u_star, N, exact=exact)
    eg = energy_of_gradient(g, p)
    ok = (eg == rep.limit) if exact else abs(eg - rep.limit) <= 1e-12
    record("gradient_energy_identity", ok)

    seeds = list(config.seeds)
    def seed_mono(seed: int) -> bool:
        u = random_affine(hier, seed)
        r = energy_limit(hier, u, p, min(N, 4), exact=exact)
        es = r.energies
        if exact:
            return all(a <= b for a, b in zip(es, es[1:]))
        return all(a <= b * (1 + 1e-12) for a, b in zip(es, es[1:]))
    record("seeded_monotonicity", all(pool.map(seed_mono, seeds)))

    if float(p) <= 8:
        lvr = hier.level(min(2, N))
        a = lvr.origin
        b = lvr.vertex_id(lvr.L, lvr.L)
        rf = float(resistance(lvr, a, b, p))
        ro = resistance_oracle(lvr, a, b, float(p))
        record("resistance_oracle", abs(rf - ro) <= 1e-6 * max(1.0, rf), f"{rf} vs {ro}")

    # -- energy measure ---------------------------------------------------
    cm = gamma_cells(hier, u_star, p, 1, exact=exact)
    tot_ok = (cm.total == rep.limit) if exact else abs(cm.total - rep.limit) <= 1e-12
    record("energy_measure_total", tot_ok)
    if exact:
        dev = coincidence_check(hier, u_star, p, min(3, N))
        record("coincidence_exact", dev == 0, str(dev))
    hist = pushforward_profile(hier, u_star, p, config.bins, exact=exact)
    hok = (hist.total == rep.limit) if exact else abs(hist.total - rep.limit) <= 1e-12
    record("pushforward_total", hok and not hist.point_mass_flags)
    artifacts["histogram"] = hist

    # -- ball energies: indexed vs brute force ----------------------------
    ok = True
    for mm in range(min(3, m) + 1):
        lv = hier.level(mm)
        if exact:
            vals = scaled_values_at(hier, u_star, mm)
        else:
            vals = float_values_at(hier, u_star, mm)
        for n in range(mm + 1):
            bf = ball_pair_sum_bruteforce(lv, vals, p, n)
            ix = ball_pair_sum_indexed(lv, vals, p, n)
            if exact:
                ok = ok and bf == ix
            else:
                ok = ok and abs(bf - ix) <= 1e-12 * max(1.0, abs(bf))
    record("ball_kernel_vs_oracle", ok)

    # -- besov identities ---------------------------------------------------
    profiles = {}
    ok = True
    for beta in config.beta_grid:
        prof = discrete_profiles(hier, u_star, p, beta, N)
        profiles[beta] = prof
        for n, (eb, estar) in enumerate(zip(prof.beta_energies, prof.base_energies)):
            expo = 1.0 - float(beta) / float(ratios.beta_star)
            lhs = float(eb)
            rhs = (
                float(estar)
                if expo == 0.0
                else math.exp(expo * _log_phi(ratios, n)) * float(estar)
            )
            if lhs != rhs:
                ok = False
    record("beta_scaling_identity", ok)
    artifacts["profiles"] = profiles

    ok = True
    for beta in config.beta_grid:
        jk = jump_kernel_energy(hier, u_star, p, beta, N)
        ssum = (
            sum(profiles[beta].beta_energies, Fraction(0))
            if exact and float(beta) == float(ratios.beta_star)
            else math.fsum(float(x) for x in profiles[beta].beta_energies)
        )
        if exact and float(beta) == float(ratios.beta_star):
            ok = ok and jk == ssum
        else:
            ok = ok and abs(float(jk) - float(ssum)) <= 1e-12 * max(1.0, abs(float(ssum)))
    record("jump_kernel_identity", ok)

    # -- BBM ---------------------------------------------------------------
    distinct = ratios.distinct_ratios()
    curve = bbm_curve(hier, u_star, p, list(config.epsilons), N, tail="plateau")
    artifacts["bbm"] = curve
    ok = all(pt.within_bracket for pt in curve.points)
    vals = [pt.value for pt in sorted(curve.points, key=lambda q: q.epsilon)]
    ok = ok and all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    if len(distinct) == 1:
        l = distinct[0]
        t = (2 * l - 1) * float(l) ** (float(p) - 1.0)
        E = curve.energy
        for pt in curve.points:
            closed = (
                pt.epsilon
                * E
                * 2.0 ** ((float(p) - 1.0) * pt.epsilon / float(ratios.beta_star))
                / (1.0 - t ** (-pt.epsilon / float(ratios.beta_star)))
            )
            if abs(pt.value - closed) > 1e-9 * max(1.0, closed):
                ok = False
    record("bbm_curve", ok)

    # -- weak monotonicity surrogate ----------------------------------------
    wm = weak_monotonicity_report(
        hier, u_star, p, m, N, (max(1, N - 2), N)
    )
    record("weak_monotonicity_finite", wm.ratio is not None and math.isfinite(wm.ratio),
           f"ratio={wm.ratio}")
    artifacts["weak_monotonicity"] = wm

    return checks, artifacts
