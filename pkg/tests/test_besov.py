from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from vicsek_lab.besov import (
    ball_energy,
    bbm_curve,
    besov_seminorm,
    critical_sweep,
    discrete_profiles,
    jump_kernel_energy,
    phi_profile,
    vertex_measure_weight,
    weak_monotonicity_report,
)
from vicsek_lab.energy import (
    AffineFunction,
    diagonal_ramp,
    float_values_at,
    random_affine,
    scaled_values_at,
)
from vicsek_lab.errors import InvalidArgumentError, LevelError, ScaleMismatchError
from vicsek_lab.measure import derived_constants
from vicsek_lab.pairsum import ball_pair_sum_bruteforce, ball_pair_sum_indexed
from vicsek_lab.ratios import RatioSequence

# Golden values pinned by the brute-force / first oracle runs.
I11_RAMP = Fraction(17, 3969)
WM_RATIO_M6 = 1.0314039176421022
PHI_PROXY_M6 = (
    0.047622286712736495,
    0.29485445050238657,
    0.34793247001590044,
    0.36493921248615746,
    0.36521942856844175,
    0.35409932260425364,
)
EQUIV_BAND = (0.2617039, 1.6957520)


def test_vertex_measure_weights(hier3):
    assert vertex_measure_weight(hier3.level(0)) == Fraction(1, 5)
    assert vertex_measure_weight(hier3.level(1)) == Fraction(1, 21)
    for n in (0, 1, 2):
        lv = hier3.level(n)
        assert vertex_measure_weight(lv) * lv.num_vertices == 1


def test_ball_energy_constant_zero(hier3):
    u = AffineFunction(0, [5] * 5)
    den, ints = scaled_values_at(hier3, u, 2)
    assert ball_energy(hier3.level(2), (den, ints), 2, 1) == 0


def test_ball_energy_golden_value(hier3):
    u = diagonal_ramp()
    den, ints = scaled_values_at(hier3, u, 1)
    got = ball_energy(hier3.level(1), (den, ints), 2, 1, method="bruteforce")
    assert got == I11_RAMP
    assert ball_energy(hier3.level(1), (den, ints), 2, 1, method="indexed") == I11_RAMP


def test_indexed_equals_bruteforce_exact(hier3):
    u = diagonal_ramp()
    for m in range(4):
        lv = hier3.level(m)
        vals = scaled_values_at(hier3, u, m)
        for n in range(m + 1):
            for p in (2, 3):
                assert ball_pair_sum_indexed(lv, vals, p, n) == ball_pair_sum_bruteforce(
                    lv, vals, p, n
                )


def test_indexed_equals_bruteforce_seeded(hier3):
    for seed in (9, 10):
        u = random_affine(hier3, seed)
        m = 3
        lv = hier3.level(m)
        vals = scaled_values_at(hier3, u, m)
        for n in range(m + 1):
            assert ball_pair_sum_indexed(lv, vals, 2, n) == ball_pair_sum_bruteforce(
                lv, vals, 2, n
            )
        fl = float_values_at(hier3, u, m)
        for n in range(m + 1):
            for p in (1.5, 2.7):
                a = ball_pair_sum_indexed(lv, fl, p, n)
                b = ball_pair_sum_bruteforce(lv, fl, p, n)
                assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_ball_energy_scale_guard(hier3):
    u = diagonal_ramp()
    vals = float_values_at(hier3, u, 1)
    with pytest.raises(ScaleMismatchError):
        ball_energy(hier3.level(1), vals, 2, 2)


def test_batched_kernel_matches_single_columns(hier3):
    lv = hier3.level(4)
    cols = [float_values_at(hier3, random_affine(hier3, s), 4) for s in (1, 2, 3)]
    mat = np.column_stack(cols)
    for n in (1, 2, 3):
        batched = ball_pair_sum_indexed(lv, mat, 2, n)
        for j, col in enumerate(cols):
            single = ball_pair_sum_indexed(lv, col, 2, n)
            assert batched[j] == pytest.approx(single, rel=1e-12)


def test_phi_profile_values_and_guards(hier3):
    u = diagonal_ramp()
    prof = phi_profile(hier3, u, 2, 1.0, 6, 5)
    for got, want in zip(prof.phi_proxy, PHI_PROXY_M6):
        assert float(got) == pytest.approx(want, rel=1e-9)
    with pytest.raises(LevelError):
        phi_profile(hier3, u, 2, 1.0, 3, 4)
    const = AffineFunction(0, [1] * 5)
    prof0 = phi_profile(hier3, const, 2, 1.0, 4, 3)
    assert all(x == 0 for x in prof0.phi_proxy)


def test_phi_estimators_ratio_within_doubling_band(hier3):
    u = diagonal_ramp()
    prof = phi_profile(hier3, u, 2, 1.0, 3, 3, include_empirical=True)
    lo = 1.0 / 5.0
    hi = float((2 * 3 - 1) ** 2)
    for a, b in zip(prof.phi_proxy, prof.phi_empirical):
        assert lo <= b / a <= hi


def test_phi_homogeneity(hier3):
    u = random_affine(hier3, 15)
    c = 2
    base = phi_profile(hier3, u, 2, 1.0, 4, 3)
    scaled = phi_profile(hier3, u.scale(c), 2, 1.0, 4, 3)
    for a, b in zip(base.phi_proxy, scaled.phi_proxy):
        assert float(b) == pytest.approx(c**2 * float(a), rel=1e-12, abs=1e-300)


def test_besov_seminorm_cases(hier3):
    const = AffineFunction(0, [3] * 5)
    for q in (2, 4, math.inf):
        assert besov_seminorm(hier3, const, 2, q, 1.0, 4, 3) == 0
    u = diagonal_ramp()
    # q = p agrees with the levelwise discretization of the dr/r integral
    prof = phi_profile(hier3, u, 2, 1.0, 5, 4)
    manual = math.fsum(float(x) * math.log(3) for x in prof.phi_proxy) ** 0.5
    assert besov_seminorm(hier3, u, 2, 2, 1.0, 5, 4) == pytest.approx(manual, rel=1e-12)
    # q = inf at beta* stays within a fixed band of the energy (golden)
    s_inf = besov_seminorm(hier3, u, 2, math.inf, 1.0, 6, 5)
    assert s_inf**2 / 0.5 == pytest.approx(0.7304388571368835, rel=1e-9)
    # scaling: [cu] = |c| [u]
    s1 = besov_seminorm(hier3, u, 2, 3, 1.0, 5, 4)
    s2 = besov_seminorm(hier3, u.scale(-3), 2, 3, 1.0, 5, 4)
    assert s2 == pytest.approx(3 * s1, rel=1e-11)
    with pytest.raises(InvalidArgumentError):
        besov_seminorm(hier3, u, 2, 1, 1.0, 5, 4)


def test_discrete_profiles_beta_star_identity(hier3):
    u = diagonal_ramp()
    prof = discrete_profiles(hier3, u, 2, 1.0, 5)
    assert prof.beta_energies == prof.base_energies
    assert all(e == Fraction(1, 2) for e in prof.base_energies)
    assert prof.sup_energy == Fraction(1, 2)
    assert prof.sum_energy == Fraction(6, 2)


def test_discrete_profiles_scaling_identity_bitwise(hier3):
    from vicsek_lab.besov import _log_phi

    for seed in (16, 17):
        u = random_affine(hier3, seed)
        for beta in (0.65, 0.9, 1.1, 1.3):
            prof = discrete_profiles(hier3, u, 2, beta, 4)
            for n in range(5):
                expo = 1.0 - beta / 1.0
                want = math.exp(expo * _log_phi(hier3.ratios, n)) * float(
                    prof.base_energies[n]
                )
                assert float(prof.beta_energies[n]) == want  # bit-exact


def test_discrete_profiles_closed_form_tail(hier3):
    # (beta* - beta) E_{p,p}^beta for the ramp on constant-3 ratios:
    # eps * 2^{eps-1} / (1 - 15^{-eps})
    u = diagonal_ramp()
    for eps in (0.01, 0.02):
        prof = discrete_profiles(hier3, u, 2, 1.0 - eps, 6, tail="plateau")
        closed = eps * 2 ** (eps - 1) / (1 - 15.0 ** (-eps))
        assert eps * prof.sum_energy == pytest.approx(closed, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        discrete_profiles(hier3, u, 2, 1.0, 4, tail="plateau")


def test_jump_kernel_identity(hier3):
    u = diagonal_ramp()
    # exact at beta = beta*: the plateau makes the sum 5 * (1/2)
    assert jump_kernel_energy(hier3, u, 2, 1.0, 4) == Fraction(5, 2)
    for seed in (18, 19):
        w = random_affine(hier3, seed)
        prof = discrete_profiles(hier3, w, 2, 1.0, 4)
        assert jump_kernel_energy(hier3, w, 2, 1.0, 4) == sum(
            prof.beta_energies, Fraction(0)
        )
        for beta in (0.8, 1.2):
            prof = discrete_profiles(hier3, w, 2, beta, 4)
            got = jump_kernel_energy(hier3, w, 2, beta, 4)
            assert got == pytest.approx(
                math.fsum(float(x) for x in prof.beta_energies), rel=1e-12
            )
    const = AffineFunction(0, [7] * 5)
    assert jump_kernel_energy(hier3, const, 2, 1.0, 3) == 0


def test_partial_sum_bracket(hier3):
    # sum_{k>=n} phi(rho_k)^delta within the two-sided geometric estimate
    from vicsek_lab.besov import _log_phi

    rs = RatioSequence((3, 5, 3, 5, 3, 5, 3, 5, 3, 5), p=2)
    consts = derived_constants(rs)
    for delta in (0.5, 1.0, 2.0):
        for n in (0, 1, 2):
            total = 0.0
            log_phi = _log_phi(rs, n)
            k = n
            term = math.exp(delta * log_phi)
            while term > 1e-22 * max(total, 1.0):
                total += term
                k += 1
                l = rs.ratio(k) if k <= 10 else rs.ratio((k - 1) % 2 + 1)
                log_phi -= (float(rs.p) - 1.0) * math.log(l) + math.log(2 * l - 1)
                term = math.exp(delta * log_phi)
            phi_n = math.exp(delta * _log_phi(rs, n))
            lo = phi_n / (1.0 - consts.sup_t ** (-delta))
            hi = phi_n / (1.0 - consts.inf_t ** (-delta))
            assert lo * (1 - 1e-9) <= total <= hi * (1 + 1e-9)


def test_bbm_curve_golden(hier3):
    u = diagonal_ramp()
    eps_list = [0.2, 0.1, 0.05, 0.02, 0.01]
    curve = bbm_curve(hier3, u, 2, eps_list, 6)
    by_eps = {pt.epsilon: pt for pt in curve.points}
    closed = lambda e: e * 2 ** (e - 1) / (1 - 15.0 ** (-e))
    for e in eps_list:
        assert by_eps[e].value == pytest.approx(closed(e), rel=1e-9)
        assert by_eps[e].within_bracket
    assert by_eps[0.01].value == pytest.approx(0.18845, abs=5e-5)
    limit = 0.5 / math.log(15)
    assert curve.limit_low == pytest.approx(limit, rel=1e-12)
    assert curve.limit_high == pytest.approx(limit, rel=1e-12)
    # decreasing toward the limit as eps decreases
    ordered = [by_eps[e].value for e in sorted(eps_list)]
    assert all(a < b for a, b in zip(ordered, ordered[1:]))
    assert abs(by_eps[0.01].value - limit) / limit < 0.025
    with pytest.raises(InvalidArgumentError):
        bbm_curve(hier3, u, 2, [1.5], 4)


def test_critical_sweep_trends(hier3):
    u = diagonal_ramp()
    rows = {r.beta: r for r in critical_sweep(hier3, u, 2, [0.8, 1.0, 1.2], 5)}
    assert rows[1.2].classification == "divergent"
    assert rows[1.2].trend == "increasing"
    # E_n^beta = (2 * 15^{-n})^{-0.2} / 2 for beta = 1.2
    for n, v in enumerate(rows[1.2].beta_energies):
        assert v == pytest.approx((2 * 15.0 ** (-n)) ** (-0.2) * 0.5, rel=1e-12)
    assert rows[1.0].classification == "plateau"
    assert rows[1.0].trend == "constant"
    assert rows[0.8].classification == "vanishing"
    assert rows[0.8].trend == "decreasing"
    for n, v in enumerate(rows[0.8].beta_energies):
        assert v == pytest.approx((2 * 15.0 ** (-n)) ** (0.2) * 0.5, rel=1e-12)


def test_weak_monotonicity_golden_band(hier3):
    u = diagonal_ramp()
    rep = weak_monotonicity_report(hier3, u, 2, 6, 5, (3, 5))
    assert rep.ratio == pytest.approx(WM_RATIO_M6, rel=1e-9)
    assert not rep.degenerate
    const = AffineFunction(0, [2] * 5)
    rep0 = weak_monotonicity_report(hier3, const, 2, 4, 3, (1, 3))
    assert rep0.degenerate and rep0.ratio is None
    # scaling leaves the ratio unchanged
    rep2 = weak_monotonicity_report(hier3, u.scale(2), 2, 6, 5, (3, 5))
    assert rep2.ratio == pytest.approx(rep.ratio, rel=1e-12)


def test_equivalence_bands_recorded(hier3):
    u = diagonal_ramp()
    N, m = 4, 6
    lo, hi = EQUIV_BAND
    for beta in (1.0, 0.9, 1.1, 0.65):
        prof = phi_profile(hier3, u, 2, beta, m, N)
        d = discrete_profiles(hier3, u, 2, beta, N)
        phis = [float(x) for x in prof.phi_proxy]
        es = [float(x) for x in d.beta_energies]
        for n in range(1, N - 1):
            r1 = phis[n] / max(es[n:])
            r2 = es[n] / max(phis[n:])
            assert lo * (1 - 1e-6) <= r1 <= hi * (1 + 1e-6)
            assert lo * (1 - 1e-6) <= r2 <= hi * (1 + 1e-6)
