from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from vicsek_lab.energy import (
    AffineFunction,
    add,
    clarkson_residual,
    compose,
    corner_indicator,
    diagonal_ramp,
    discrete_energy,
    discrete_energy_exact,
    discrete_energy_float,
    energy_levels_multi,
    energy_limit,
    energy_of_gradient,
    energy_property_checks,
    evaluate_affine,
    exact_values_at,
    float_values_at,
    gradient_field,
    multiply,
    random_affine,
    resistance,
    resistance_oracle,
    restrict_to_arm,
    scaled_values_at,
    sup_norm,
)
from vicsek_lab.errors import LevelError, RegionError
from vicsek_lab.words import CENTER, Letter


def test_evaluate_affine_constant(hier3):
    u = AffineFunction(0, [Fraction(3, 7)] * 5)
    for n in (0, 2, 4):
        vals = exact_values_at(hier3, u, n)
        assert all(v == Fraction(3, 7) for v in vals)


def test_evaluate_affine_diag_ramp_interior_point(hier3):
    u = diagonal_ramp()
    lv1 = hier3.level(1)
    # geodesic arclength from the lower-left corner: vertex (2,2) sits at s = 5/3
    assert evaluate_affine(hier3, u, 1, lv1.vertex_id(2, 2)) == Fraction(5, 6)


def test_evaluate_affine_hanging_branch_value(hier3):
    u = diagonal_ramp()
    lv1 = hier3.level(1)
    # branch cells hanging off the center carry the attachment value 1/2
    for coords in ((-2, 2), (-3, 3), (-1, 3), (-3, 1), (2, -2), (3, -3)):
        assert evaluate_affine(hier3, u, 1, lv1.vertex_id(*coords)) == Fraction(1, 2)


def test_restriction_reproduces_base_values(hier3):
    u = random_affine(hier3, 99)
    base = u.base_level
    for n in range(base):
        vals = exact_values_at(hier3, u, n)
        lv = hier3.level(n)
        for vid in range(lv.num_vertices):
            lifted = hier3.vertex_id_at(n, vid, base)
            assert vals[vid] == u.values[lifted]


def test_discrete_energy_examples(hier3):
    lv0 = hier3.level(0)
    const = AffineFunction(0, [2] * 5)
    assert discrete_energy(lv0, const.values, 2) == 0
    for p in (2, 3, 5):
        assert discrete_energy(lv0, corner_indicator().values, p) == 1
    assert discrete_energy(lv0, diagonal_ramp().values, 2) == Fraction(1, 2)


def test_discrete_energy_region(hier3):
    u = diagonal_ramp()
    lv1 = hier3.level(1)
    den, ints = scaled_values_at(hier3, u, 1)
    # arm cells along the diagonal carry 1/6 each at level 1
    e_arm1 = discrete_energy_exact(lv1, den, ints, 2, region=[(Letter(1, 1),)])
    assert e_arm1 == Fraction(1, 6)
    e_all = discrete_energy_exact(lv1, den, ints, 2)
    assert e_all == Fraction(1, 2)
    with pytest.raises(RegionError):
        discrete_energy_exact(lv1, den, ints, 2, region=[(Letter(1, 1), CENTER)])


def test_gradient_field_slopes(hier3):
    u = diagonal_ramp()
    g0 = gradient_field(hier3, u, 0)
    slopes = g0.slopes()
    assert sorted(map(abs, slopes)) == [0, 0, Fraction(1, 2), Fraction(1, 2)]
    # refinement keeps slope magnitude 1/2 on geodesic edges, 0 elsewhere
    g3 = gradient_field(hier3, u, 3)
    mags = {abs(s) for s in g3.slopes()}
    assert mags == {Fraction(0), Fraction(1, 2)}
    with pytest.raises(LevelError):
        gradient_field(hier3, AffineFunction(2, [0] * hier3.level(2).num_vertices), 1)


def test_gradient_reconstructs_differences(hier3):
    u = random_affine(hier3, 5)
    n = max(u.base_level, 2)
    g = gradient_field(hier3, u, n)
    lv = hier3.level(n)
    vals = exact_values_at(hier3, u, n)
    L = lv.L
    for e in range(0, lv.num_edges, 7):
        t = int(lv.edge_tail[e])
        h = int(lv.edge_head[e])
        assert vals[h] - vals[t] == g.slope(e) * Fraction(1, L)


def test_energy_of_gradient_identity(hier3):
    for seed in (1, 2, 3):
        u = random_affine(hier3, seed)
        for p in (2, 3):
            for n in range(u.base_level, 5):
                g = gradient_field(hier3, u, n)
                den, ints = scaled_values_at(hier3, u, n)
                assert energy_of_gradient(g, p) == discrete_energy_exact(
                    hier3.level(n), den, ints, p
                )


def test_ramp_energy_plateau_all_levels(hier3, hier35):
    u = diagonal_ramp()
    for hier in (hier3, hier35):
        for p in (2, 3):
            rep = energy_limit(hier, u, p, hier.max_level)
            golden = Fraction(2) ** (1 - p)
            assert all(e == golden for e in rep.energies)
            assert rep.plateau_level == 0
            assert rep.limit == golden
        rep = energy_limit(hier, u, 1.5, min(4, hier.max_level), exact=False)
        assert all(abs(e - 2.0 ** (-0.5)) < 1e-12 for e in rep.energies)


def test_ramp_closed_form_p3_level4(hier3):
    g = gradient_field(hier3, diagonal_ramp(), 4)
    assert energy_of_gradient(g, 3) == Fraction(1, 4)


def test_seeded_monotonicity_exact(hier3):
    for seed in range(20):
        u = random_affine(hier3, seed)
        sweeps = energy_levels_multi(hier3, u, (2, 3), 5, exact=True)
        for p, energies in sweeps.items():
            assert all(a <= b for a, b in zip(energies, energies[1:]))
            # plateau from the base level onward, exactly
            tail = energies[u.base_level :]
            assert all(e == tail[0] for e in tail)


def test_energy_limit_region_restriction(hier3):
    u = diagonal_ramp()
    rep = energy_limit(hier3, u, 2, 4, region=[(Letter(1, 1),)])
    assert rep.levels == (1, 2, 3, 4)
    assert all(e == Fraction(1, 6) for e in rep.energies)
    assert rep.plateau_level == 1
    # the three diagonal cells exhaust the energy
    diag = [(Letter(1, 1),), (CENTER,), (Letter(3, 1),)]
    rep = energy_limit(hier3, u, 2, 3, region=diag)
    assert rep.limit == Fraction(1, 2)


def test_evaluate_affine_below_base_rejected(hier3):
    u = AffineFunction(2, [0] * hier3.level(2).num_vertices)
    with pytest.raises(LevelError):
        evaluate_affine(hier3, u, 1, 0)


def test_energy_levels_multi_matches_energy_limit(hier3):
    u = random_affine(hier3, 77)
    sweeps = energy_levels_multi(hier3, u, (2,), 4, exact=True)
    rep = energy_limit(hier3, u, 2, 4)
    assert tuple(sweeps[2]) == rep.energies
    f = energy_levels_multi(hier3, u, (1.5,), 4, exact=False)[1.5]
    repf = energy_limit(hier3, u, 1.5, 4, exact=False)
    assert f == pytest.approx(list(repf.energies), rel=1e-12)


def test_float_and_exact_extensions_agree(hier3):
    u = random_affine(hier3, 123)
    for n in (u.base_level, u.base_level + 2):
        ex = exact_values_at(hier3, u, n)
        fl = float_values_at(hier3, u, n)
        assert np.allclose([float(v) for v in ex], fl, rtol=0, atol=1e-15)


# ---------------------------------------------------------------------------
# resistance
# ---------------------------------------------------------------------------


def test_resistance_formula_values(hier3):
    lv0 = hier3.level(0)
    q0 = lv0.vertex_id(0, 0)
    q1 = lv0.vertex_id(1, 1)
    q3 = lv0.vertex_id(-1, -1)
    for p in (1.5, 2, 3):
        assert float(resistance(lv0, q0, q1, p)) == 1.0
    assert resistance(lv0, q1, q3, 2) == 2
    assert resistance(lv0, q1, q3, 3) == 4
    assert resistance(lv0, q1, q1, 2) == 0


def test_resistance_oracle_agreement(hier3):
    for level_n in (1, 2):
        lv = hier3.level(level_n)
        L = lv.L
        pairs = [
            (lv.origin, lv.vertex_id(L, L)),
            (lv.vertex_id(L, L), lv.vertex_id(-L, -L)),
            (lv.origin, lv.vertex_id(2, 2) if level_n == 1 else lv.vertex_id(6, 6)),
        ]
        for p in (1.5, 2, 3):
            for a, b in pairs:
                want = float(resistance(lv, a, b, p))
                got = resistance_oracle(lv, a, b, p)
                assert abs(want - got) <= 1e-6 * max(1.0, want)


def test_resistance_oracle_p2_series_circuit(hier3):
    # p = 2 is a series circuit along the tree path: R = sum of edge lengths
    lv = hier3.level(1)
    a = lv.origin
    b = lv.vertex_id(3, 3)
    assert resistance(lv, a, b, 2) == lv.geodesic_distance(a, b)
    assert resistance_oracle(lv, a, b, 2.0) == pytest.approx(1.0, abs=1e-9)


def test_resistance_euclidean_two_sided(hier3):
    lv = hier3.level(2)
    ids = [lv.origin, lv.vertex_id(9, 9), lv.vertex_id(-9, 9), lv.vertex_id(3, 1)]
    for p in (2, 3):
        for a in ids:
            for b in ids:
                if a == b:
                    continue
                pa = lv.vertex_point(a)
                pb = lv.vertex_point(b)
                d_eu = math.sqrt(float(pa.true_distance_sq(pb, hier3.ratios)))
                R = float(resistance(lv, a, b, p))
                # tree distance within [d, 3 d] on the cross: loose two-sided check
                assert d_eu ** (p - 1) * 0.99 <= R <= (4 * d_eu) ** (p - 1)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


def test_sup_norm_exact():
    u = AffineFunction(0, [Fraction(-3, 4), Fraction(1, 2), 0, 0, 0])
    assert sup_norm(u) == Fraction(3, 4)


def test_product_inequality_random_pairs(hier3):
    for seed in range(6):
        u = random_affine(hier3, 2 * seed)
        v = random_affine(hier3, 2 * seed + 1)
        for p in (2, 3):
            rep = energy_property_checks(hier3, u, v, p, 4)
            assert rep.product_ok


def test_contraction_abs_and_clamp(hier3):
    u = diagonal_ramp().shift(Fraction(-1, 2))  # values straddle zero
    clamp = lambda t: max(Fraction(0), min(Fraction(1), t))
    rep = energy_property_checks(hier3, u, u, 2, 3, lipschitz_maps=(abs, clamp))
    assert all(rep.contraction_ok)
    w = compose(u, abs)
    assert energy_limit(hier3, w, 2, 3).limit <= energy_limit(hier3, u, 2, 3).limit


def test_strong_locality_exact(hier3):
    base = AffineFunction(1, [Fraction(1)] * hier3.level(1).num_vertices)
    u = restrict_to_arm(hier3, random_affine(hier3, 11).shift(2), 1)
    v = restrict_to_arm(hier3, random_affine(hier3, 12).shift(-2), 3)
    for p in (2, 3):
        rep = energy_property_checks(hier3, u, v, p, 4)
        assert rep.locality_exact
        assert rep.locality_lhs == rep.locality_rhs


def test_strong_locality_spec_example(hier3):
    # functions supported on opposite arms, zero on the shared attachment
    u = restrict_to_arm(hier3, diagonal_ramp(), 1)
    lv1 = hier3.level(1)
    vals = exact_values_at(hier3, u, 1)
    assert vals[lv1.vertex_id(3, 3)] == 1  # the arm tip keeps its value
    assert vals[lv1.origin] == 0


def test_clarkson_directions(hier3):
    for seed in range(100):
        f = random_affine(hier3, 100 + seed)
        g = random_affine(hier3, 300 + seed)
        res2, ok2 = clarkson_residual(hier3, f, g, 2, 3)
        assert ok2 and abs(res2) <= 1e-9
        res3, ok3 = clarkson_residual(hier3, f, g, 3, 3)
        assert ok3 and res3 <= 1e-9
        res15, ok15 = clarkson_residual(hier3, f, g, 1.5, 3)
        assert ok15 and res15 >= -1e-9


def test_morrey_constant_stability(hier3):
    u = random_affine(hier3, 42)
    c4 = energy_property_checks(hier3, u, u, 2, 4).morrey_constant
    c6 = energy_property_checks(hier3, u, u, 2, 6).morrey_constant
    assert c4 > 0 and c6 > 0
    assert 0.5 <= c4 / c6 <= 2.0


def test_multiply_is_pointwise_at_common_base(hier3):
    u = random_affine(hier3, 7)
    v = random_affine(hier3, 8)
    w = multiply(hier3, u, v)
    base = w.base_level
    uu = exact_values_at(hier3, u, base)
    vv = exact_values_at(hier3, v, base)
    assert list(w.values) == [a * b for a, b in zip(uu, vv)]
