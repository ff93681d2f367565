"""Batch command-line front end.

Every command reads one JSON configuration document, runs deterministically
(fixed seeds, ordered reductions independent of thread count), and writes
CSV/JSON artifacts stamped with the configuration hash.

Exit codes: 0 success, 1 failed assertion or selftest check, 2 usage,
configuration, or resource errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .besov import bbm_curve, discrete_profiles, phi_profile, weak_monotonicity_report
from .config import ExperimentConfig, load_config
from .energy import (
    diagonal_ramp,
    energy_limit,
    energy_property_checks,
    random_affine,
    resistance,
    resistance_oracle,
    restrict_to_arm,
)
from .energy_measure import (
    coincidence_check,
    gamma_cells,
    pushforward_profile,
    word_energy_measure,
)
from .errors import ConfigError, DepthBudgetError, VicsekError
from .geometry import Hierarchy, build_level
from .io import config_hash, write_csv, write_json
from .measure import (
    derived_constants,
    hausdorff_report,
    mu_ball_bounds,
    psi_ratio_bounds,
    regularized_scales,
    scale_table,
)
from .parallel import OrderedPool, default_threads
from .ratios import example_ratio, p_is_integer
from .selftest import run_selftest
from .words import word_from_index, word_string

COMMANDS = (
    "build",
    "measure",
    "hausdorff",
    "energy",
    "energy-measure",
    "besov",
    "bbm",
    "resistance",
    "selftest",
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vicsek-lab",
        description="finite Vicsek-set approximations: measures, p-energies, "
        "Besov functionals, BBM experiments",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", default="artifacts", help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--mode", choices=("rational", "float"), default=None)
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.mode is not None:
            raw = config.to_canonical_dict()
            raw["mode"] = args.mode
            from .config import config_from_dict

            config = config_from_dict(raw)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        meta = config_hash(config.to_canonical_dict())
        threads = args.threads or config.threads or default_threads()
        pool = OrderedPool(threads)
        handler = _HANDLERS[args.command]
        return handler(config, out, meta, pool)
    except (ConfigError, DepthBudgetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except VicsekError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _cmd_build(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    ratios = config.ratio_sequence()
    level = build_level(ratios, config.depth, budget=config.cell_budget)
    write_json(out / f"geometry_level{config.depth}.json", level.to_json_dict(), meta)
    print(f"level {config.depth}: {level.num_vertices} vertices, {level.num_edges} edges")
    return 0


def _cmd_measure(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    ratios = config.ratio_sequence()
    rows = scale_table(ratios, config.depth)
    write_csv(out / "scale_table.csv", ("n", "rho", "psi", "phi"), rows, meta)

    consts = derived_constants(ratios)
    write_json(
        out / "derived_constants.json",
        {
            "alpha": {str(k): v for k, v in consts.alpha.items()},
            "beta_l": {str(k): v for k, v in consts.beta.items()},
            "t_l": {str(k): v for k, v in consts.t.items()},
            "inf_alpha": consts.inf_alpha,
            "sup_alpha": consts.sup_alpha,
            "eps_p": consts.eps_p,
        },
        meta,
    )

    level = build_level(ratios, min(config.depth, 2), budget=config.cell_budget)
    origin = level.vertex_point(level.origin)
    rows = []
    for k in range(1, 3 * config.depth + 1):
        r = Fraction(2) * Fraction(9, 10) ** k
        lo, hi = mu_ball_bounds(ratios, origin, r, min(config.depth, 4))
        rows.append((float(r), str(r), lo, hi))
    write_csv(out / "ball_bounds.csv", ("r_float", "r", "lower", "upper"), rows, meta)

    c1, ia, c2, sa = psi_ratio_bounds(ratios)
    write_json(
        out / "doubling_report.json",
        {"c1": c1, "inf_alpha": ia, "c2": c2, "sup_alpha": sa},
        meta,
    )

    rows = []
    r = Fraction(3)
    for _ in range(4 * config.depth):
        psi_t, phi_t = regularized_scales(ratios, r)
        rows.append((float(r), psi_t, phi_t))
        r = r * Fraction(4, 5)
    write_csv(out / "regularized_scales.csv", ("r", "psi_tilde", "phi_tilde"), rows, meta)
    return 0


def _cmd_hausdorff(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    h = config.hausdorff
    prefix = [example_ratio(h.a, h.b, k) for k in range(1, h.prefix_len + 1)]
    report = hausdorff_report(
        h.a, h.b, prefix, h.theta, liminf_eta=h.liminf_eta, limsup_eta=h.limsup_eta
    )
    rows = [
        (n + 1, report.theta_seq[n], report.eta_seq[n], report.xi_seq[n])
        for n in range(len(prefix))
    ]
    write_csv(out / "hausdorff_diagnostics.csv", ("n", "theta", "eta", "xi"), rows, meta)
    write_json(
        out / "hausdorff_summary.json",
        {
            "a": h.a,
            "b": h.b,
            "theta": h.theta,
            "alpha": report.alpha,
            "hausdorff_measure_class": report.hausdorff_measure_class,
            "ahlfors_regular": report.ahlfors_regular,
            "non_self_similar": report.non_self_similar,
            "note": report.note,
        },
        meta,
    )
    print(f"alpha = {report.alpha}")
    return 0


def _hierarchy(config: ExperimentConfig) -> Hierarchy:
    ratios = config.ratio_sequence()
    return Hierarchy(ratios, max(config.vertex_level, config.depth + 1), budget=config.cell_budget)


def _suite(config: ExperimentConfig, hier: Hierarchy):
    funcs = [("ramp", diagonal_ramp())]
    funcs += [(f"seed{{{s}}}", random_affine(hier, s)) for s in config.seeds]
    return funcs


def _cmd_energy(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    hier = _hierarchy(config)
    exact = config.mode == "rational"
    funcs = _suite(config, hier)

    def one(item):
        name, u = item
        rep = energy_limit(hier, u, config.p, config.depth, exact=exact)
        return name, rep

    reports = pool.map(one, funcs)
    write_json(
        out / "energy_report.json",
        {name: rep.to_json_dict() for name, rep in reports},
        meta,
    )

    v1 = restrict_to_arm(hier, random_affine(hier, config.seeds[0]), 1)
    v3 = restrict_to_arm(hier, random_affine(hier, config.seeds[0]), 3)
    checks = energy_property_checks(hier, v1, v3, config.p, config.depth)
    write_json(out / "property_checks.json", checks.to_json_dict(), meta)
    return 0


def _cmd_energy_measure(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    hier = _hierarchy(config)
    exact = config.mode == "rational" and p_is_integer(config.p)
    u = diagonal_ramp()
    depth = min(config.depth, 3)
    gm = gamma_cells(hier, u, config.p, 1, exact=exact)
    wm = word_energy_measure(hier, u, config.p, 1, exact=exact)
    rows = [
        (word_string(word_from_index(hier.ratios, 1, i)), gm.masses[i], wm.masses[i])
        for i in range(len(gm.masses))
    ]
    write_csv(out / "cell_measures.csv", ("word", "gradient_mass", "word_mass"), rows, meta)
    dev = coincidence_check(hier, u, config.p, depth)
    hist = pushforward_profile(hier, u, config.p, config.bins, exact=exact)
    write_csv(
        out / "pushforward_histogram.csv",
        ("bin_left", "bin_right", "mass"),
        hist.to_rows(),
        meta,
    )
    write_json(
        out / "energy_measure_summary.json",
        {
            "gamma_total": gm.total,
            "coincidence_max_relative_discrepancy": dev,
            "histogram_total": hist.total,
            "point_mass_flags": list(hist.point_mass_flags),
        },
        meta,
    )
    return 0


def _cmd_besov(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    if config.vertex_level < config.depth + 2:
        raise ConfigError(
            "besov profiles need vertex_level >= depth + 2 as a discretization "
            f"margin; got vertex_level={config.vertex_level}, depth={config.depth}"
        )
    hier = _hierarchy(config)
    u = diagonal_ramp()
    rows = []
    for beta in config.beta_grid:
        prof = phi_profile(hier, u, config.p, beta, config.vertex_level, config.depth)
        dprof = discrete_profiles(hier, u, config.p, beta, config.depth)
        for n in range(config.depth + 1):
            rows.append(
                (
                    beta,
                    n,
                    float(prof.ball_energies[n]),
                    float(prof.phi_proxy[n]),
                    float(dprof.beta_energies[n]),
                )
            )
    write_csv(
        out / "besov_profiles.csv",
        ("beta", "n", "ball_energy", "phi_proxy", "beta_energy"),
        rows,
        meta,
    )
    wm = weak_monotonicity_report(
        hier,
        u,
        config.p,
        config.vertex_level,
        config.depth,
        (max(1, config.depth - 2), config.depth),
    )
    write_json(
        out / "weak_monotonicity.json",
        {
            "phi_values": list(wm.phi_values),
            "sup": wm.sup_value,
            "window_min": wm.window_min,
            "ratio": wm.ratio,
            "degenerate": wm.degenerate,
        },
        meta,
    )
    return 0


def _cmd_bbm(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    hier = _hierarchy(config)
    u = diagonal_ramp()
    curve = bbm_curve(hier, u, config.p, list(config.epsilons), config.depth, tail="plateau")
    rows = [
        (pt.epsilon, pt.beta, pt.value, pt.bracket_low, pt.bracket_high, pt.within_bracket)
        for pt in curve.points
    ]
    write_csv(
        out / "bbm_curve.csv",
        ("epsilon", "beta", "value", "bracket_low", "bracket_high", "within_bracket"),
        rows,
        meta,
    )
    write_json(
        out / "bbm_summary.json",
        {
            "energy": curve.energy,
            "limit_low": curve.limit_low,
            "limit_high": curve.limit_high,
        },
        meta,
    )
    flagged = [pt.epsilon for pt in curve.points if not pt.within_bracket]
    if flagged:
        print(f"bracket violations at epsilon = {flagged}", file=sys.stderr)
        return 1
    return 0


def _cmd_resistance(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    ratios = config.ratio_sequence()
    level = build_level(ratios, min(config.depth, 2), budget=config.cell_budget)
    L = level.L
    pairs = [
        (level.origin, level.vertex_id(L, L)),
        (level.vertex_id(L, L), level.vertex_id(-L, -L)),
        (level.vertex_id(-L, L), level.vertex_id(L, -L)),
        (level.origin, level.vertex_id(-L, L)),
    ]
    rows = []
    oracle_ok = True
    for a, b in pairs:
        d = level.geodesic_distance(a, b)
        r = resistance(level, a, b, config.p)
        agree = ""
        if float(config.p) <= 8 and level.num_vertices <= 600:
            ro = resistance_oracle(level, a, b, float(config.p))
            agree = abs(float(r) - ro) <= 1e-6 * max(1.0, float(r))
            oracle_ok = oracle_ok and agree
        rows.append((a, b, d, r, agree))
    write_csv(
        out / "resistance_table.csv",
        ("vertex_a", "vertex_b", "geodesic", "resistance", "oracle_agrees"),
        rows,
        meta,
    )
    return 0 if oracle_ok else 1


def _cmd_selftest(config: ExperimentConfig, out: Path, meta: str, pool: OrderedPool) -> int:
    checks, artifacts = run_selftest(config, pool)
    # determinism-bearing artifacts
    ratios = config.ratio_sequence()
    write_csv(
        out / "scale_table.csv",
        ("n", "rho", "psi", "phi"),
        scale_table(ratios, config.depth),
        meta,
    )
    write_json(out / "energy_report.json", artifacts["energy_report"].to_json_dict(), meta)
    curve = artifacts["bbm"]
    write_csv(
        out / "bbm_curve.csv",
        ("epsilon", "beta", "value", "bracket_low", "bracket_high", "within_bracket"),
        [
            (pt.epsilon, pt.beta, pt.value, pt.bracket_low, pt.bracket_high, pt.within_bracket)
            for pt in curve.points
        ],
        meta,
    )
    wm = artifacts["weak_monotonicity"]
    write_json(
        out / "weak_monotonicity.json",
        {"phi_values": list(wm.phi_values), "ratio": wm.ratio},
        meta,
    )
    hist = artifacts["histogram"]
    write_csv(
        out / "pushforward_histogram.csv",
        ("bin_left", "bin_right", "mass"),
        hist.to_rows(),
        meta,
    )
    rows = [(name, ok, detail) for name, ok, detail in checks]
    write_csv(out / "selftest_report.csv", ("check", "ok", "detail"), rows, meta)
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail and not ok else ""))
    if failed:
        print(f"{len(failed)} selftest check(s) failed: {failed}", file=sys.stderr)
        return 1
    print(f"all {len(checks)} selftest checks passed")
    return 0


_HANDLERS = {
    "build": _cmd_build,
    "measure": _cmd_measure,
    "hausdorff": _cmd_hausdorff,
    "energy": _cmd_energy,
    "energy-measure": _cmd_energy_measure,
    "besov": _cmd_besov,
    "bbm": _cmd_bbm,
    "resistance": _cmd_resistance,
    "selftest": _cmd_selftest,
}


if __name__ == "__main__":
    sys.exit(main())
