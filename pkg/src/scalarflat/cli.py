"""Command line interface: one binary, six subcommands.

    admissible   exact admissibility report for a surface/class config
    futaki       Futaki invariant by both formulas, gradient, existence
    stability    parabolic quasi-stability verdict with witness
    ansatz       numerical construction and verification of the metric
    asd-index    spectral deformation-operator check on the flat 4-torus
    full         monopole config -> lattice/futaki/stability/ansatz pipeline

Exit codes: 0 all checks pass, 1 a check failed (first failure named on
stderr), 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import ansatz, asdcalc, config as cfg, futaki, hyperbolic, lattice, parabolic, report
from .errors import ConfigError, QuantizationError, ScalarFlatError

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_CONFIG = 2


# ---------------------------------------------------------------------------
# Helpers.

def _model_payload(model):
    return {
        "genus": model.genus,
        "degree": model.degree,
        "blowups": model.blowups,
        "euler_characteristic": model.euler_characteristic,
        "signature": model.signature,
        "c1_square": model.c1_square,
    }


def _class_payload(kcls):
    return {
        "fiber_area": kcls.fiber_area,
        "b": kcls.section_ratio,
        "weights": list(kcls.weights),
    }


def _emit(payload, args) -> None:
    text = report.dumps(payload)
    if getattr(args, "report", None):
        report.write_json(args.report, payload)
    print(text)


def _finish(payload, args, failures: list[str]) -> int:
    payload["pass"] = not failures
    payload["first_failure"] = failures[0] if failures else None
    _emit(payload, args)
    if failures:
        print(f"check failed: {failures[0]}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _auto_tol(sample, factor: float = 60.0) -> float:
    h = max(sample.spacing(i) for i in range(3))
    return factor * h * h


# ---------------------------------------------------------------------------
# Exact subcommands.

def cmd_admissible(args) -> int:
    sections = cfg.load_sections(args.config)
    model = cfg.build_model(sections)
    kcls = cfg.build_class(sections, model)
    rep = lattice.is_admissible(model, kcls)
    riemann, weyl = lattice.curvature_functional_bounds(model)
    payload = {
        "surface": _model_payload(model),
        "class": _class_payload(kcls),
        "conditions": [
            {"name": c.name, "value": c.value, "ok": c.ok} for c in rep.conditions
        ],
        "admissible": rep.admissible,
        "total_scalar_curvature": lattice.total_scalar_curvature(model, kcls),
        "riemann_functional_bound": riemann,
        "weyl_functional_bound": weyl,
        "config_echo": sections,
    }
    failures = [] if rep.admissible else [f"admissibility:{rep.first_failure}"]
    return _finish(payload, args, failures)


def cmd_futaki(args) -> int:
    sections = cfg.load_sections(args.config)
    model = cfg.build_model(sections)
    kcls = cfg.build_class(sections, model)
    failures = []
    try:
        result = futaki.futaki_invariant(model, kcls)
    except ValueError as exc:
        payload = {"error": str(exc), "config_echo": sections}
        return _finish(payload, args, ["futaki:admissibility"])
    gradient = None
    if result.value == 0:
        gradient = list(futaki.restricted_futaki_gradient(model, kcls))
    payload = {
        "surface": _model_payload(model),
        "class": _class_payload(kcls),
        "via_weights": result.via_weights,
        "via_boundary": result.via_boundary,
        "gradient": gradient,
        "classification": futaki.existence_classification(model),
        "config_echo": sections,
    }
    return _finish(payload, args, failures)


def cmd_stability(args) -> int:
    sections = cfg.load_sections(args.config)
    model = cfg.build_model(sections)
    kcls = cfg.build_class(sections, model)
    alphas = None
    if args.alphas:
        alphas = cfg.parse_rational_list(args.alphas)
    bundle = parabolic.bundle_from_class(model, kcls, alphas)
    verdict = parabolic.is_quasi_stable(bundle)
    equals = parabolic.stability_equals_futaki_zero(model, kcls, alphas)
    witness = None
    if verdict.witness is not None:
        witness = {
            "kind": verdict.witness.kind.value,
            "degree": verdict.witness.degree,
            "contained_flags": sorted(verdict.witness.contained_flags),
        }
    payload = {
        "surface": _model_payload(model),
        "class": _class_payload(kcls),
        "parabolic_degree_total": parabolic.parabolic_degree_total(bundle),
        "quasi_stable": verdict.quasi_stable,
        "witness": witness,
        "equals_futaki_zero": equals,
        "config_echo": sections,
    }
    failures = [] if verdict.quasi_stable else ["stability:destabilized"]
    return _finish(payload, args, failures)


# ---------------------------------------------------------------------------
# Numerical subcommands.

def _load_monopole(group_spec, points_text):
    group = hyperbolic.load_group(cfg.resolve_group_path(group_spec))
    exact_points = cfg.parse_points(points_text or "")
    charges = tuple(
        ansatz.Charge(float(x), float(y), float(t)) for x, y, t in exact_points
    )
    config = ansatz.MonopoleConfig(group, charges)
    exact_ts = tuple(t for _, _, t in exact_points)
    return config, exact_ts


def run_ansatz_checks(config, numerics, slice_svg=None, grid_csv=None):
    """Shared verification battery for `ansatz` and `full`.

    Returns (payload, failures).  Tolerances default to 60 h^2 for the
    second-order residuals, twice the (tail + quadrature) estimate for
    the boundary flux, and 5% for the boundary slopes.
    """
    box = ansatz.GridBox(*numerics.box) if numerics.box else ansatz.auto_box(config)
    sample = ansatz.sample_potential(
        config, box, numerics.grid,
        word_length=numerics.word_length,
        exclusion_factor=numerics.exclusion_factor,
    )
    failures = []
    checks = {}

    def check(name, ok, detail):
        checks[name] = {"ok": bool(ok), **detail}
        if not ok:
            failures.append(f"ansatz:{name}")

    v_min = float(sample.V.min())
    check("potential_lower_bound", v_min >= 1.0 - 1e-12, {"V_min": v_min})

    harm = ansatz.harmonicity_residual(sample)
    tol_h = numerics.harmonicity_tol or _auto_tol(sample)
    check("harmonicity", harm <= tol_h, {"residual": harm, "tolerance": tol_h})

    scal = ansatz.scalar_curvature_residual(sample)
    tol_s = numerics.scalar_tol or 1e-8
    check("scalar_flatness", scal <= tol_s, {"residual": scal, "tolerance": tol_s})

    ricci = ansatz.ricci_asd_check(sample)
    tol_r = numerics.ricci_tol or _auto_tol(sample)
    check(
        "ricci_anti_self_dual",
        ricci.sd_residual <= tol_r,
        {
            "rho_omega_residual": ricci.rho_omega_residual,
            "sd_residual": ricci.sd_residual,
            "tolerance": tol_r,
        },
    )

    em = ansatz.einstein_maxwell_closedness(sample)
    check("einstein_maxwell_closed", em <= tol_r, {"residual": em, "tolerance": tol_r})

    conn = ansatz.connection_curvature(sample)
    check(
        "connection_curvature_closed",
        conn.closedness_residual <= max(tol_h * 40.0, 1e-10),
        {"residual": conn.closedness_residual, "tolerance": max(tol_h * 40.0, 1e-10)},
    )

    # boundary behavior on a thin grid reaching |t| = 1
    slope_box = ansatz.GridBox(box.x0, box.x1, box.y0, box.y1, -1.0, 1.0)
    slope_sample = ansatz.sample_potential(
        config, slope_box, (3, 3, 65),
        word_length=numerics.word_length,
        exclusion_factor=numerics.exclusion_factor,
    )
    slope_lo, slope_hi = ansatz.boundary_behavior(slope_sample)
    ell_boundary = max(
        float(np.abs(slope_sample.ell[..., 0]).max()),
        float(np.abs(slope_sample.ell[..., -1]).max()),
    )
    check(
        "boundary_slopes",
        abs(slope_lo - 2.0) <= 2.0 * numerics.slope_tol
        and abs(slope_hi + 2.0) <= 2.0 * numerics.slope_tol
        and ell_boundary <= 1e-6,
        {
            "slope_at_minus_1": slope_lo,
            "slope_at_plus_1": slope_hi,
            "ell_at_boundary": ell_boundary,
            "tolerance": 2.0 * numerics.slope_tol,
        },
    )

    flux = ansatz.boundary_flux(
        config, numerics.epsilon,
        word_length=numerics.word_length,
        n_phi=numerics.n_phi, n_radial=numerics.n_radial,
    )
    expected = -config.weight_sum
    flux_tol = max(flux.tolerance, 1e-12)
    check(
        "boundary_flux",
        abs(flux.value - expected) <= flux_tol,
        {
            "value": flux.value,
            "expected": expected,
            "tail": flux.tail,
            "quadrature_error": flux.quadrature_error,
            "tolerance": flux_tol,
            "epsilon": numerics.epsilon,
        },
    )

    fiber_area, exceptional = ansatz.geometric_areas(config)
    payload = {
        "grid": list(numerics.grid),
        "box": [box.x0, box.x1, box.y0, box.y1, box.t0, box.t1],
        "word_length": numerics.word_length,
        "truncation_tail": sample.tail,
        "weights": list(config.weights),
        "weight_sum": config.weight_sum,
        "fiber_area": fiber_area,
        "exceptional_areas": list(exceptional),
        "checks": checks,
    }
    if grid_csv:
        report.write_grid_csv(grid_csv, sample)
        payload["grid_csv"] = str(grid_csv)
    if slice_svg:
        _write_slice_svg(slice_svg, sample)
        payload["slice_svg"] = str(slice_svg)
    return payload, failures


def _write_slice_svg(path, sample) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ix = len(sample.xs) // 2
    tt, yy = np.meshgrid(sample.ts, sample.ys)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    contour = ax.contourf(tt, yy, sample.V[ix], levels=24, cmap="viridis")
    ax.contour(tt, yy, sample.V[ix], levels=12, colors="k", linewidths=0.4)
    fig.colorbar(contour, ax=ax, label="V")
    ax.set_xlabel("t")
    ax.set_ylabel("y")
    ax.set_title(f"potential V on the y-t slice at x = {sample.xs[ix]:.3f}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    fig.savefig(tmp, format="svg")
    plt.close(fig)
    tmp.replace(path)


def cmd_ansatz(args) -> int:
    numerics = cfg.Numerics()
    if args.grid:
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise ConfigError("--grid must be nx,ny,nt")
        numerics.grid = tuple(int(p) for p in parts)
    if args.box:
        parts = [float(p) for p in args.box.split(",")]
        if len(parts) != 6:
            raise ConfigError("--box must be x0,x1,y0,y1,t0,t1")
        numerics.box = tuple(parts)
    numerics.word_length = args.word_length
    numerics.epsilon = args.epsilon
    config, _ = _load_monopole(args.group, args.points)
    payload, failures = run_ansatz_checks(
        config, numerics, slice_svg=args.slice_svg, grid_csv=args.grid_csv
    )
    payload["group"] = args.group or "default"
    weight_sum = config.weight_sum
    payload["quantization"] = {
        "weight_sum": weight_sum,
        "integer": abs(weight_sum - round(weight_sum)) <= numerics.quantization_tol,
    }
    return _finish(payload, args, failures)


def cmd_asd_index(args) -> int:
    n = args.truncation
    op = asdcalc.operator_s(n)
    adj = asdcalc.operator_s_adjoint(n)
    adjoint_residual = float(np.abs(adj.blocks - op.adjoint_blocks()).max())
    dim_ker = op.kernel_dimension()
    dim_coker = op.cokernel_dimension()
    index = op.index()
    dplus = asdcalc.d_plus_kernel_equals_closed(n)
    corr = asdcalc.kernel_correspondence(n)
    lich0 = asdcalc.lichnerowicz_kernel(n)
    lich1 = asdcalc.lichnerowicz_kernel(n, include_constants=True)

    failures = []
    signature_t4 = 0

    def check(name, ok):
        if not ok:
            failures.append(f"asd:{name}")

    check("kernel_dimension", dim_ker == 3)
    check("cokernel_dimension", dim_coker == 3)
    check("index_equals_minus_signature", index == -signature_t4)
    check("adjoint_matrix", adjoint_residual < 1e-12)
    check("dplus_kernel_equals_closed", dplus.equal)
    check("kernel_correspondence", corr.dimensions == (3, 3) and corr.injection_residual < 1e-10)
    check("lichnerowicz", lich0 == 0 and lich1 == 1)

    payload = {
        "truncation": n,
        "dim_ker": dim_ker,
        "dim_coker": dim_coker,
        "index": index,
        "signature_t4": signature_t4,
        "adjoint_residual": adjoint_residual,
        "dplus_kernel": {
            "equal": dplus.equal,
            "dim_d_plus": dplus.dim_d_plus,
            "dim_d": dplus.dim_d,
            "containment_residual": dplus.containment_residual,
        },
        "kernel_correspondence": {
            "dim_ker_scalar_linearization": corr.dim_ker_scalar_linearization,
            "dim_ker_s": corr.dim_ker_s,
            "injection_residual": corr.injection_residual,
        },
        "lichnerowicz_kernel": {"mean_zero": lich0, "with_constants": lich1},
    }
    return _finish(payload, args, failures)


def cmd_full(args) -> int:
    sections = cfg.load_sections(args.config)
    numerics = cfg.build_numerics(sections)
    monopole_body = sections.get("monopole", {})
    config, exact_ts = _load_monopole(
        monopole_body.get("group"), monopole_body.get("points", "")
    )
    failures = []
    payload = {"config_echo": sections}

    # quantization gate
    weight_sum = config.weight_sum
    try:
        degree = config.require_compact(numerics.quantization_tol)
        payload["quantization"] = {"weight_sum": weight_sum, "degree": degree, "ok": True}
    except QuantizationError as exc:
        payload["quantization"] = {"weight_sum": weight_sum, "ok": False, "error": str(exc)}
        payload["pass"] = False
        payload["first_failure"] = "quantization"
        _emit(payload, args)
        print("check failed: quantization", file=sys.stderr)
        return EXIT_CHECK

    # exact bridge: weights from exact heights, fiber area 4 (units of pi)
    weights = ansatz.exact_weights(exact_ts)
    model = lattice.RuledSurfaceModel(config.group.genus, degree, len(weights))
    kcls = lattice.KahlerClassParam(
        Fraction(4), lattice.admissible_b(model, weights), weights
    )
    payload["surface"] = _model_payload(model)
    payload["class"] = _class_payload(kcls)
    payload["fiber_area_unit"] = "pi"

    rep = lattice.is_admissible(model, kcls)
    payload["admissible"] = {
        "ok": rep.admissible,
        "conditions": [
            {"name": c.name, "value": c.value, "ok": c.ok} for c in rep.conditions
        ],
    }
    if not rep.admissible:
        failures.append(f"admissibility:{rep.first_failure}")

    if rep.admissible:
        result = futaki.futaki_invariant(model, kcls)
        futaki_zero = result.value == 0
        payload["futaki"] = {
            "via_weights": result.via_weights,
            "via_boundary": result.via_boundary,
            "zero": futaki_zero,
            "gradient": list(futaki.restricted_futaki_gradient(model, kcls))
            if futaki_zero
            else None,
        }
        if not futaki_zero:
            failures.append("futaki:nonzero")

        # raises if the verdict ever disagrees with Futaki vanishing
        quasi_stable = parabolic.stability_equals_futaki_zero(model, kcls)
        verdict = parabolic.is_quasi_stable(parabolic.bundle_from_class(model, kcls))
        payload["stability"] = {
            "quasi_stable": quasi_stable,
            "witness": str(verdict.witness) if verdict.witness else None,
        }
        if not quasi_stable:
            failures.append("stability:destabilized")

    ansatz_payload, ansatz_failures = run_ansatz_checks(config, numerics)
    payload["ansatz"] = ansatz_payload
    failures.extend(ansatz_failures)
    return _finish(payload, args, failures)


# ---------------------------------------------------------------------------
# Parser.

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalarflat",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (
        ("admissible", cmd_admissible),
        ("futaki", cmd_futaki),
        ("stability", cmd_stability),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="sectioned key-value config file")
        p.add_argument("--report", help="write the JSON report here")
        if name == "stability":
            p.add_argument(
                "--alphas",
                help="comma-separated lower flag weights (default all 0)",
            )
        p.set_defaults(func=fn)

    p = sub.add_parser("ansatz")
    p.add_argument("--group", help="generator file, or 'default'")
    p.add_argument("--points", help='charges "x,y,t;x,y,t;..."', default="")
    p.add_argument("--grid", help="nx,ny,nt (default 24,24,24)")
    p.add_argument("--box", help="x0,x1,y0,y1,t0,t1 (default: clear of charges)")
    p.add_argument("--word-length", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=0.4)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--slice-svg", help="write a V contour plot (y-t slice) here")
    p.add_argument("--grid-csv", help="dump the grid sample as CSV here")
    p.set_defaults(func=cmd_ansatz)

    p = sub.add_parser("asd-index")
    p.add_argument("--truncation", type=int, default=2)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_asd_index)

    p = sub.add_parser("full")
    p.add_argument("--config", required=True, help="config with [monopole] section")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_full)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuantizationError as exc:
        print(f"check failed: quantization: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ScalarFlatError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
