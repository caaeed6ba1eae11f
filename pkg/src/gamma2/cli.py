"""Command-line front end.

Subcommands: constants, profile, iso, rearrange, minimize, verify, suite.
Each reads a flat config (``--config`` file or ``--scenario`` name, plus
``--set key=value`` overrides) and writes CSV/JSON artifacts into ``--out``.

Exit codes: 0 ok, 1 verification failure or property violation,
2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import (Prediction, second_order_prediction, second_order_prediction_1d,
                          thread_count, verify_expansion_1d, verify_expansion_nd)
from .config import (build_iso, build_potential, build_weight, eps_sweep, float_list, get,
                     load_config, load_scenario, resolve_path, scenario_names)
from .errors import ConfigError, Gamma2Error
from .isoperimetry import solve_volume_function
from .potential import validate_potential
from .profile import csym_with_error, cw_with_error, solve_profile
from .rearrangement import (GridFunction, equimeasurability_defect, polya_szego_pair,
                            property_suite, random_field, rearrange)
from .solver1d import reference_interface, solve_localized, well_root_prediction

logger = logging.getLogger("gamma2")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _q(value, error=None, provenance: str = "") -> dict:
    """A reported number with its error estimate and where it came from."""
    return {"value": value, "error": error, "provenance": provenance}


def _stamp(record: dict, command: str, cfg: dict) -> dict:
    record = {"command": command, **record}
    record["config"] = {k: v for k, v in sorted(cfg.items()) if not k.startswith("_")}
    if "_scenario" in cfg:
        record["scenario"] = cfg["_scenario"]
    record["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return record


def _prediction_block(pred: Prediction, provenance: str) -> dict:
    out = {"first_order": _q(pred.first_order, None, provenance),
           "second_order": _q(pred.second_order, None, provenance)}
    out["components"] = {k: _q(v, None, provenance) for k, v in pred.components.items()}
    out["inputs"] = pred.inputs
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_constants(cfg: dict, out: Path, args) -> int:
    p = build_potential(cfg)
    report = validate_potential(p)
    prof = solve_profile(p)
    cw, cw_err = cw_with_error(p)
    if p.symmetric:
        cs, cs_err = 0.0, 0.0
    else:
        cs, cs_err = csym_with_error(prof)
    n = get(cfg, "geometry.n", int, 2)
    kappa = get(cfg, "geometry.kappa", float, 1.0)
    per = get(cfg, "geometry.perimeter", float, 1.0)
    total = get(cfg, "geometry.total", float, 1.0)
    pred = second_order_prediction(p, prof, n, kappa, per, total)
    rec = {
        "potential": p.describe(),
        "hypotheses": report.as_dict(),
        "a": _q(p.a, 0.0, "definition"), "b": _q(p.b, 0.0, "definition"),
        "c": _q(p.c, 1e-12, "root of W' between the wells"),
        "q": _q(p.q, 0.0, "definition"), "ell": _q(p.ell, 0.0, "analytic second derivative"),
        "c_W": _q(cw, cw_err, "adaptive quadrature of sqrt(W)"),
        "c_sym": _q(cs, cs_err, "zero by symmetry" if p.symmetric
                    else "Gauss quadrature of W(z) t, 8 vs 4 points, plus tails"),
        "profile_residual": _q(prof.residual(), None, "max |z' - sqrt(W(z))| at midpoints"),
        "tau_u": _q(pred.inputs["tau"], 1e-10, "root of the shift equation"),
        "Lambda_u": _q(pred.inputs["Lambda"], None, "closed form"),
        "geometry": {"n": n, "kappa": kappa, "perimeter": per, "total": total},
        "F2": _prediction_block(pred, "closed form from the constants above"),
    }
    if "weight.kind" in cfg:
        w, _ = build_weight(cfg)
        t0 = get(cfg, "problem.t0", float, None)
        if t0 is None:
            t0 = reference_interface(w, get(cfg, "problem.mass", float), p)
        p1 = second_order_prediction_1d(w, p, prof, t0)
        rec["lambda0"] = _q(p1.inputs["lambda0"], None, "closed form")
        rec["weighted_1d"] = _prediction_block(p1, "closed form, weighted 1D problem")
    io.write_json(out / "constants.json", _stamp(rec, "constants", cfg))
    print(f"c_W = {cw:.12g}  c_sym = {cs:.6g}  F2 = {pred.second_order:.12g}")
    return EXIT_OK


def cmd_profile(cfg: dict, out: Path, args) -> int:
    p = build_potential(cfg)
    prof = solve_profile(p)
    span = max(abs(prof.t_lo), abs(prof.t_hi))
    t = np.linspace(-span, span, get(cfg, "profile.samples", int, 2001))
    io.write_csv(out / "profile.csv", ["t", "z", "dz"], [t, prof.z(t), prof.dz(t)])
    c1, c2 = prof.decay_rates
    rec = {
        "potential": p.describe(),
        "residual": _q(prof.residual(), None, "max |z' - sqrt(W(z))| at midpoints"),
        "first_integral_defect": _q(prof.first_integral_defect(), None, "max |z'^2 - W(z)|"),
        "decay_constants": _q([c1, c2], None, "sampled bounds of W / (b-s)^(1+q), diagnostic"),
        "width": _q(prof.width, None, "support width (q<1) or 1/tail rate (q=1)"),
        "t_a": prof.t_a, "t_b": prof.t_b, "nodes": int(prof.t.size),
    }
    io.write_json(out / "profile.json", _stamp(rec, "profile", cfg))
    print(f"profile residual {prof.residual():.3g}, {prof.t.size} nodes")
    return EXIT_OK


def cmd_iso(cfg: dict, out: Path, args) -> int:
    base, istar = build_iso(cfg)
    dom = solve_volume_function(istar)
    v = np.linspace(0.0, 1.0, 2001)
    io.write_csv(out / "iso.csv", ["v", "I", "Istar"], [v, base.eval(v), istar.eval(v)])
    dom.to_csv(out / "domain.csv")
    v_m = istar.v_m
    i_m, di_m = float(base.eval(v_m)), float(base.deriv(v_m))
    rec = {
        "profile": base.name, "n": base.n, "v_m": v_m,
        "checks": istar.check(),
        "T": _q(dom.T, abs(dom.T - dom.T_quad), "ODE for V with event stops; error vs quadrature"),
        "T_quadrature": _q(dom.T_quad, None, "adaptive quadrature of dv / I*"),
        "t_m": _q(float(dom.t_of_volume(v_m)), None, "inverse of V"),
        # eta = I*(V), so eta' = I*'(V) I*(V); at the pin this is I'(v_m) I(v_m)
        "eta_prime_at_pin": _q(di_m * i_m, None, "I'(v_m) I(v_m)"),
    }
    io.write_json(out / "iso.json", _stamp(rec, "iso", cfg))
    print(f"T = {dom.T:.12g} (quadrature {dom.T_quad:.12g})")
    return EXIT_OK


def _input_field(cfg: dict, args, rng) -> GridFunction:
    path = get(cfg, "rearrange.input", str, None)
    if path:
        return GridFunction.load(resolve_path(cfg, path))
    return random_field(rng, n=get(cfg, "rearrange.grid", int, 128))


def cmd_rearrange(cfg: dict, out: Path, args) -> int:
    seed = args.seed if args.seed is not None else get(cfg, "suite.seed", int, 0)
    _, istar = build_iso(cfg)
    dom = solve_volume_function(istar)
    u = _input_field(cfg, args, np.random.default_rng(seed))
    r = rearrange(u, dom)
    r.to_csv(out / "rearranged.csv")
    defect = equimeasurability_defect(u, dom)
    lhs, rhs = polya_szego_pair(u, dom, 2.0)
    rec = {
        "seed": seed, "grid": list(u.shape),
        "equimeasurability_defect": _q(defect, u.cell_measure, "max over thresholds; bound is one cell"),
        "mass": {"u": u.integral(), "f": r.integral_of(lambda x: x)},
        "polya_szego": {"rearranged": _q(lhs, None, "smoothed quantile, Gauss moments"),
                        "original": _q(rhs, None, "central differences")},
    }
    io.write_json(out / "rearrange.json", _stamp(rec, "rearrange", cfg))
    bad = defect > u.cell_measure
    print(f"equimeasurability defect {defect / u.cell_measure:.3g} cells, "
          f"Dirichlet ratio {lhs / rhs:.3g}")
    return EXIT_FAIL if bad else EXIT_OK


def _problem(cfg: dict, p):
    w, cset = build_weight(cfg)
    if cset is not None:
        from .asymptotics import levelset_problem
        _, t0, m = levelset_problem(cset, p)
        return w, cset, t0, m
    t0 = get(cfg, "problem.t0", float, None)
    if t0 is None:
        m = get(cfg, "problem.mass", float)
        t0 = reference_interface(w, m, p)
    else:
        m = p.a * w.cumulative(t0) + p.b * (w.total - w.cumulative(t0))
    return w, None, t0, m


def cmd_minimize(cfg: dict, out: Path, args) -> int:
    p = build_potential(cfg)
    prof = solve_profile(p)
    w, _, t0, m = _problem(cfg, p)
    eps = float_list(args.eps_list)[0] if args.eps_list else get(cfg, "solver.eps", float, 0.01)
    pred = second_order_prediction_1d(w, p, prof, t0)
    s = solve_localized(prof, p, w, eps, m, t0=t0, tau0=pred.inputs["tau"],
                        lambda0=pred.inputs["lambda0"],
                        fine_factor=get(cfg, "mesh.fine_spacing_factor", float, 400.0),
                        tol=get(cfg, "solver.tol", float, 1e-9),
                        max_iter=get(cfg, "solver.max_iter", int, 100),
                        delta_loc=get(cfg, "solver.delta_loc", float, None))
    r = s.result
    r.field.to_csv(out / "minimizer.csv")
    lam_pred = well_root_prediction(p, eps, r.lambda_eps)
    rec = {
        "eps": eps, "mass": m, "t0": t0, "nodes": s.functional.size,
        "energy": _q(r.field.energy, None, "P1 elements, 6-point Gauss per cell"),
        "recovery_energy": _q(s.recovery_discrete.energy, None, "same discretization"),
        "lambda_eps": _q(r.lambda_eps, None, "KKT multiplier of the mass constraint"),
        "lambda_bulk": _q(r.lambda_bulk, None, "pointwise identity away from the layer"),
        "lambda0": _q(pred.inputs["lambda0"], None, "closed form"),
        "el_residual": _q(r.el_residual, None, "max nodal KKT residual"),
        "bound_violation": _q(r.bound_violation, None, "nodal distance outside [a_eps, b_eps]"),
        "well_roots": list(r.well_roots), "well_root_prediction": lam_pred,
        "iterations": r.iterations, "converged": r.converged, "locality": r.locality,
    }
    io.write_json(out / "minimize.json", _stamp(rec, "minimize", cfg))
    print(f"eps={eps:g} energy={r.field.energy:.12g} lambda={r.lambda_eps:.8g} "
          f"residual={r.el_residual:.2g}")
    return EXIT_OK if r.converged else EXIT_FAIL


def cmd_verify(cfg: dict, out: Path, args) -> int:
    p = build_potential(cfg)
    prof = solve_profile(p)
    eps = float_list(args.eps_list) if args.eps_list else eps_sweep(cfg)
    if any(b >= a for a, b in zip(eps, eps[1:])) or min(eps) <= 0:
        raise ConfigError("--eps-list must be positive and strictly decreasing")
    mode = get(cfg, "sweep.mode", str, "recovery")
    threshold = args.threshold if args.threshold is not None else get(cfg, "verify.threshold", float, 0.05)
    kw = dict(fine_factor=get(cfg, "mesh.fine_spacing_factor", float, 400.0),
              tol=get(cfg, "solver.tol", float, 1e-9), threads=thread_count())
    w, cset, t0, m = _problem(cfg, p)
    if cset is not None:
        rep = verify_expansion_nd(cset, p, eps, prof=prof, mode=mode, **kw)
    else:
        rep = verify_expansion_1d(w, p, eps, mode=mode, m=m, t0=t0, prof=prof, **kw)
    rec = rep.as_dict()
    rec["threshold"] = threshold
    rec["extrapolated_limit"] = _q(rep.extrapolated_limit, rep.fit.get("C"),
                                   "least-squares fit L + C eps^p over the last points")
    rec["gap_kind"] = "absolute" if abs(rep.prediction.second_order) < 1e-12 else "relative"
    ok = math.isfinite(rep.relative_gap) and rep.relative_gap <= threshold
    rec["passed"] = ok
    io.write_json(out / "report.json", _stamp(rec, "verify", cfg))
    rep.to_csv(out / "report.csv")
    for e, err in zip(rep.eps_list, rep.errors):
        if err:
            print(f"eps={e:g}: {err}")
    print(f"limit {rep.extrapolated_limit:.8g}, prediction {rep.prediction.second_order:.8g}, "
          f"gap {rep.relative_gap:.3g} ({'pass' if ok else 'FAIL'})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_suite(cfg: dict, out: Path, args) -> int:
    seed = args.seed if args.seed is not None else get(cfg, "suite.seed", int, 0)
    _, istar = build_iso(cfg)
    dom = solve_volume_function(istar)
    res = property_suite(dom, n_fields=get(cfg, "suite.fields", int, 100),
                         grid=get(cfg, "suite.grid", int, 128), seed=seed)
    rec = res.as_dict()
    # profile invariants on the configured (or quartic) potential
    cfg_p = dict(cfg)
    cfg_p.setdefault("potential.name", "quartic")
    p = build_potential(cfg_p)
    prof = solve_profile(p)
    rec["profile"] = {"residual": prof.residual(),
                      "first_integral_defect": prof.first_integral_defect(),
                      "monotone": bool(np.all(np.diff(prof.nodes_z) >= -1e-14))}
    prof_ok = prof.residual() < 1e-6 and rec["profile"]["monotone"]
    if not prof_ok:
        rec["passed"] = False
    io.write_json(out / "suite.json", _stamp(rec, "suite", cfg))
    for k in res.checked:
        print(f"{k:18s} checked {res.checked[k]:4d}  violations {res.violations[k]}")
    return EXIT_OK if res.passed and prof_ok else EXIT_FAIL


COMMANDS = {
    "constants": cmd_constants, "profile": cmd_profile, "iso": cmd_iso,
    "rearrange": cmd_rearrange, "minimize": cmd_minimize, "verify": cmd_verify,
    "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gamma2", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="flat key = value config file")
        sp.add_argument("--scenario", help=f"bundled scenario ({', '.join(scenario_names())})")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
        sp.add_argument("--out", type=Path, help="output directory (default: output.dir or ./gamma2-out)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--eps-list", help="comma separated, decreasing")
    return ap


def _gather_config(args) -> dict:
    cfg: dict = {}
    if args.scenario:
        cfg.update(load_scenario(args.scenario))
    if args.config:
        cfg.update(load_config(args.config))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        cfg[k.strip()] = v.strip()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _gather_config(args)
        out = args.out or Path(get(cfg, "output.dir", str, "gamma2-out"))
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Gamma2Error as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
