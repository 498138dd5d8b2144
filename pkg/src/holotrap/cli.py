"""Command-line front end.

Subcommands: verify, gate, adiabatic, resilience, measure.  Configs are
JSON; command-line flags override config values, ``--print-config``
dumps the effective configuration and exits.  Exit codes: 0 all checks
pass, 1 a physics check failed, 2 usage or configuration error.  All
quantities are in units hbar = 1, nu = 1.  Relative config and loop
paths resolve against $HOLOTRAP_CONFIG_DIR when set.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import eigh

from . import adiabatic as ad
from . import geometry, holonomy, jcmodel, resilience
from .controlframe import ControlPoint1Q
from .errors import ConfigError, HolotrapError
from .fock import FockSpace
from .holonomy import Loop

_DEFAULTS = {
    "verify": {"n_points": 20, "seed": 7, "n_max": 80, "output_dir": ".",
               "skip_planes": []},
    "gate": {"plane": None, "sigma": None, "loop": None, "steps": 2000,
             "source": "analytic", "closed_form": False, "json": False},
    "adiabatic": {"loop": None, "x": 0.5, "r1": 0.8, "t_list": [100.0, 200.0, 400.0],
                  "n_max": 150, "ramp": "smooth", "output": "adiabatic_study.csv",
                  "leak_budget": 0.02},
    "resilience": {"x": 1.0, "r1": 2.0, "grid_span": 0.05, "grid_points": 11,
                   "sigma1": 0.0, "sigma2": 0.01, "trials": 500,
                   "r1_edges": [0.5, 1.0, 1.5, 2.0], "seed": 0, "jobs": 1,
                   "surface_output": "sensitivity_surface.csv",
                   "mc_output": "monte_carlo.csv", "mc_path": "fast"},
    "measure": {"state": "logical1", "amp0": 0.70710678, "amp1": 0.70710678,
                "n_max": 40},
}

_HINTS = {
    "adiabatic": "gnuplot> set logscale xy; "
                 "plot 'adiabatic_study.csv' using 1:4 with linespoints",
    "resilience": "gnuplot> set dgrid3d; splot 'sensitivity_surface.csv' "
                  "using 1:2:3 with lines\n"
                  "gnuplot> set logscale y; plot 'monte_carlo.csv' using 1:2 "
                  "with linespoints",
    "gate": "gate output is a small matrix; no plot suggested",
    "verify": "verify output is a JSON report; no plot suggested",
    "measure": "measure output is a two-row table; no plot suggested",
}


def _config_dir() -> Path:
    return Path(os.environ.get("HOLOTRAP_CONFIG_DIR", "."))


def _resolve(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else _config_dir() / p


def _load_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        path = _resolve(args.config)
        try:
            user = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(user) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(user)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key, ref in _DEFAULTS[command].items():
        if ref is not None and cfg[key] is not None:
            want = type(ref)
            if want in (int, float) and isinstance(cfg[key], (int, float)):
                cfg[key] = want(cfg[key])
            elif want is list and isinstance(cfg[key], (list, tuple)):
                cfg[key] = list(cfg[key])
            elif not isinstance(cfg[key], want):
                raise ConfigError(f"config key {key!r} expects {want.__name__}")
    return cfg


def _print_config_maybe(cfg: dict, args) -> bool:
    if getattr(args, "print_config", False):
        print(json.dumps(cfg, indent=2, sort_keys=True))
        return True
    if getattr(args, "gnuplot_hints", False):
        print(_HINTS[args.command])
        return True
    return False


def _fmt_matrix(m: np.ndarray) -> str:
    rows = []
    for row in m:
        rows.append("  [" + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row) + "]")
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _spectrum_checks(n_max: int) -> list[dict]:
    checks = []
    space = FockSpace(n_max)
    p = jcmodel.JCParams(nu=1.0, g=1.0)
    w = eigh(jcmodel.jc_hamiltonian(p, space).matrix, eigvals_only=True)
    err = 0.0
    for n in range(31):
        for sign in (-1, +1):
            target = jcmodel.dressed_energy(p, n, sign)
            err = max(err, float(np.abs(w - target).min()))
    checks.append({"name": "dressed_energies_closed_form", "max_abs_error": err,
                   "tolerance": 1e-8, "status": "pass" if err <= 1e-8 else "fail"})
    mult = jcmodel.degeneracy_multiplicity(jcmodel.jc_hamiltonian(p, space), p.e_deg)
    checks.append({"name": "degeneracy_multiplicity_resonant", "value": mult,
                   "expected": 2, "status": "pass" if mult == 2 else "fail"})
    p_off = jcmodel.JCParams(nu=1.0, g=0.9)
    mult_off = jcmodel.degeneracy_multiplicity(
        jcmodel.jc_hamiltonian(p_off, space), p_off.omega1)
    checks.append({"name": "degeneracy_multiplicity_detuned", "value": mult_off,
                   "expected": 1, "status": "pass" if mult_off == 1 else "fail"})
    gap = float(np.sort(w - p.e_deg)[2])
    gap_err = abs(gap - (2 - np.sqrt(2)))
    checks.append({"name": "spectral_gap", "max_abs_error": gap_err,
                   "tolerance": 1e-10, "status": "pass" if gap_err <= 1e-10 else "fail"})
    return checks


def _curvature_checks() -> list[dict]:
    checks = []
    cases = [
        (ControlPoint1Q(r1=0.5), ("r1", "x"), "F_r1x"),
        (ControlPoint1Q(r1=0.5, theta1=np.pi), ("r1", "y"), "F_r1y"),
    ]
    from .controlframe import ControlPoint2Q
    cases.append((ControlPoint2Q(r2=0.5), ("r2", "r3"), "F_r2r3"))
    for point, pair, name in cases:
        ana = geometry.curvature_analytic(point, pair).matrix
        plaq = geometry.curvature_plaquette(point, pair, h=1e-2).matrix
        rel = float(np.abs(plaq - ana).max() / np.abs(ana).max())
        checks.append({"name": f"{name}_plaquette_vs_analytic", "rel_error": rel,
                       "tolerance": 0.05, "status": "pass" if rel <= 0.05 else "fail"})
    return checks


def _measurement_checks() -> list[dict]:
    checks = []
    space = FockSpace(40)
    phi = jcmodel.measurement_phase()
    pulse = jcmodel.measurement_pulse(phi, space)
    basis = jcmodel.logical_basis(space, jcmodel.JCParams())
    fixed = abs(np.vdot(basis.kets[:, 0], pulse.matrix @ basis.kets[:, 0])) ** 2
    checks.append({"name": "pulse_leaves_logical0_fixed", "value": float(fixed),
                   "tolerance": 1e-12,
                   "status": "pass" if abs(fixed - 1) <= 1e-12 else "fail"})
    _, pe = jcmodel.readout_probabilities(pulse.matrix @ basis.kets[:, 1], space)
    checks.append({"name": "pulse_transfers_logical1", "value": float(pe),
                   "tolerance": 1e-10,
                   "status": "pass" if abs(pe - 1) <= 1e-10 else "fail"})
    return checks


def cmd_verify(args) -> int:
    cfg = _load_config("verify", args)
    if _print_config_maybe(cfg, args):
        return 0
    out_dir = _resolve(cfg["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    ledger = geometry.conventions_report(n_points=cfg["n_points"], seed=cfg["seed"])
    calibrations = []
    for plane in holonomy.PLANES:
        if plane in cfg["skip_planes"]:
            continue
        rec = holonomy.calibrate(plane)
        calibrations.append(rec.to_dict())
        ledger["checks"].append(
            {"name": f"area_law_{plane}", "residual": rec.residual,
             "kappa": rec.kappa, "generator": rec.generator_label,
             "kappa_matches_nominal": rec.kappa_matches_nominal,
             "generator_matches_nominal": rec.generator_matches_nominal,
             "tolerance": 1e-5,
             "status": "pass" if rec.residual <= 1e-5 else "fail"})
    ledger["calibrations"] = calibrations
    ledger_path = out_dir / "conventions_ledger.json"
    ledger_path.write_text(json.dumps(ledger, indent=2))

    checks = _spectrum_checks(cfg["n_max"])
    checks.extend(ledger["checks"])
    checks.extend(_curvature_checks())
    checks.extend(_measurement_checks())
    failed = [c for c in checks if c.get("status") == "fail"]
    report = {"units": {"hbar": 1.0, "nu": 1.0},
              "conventions_ledger": str(ledger_path),
              "passed": len(failed) == 0, "checks": checks}
    report_path = out_dir / "verify_report.json"
    report_path.write_text(json.dumps(report, indent=2))

    for c in checks:
        print(f"{c['name']}: {c.get('status', 'recorded')}")
    print(f"conventions ledger written to {ledger_path}")
    print(f"report written to {report_path}")
    if failed:
        print(f"FAILED: {len(failed)} check(s): {[c['name'] for c in failed]}")
        return 1
    print(f"all {sum(1 for c in checks if c.get('status') == 'pass')} checks pass")
    return 0


# ---------------------------------------------------------------------------
# gate
# ---------------------------------------------------------------------------

def cmd_gate(args) -> int:
    cfg = _load_config("gate", args)
    if _print_config_maybe(cfg, args):
        return 0
    if cfg["loop"] is None and (cfg["plane"] is None or cfg["sigma"] is None):
        raise ConfigError("gate needs either --loop FILE or --plane and --sigma")
    out: dict = {"units": {"hbar": 1.0, "nu": 1.0}}
    if cfg["loop"] is not None:
        loop = Loop.load(_resolve(cfg["loop"]))
        plane = loop.plane
        if plane is None:
            raise ConfigError("gate loops must carry a plane tag")
        sigma = holonomy.sigma_area(loop)
    else:
        plane, sigma = cfg["plane"], float(cfg["sigma"])
        loop = None
    closed = holonomy.closed_form_gate(plane, sigma)
    out.update({"plane": plane, "sigma": sigma})
    out["closed_form_unitary"] = _mat_json(closed.unitary)
    if not cfg["closed_form"]:
        rec = holonomy.calibrate(plane)
        calibrated = rec.gate(sigma)
        out["calibrated_unitary"] = _mat_json(calibrated.unitary)
        out["kappa"] = rec.kappa
        if loop is not None:
            trans = holonomy.transport(loop, steps=cfg["steps"], source=cfg["source"])
            out["transport_unitary"] = _mat_json(trans.unitary)
            out["transport_steps"] = trans.steps
            out["residual_nonunitarity"] = trans.residual_nonunitarity
            out["distance_transport_vs_calibrated"] = holonomy.gate_distance(
                trans, calibrated)
            out["distance_transport_vs_closed_form"] = holonomy.gate_distance(
                trans, closed)
        out["distance_calibrated_vs_closed_form"] = holonomy.gate_distance(
            calibrated, closed)
    if cfg["json"]:
        print(json.dumps(out, indent=2))
        return 0
    print(f"plane {plane}, Sigma = {sigma:.10f}   (units: hbar=1, nu=1)")
    print("closed-form gate (nominal convention):")
    print(_fmt_matrix(closed.unitary))
    if not cfg["closed_form"]:
        print(f"calibrated gate (kappa = {out['kappa']:.8f}):")
        print(_fmt_matrix(np.array([[complex(a, b) for a, b in row]
                                    for row in out["calibrated_unitary"]])))
        if "transport_unitary" in out:
            print(f"transport ({out['transport_steps']} steps, "
                  f"nonunitarity {out['residual_nonunitarity']:.2e}):")
            print(_fmt_matrix(np.array([[complex(a, b) for a, b in row]
                                        for row in out["transport_unitary"]])))
            print(f"distance transport vs calibrated law: "
                  f"{out['distance_transport_vs_calibrated']:.3e}")
        print(f"distance calibrated vs closed form: "
              f"{out['distance_calibrated_vs_closed_form']:.3e}")
    return 0


def _mat_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# ---------------------------------------------------------------------------
# adiabatic
# ---------------------------------------------------------------------------

def cmd_adiabatic(args) -> int:
    cfg = _load_config("adiabatic", args)
    if _print_config_maybe(cfg, args):
        return 0
    if cfg["loop"] is not None:
        loop = Loop.load(_resolve(cfg["loop"]))
    else:
        loop = Loop.rectangle("C_I", cfg["x"], cfg["r1"])
    space = FockSpace(int(cfg["n_max"]))
    params = jcmodel.JCParams()
    study = ad.adiabatic_scaling_study(loop, cfg["t_list"], params, space,
                                       ramp=cfg["ramp"], leak_budget=None)
    out = _resolve(cfg["output"])
    study.to_csv(out)
    print("T, steps, leakage, distance   (units: hbar=1, nu=1)")
    for row in study.rows:
        print(f"{row[0]:8.1f}  {row[1]:7d}  {row[2]:.3e}  {row[3]:.3e}")
    print(f"log-log slope: {study.slope:.3f}  (target <= -0.8)")
    print(f"monotone improvement: {'pass' if study.monotone else 'fail'}")
    print(f"study written to {out}")
    final_leak = study.rows[-1][2]
    at_floor = max(r[3] for r in study.rows) < 1e-9   # degenerate/static loop
    ok = at_floor or (study.monotone and study.slope <= -0.8
                      and final_leak <= cfg["leak_budget"])
    if not ok:
        print(f"FAILED: slope={study.slope:.3f}, monotone={study.monotone}, "
              f"final leakage={final_leak:.3e} (budget {cfg['leak_budget']})")
        return 1
    return 0


# ---------------------------------------------------------------------------
# resilience
# ---------------------------------------------------------------------------

def cmd_resilience(args) -> int:
    cfg = _load_config("resilience", args)
    if _print_config_maybe(cfg, args):
        return 0
    span, npts = float(cfg["grid_span"]), int(cfg["grid_points"])
    grid = np.linspace(-span, span, npts)
    surface = resilience.sensitivity_surface(cfg["x"], cfg["r1"], grid, grid)
    surf_path = _resolve(cfg["surface_output"])
    surface.to_csv(surf_path)
    print(f"sensitivity surface over [{-span}, {span}]^2 written to {surf_path}")
    print(f"d(dSigma)/d(eps1) over d(dSigma)/d(eps2) at (x={cfg['x']}, "
          f"r1={cfg['r1']}): {surface.ratio_at_origin:.4f}")
    print(f"worst-case grid influence ratio: {surface.grid_ratio:.2f}")

    model = resilience.ErrorModel(mode="gaussian", sigma1=cfg["sigma1"],
                                  sigma2=cfg["sigma2"], seed=int(cfg["seed"]))
    family = resilience.mc_squeeze_family(cfg["x"], cfg["r1_edges"], model,
                                          int(cfg["trials"]), path=cfg["mc_path"],
                                          jobs=int(cfg["jobs"]))
    mc_path = _resolve(cfg["mc_output"])
    family.to_csv(mc_path)
    print("r1_edge, mean gate distance, std:")
    for s in family.stats:
        print(f"{s.v_edge:6.2f}  {s.mean:.4e}  {s.std:.4e}  "
              f"(clamp rate {s.clamp_rate:.1%})")
    print(f"log-linear slope vs r1_edge: {family.slope:.3f} (mechanism: e^(-2 r1))")
    print(f"Monte Carlo written to {mc_path}")
    return 0


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

def cmd_measure(args) -> int:
    cfg = _load_config("measure", args)
    if _print_config_maybe(cfg, args):
        return 0
    space = FockSpace(int(cfg["n_max"]))
    basis = jcmodel.logical_basis(space, jcmodel.JCParams())
    if cfg["state"] == "logical0":
        state = basis.kets[:, 0]
    elif cfg["state"] == "logical1":
        state = basis.kets[:, 1]
    elif cfg["state"] == "superposition":
        a, b = float(cfg["amp0"]), float(cfg["amp1"])
        norm = np.hypot(a, b)
        if norm == 0:
            raise ConfigError("superposition amplitudes cannot both vanish")
        state = (a * basis.kets[:, 0] + b * basis.kets[:, 1]) / norm
    else:
        raise ConfigError("state must be logical0, logical1 or superposition")
    phi = jcmodel.measurement_phase()
    pulse = jcmodel.measurement_pulse(phi, space)
    before = jcmodel.readout_probabilities(state, space)
    after = jcmodel.readout_probabilities(pulse.matrix @ state, space)
    print(f"pulse phase phi* = {phi:.10f} rad   (units: hbar=1, nu=1)")
    print(f"{'':14s}{'p_g':>12s}{'p_e':>12s}")
    print(f"{'before pulse':14s}{before[0]:12.8f}{before[1]:12.8f}")
    print(f"{'after pulse':14s}{after[0]:12.8f}{after[1]:12.8f}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--print-config", action="store_true",
                    help="dump the effective config and exit")
    sp.add_argument("--gnuplot-hints", action="store_true",
                    help="print plotting suggestions and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holotrap",
        description="Holonomic gate engine for dressed trapped-ion qubits "
                    "(units: hbar = 1, nu = 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", help="run the full invariant and convention suite")
    _add_common(sp)
    sp.add_argument("--n-points", type=int, dest="n_points")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n-max", type=int, dest="n_max")
    sp.add_argument("--output-dir", dest="output_dir")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gate", help="evaluate a holonomic gate")
    _add_common(sp)
    sp.add_argument("--plane", choices=list(holonomy.PLANES))
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--loop", help="loop JSON file")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--source", choices=["analytic", "numeric"])
    sp.add_argument("--closed-form", action="store_true", dest="closed_form",
                    default=None, help="print only the nominal closed form")
    sp.add_argument("--json", action="store_true", default=None,
                    help="emit machine-readable JSON")
    sp.set_defaults(func=cmd_gate)

    sp = sub.add_parser("adiabatic", help="Schrodinger-vs-transport scaling study")
    _add_common(sp)
    sp.add_argument("--loop", help="loop JSON file (default C_I rectangle)")
    sp.add_argument("--x", type=float)
    sp.add_argument("--r1", type=float)
    sp.add_argument("--t-list", dest="t_list", type=lambda s: [float(v) for v in s.split(",")])
    sp.add_argument("--n-max", type=int, dest="n_max")
    sp.add_argument("--ramp", choices=list(ad.RAMPS))
    sp.add_argument("--output")
    sp.add_argument("--leak-budget", type=float, dest="leak_budget")
    sp.set_defaults(func=cmd_adiabatic)

    sp = sub.add_parser("resilience", help="error surface and Monte Carlo study")
    _add_common(sp)
    sp.add_argument("--x", type=float)
    sp.add_argument("--r1", type=float)
    sp.add_argument("--grid-span", type=float, dest="grid_span")
    sp.add_argument("--grid-points", type=int, dest="grid_points")
    sp.add_argument("--sigma1", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--r1-edges", dest="r1_edges",
                    type=lambda s: [float(v) for v in s.split(",")])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--mc-path", dest="mc_path", choices=["fast", "slow"])
    sp.add_argument("--surface-output", dest="surface_output")
    sp.add_argument("--mc-output", dest="mc_output")
    sp.set_defaults(func=cmd_resilience)

    sp = sub.add_parser("measure", help="readout pulse on a logical state")
    _add_common(sp)
    sp.add_argument("--state", choices=["logical0", "logical1", "superposition"])
    sp.add_argument("--amp0", type=float)
    sp.add_argument("--amp1", type=float)
    sp.add_argument("--n-max", type=int, dest="n_max")
    sp.set_defaults(func=cmd_measure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except HolotrapError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
