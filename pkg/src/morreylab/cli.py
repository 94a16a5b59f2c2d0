"""Command-line front end: tables, solves, analyses, verification suites.

Subcommands
    beta-table   critical exponents over a list of p values (CSV)
    aronsson     angular profile of one cone solution (CSV + JSON summary)
    solve        minimize the energy, write a checkpoint (field + sidecar)
    analyze      decay/gradient profiles and fits from a checkpoint
    verify       invariant suites; full mode adds a coarse solve and fit

Every run writes a manifest JSON listing the command, the full effective
parameter set, the artifact paths and the wall clock.  Parameters may come
from a JSON config file (--config); explicit flags win.  Data files carry
no timestamps, so identical invocations produce byte-identical outputs;
only the manifest records time.

Exit codes: 0 success, 1 usage error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .aronsson import (angular_profile, aperture_L, beta_p, kappa_of_L,
                       pharmonic_residual)
from .grid import (EnergyParams, GridSpec, ScalarField, build_grid, energy,
                   energy_gradient)
from .solver import (SolveResult, SolverConfig, load_checkpoint,
                     save_checkpoint, solve_extremal)
from .analysis import (barrier_check, decay_profile, estimate_morrey_constant,
                       fit_exponent, gradient_profile)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    """Full-precision scientific notation, 17 significant digits."""
    return f"{x:.16e}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return cfg


def _effective(args: argparse.Namespace, config: dict, defaults: dict) -> dict:
    """Merge defaults < config file < explicit flags into one parameter set."""
    params = dict(defaults)
    for key in defaults:
        if key in config:
            params[key] = config[key]
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            params[key] = flag_val
    return params


def _write_manifest(out_dir: Path, command: str, params: dict,
                    artifacts: list[Path], t0: float) -> Path:
    manifest = {
        "command": command,
        "parameters": params,
        "artifacts": sorted(str(a) for a in artifacts),
        "wall_clock_seconds": time.time() - t0,
        "version": __version__,
    }
    path = out_dir / f"{command.replace('-', '_')}_manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse float list {text!r}") from exc


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=n)
    except ImportError:
        pass  # results are deterministic regardless of BLAS thread count


# ---------------------------------------------------------------- beta-table

def cmd_beta_table(args: argparse.Namespace, config: dict) -> int:
    t0 = time.time()
    defaults = {"p_values": "2.5,3,4,8,16,1000,1000000", "out_dir": "."}
    params = _effective(args, config, defaults)
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    p_values = _parse_floats(params["p_values"])
    if any(p <= 2 for p in p_values):
        raise UsageError("all p values must exceed 2")
    rows = []
    for p in p_values:
        bp = beta_p(p)
        rows.append((p, bp, aperture_L(bp, p)))
    csv_path = out_dir / "beta_table.csv"
    _write_csv(csv_path, ["p", "beta_p", "aperture_at_beta"], rows)
    manifest = _write_manifest(out_dir, "beta-table", params, [csv_path], t0)
    print(f"wrote {csv_path} and {manifest}")
    return EXIT_OK


# ------------------------------------------------------------------ aronsson

def cmd_aronsson(args: argparse.Namespace, config: dict) -> int:
    t0 = time.time()
    defaults = {"p": 4.0, "kappa": None, "L": None, "n_samples": 1001,
                "out_dir": "."}
    params = _effective(args, config, defaults)
    if (params["kappa"] is None) == (params["L"] is None):
        raise UsageError("give exactly one of --kappa and --L")
    p = float(params["p"])
    try:
        kappa = (float(params["kappa"]) if params["kappa"] is not None
                 else kappa_of_L(float(params["L"]), p))
        profile = angular_profile(kappa, p, int(params["n_samples"]))
    except (ValueError, ArithmeticError) as exc:
        raise UsageError(str(exc)) from exc
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "aronsson_profile.csv"
    _write_csv(csv_path, ["theta", "phi", "f", "fprime", "g"],
               zip(profile.theta, profile.phi, profile.f, profile.fprime,
                   profile.g))
    summary = {
        "p": p,
        "kappa": kappa,
        "aperture_L": profile.params.aperture_L,
        "axis_value": float(profile.f[(len(profile.f) - 1) // 2]),
        "invariants": profile.invariant_report(),
    }
    json_path = out_dir / "aronsson_summary.json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = _write_manifest(out_dir, "aronsson", params,
                               [csv_path, json_path], t0)
    print(f"wrote {csv_path}, {json_path} and {manifest}")
    return EXIT_OK


# --------------------------------------------------------------------- solve

def cmd_solve(args: argparse.Namespace, config: dict) -> int:
    t0 = time.time()
    defaults = {"p": 4.0, "r_min": 2.0**-6, "r_max": 2.0**12,
                "n_s": 577, "n_phi": 65,
                "eps_schedule": "1e-2,1e-3,1e-4,1e-5,1e-6",
                "grad_tol": 1e-9, "energy_rel_tol": 1e-12,
                "max_iters": 100, "out_dir": ".", "tag": "solve"}
    params = _effective(args, config, defaults)
    try:
        spec = GridSpec(r_min=float(params["r_min"]),
                        r_max=float(params["r_max"]),
                        n_s=int(params["n_s"]), n_phi=int(params["n_phi"]))
        solver_config = SolverConfig(
            eps_schedule=tuple(_parse_floats(params["eps_schedule"])),
            grad_tol=float(params["grad_tol"]),
            energy_rel_tol=float(params["energy_rel_tol"]),
            max_iters_per_stage=int(params["max_iters"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = solve_extremal(spec, float(params["p"]), solver_config)
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    base = out_dir / str(params["tag"])
    field_path, meta_path = save_checkpoint(result, solver_config, base)
    artifacts = [Path(field_path), Path(meta_path)]
    manifest = _write_manifest(out_dir, "solve", params, artifacts, t0)
    print(f"energy={result.energy:.12g} converged={result.converged} "
          f"checkpoint={base} manifest={manifest}")
    if not result.converged:
        print("solver did not converge; partial outputs retained",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# ------------------------------------------------------------------- analyze

def cmd_analyze(args: argparse.Namespace, config: dict) -> int:
    t0 = time.time()
    defaults = {"checkpoint": None, "window": None, "budget": 600,
                "out_dir": "."}
    params = _effective(args, config, defaults)
    if params["checkpoint"] is None:
        raise UsageError("--checkpoint is required")
    try:
        result, _ = load_checkpoint(params["checkpoint"])
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read checkpoint: {exc}") from exc
    if not result.converged:
        print("checkpoint is not converged", file=sys.stderr)
        return EXIT_NUMERICAL
    r_max = result.grid.spec.r_max
    window = (tuple(_parse_floats(params["window"]))
              if params["window"] else (4.0, r_max / 8.0))
    if len(window) != 2:
        raise UsageError("--window must be 'r_lo,r_hi'")

    profile = decay_profile(result)
    try:
        fit = fit_exponent(profile, window)
        gprofile, gfit = gradient_profile(result, window)
        morrey = estimate_morrey_constant(result, int(params["budget"]))
    except ValueError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    decay_csv = out_dir / "decay_profile.csv"
    _write_csv(decay_csv, ["r", "S_r"], zip(profile.radii, profile.sup_values))
    grad_csv = out_dir / "gradient_profile.csv"
    _write_csv(grad_csv, ["r", "G_r"], zip(gprofile.radii, gprofile.sup_values))
    bp = beta_p(result.p)
    fit_json = {
        "p": result.p,
        "beta_p": bp,
        "beta_hat": fit.beta_hat,
        "C_hat": fit.C_hat,
        "beta_hat_minus_beta_p": fit.beta_hat - bp,
        "window": list(fit.window),
        "rms_residual": fit.rms_residual,
        "n_points": fit.n_points,
        "gradient_exponent": gfit.beta_hat,
        "gradient_exponent_minus_expected": gfit.beta_hat - (fit.beta_hat + 1.0),
        "morrey": {
            "alpha": morrey.alpha,
            "seminorm": morrey.seminorm,
            "grad_norm": morrey.grad_norm,
            "C_estimate": morrey.C_estimate,
            "argmax_pair": [list(morrey.argmax_pair[0]),
                            list(morrey.argmax_pair[1])],
        },
    }
    json_path = out_dir / "fit_summary.json"
    with open(json_path, "w") as fh:
        json.dump(fit_json, fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts = [decay_csv, grad_csv, json_path]
    manifest = _write_manifest(out_dir, "analyze", params, artifacts, t0)
    print(f"beta_hat={fit.beta_hat:.7f} beta_p={bp:.7f} "
          f"C_estimate={morrey.C_estimate:.7f} manifest={manifest}")
    return EXIT_OK


# -------------------------------------------------------------------- verify

def _verify_aronsson_suite(p: float, perturb: bool) -> dict:
    """Structural identities of the cone family at several powers."""
    bp = beta_p(p)
    kappas = [0.3, bp, 1.0, 2.0]
    checks = {}
    worst_identity = 0.0
    worst_spread = 0.0
    worst_lk2 = 0.0
    for kappa in kappas:
        kappa_used = kappa * (1.0001 if perturb else 1.0)
        profile = angular_profile(kappa_used, p, 1000)
        rep = profile.invariant_report()
        worst_identity = max(worst_identity, rep["identity_max_abs_err"])
        worst_spread = max(worst_spread, rep["power_combination_rel_spread"])
        worst_lk2 = max(worst_lk2, abs(rep["aperture_identity_residual"]))
        if perturb:
            # the hidden hook must trip a gate: compare the perturbed
            # profile against the unperturbed closed form
            ref = angular_profile(kappa, p, 1000)
            worst_identity = max(worst_identity, float(np.max(np.abs(
                profile.f - ref.f))))
    inv_err = abs(kappa_of_L(1.0, p) - bp)
    checks["identity_max_abs_err"] = worst_identity
    checks["power_combination_rel_spread"] = worst_spread
    checks["aperture_identity_residual"] = worst_lk2
    checks["kappa_of_unit_aperture_vs_beta_p"] = inv_err
    checks["pass"] = bool(worst_identity < 1e-10 and worst_spread < 1e-10
                          and worst_lk2 < 1e-12 and inv_err < 1e-10)
    return checks


def _verify_gradient_consistency(p: float) -> dict:
    """Central-difference check of the energy gradient on a small grid."""
    spec = GridSpec(r_min=np.exp(-2.0), r_max=np.exp(2.0), n_s=17, n_phi=9)
    grid = build_grid(spec)
    rng = np.random.default_rng(20240811)
    field = ScalarField(grid, rng.standard_normal((spec.n_s, spec.n_phi)))
    field.apply_dirichlet(pin_value=1.0)
    params = EnergyParams(p=p, eps=1e-2)
    g = energy_gradient(field, params).values
    free = ~grid.constrained_mask()
    h = 1e-5
    worst = 0.0
    for _ in range(20):
        delta = np.zeros_like(field.values)
        delta[free] = rng.standard_normal(int(free.sum()))
        up = ScalarField(grid, field.values + h * delta)
        dn = ScalarField(grid, field.values - h * delta)
        fd = (energy(up, params) - energy(dn, params)) / (2 * h)
        worst = max(worst, abs(fd - float((g * delta).sum()))
                    / max(1.0, abs(fd)))
    return {"max_rel_error": worst, "pass": bool(worst < 1e-7)}


def _verify_barrier_synthetic(p: float) -> dict:
    """Barrier comparison on closed-form fields, positive and negative."""
    from dataclasses import asdict
    bp = beta_p(p)
    spec = GridSpec(r_min=2.0**-4, r_max=2.0**10, n_s=113, n_phi=17)
    grid = build_grid(spec)
    sinphi = np.sin(grid.phi)[None, :]
    fast = ScalarField(grid, np.minimum(1.0, grid.r**-bp)[:, None] * sinphi)
    slow = ScalarField(grid, np.minimum(1.0, grid.r**-0.1)[:, None] * sinphi)
    fake_fast = SolveResult(field=fast, energy=0.0, stages=[], converged=True, p=p)
    fake_slow = SolveResult(field=slow, energy=0.0, stages=[], converged=True, p=p)
    good = barrier_check(fake_fast, beta=0.9 * bp, tau=0.05 * bp, eps=None)
    bad = barrier_check(fake_slow, beta=0.9 * bp, tau=0.05 * bp, eps=0.05)
    return {"fast_decay_report": asdict(good),
            "slow_decay_report": asdict(bad),
            "pass": bool(good.violations == 0 and bad.violations > 0)}


def _verify_pharmonic(p: float) -> dict:
    """Finite-difference residual refinement on the cone solution."""
    kappa = beta_p(p)
    profile = angular_profile(kappa, p, 200)
    rng = np.random.default_rng(7)
    pts = [(rng.uniform(0.7, 2.0), rng.uniform(-0.8, 0.8) * profile.params.phi_max)
           for _ in range(25)]
    r_coarse = pharmonic_residual(profile, p, pts, h=1e-2)
    r_fine = pharmonic_residual(profile, p, pts, h=1e-3)
    ratio = r_coarse / r_fine
    return {"residual_h_1e2": r_coarse, "residual_h_1e3": r_fine,
            "refinement_ratio": ratio,
            "pass": bool(50.0 <= ratio <= 200.0 and r_fine < 1e-4)}


def _verify_coarse_solve(p: float) -> dict:
    """Small solve plus decay fit, gated at a coarse-grid tolerance."""
    spec = GridSpec(r_min=2.0**-4, r_max=2.0**8, n_s=145, n_phi=33)
    result = solve_extremal(spec, p, SolverConfig())
    ok = result.converged
    v = result.field.values
    ok = ok and bool(v.min() >= 0.0 and v.max() <= 1.0)
    fit = fit_exponent(decay_profile(result), (4.0, spec.r_max / 8.0))
    bp = beta_p(p)
    gate = abs(fit.beta_hat - bp) < 0.15
    return {"converged": result.converged,
            "bounds_ok": bool(v.min() >= 0.0 and v.max() <= 1.0),
            "beta_hat": fit.beta_hat, "beta_p": bp,
            "beta_gate_0p15": bool(gate),
            "pass": bool(ok and gate)}


def cmd_verify(args: argparse.Namespace, config: dict) -> int:
    t0 = time.time()
    defaults = {"p": 4.0, "mode": "quick", "out_dir": ".",
                "inject_perturbation": False}
    params = _effective(args, config, defaults)
    if params["mode"] not in ("quick", "full"):
        raise UsageError("--mode must be quick or full")
    p = float(params["p"])
    if p <= 2:
        raise UsageError("p must exceed 2")
    perturb = bool(params["inject_perturbation"])
    report = {
        "p": p,
        "mode": params["mode"],
        "aronsson_identities": _verify_aronsson_suite(p, perturb),
        "gradient_consistency": _verify_gradient_consistency(p),
        "barrier_synthetic": _verify_barrier_synthetic(p),
    }
    if params["mode"] == "full":
        report["pharmonic_residual"] = _verify_pharmonic(p)
        report["coarse_solve"] = _verify_coarse_solve(p)
    report["pass"] = all(section["pass"] for key, section in report.items()
                         if isinstance(section, dict))
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "verify_report.json"
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out_dir, "verify", params, [json_path], t0)
    for key, section in report.items():
        if isinstance(section, dict):
            print(f"{key}: {'PASS' if section['pass'] else 'FAIL'}")
    if not report["pass"]:
        print("verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------- main

def _build_parser() -> _Parser:
    parser = _Parser(prog="morreylab",
                     description="Morrey extremal laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", dest="out_dir", default=None)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--config", default=None)

    sp = sub.add_parser("beta-table", help="critical exponent table")
    sp.add_argument("--p-values", dest="p_values", default=None)
    common(sp)

    sp = sub.add_parser("aronsson", help="angular profile of a cone solution")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--L", type=float, default=None)
    sp.add_argument("--n-samples", dest="n_samples", type=int, default=None)
    common(sp)

    sp = sub.add_parser("solve", help="compute the discrete extremal")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--r-min", dest="r_min", type=float, default=None)
    sp.add_argument("--r-max", dest="r_max", type=float, default=None)
    sp.add_argument("--n-s", dest="n_s", type=int, default=None)
    sp.add_argument("--n-phi", dest="n_phi", type=int, default=None)
    sp.add_argument("--eps-schedule", dest="eps_schedule", default=None)
    sp.add_argument("--grad-tol", dest="grad_tol", type=float, default=None)
    sp.add_argument("--energy-rel-tol", dest="energy_rel_tol", type=float,
                    default=None)
    sp.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    sp.add_argument("--tag", default=None)
    common(sp)

    sp = sub.add_parser("analyze", help="profiles, fits and constant estimate")
    sp.add_argument("--checkpoint", default=None)
    sp.add_argument("--window", default=None)
    sp.add_argument("--budget", type=int, default=None)
    common(sp)

    sp = sub.add_parser("verify", help="invariant verification suites")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--mode", choices=("quick", "full"), default=None)
    sp.add_argument("--inject-perturbation", dest="inject_perturbation",
                    action="store_true", default=None,
                    help=argparse.SUPPRESS)
    common(sp)
    return parser


_COMMANDS = {
    "beta-table": cmd_beta_table,
    "aronsson": cmd_aronsson,
    "solve": cmd_solve,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_threads(getattr(args, "threads", None))
        config = _load_config(getattr(args, "config", None))
        return _COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
