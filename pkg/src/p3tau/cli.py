"""Command-line front end.

Every command writes one JSON document (``solve`` writes CSV) stamped with
the package version and the tolerances in force. Output is deterministic:
keys are sorted and wall-clock times are included only with ``--timing``.

Exit status: 0 on success, 1 on invalid parameters, 2 when a numerical
procedure fails to converge. ``verify`` exits 0 only if every criterion passes.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, is_dataclass

import numpy as np

from . import __version__
from .errors import ConvergenceError, ValidationError
from .mbform import closure_check
from .monodromy import (
    CauchyData,
    MonodromyData,
    amplitudes_from_monodromy,
    cauchy_from_monodromy,
    cauchy_to_monodromy,
    rho_from_monodromy,
    stokes_from_monodromy,
    validate,
)
from .ode import DEFAULT_TOL, DEFAULT_X0, integrate

__all__ = ["main", "build_parser", "parse_complex", "to_jsonable", "TOL_ENV"]

TOL_ENV = "P3TAU_TOL"
SWEEP_COMMANDS = ("connect", "ratio", "chi")


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValidationError(f"{TOL_ENV}={raw!r} is not a number", condition=f"{TOL_ENV} parses as float") from exc
    if not value > 0:
        raise ValidationError(f"{TOL_ENV} must be positive", condition=f"{TOL_ENV} > 0")
    return value


def parse_complex(text: str) -> complex:
    """Parse "re,im" or "re" into a complex number."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"expected 're,im', got {text!r}")


def to_jsonable(obj):
    """Recursively convert results to JSON types; complex -> {"re", "im"}."""
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if is_dataclass(obj):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    return obj


def _monodromy_from_args(args) -> MonodromyData:
    by_monodromy = args.sigma is not None or args.eta is not None
    by_cauchy = args.alpha is not None or args.beta is not None
    if by_monodromy == by_cauchy:
        raise ValidationError("give exactly one of (--sigma, --eta) or (--alpha, --beta)",
                              condition="exactly one parameterization")
    if by_monodromy:
        if args.sigma is None or args.eta is None:
            raise ValidationError("--sigma and --eta must both be given", condition="complete (sigma, eta)")
        m = MonodromyData(parse_complex(args.sigma), parse_complex(args.eta))
        report = validate(m)
        if not report.ok:
            bad = report.failures()[0]
            raise ValidationError(f"invalid monodromy data: '{bad.name}' fails", condition=bad.name, margin=bad.margin)
        return m
    if args.alpha is None or args.beta is None:
        raise ValidationError("--alpha and --beta must both be given", condition="complete (alpha, beta)")
    return cauchy_to_monodromy(CauchyData(parse_complex(args.alpha), parse_complex(args.beta)))


def _connect(m: MonodromyData) -> dict:
    c = cauchy_from_monodromy(m)
    st = stokes_from_monodromy(m)
    amps = amplitudes_from_monodromy(m)
    try:
        rho = rho_from_monodromy(m).rho
    except ValidationError as exc:
        rho = {"error": "singular", "condition": exc.condition, "message": str(exc)}
    report = validate(m)
    return {
        "sigma": m.sigma, "eta": m.eta, "alpha": c.alpha, "beta": c.beta, "p": st.p, "q": st.q,
        "nu": amps.nu, "b_plus": amps.b_plus, "b_minus": amps.b_minus, "rho": rho,
        "validity": [{"name": ch.name, "passed": ch.passed, "margin": ch.margin} for ch in report.checks],
    }


def _ratio(m: MonodromyData, t0: float, t1: float, tol: float) -> dict:
    from .tau import log_tau_ratio_action, log_tau_ratio_closed_form, log_tau_ratio_quadrature

    out = {}
    for name, fn in (("closed_form", lambda: log_tau_ratio_closed_form(m)),
                     ("quadrature", lambda: log_tau_ratio_quadrature(m, t0, t1, tol)),
                     ("action", lambda: log_tau_ratio_action(m, t0, t1, tol))):
        r = fn()
        out[name] = {"log_ratio": r.log_ratio, "error_estimate": r.error_estimate, "details": r.details}
    q, c = out["quadrature"], out["closed_form"]
    out["quadrature_minus_closed_form"] = abs(q["log_ratio"] - c["log_ratio"])
    return out


def _chi(m: MonodromyData) -> dict:
    from .tau import chi_constant, chi_from_ratio

    a, b = chi_constant(m), chi_from_ratio(m)
    return {"closed_form": a, "from_ratio": b, "difference": abs(a - b)}


def _envelope(command: str, params: dict, tolerances: dict, result, seconds: float | None) -> dict:
    doc = {"version": __version__, "command": command, "parameters": params,
           "tolerances": tolerances, "result": result}
    if seconds is not None:
        doc["runtime_seconds"] = seconds
    return to_jsonable(doc)


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sweep_point(task):
    command, sigma, eta, t0, t1, tol = task
    m = MonodromyData(sigma, eta)
    try:
        if command == "connect":
            result = _connect(m)
        elif command == "ratio":
            result = _ratio(m, t0, t1, tol)
        else:
            result = _chi(m)
        status = "ok"
    except ValidationError as exc:
        result, status = {"error": str(exc), "condition": exc.condition}, "invalid"
    except ConvergenceError as exc:
        result, status = {"error": str(exc)}, "not_converged"
    return to_jsonable({"sigma": m.sigma, "eta": m.eta, "status": status, "result": result})


def read_sweep_config(path: str) -> dict:
    """Read a flat ``key = value`` file; '#' starts a comment.

    Grid axes ``sigma`` and ``eta`` hold whitespace-separated values, each
    "re" or "re,im". Other keys: command, t0, t1, tol, workers.
    """
    config = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value", condition="flat key = value lines")
            key, value = (s.strip() for s in line.split("=", 1))
            config[key] = value
    for key in ("sigma", "eta"):
        if key not in config:
            raise ValidationError(f"sweep config needs a '{key}' axis", condition=f"{key} axis present")
    return config


def _run_sweep(args, tol: float) -> tuple[dict, dict, dict]:
    config = read_sweep_config(args.config)
    command = config.get("command", "ratio")
    if command not in SWEEP_COMMANDS:
        raise ValidationError(f"sweep command must be one of {SWEEP_COMMANDS}", condition="known sweep command")
    sigmas = [parse_complex(v) for v in config["sigma"].split()]
    etas = [parse_complex(v) for v in config["eta"].split()]
    t0 = float(config.get("t0", args.t0))
    t1 = float(config.get("t1", args.t1))
    tol = float(config.get("tol", tol))
    workers = int(config.get("workers", args.workers))
    tasks = [(command, s, e, t0, t1, tol) for s, e in itertools.product(sigmas, etas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point, tasks))
    else:
        points = [_sweep_point(t) for t in tasks]
    params = {"config": os.path.basename(args.config), "command": command, "sigma": sigmas, "eta": etas}
    return params, {"t0": t0, "t1": t1, "tol": tol}, {"points": points}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p3tau", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def params(p):
        p.add_argument("--sigma", help="monodromy sigma as 're,im'")
        p.add_argument("--eta", help="monodromy eta as 're,im'")
        p.add_argument("--alpha", help="Cauchy alpha as 're,im'")
        p.add_argument("--beta", help="Cauchy beta as 're,im'")

    def common(p):
        p.add_argument("--output", "-o", help="write to this file instead of stdout")
        p.add_argument("--timing", action="store_true", help="include wall-clock time (breaks bit-reproducibility)")

    def endpoints(p):
        p.add_argument("--t0", type=float, default=1e-4)
        p.add_argument("--t1", type=float, default=200.0)
        p.add_argument("--tol", type=float, default=None, help=f"default 1e-12, or ${TOL_ENV}")

    p = sub.add_parser("connect", help="all derived parameters")
    params(p), common(p)
    p = sub.add_parser("solve", help="integrate and export the trajectory")
    params(p), common(p)
    p.add_argument("--x0", type=float, default=DEFAULT_X0)
    p.add_argument("--x1", type=float, default=200.0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--samples", type=int, default=0, help="uniform output points (0: the step mesh)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p = sub.add_parser("ratio", help="ln(C_inf/C0) by closed form, quadrature and action")
    params(p), common(p), endpoints(p)
    p = sub.add_parser("chi", help="chi constant by both routes")
    params(p), common(p)
    p = sub.add_parser("mb-check", help="closure and symplectic defects of the 1-form")
    params(p), common(p)
    p.add_argument("--xs", default="1,5,20", help="comma-separated x values")
    p.add_argument("--h", type=float, default=5e-4)
    p.add_argument("--tol", type=float, default=None)
    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p)
    p = sub.add_parser("sweep", help="grid of points from a key = value config file")
    common(p), endpoints(p)
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _dispatch(args) -> tuple[dict, int]:
    start = time.perf_counter()
    tol = args.tol if getattr(args, "tol", None) is not None else default_tol()
    status = 0
    if args.command == "verify":
        from .acceptance import run_all

        results = run_all()
        status = 0 if all(r.passed for r in results) else 1
        result = [{"criterion": r.number, "name": r.name, "passed": r.passed, "value": r.value,
                   "threshold": r.threshold, "margin": r.margin, "detail": r.detail} for r in results]
        params, tols = {}, {}
    elif args.command == "sweep":
        params, tols, result = _run_sweep(args, tol)
    else:
        m = _monodromy_from_args(args)
        params = {"sigma": m.sigma, "eta": m.eta}
        tols = {"tol": tol}
        if args.command == "connect":
            result, tols = _connect(m), {}
        elif args.command == "ratio":
            tols.update(t0=args.t0, t1=args.t1)
            result = _ratio(m, args.t0, args.t1, tol)
        elif args.command == "chi":
            result, tols = _chi(m), {}
        elif args.command == "mb-check":
            xs = [float(v) for v in args.xs.split(",")]
            tols.update(h=args.h)
            reports = closure_check(xs, m, args.h, tol=tol, halvings=1)
            worst = [r.worst() for r in reports]
            ratios = {k: worst[0][k] / worst[1][k] if worst[1][k] else math.inf for k in worst[0]}
            result = {"reports": reports, "halving_ratios": ratios}
        elif args.command == "solve":
            traj = integrate(cauchy_from_monodromy(m), args.x0, args.x1, tol)
            xs = np.linspace(args.x0, args.x1, args.samples) if args.samples > 0 else None
            if args.format == "csv":
                traj.to_csv(args.output or sys.stdout, xs)
                return None, 0
            pts = xs if xs is not None else traj.mesh
            ys = traj.evaluate(pts) if xs is not None else traj.y
            tols.update(x0=args.x0, x1=args.x1)
            result = {"residual_bound": traj.residual_bound, "seed_residual": traj.seed_residual,
                      "steps": int(traj.mesh.size - 1),
                      "samples": [{"x": float(x), "u": y[0], "ux": y[1]} for x, y in zip(pts, ys)]}
    seconds = time.perf_counter() - start if args.timing else None
    return _envelope(args.command, params, tols, result, seconds), status


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    output = getattr(args, "output", None)
    try:
        doc, status = _dispatch(args)
    except ValidationError as exc:
        _emit(to_jsonable({"version": __version__, "command": args.command,
                           "error": {"kind": "validation", "message": str(exc),
                                     "condition": exc.condition, "margin": exc.margin}}), output)
        return 1
    except ConvergenceError as exc:
        _emit(to_jsonable({"version": __version__, "command": args.command,
                           "error": {"kind": "convergence", "message": str(exc),
                                     "tolerance": exc.tolerance, "achieved": exc.achieved}}), output)
        return 2
    if doc is not None:
        _emit(doc, output)
    return status


if __name__ == "__main__":
    sys.exit(main())
