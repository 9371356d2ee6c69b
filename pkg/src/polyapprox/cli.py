"""Command-line entry point: ``polyapprox <command> ...``.

Commands write CSV (with a header row) for tables and JSON for structured
results; every JSON artifact embeds the run configuration.  On failure the
process exits nonzero and prints a one-line JSON error record to stderr.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
from dataclasses import dataclass, field
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import bspline, gegenbauer
from .ball_scheme import BallControls, build_ball_approximant, measured_error
from .functions import REGISTRY, get_function
from .kernels import KernelSpec
from .quasi_interp import convergence_study, grid_points
from .sphere_approx import fit_sphere
from .stencil import build_stencil

log = logging.getLogger("polyapprox")


@dataclass
class RunConfig:
    """Settings shared by all commands; may be loaded from a JSON file."""

    calibration_tol: float = bspline.DEFAULT_TOL
    quadrature_tol: float = 1e-10
    zero_threshold: float = gegenbauer.DEFAULT_ZERO_THRESHOLD
    trunc_radius: float | None = None
    function: str | None = None
    seed: int = 0
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("calibration_tol", "quadrature_tol", "zero_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.trunc_radius is not None and not self.trunc_radius > 0:
            raise ValueError("trunc_radius must be positive")

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class CliError(Exception):
    def __init__(self, message, kind="usage", code=2):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _clean(obj):
    """Replace non-finite floats by None so that output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _dump_json(payload, path=None, sort_keys=True):
    text = json.dumps(_clean(payload), indent=2, sort_keys=sort_keys) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dump_csv(rows, columns, path=None):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _spec(args) -> KernelSpec:
    return KernelSpec(args.d, args.k, getattr(args, "rho", 1.0))


def _function(args, cfg):
    name = args.function or cfg.function
    if name is None:
        raise CliError("--function is required (or set 'function' in the config)")
    cfg.function = name
    return get_function(name)


# --- commands -----------------------------------------------------------------

def cmd_stencil(args, cfg):
    st = build_stencil(args.d, args.k)
    _dump_json(st.to_json_dict() if args.out in (None, "-") and not args.with_config
               else {"stencil": st.to_json_dict(), "config": cfg.to_dict()}, args.out, sort_keys=False)


def cmd_calibrate(args, cfg):
    cal = bspline.calibrate(args.d, args.k, cfg.calibration_tol)
    rng = np.random.default_rng(cfg.seed)
    x = rng.uniform(-4, 4, size=(100, args.d))
    pou = bspline.partition_sum(args.d, args.k, x, cal)
    out = {"calibration": cal.to_dict(), "closed_form_kappa": bspline.kappa_closed_form(args.d, args.k),
           "partition_max_error": float(np.max(np.abs(pou - 1))), "config": cfg.to_dict()}
    if args.d == 1 and args.k == 1:
        t = np.linspace(-2, 2, 401)
        hat = np.maximum(0.0, 1 - np.abs(t))
        out["hat_function_max_error"] = float(np.max(np.abs(bspline.eval_B(1, 1, t, cal) - hat)))
    _dump_json(out, args.out)


def cmd_quasi(args, cfg):
    spec = KernelSpec(args.d, args.k)
    tf = _function(args, cfg)
    f = tf(spec)
    radius = args.support_radius or tf.support_radius
    if radius is None:
        raise CliError(f"function {tf.name!r} needs --support-radius")
    h_list = [float(v) for v in args.h_list.split(",")]
    X = grid_points(args.d, -args.test_half_width, args.test_half_width, args.test_n)
    rows = convergence_study(f, spec, h_list, X, support_radius=radius)
    prev = None
    for r in rows:
        r["ratio"] = None if prev is None else r["sup_error"] / prev
        prev = r["sup_error"]
    _dump_csv(rows, ["h", "sup_error", "ratio", "n_sites"], args.out)


def cmd_geg_coeffs(args, cfg):
    spec = _spec(args)
    rep = gegenbauer.fundamentality_report(spec, args.jmax, method=args.method,
                                           threshold=cfg.zero_threshold)
    _dump_csv(list(rep.rows()), ["j", "value", "method", "zero_flag", "numeric"], args.out)


def cmd_geg_degenerate(args, cfg):
    taus = gegenbauer.degenerate_taus(args.d, args.k)
    rows = [{"j": j, "tau": str(t), "rho": repr(math.exp(-float(t) / 2))} for j, t in enumerate(taus)]
    _dump_csv(rows, ["j", "tau", "rho"], args.out)


def cmd_sphere_fit(args, cfg):
    spec = _spec(args)
    f = _function(args, cfg)(spec)
    fit = fit_sphere(lambda u: f(spec.rho * u), spec, args.centers, args.samples,
                     args.regularization)
    _dump_json({"d": spec.d, "k": spec.k, "rho": spec.rho, "fit": fit.to_dict(),
                "config": cfg.to_dict()}, args.out)


def cmd_ball_approx(args, cfg):
    spec = _spec(args)
    f = _function(args, cfg)(spec)
    controls = BallControls(test_n=args.test_n, sphere_max=args.max_sphere_centers)
    appr = build_ball_approximant(f, spec, args.eps, controls)
    check = measured_error(appr, f, controls.grid_size(spec.d))
    appr.diagnostics["sup_error_expanded"] = check
    _dump_json({**appr.to_dict(), "config": cfg.to_dict()}, args.out)
    dg = appr.diagnostics
    rows = [
        {"stage": "sphere", "budget": dg["sphere_budget"], "measured": dg["sphere_residual"],
         "detail": f"{dg['n_sphere_centers']} centers"},
        {"stage": "collar", "budget": dg["collar_budget"], "measured": dg["collar_max"],
         "detail": f"delta={dg['delta']}"},
    ]
    rows += [{"stage": "interior", "budget": args.eps, "measured": r["sup_error"],
              "detail": f"h={r['h']} sites={r['n_sites']}"} for r in dg["refinements"]]
    rows.append({"stage": "total", "budget": args.eps, "measured": check,
                 "detail": f"max|y|={appr.max_center_norm():.15g}"})
    if args.report:
        _dump_csv(rows, ["stage", "budget", "measured", "detail"], args.report)
    if not dg["met_target"]:
        raise CliError(f"sup error {dg['sup_error']:.3g} above eps={args.eps}",
                       kind="not_converged", code=3)


# --- parser -------------------------------------------------------------------

def _dk(p, rho=False):
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    if rho:
        p.add_argument("--rho", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="polyapprox", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stencil", parents=[common], help="k-fold discrete Laplacian as JSON")
    _dk(s)
    s.add_argument("--with-config", action="store_true")
    s.set_defaults(func=cmd_stencil)

    s = sub.add_parser("calibrate", parents=[common], help="partition constant and bounds")
    _dk(s)
    s.add_argument("--tol", type=float)
    s.set_defaults(func=cmd_calibrate)

    q = sub.add_parser("quasi", help="quasi-interpolation experiments")
    qs = q.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = qs.add_parser("converge", parents=[common])
    _dk(s)
    s.add_argument("--h-list", default="0.2,0.1,0.05")
    s.add_argument("--function", choices=sorted(REGISTRY))
    s.add_argument("--support-radius", type=float)
    s.add_argument("--test-n", type=int, default=41)
    s.add_argument("--test-half-width", type=float, default=1.5)
    s.set_defaults(func=cmd_quasi)

    g = sub.add_parser("geg", help="Fourier-Gegenbauer coefficients")
    gs = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = gs.add_parser("coeffs", parents=[common])
    _dk(s, rho=True)
    s.add_argument("--jmax", type=int, default=10)
    s.add_argument("--method", choices=["closed_form", "quadrature", "both"], default="both")
    s.set_defaults(func=cmd_geg_coeffs)
    s = gs.add_parser("degenerate", parents=[common])
    _dk(s)
    s.set_defaults(func=cmd_geg_degenerate)

    sp = sub.add_parser("sphere", help="zonal fits on the sphere")
    ss = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = ss.add_parser("fit", parents=[common])
    _dk(s, rho=True)
    s.add_argument("--centers", type=int, required=True)
    s.add_argument("--samples", type=int)
    s.add_argument("--regularization", type=float)
    s.add_argument("--function", choices=sorted(REGISTRY))
    s.set_defaults(func=cmd_sphere_fit)

    b = sub.add_parser("ball", help="two-stage approximation on a ball")
    bs = b.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = bs.add_parser("approx", parents=[common])
    _dk(s, rho=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--function", choices=sorted(REGISTRY))
    s.add_argument("--report", help="CSV of per-stage budgets and errors")
    s.add_argument("--test-n", type=int)
    s.add_argument("--max-sphere-centers", type=int, default=1024)
    s.set_defaults(func=cmd_ball_approx)
    return p


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "tol", None) is not None:
        cfg.calibration_tol = args.tol
    outs = {k: getattr(args, k) for k in ("out", "report") if getattr(args, k, None)}
    cfg.outputs.update(outs)
    return cfg


def _check_writable(args):
    for key in ("out", "report"):
        path = getattr(args, key, None)
        if path in (None, "-"):
            continue
        parent = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
            raise CliError(f"cannot write {key} file {path!r}", kind="io", code=1)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = " ".join(filter(None, [args.command, getattr(args, "action", None)]))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _check_writable(args)
        args.func(args, _config(args))
        return 0
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except CliError as exc:
        err = {"error": exc.kind, "message": str(exc), "command": command}
        code = exc.code
    except OSError as exc:
        err = {"error": "io", "message": str(exc), "command": command}
        code = 1
    except Exception as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": command}
        code = 1
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
