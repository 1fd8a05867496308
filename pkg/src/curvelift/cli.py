"""Command line front end.

Subcommands:

    disk       run the disk completion benchmark and print its diagnostics
    complete   fill a masked region of a (binary-ish) shape image
    shapereg   regularize a shape with a linear force toward/away from it
    inpaint    fill missing pixels of a grayscale image
    denoise    remove gaussian (l2) or salt-and-pepper (l1) noise

Exit status: 0 when the solver converged, 2 when it stopped at the
iteration cap without meeting the tolerances, 1 on any error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import imgio
from .dataterms import ForceBoxTerm, InpaintTerm, L1Term, L2Term
from .energy import alignment_residual, diagnostics
from .experiments import (
    add_noise,
    export_field,
    facet_pins_from_pixels,
    make_disk_problem,
    make_line_mask,
    make_pixel_mask,
    run_disk,
)
from .grid import GridSpec, face_average
from .models import CurvatureModel
from .solver import FieldMask, SolverConfig, solve, warn_if_unpinned

__all__ = ["main"]


def _add_common(p: argparse.ArgumentParser, model_default: str, alpha_default: float,
                ntheta_default: int) -> None:
    p.add_argument("--model", choices=("tac", "trv", "tsc"), default=model_default)
    p.add_argument("--alpha", type=float, default=alpha_default)
    p.add_argument("--ntheta", type=int, default=ntheta_default)
    p.add_argument("--iters", type=int, default=None,
                   help="iteration cap (default 20000; an explicit value makes "
                        "the disk benchmark skip its coarse-to-fine warm start)")
    p.add_argument("--check-every", type=int, default=100)
    p.add_argument("--tol-div", type=float, default=1e-3)
    p.add_argument("--tol-cons", type=float, default=1e-3)
    p.add_argument("--overrelax", type=float, default=1.0)
    p.add_argument("--precond-power", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help="where to write the solved image")
    p.add_argument("--report", help="write the convergence log as CSV")
    p.add_argument("--export-field", help="write the converged field as CSV")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvelift",
                                 description="curvature-aware image regularization")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("disk", help="disk completion benchmark")
    p.add_argument("--size", type=int, default=40)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--band", type=float, default=10.0)
    _add_common(p, "tsc", 10.0, 64)

    p = sub.add_parser("complete", help="complete a masked shape image")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True, help="dark pixels mark the free region")
    p.add_argument("--field-mask",
                   help="image whose dark pixels pin fluxes (constant areas)")
    _add_common(p, "tac", 17.0, 64)

    p = sub.add_parser("shapereg", help="shape regularization with a linear force")
    p.add_argument("--input", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=4.0)
    _add_common(p, "tsc", 10.0, 32)

    p = sub.add_parser("inpaint", help="fill missing pixels")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", help="dark pixels mark the region to fill")
    p.add_argument("--remove-lines", type=float,
                   help="instead of --mask: random fraction of rows to drop")
    p.add_argument("--remove-pixels", type=float,
                   help="instead of --mask: random fraction of pixels to drop")
    p.add_argument("--save-mask", help="write the generated mask")
    _add_common(p, "tsc", 10.0, 32)

    p = sub.add_parser("denoise", help="denoise with an l2 or l1 attachment")
    p.add_argument("--input", required=True)
    p.add_argument("--data", choices=("l2", "l1"), default="l2")
    p.add_argument("--lambda", dest="lam", type=float, default=40.0)
    p.add_argument("--add-noise", choices=("gaussian", "salt-pepper"),
                   help="corrupt the input first (for reproducible demos)")
    p.add_argument("--noise-level", type=float, default=0.1)
    _add_common(p, "tsc", 10.0, 32)

    return ap


def _emit(args, u, sigma, grid, report) -> int:
    diag = diagnostics(face_average(sigma, grid), grid)
    print(f"iterations {report.iterations}  converged {report.converged}")
    print(f"div_res {report.div_res[-1]:.3e}  cons_res {report.cons_res[-1]:.3e}  "
          f"misalignment {alignment_residual(sigma, grid):.3e}")
    print(f"H_TV {diag.h_tv:.6g}  H_AC {diag.h_ac:.6g}  H_SC {diag.h_sc:.6g}")
    if args.output:
        imgio.write_gray(args.output, u)
    if args.report:
        report.to_csv(args.report)
    if args.export_field:
        export_field(sigma, grid, args.export_field)
    return 0 if report.converged else 2


def _run(args, u0, grid, model, term, field_mask=None) -> int:
    config = SolverConfig(
        max_iters=args.iters if args.iters is not None else 20000,
        check_every=args.check_every,
        tol_div=args.tol_div,
        tol_consistency=args.tol_cons,
        overrelax=args.overrelax,
        precond_power=args.precond_power,
        field_mask=field_mask,
    )
    if warn_if_unpinned(term, grid):
        print("warning: nothing is pinned; the output is only defined up to "
              "checkerboard modes", file=sys.stderr)
    u, sigma, report = solve(u0, grid, model, term, config)
    return _emit(args, u, sigma, grid, report)


def _cmd_disk(args) -> int:
    if args.iters is None:
        # benchmark mode: coarse-to-fine warm start with frozen budgets
        res = run_disk(args.size, args.radius, args.band, args.alpha,
                       args.ntheta, args.model)
        return _emit(args, res.u, res.sigma, res.grid, res.report)
    u0, free = make_disk_problem(args.size, args.radius, args.band)
    grid = GridSpec(args.size, args.size, args.ntheta)
    model = CurvatureModel(args.model, args.alpha)
    return _run(args, None, grid, model, InpaintTerm(u0, free))


def _cmd_complete(args) -> int:
    u0 = imgio.read_gray(args.input)
    free = imgio.read_mask(args.mask)
    if free.shape != u0.shape:
        raise ValueError("mask and input image sizes differ")
    grid = GridSpec(u0.shape[1], u0.shape[0], args.ntheta)
    model = CurvatureModel(args.model, args.alpha)
    field_mask = None
    if args.field_mask:
        region = imgio.read_mask(args.field_mask)
        if region.shape != u0.shape:
            raise ValueError("field mask and input image sizes differ")
        pin1, pin2 = facet_pins_from_pixels(region)
        field_mask = FieldMask(pin1, pin2)
    return _run(args, None, grid, model, InpaintTerm(u0, free), field_mask)


def _cmd_shapereg(args) -> int:
    u0 = imgio.read_gray(args.input)
    grid = GridSpec(u0.shape[1], u0.shape[0], args.ntheta)
    model = CurvatureModel(args.model, args.alpha)
    return _run(args, None, grid, model, ForceBoxTerm(u0, args.lam))


def _cmd_inpaint(args) -> int:
    u0 = imgio.read_gray(args.input)
    choices = [args.mask is not None, args.remove_lines is not None,
               args.remove_pixels is not None]
    if sum(choices) != 1:
        raise ValueError("give exactly one of --mask, --remove-lines, --remove-pixels")
    if args.mask:
        free = imgio.read_mask(args.mask)
        if free.shape != u0.shape:
            raise ValueError("mask and input image sizes differ")
    elif args.remove_lines is not None:
        free = make_line_mask(u0.shape, args.remove_lines, args.seed)
    else:
        free = make_pixel_mask(u0.shape, args.remove_pixels, args.seed)
    if args.save_mask:
        imgio.write_mask(args.save_mask, free)
    grid = GridSpec(u0.shape[1], u0.shape[0], args.ntheta)
    model = CurvatureModel(args.model, args.alpha)
    return _run(args, None, grid, model, InpaintTerm(u0, free))


def _cmd_denoise(args) -> int:
    f = imgio.read_gray(args.input)
    if args.add_noise:
        f = add_noise(f, args.add_noise, args.noise_level, args.seed)
    grid = GridSpec(f.shape[1], f.shape[0], args.ntheta)
    model = CurvatureModel(args.model, args.alpha)
    term = L2Term(f, args.lam) if args.data == "l2" else L1Term(f, args.lam)
    return _run(args, None, grid, model, term)


_COMMANDS = {
    "disk": _cmd_disk,
    "complete": _cmd_complete,
    "shapereg": _cmd_shapereg,
    "inpaint": _cmd_inpaint,
    "denoise": _cmd_denoise,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # surface a clean message, reserve 1 for errors
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
