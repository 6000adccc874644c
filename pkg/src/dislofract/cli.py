"""Command-line surface.

    dislofract check-metric DOC
    dislofract attractor  DOC -o OUT [--trace PATH] [--format cloud|raster|trace]
    dislofract distance   DOC CLOUD_A CLOUD_B [--exhaustive]
    dislofract collage    DOC --target CLOUD [--fit] [-o OUT]
    dislofract wellposed  DOC [--scales ...] [-o OUT]
    dislofract render     CLOUD OUT.pgm --width W --height H

Exit codes: 0 success, 1 a property or convergence check failed, 2 bad
input (parse errors, missing files, malformed clouds).  All commands are
deterministic for fixed inputs and seeds, and output files are written
atomically (temp file + rename).  Set DISLOFRACT_THREADS to allow parallel
candidate evaluation in the collage search; the default of 1 keeps every
stage sequential.
"""

from __future__ import annotations

import argparse
import sys as _sys

import numpy as np

from .errors import (
    CertificateError,
    ContractionError,
    ConvergenceError,
    DocumentError,
    InputError,
)
from . import metric as _m
from .cloudio import (
    atomic_write_text,
    format_cloud,
    read_cloud,
    render_cloud,
    write_cloud,
    write_pgm,
)
from .collage import collage_certificate, collage_fit
from .document import load_document
from .hausdorff import FiniteCompact, hausdorff_accelerated, hausdorff_distance
from .gifs import (
    check_pair_contraction,
    default_point_pairs,
    default_set_pairs,
    iterate_to_attractor,
)
from .wellposed import default_seed_set, halving_scales, wellposedness_check

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _metric_sample(spec, seed: int, grid: int = 7, random_points: int = 64):
    """Deterministic axiom-check sample: a coordinate grid plus seeded points."""
    if spec.kind == _m.TABLE:
        return np.arange(spec.size, dtype=float).reshape(-1, 1)
    d = spec.dimension
    axes = [np.linspace(0.0, 1.0, grid)] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    rng = np.random.default_rng(seed)
    rand = rng.random((random_points, d))
    if spec.kind == _m.EUCLIDEAN:
        rand = 2.0 * rand - 0.5  # include negative coordinates
        mesh = np.vstack([mesh, mesh - 0.5])
    return np.vstack([mesh, rand])


def cmd_check_metric(args) -> int:
    doc = load_document(args.document)
    sample = _metric_sample(doc.metric, seed=args.seed)
    tol = args.tol
    if tol is None:
        tol = _m.default_tolerance(float(np.abs(sample).max()))
    report = _m.verify_axioms(doc.metric, sample, tol=tol, seed=args.seed)
    print(report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


def _resolved_run(doc, args):
    sys_ = doc.require_system()
    seed_set = doc.seed_set()
    if seed_set is None:
        seed_set = default_seed_set(sys_)
    tol = args.tol if args.tol is not None else doc.tol
    max_iter = args.max_iter if args.max_iter is not None else doc.max_iter
    snap = args.snap if args.snap is not None else doc.effective_snap(seed_set)
    return sys_, seed_set, tol, max_iter, snap


def _run_contraction_check(sys_, sample_seed: int) -> None:
    report = check_pair_contraction(
        sys_, default_point_pairs(sys_, seed=sample_seed),
        set_pairs=default_set_pairs(sys_, seed=sample_seed))
    if report.verdict is False:
        raise ContractionError(report.describe_failure())


def cmd_attractor(args) -> int:
    doc = load_document(args.document)
    sys_, seed_set, tol, max_iter, snap = _resolved_run(doc, args)
    _run_contraction_check(sys_, doc.sample_seed)
    trace = iterate_to_attractor(sys_, seed_set, tol=tol, max_iter=max_iter, snap=snap)

    if args.format == "trace":
        atomic_write_text(args.output, trace.table())
    elif args.format == "raster":
        img = render_cloud(trace.attractor.points, args.width, args.height)
        write_pgm(args.output, img)
    else:
        write_cloud(args.output, trace.attractor.points)
    if args.trace:
        atomic_write_text(args.trace, trace.table())

    print(f"steps = {len(trace.steps)}")
    print(f"attractor_size = {len(trace.attractor)}")
    print(f"tail_bound = {trace.tail_bound!r}")
    print(f"fixed_residual_T = {trace.fixed_residual_T!r}")
    print(f"fixed_residual_S = {trace.fixed_residual_S!r}")
    print(f"converged = {trace.converged}")
    if not trace.converged:
        print(f"FAILED: not converged within {max_iter} steps", file=_sys.stderr)
        return EXIT_FAIL
    if not trace.fixed_set_ok:
        print("FAILED: fixed-set residuals exceed 2*tol", file=_sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_distance(args) -> int:
    doc = load_document(args.document)
    a = FiniteCompact(read_cloud(args.cloud_a))
    b = FiniteCompact(read_cloud(args.cloud_b))
    fn = hausdorff_distance if args.exhaustive else hausdorff_accelerated
    print(repr(fn(doc.metric, a, b)))
    return EXIT_OK


def cmd_collage(args) -> int:
    doc = load_document(args.document)
    target = FiniteCompact(read_cloud(args.target))
    if args.fit:
        if doc.fit_family is None:
            raise DocumentError("fit mode needs a [fit] section", source=doc.source)
        budget = args.budget if args.budget is not None else doc.fit_budget
        snap = args.snap if args.snap is not None else doc.snap
        fitted, cert = collage_fit(
            target, doc.fit_family, budget=budget, tol=doc.tol, snap=snap,
            seed=doc.sample_seed)
        lines = [cert.to_text()]
        for i, (f, g) in enumerate(zip(fitted.f_maps, fitted.g_maps)):
            lines.append(f"map{i}_f_matrix = {f.matrix.tolist()!r}")
            lines.append(f"map{i}_f_translation = {f.translation.tolist()!r}")
            lines.append(f"map{i}_g_matrix = {g.matrix.tolist()!r}")
            lines.append(f"map{i}_g_translation = {g.translation.tolist()!r}")
        text = "\n".join(lines) + "\n"
    else:
        sys_, seed_set, tol, max_iter, snap = _resolved_run(doc, args)
        _run_contraction_check(sys_, doc.sample_seed)
        cert = collage_certificate(sys_, target, tol=tol, snap=snap, max_iter=max_iter)
        text = cert.to_text()
    if args.output:
        atomic_write_text(args.output, text)
    print(text, end="")
    return EXIT_OK


def cmd_wellposed(args) -> int:
    doc = load_document(args.document)
    sys_, seed_set, tol, max_iter, snap = _resolved_run(doc, args)
    _run_contraction_check(sys_, doc.sample_seed)
    if args.scales:
        perturbations = [(s, args.seed + i) for i, s in enumerate(args.scales)]
    else:
        perturbations = halving_scales(0.1, 5, seed=args.seed)
    report = wellposedness_check(
        sys_, perturbations, tol=tol, snap=snap, b0=seed_set, max_iter=max_iter)
    text = report.table()
    if args.output:
        atomic_write_text(args.output, text)
    print(text, end="")
    print(f"constant = {report.constant!r}")
    print(f"verdict = {report.verdict}")
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_render(args) -> int:
    points = read_cloud(args.cloud)
    img = render_cloud(points, args.width, args.height)
    write_pgm(args.output, img)
    print(f"wrote {args.width}x{args.height} raster, {int((img > 0).sum())} lit pixels")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dislofract", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add_run_flags(sp):
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--snap", type=float, default=None)
        sp.add_argument("--max-iter", dest="max_iter", type=int, default=None)

    sp = sub.add_parser("check-metric", help="verify the metric axioms on a sample")
    sp.add_argument("document")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_check_metric)

    sp = sub.add_parser("attractor", help="iterate the system to its common attractor")
    sp.add_argument("document")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--trace", default=None, help="also write the step table here")
    sp.add_argument("--format", choices=("cloud", "raster", "trace"), default="cloud")
    sp.add_argument("--width", type=int, default=512)
    sp.add_argument("--height", type=int, default=512)
    add_run_flags(sp)
    sp.set_defaults(func=cmd_attractor)

    sp = sub.add_parser("distance", help="Hausdorff distance between two cloud files")
    sp.add_argument("document", help="document providing the [metric] section")
    sp.add_argument("cloud_a")
    sp.add_argument("cloud_b")
    sp.add_argument("--exhaustive", action="store_true",
                    help="disable the spatial-index acceleration")
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("collage", help="collage certificate (or parameter fit) for a target")
    sp.add_argument("document")
    sp.add_argument("--target", required=True, help="target point-cloud file")
    sp.add_argument("--fit", action="store_true", help="search the [fit] family")
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("-o", "--output", default=None)
    add_run_flags(sp)
    sp.set_defaults(func=cmd_collage)

    sp = sub.add_parser("wellposed", help="well-posedness report for the system")
    sp.add_argument("document")
    sp.add_argument("--scales", type=float, nargs="+", default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", default=None)
    add_run_flags(sp)
    sp.set_defaults(func=cmd_wellposed)

    sp = sub.add_parser("render", help="rasterize a point cloud to a PGM image")
    sp.add_argument("cloud")
    sp.add_argument("output")
    sp.add_argument("--width", type=int, default=512)
    sp.add_argument("--height", type=int, default=512)
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"input error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"input error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"input error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except (ContractionError, ConvergenceError, CertificateError) as exc:
        print(f"FAILED: {exc}", file=_sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
