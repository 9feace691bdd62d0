"""Command-line interface.

Subcommands cover the full pipeline: ``synth`` emits measurement CSVs from
a known curve, ``fit`` / ``region`` produce JSON artifacts, ``extrapolate``
/ ``needed`` / ``intersect`` / ``noise-impact`` answer planning questions,
``manifest`` builds and manipulates nested-subset experiment manifests, and
``report`` renders the SVG plot.  Exit codes: 0 success, 2 usage error,
3 data-contract error, 4 numeric failure (non-convergence, no region).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .artifacts import (
    FitArtifact,
    dumps_canonical,
    format_float,
    load_fit_artifact,
    load_json,
    noise_impact_to_dict,
    read_images,
    read_manifest,
    read_measurements,
    region_from_dict,
    region_to_dict,
    sha256_path,
    write_json,
    write_manifest,
    write_measurements,
)
from .errors import (
    DataError,
    NonConvergenceError,
    NoRegionError,
    ToolkitError,
)
from .fitting import LOGLOG, NONLINEAR, detect_power_law_region, fit_discrepancy, fit_loglog, fit_nonlinear
from .manifest import build_nested_subsets, holdout_split, inject_label_noise
from .model import ThreePhaseModel, random_guess_plateau, synth_curve
from .planning import extrapolate, noise_impact, predict_intersection, required_sample_size
from .svgplot import write_report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _select_metric(ms, metric):
    sub = ms.only(metric)
    if len(sub) == 0:
        raise DataError(f"no measurements for metric {metric!r}; file holds {ms.metrics()}")
    return sub


def _cmd_synth(args) -> int:
    model = ThreePhaseModel(alpha=args.alpha, c=args.c, plateau=args.plateau, floor=args.floor)
    ms = synth_curve(
        model, args.sizes, args.replicates, args.sigma, args.seed, metric=args.metric
    )
    write_measurements(ms, args.out)
    print(f"wrote {args.out} ({len(ms)} points)")
    return EXIT_OK


def _cmd_fit(args) -> int:
    ms = read_measurements(args.input)
    digest = sha256_path(args.input)
    sub = _select_metric(ms, args.metric)
    params = {
        "n_min": args.n_min,
        "n_max": args.n_max,
        "method": args.method,
        "on_means": args.on_means,
        "seed": None,
    }

    def artifact(fit) -> FitArtifact:
        return FitArtifact.from_fit(fit, args.metric, digest, params)

    if args.method in (LOGLOG, NONLINEAR):
        fitter = fit_loglog if args.method == LOGLOG else fit_nonlinear
        fit = fitter(sub, args.n_min, args.n_max, on_means=args.on_means)
        payload = artifact(fit).to_dict()
    else:  # both
        fit_a = fit_loglog(sub, args.n_min, args.n_max, on_means=args.on_means)
        fit_b = fit_nonlinear(sub, args.n_min, args.n_max, on_means=args.on_means)
        disc = fit_discrepancy(fit_a, fit_b)
        payload = {
            "kind": "fit_pair",
            "loglog": artifact(fit_a).to_dict(),
            "nonlinear": artifact(fit_b).to_dict(),
            "discrepancy": {"alpha": disc.alpha, "c": disc.c},
        }
    write_json(payload, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_region(args) -> int:
    ms = read_measurements(args.input)
    digest = sha256_path(args.input)
    sub = _select_metric(ms, args.metric)
    plateau = None
    if args.classes is not None:
        plateau = random_guess_plateau(args.metric, args.classes)
    region = detect_power_law_region(sub, plateau=plateau, r2_threshold=args.r2)
    params = {"classes": args.classes, "plateau": plateau, "r2_threshold": args.r2}
    write_json(region_to_dict(region, args.metric, digest, params), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_extrapolate(args) -> int:
    art = load_fit_artifact(args.fit)
    pred = extrapolate(art.fit(), args.n)
    print(f"predicted loss at N={pred.n}: {format_float(pred.value)} ({pred.marker})")
    return EXIT_OK


def _cmd_needed(args) -> int:
    art = load_fit_artifact(args.fit)
    n = required_sample_size(art.fit(), args.target)
    print(f"required sample size for target {format_float(args.target)}: {n}")
    return EXIT_OK


def _cmd_intersect(args) -> int:
    art_a = load_fit_artifact(args.fit_a)
    art_b = load_fit_artifact(args.fit_b)
    crossing = predict_intersection(art_a.fit(), art_b.fit())
    winner = args.fit_a if crossing.superior == art_a.fit() else args.fit_b
    print(f"curves intersect at N* = {format_float(crossing.n_star)}")
    print(f"lower loss beyond N*: {winner}")
    return EXIT_OK


def _cmd_noise_impact(args) -> int:
    art_clean = load_fit_artifact(args.clean)
    art_noisy = load_fit_artifact(args.noisy)
    report = noise_impact(art_clean.fit(), art_noisy.fit(), args.targets)
    payload = noise_impact_to_dict(
        report,
        clean_digest=sha256_path(args.clean),
        noisy_digest=sha256_path(args.noisy),
        params={"targets": args.targets},
    )
    if args.out:
        write_json(payload, args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(dumps_canonical(payload))
    return EXIT_OK


def _cmd_manifest_build(args) -> int:
    images = read_images(args.images)
    manifest = build_nested_subsets(images, args.sizes, args.seed)
    write_manifest(manifest, args.out, input_digest=sha256_path(args.images))
    print(f"wrote {args.out} ({len(manifest.records)} records, {len(manifest.classes)} classes)")
    return EXIT_OK


def _cmd_manifest_noise(args) -> int:
    manifest = read_manifest(args.infile)
    noisy = inject_label_noise(manifest, args.p, args.seed)
    write_manifest(noisy, args.out, input_digest=sha256_path(args.infile))
    flipped = sum(1 for r in noisy.records if r.noise_flag)
    print(f"wrote {args.out} ({flipped} of {len(noisy.records)} labels flipped)")
    return EXIT_OK


def _cmd_manifest_holdout(args) -> int:
    manifest = read_manifest(args.infile)
    train, validation = holdout_split(manifest, args.size, args.fraction, args.seed)
    payload = {
        "kind": "holdout",
        "input_digest": sha256_path(args.infile),
        "size": args.size,
        "fraction": args.fraction,
        "seed": args.seed,
        "train": train,
        "validation": validation,
    }
    if args.out:
        write_json(payload, args.out)
        print(f"wrote {args.out} ({len(train)} train, {len(validation)} validation)")
    else:
        sys.stdout.write(dumps_canonical(payload))
    return EXIT_OK


def _cmd_report(args) -> int:
    ms = read_measurements(args.input)
    fits = [load_fit_artifact(p) for p in args.fits] if args.fits else []
    region = None
    if args.region:
        region = region_from_dict(load_json(args.region))
    out, sidecar = write_report(ms, fits, region, args.out)
    print(f"wrote {out} and {sidecar}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="learncurve",
        description="Learning-curve analysis: power-law fits, extrapolation, "
        "crossover prediction, and reproducible experiment manifests.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic measurement CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--plateau", type=float, required=True)
    p.add_argument("--floor", type=float, default=0.0)
    p.add_argument("--sizes", type=_int_list, required=True, help="comma-separated sample counts")
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument("--sigma", type=float, default=0.0, help="relative noise std")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--metric", default="synthetic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fit", help="fit a power law to a measurement CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--method", choices=[LOGLOG, NONLINEAR, "both"], default="both")
    p.add_argument("--on-means", type=_bool, default=True, metavar="BOOL")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("region", help="detect the power-law region")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--classes", type=int, default=None, help="class count for the random-guess plateau")
    p.add_argument("--r2", type=float, default=0.98)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("extrapolate", help="predict the loss at a sample count")
    p.add_argument("--fit", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_extrapolate)

    p = sub.add_parser("needed", help="sample size required for a target loss")
    p.add_argument("--fit", required=True)
    p.add_argument("--target", type=float, required=True)
    p.set_defaults(func=_cmd_needed)

    p = sub.add_parser("intersect", help="crossing point of two fitted curves")
    p.add_argument("--fit-a", required=True)
    p.add_argument("--fit-b", required=True)
    p.set_defaults(func=_cmd_intersect)

    p = sub.add_parser("noise-impact", help="data cost of a degraded curve")
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--targets", type=_float_list, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_noise_impact)

    p = sub.add_parser("manifest", help="nested-subset experiment manifests")
    msub = p.add_subparsers(dest="manifest_command", required=True)

    q = msub.add_parser("build", help="build nested class-balanced subsets")
    q.add_argument("--images", required=True, help="CSV with header image_id,class,capture_group")
    q.add_argument("--sizes", type=_int_list, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_manifest_build)

    q = msub.add_parser("noise", help="inject consistent label noise")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_manifest_noise)

    q = msub.add_parser("holdout", help="deterministic validation split")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--size", type=int, required=True)
    q.add_argument("--fraction", type=float, default=0.20)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_manifest_holdout)

    p = sub.add_parser("report", help="render the SVG learning-curve report")
    p.add_argument("--input", required=True)
    p.add_argument("--fits", type=lambda s: [x for x in s.split(",") if x], default=[])
    p.add_argument("--region", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NonConvergenceError, NoRegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
