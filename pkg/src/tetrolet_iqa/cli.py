"""Command-line entry point.

Exit codes: 0 success, 1 degenerate computation, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import dataset_io, divergence, evaluation, gsm, pipeline, tetrolet
from .tiling import enumerate_coverings, fundamental_forms

EXIT_OK, EXIT_DEGENERATE, EXIT_USAGE = 0, 1, 2


def _config(args) -> pipeline.RunConfig:
    return pipeline.RunConfig(
        levels=args.levels, d0=args.d0, eps_reg=args.eps_reg, fit_mode=args.fit_mode, seed=args.seed
    )


def _print_measure(q, distances):
    for d in distances:
        print(f"  D(scale={d.scale}, orientation={d.orientation}) = {d.d:.6f}")
    print(f"Q = {q:.6f}")


def cmd_extract(args) -> int:
    cfg = _config(args)
    fs = pipeline.features_from_path(args.image, cfg)
    dataset_io.write_rr(fs, args.output)
    w, h = fs.image_dims
    print(f"{args.image}: {w}x{h}, {len(fs.features)} subbands -> {args.output}")
    for f in fs.features:
        print(
            f"  scale={f.scale} orientation={f.orientation} "
            f"k={f.weibull.k:.6f} lambda={f.weibull.lam:.6f}"
        )
    return EXIT_OK


def cmd_measure(args) -> int:
    rr = dataset_io.read_rr(args.features)
    plane = dataset_io.load_grayscale(args.image)
    _print_measure(*pipeline.measure_plane(plane, rr, _config(args)))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    ref = dataset_io.load_grayscale(args.reference)
    dist = dataset_io.load_grayscale(args.distorted)
    _print_measure(*pipeline.compare_planes(ref, dist, cfg))
    return EXIT_OK


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    rows = dataset_io.parse_manifest(args.manifest)
    cache: dict[str, tuple] = {}
    records, psnr_records, failures = [], [], 0
    for row in rows:
        try:
            key = _digest(row.ref_path)
            if key not in cache:
                ref_plane = dataset_io.load_grayscale(row.ref_path)
                cache[key] = (pipeline.features_from_plane(ref_plane, cfg, str(row.ref_path)), ref_plane)
            rr, ref_plane = cache[key]
            dist_plane = dataset_io.load_grayscale(row.dist_path)
            q, _ = pipeline.measure_plane(dist_plane, rr, cfg)
        except (OSError, ValueError) as exc:
            failures += 1
            print(f"line {row.line}: skipped {row.dist_path}: {exc}", file=sys.stderr)
            continue
        records.append(
            evaluation.EvaluationRecord(
                ref_id=str(row.ref_path), label=row.distortion_label, q=q, mos=row.mos,
                dist_id=str(row.dist_path),
            )
        )
        if args.psnr:
            a, _ = dataset_io.crop_to_transform_size(ref_plane, cfg.levels)
            b, _ = dataset_io.crop_to_transform_size(dist_plane, cfg.levels)
            psnr_records.append(
                evaluation.EvaluationRecord(
                    ref_id=str(row.ref_path), label=row.distortion_label,
                    q=evaluation.psnr(a, b), mos=row.mos, dist_id=str(row.dist_path),
                )
            )
    if failures:
        print(f"{failures} of {len(rows)} manifest rows failed", file=sys.stderr)
    if not records:
        print("no manifest row produced a score", file=sys.stderr)
        return EXIT_DEGENERATE

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = evaluation.evaluate(records, fit_mode=cfg.fit_mode)
    print(report.to_text(), end="")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out_dir / "scatter.csv").write_text(report.scatter_csv(), encoding="utf-8")
    if args.psnr:
        psnr_report = evaluation.evaluate(psnr_records, fit_mode=cfg.fit_mode, metric="PSNR")
        print(psnr_report.to_text(), end="")
        (out_dir / "report_psnr.csv").write_text(psnr_report.to_csv(), encoding="utf-8")
        (out_dir / "scatter_psnr.csv").write_text(psnr_report.scatter_csv(), encoding="utf-8")
    overall = report.row(evaluation.ALL)
    if not overall.ok:
        print(f"evaluation degenerate: {overall.status}", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_tilings(args) -> int:
    coverings = enumerate_coverings()
    orbits = fundamental_forms(coverings)
    print(f"{len(coverings)} coverings")
    for c in coverings:
        print(f"#{c.index}")
        print(c.ascii())
    print(f"\n{len(orbits)} fundamental forms (representative, orbit size)")
    for n, orbit in enumerate(orbits, start=1):
        print(f"form {n}: #{orbit[0].index}, size {len(orbit)}")
        print(orbit[0].ascii())
    return EXIT_OK


def cmd_decompose(args) -> int:
    plane, _ = dataset_io.crop_to_transform_size(dataset_io.load_grayscale(args.image), args.levels)
    written = tetrolet.dump_decomposition(tetrolet.forward(plane, args.levels), args.out_dir)
    print(f"wrote {len(written)} files to {args.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--levels", type=int, default=2, help="tetrolet levels (default 2)")
    common.add_argument("--d0", type=float, default=divergence.D0, help="pooling scale D0 (default 0.1)")
    common.add_argument("--eps-reg", type=float, default=gsm.EPS_REG, help="covariance ridge (default 1e-6)")
    common.add_argument("--fit-mode", choices=("per-group", "global"), default="per-group")
    common.add_argument("--seed", type=int, default=0, help="recorded for reproducibility; all steps are deterministic")

    p = argparse.ArgumentParser(prog="tetrolet-iqa", description="Reduced-reference IQA in the tetrolet domain")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("extract", parents=[common], help="write RR features of a reference image")
    s.add_argument("image")
    s.add_argument("output")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("measure", parents=[common], help="score a distorted image against RR features")
    s.add_argument("image")
    s.add_argument("features")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("compare", parents=[common], help="score a distorted image against its reference")
    s.add_argument("reference")
    s.add_argument("distorted")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("evaluate", parents=[common], help="PLCC/SROCC over a dataset manifest")
    s.add_argument("manifest")
    s.add_argument("--psnr", action="store_true", help="also evaluate the PSNR baseline")
    s.add_argument("--out-dir", default="evaluation", help="directory for report and scatter CSVs")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("tilings", help="print all coverings and the fundamental forms")
    s.set_defaults(func=cmd_tilings)

    s = sub.add_parser("decompose", parents=[common], help="dump a tetrolet decomposition as text matrices")
    s.add_argument("image")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (gsm.FeatureError, evaluation.EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
