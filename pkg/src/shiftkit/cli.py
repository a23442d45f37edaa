"""Command-line entry point: ``shiftkit {validate,eval,rip,synth,retention}``.

Exit codes: 0 success, 1 validation failure, 2 I/O error, 3 configuration
error. Diagnostics go to stderr with line or field context.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io
from .errors import ConfigError
from .evaluate import CurveSet, evaluate, retention_suite, scored_samples, split, write_curves
from .retention import roc_auc
from .rip import AggOperator, RipConfig, rip_from_scores
from .synth import SynthSpec, Task, gen_trajectory, generate

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_CONFIG = 0, 1, 2, 3
OUT_ENV = "SHIFTKIT_OUT"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(f"shiftkit: {msg}", file=sys.stderr)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        raise CliError(EXIT_CONFIG, f"--out is required (or set {OUT_ENV})")
    return Path(out)


def _load(path: str) -> list:
    """Read a record file, reporting every bad line before failing."""
    records, bad = [], 0
    try:
        for lineno, item in io.iter_record_file(path):
            if isinstance(item, io.RecordFileError):
                _err(f"{path}:{item}")
                bad += 1
            else:
                records.append(item)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot read {path}: {e.strerror or e}") from None
    except UnicodeDecodeError as e:
        raise CliError(EXIT_IO, f"cannot decode {path}: {e}") from None
    if bad:
        raise CliError(EXIT_INVALID, f"{path}: {bad} invalid record(s)")
    if not records:
        raise CliError(EXIT_INVALID, f"{path}: no records")
    try:
        io.common_task(records)
    except ValueError as e:
        raise CliError(EXIT_INVALID, f"{path}: {e}") from None
    return records


def _load_spec(path: str, seed: int | None) -> SynthSpec:
    try:
        spec = SynthSpec.load(path)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot read {path}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise CliError(EXIT_CONFIG, f"{path}: invalid JSON: {e}") from None
    if seed is not None:
        spec = SynthSpec.from_dict({**spec.to_dict(), "seed": seed})
    return spec


def cmd_validate(args) -> int:
    records = _load(args.file)
    print(f"{args.file}: {len(records)} valid record(s), {sum(getattr(r, 'skip', False) for r in records)} flagged skip")
    return EXIT_OK


def cmd_eval(args) -> int:
    records = _load(args.file)
    report = evaluate(records, args.threshold, args.seed, args.workers)
    out = _out_dir(args)
    report.write(out, args.f1_grid, plots=not args.no_plots)
    print(f"wrote {out / 'metrics.json'} and {len(report.curves)} curve(s)")
    return EXIT_OK


def cmd_retention(args) -> int:
    records = _load(args.file)
    task = io.common_task(records)
    threshold = args.threshold
    if threshold is None:
        if task != "regression":
            raise ConfigError(f"--threshold is required for {task} records (no default acceptability threshold)")
        threshold = 1.0
    samples = scored_samples(records, args.metric, args.uncertainty, args.seed)
    curves: dict[str, CurveSet] = {}
    summary = {}
    for part, subset in split(samples).items():
        if subset:
            metrics, cs = retention_suite(subset, threshold, args.seed, f"{part}__{args.metric}", args.metric)
            curves.update(cs)
            summary[part] = metrics
    try:
        summary["roc_auc"] = roc_auc(samples)
    except ValueError:
        summary["roc_auc"] = None
    out = _out_dir(args)
    write_curves(curves, out, args.f1_grid, plots=not args.no_plots)
    io.write_json(summary, out / "curves.json")
    print(f"wrote {len(curves)} curve(s) to {out}")
    return EXIT_OK


def cmd_rip(args) -> int:
    out = _out_dir(args)
    if (args.scores is None) == (args.synth is None):
        raise ConfigError("give exactly one of --scores or --synth")
    if args.scores is not None:
        try:
            scores = io.read_score_matrix(args.scores)
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot read {args.scores}: {e.strerror or e}") from None
        except ValueError as e:
            raise CliError(EXIT_INVALID, str(e)) from None
        G, K = scores.shape
        if args.k is not None and args.k != K:
            raise ConfigError(f"--k {args.k} does not match {K} score columns")
        if args.q is not None and args.q * K != G:
            raise ConfigError(f"--k x --q = {K * args.q} does not match {G} score rows")
        config = RipConfig(K=K, Q=args.q or 1, G=G, D=args.d, traj_agg=args.traj_agg, req_agg=args.req_agg)
        result = rip_from_scores(scores, config)
        out.mkdir(parents=True, exist_ok=True)
        io.write_json(
            {
                "indices": result.indices.tolist(),
                "confidences": result.confidences.tolist(),
                "request_uncertainty": result.request_uncertainty,
                "trajectory_scores": result.trajectory_scores.tolist(),
            },
            out / "rip.json",
        )
        print(f"wrote {out / 'rip.json'}")
        return EXIT_OK
    spec = _load_spec(args.synth, args.seed)
    if spec.task is not Task.TRAJECTORY:
        raise ConfigError(f"--synth spec must have task 'trajectory', got {spec.task.value!r}")
    overrides = {k: v for k, v in (("K", args.k), ("Q", args.q), ("D", args.d)) if v is not None}
    overrides.update(traj_agg=args.traj_agg, req_agg=args.req_agg)
    spec = SynthSpec.from_dict({**spec.to_dict(), **overrides})
    records = gen_trajectory(spec)
    out.mkdir(parents=True, exist_ok=True)
    io.write_records(records, out / "records.jsonl")
    print(f"wrote {len(records)} record(s) to {out / 'records.jsonl'}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = _load_spec(args.specfile, args.seed)
    records = generate(spec)
    try:
        io.write_records(records, args.out)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {e.strerror or e}") from None
    print(f"wrote {len(records)} {spec.task.value} record(s) to {args.out}")
    return EXIT_OK


def _grid(value: str) -> str:
    if value != "exact" and not value.isdigit():
        raise argparse.ArgumentTypeError("expected 'exact' or a point count such as 1000")
    return value


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are configuration errors; keep exit code 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftkit", description="Joint robustness and uncertainty evaluation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a record file")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("eval", help="compute the metric suite and write a report bundle")
    e.add_argument("file")
    e.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
    e.add_argument("--threshold", type=float, help="acceptability threshold on the per-sample error")
    e.add_argument("--f1-grid", type=_grid, default="exact", help="'exact' or number of plotted points")
    e.add_argument("--seed", type=int, default=0, help="seed for the random baseline and random measure")
    e.add_argument("--workers", type=int, default=1, help="threads for per-record metrics")
    e.add_argument("--no-plots", action="store_true", help="skip SVG output")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("rip", help="run the RIP aggregation pipeline")
    r.add_argument("--scores", help="CSV of G rows x K columns of log-probabilities")
    r.add_argument("--synth", help="synth spec (trajectory task) to generate scenes from")
    r.add_argument("--k", type=int)
    r.add_argument("--q", type=int)
    r.add_argument("--d", type=int, default=5)
    r.add_argument("--traj-agg", choices=[a.value for a in AggOperator], default="lower_quartile")
    r.add_argument("--req-agg", choices=[a.value for a in AggOperator], default="lower_quartile")
    r.add_argument("--seed", type=int, help="override the synth spec seed")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
    r.set_defaults(func=cmd_rip)

    s = sub.add_parser("synth", help="generate a synthetic record file")
    s.add_argument("specfile")
    s.add_argument("--out", required=True, help="output JSONL path")
    s.add_argument("--seed", type=int, help="override the spec seed")
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("retention", help="write retention curves only")
    t.add_argument("file")
    t.add_argument("--metric", required=True, help="error metric (mse | weighted_ade | ... | egleu_error)")
    t.add_argument("--uncertainty", default="tvar", help="regression uncertainty measure")
    t.add_argument("--threshold", type=float)
    t.add_argument("--f1-grid", type=_grid, default="exact")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--no-plots", action="store_true")
    t.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
    t.set_defaults(func=cmd_retention)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code is None else int(e.code)
    try:
        return args.func(args)
    except CliError as e:
        _err(str(e))
        return e.code
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    except OSError as e:
        _err(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
