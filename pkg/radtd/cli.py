"""
Command-line entry point.

    python -m radtd fit --input train.csv --out model.selfset.json
    python -m radtd detect --model model.selfset.json --input live.csv
    python -m radtd sweep --input ts15.csv
    python -m radtd bench --dataset_dir ydata-labeled-time-series-anomalies-v1_0 --seeds 0,1,2
    python -m radtd synth --kind spike --out spike.csv
    python -m radtd export-urp --input live.csv --start 120 --out urp.pgm

Exit codes: 0 ok, 1 usage/config error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from .artifacts import write_bench, write_run_manifest, write_scores, write_series_csv, write_sweep_csv
from .baselines import threshold_sweep
from .common import configure_logging, configure_stdout
from .config import METHODS, RadtdConfig, RunConfig, build_run_config, load_config_file, method_list
from .detector import combine_channels, detect, detect_channels, fit, fit_channels, update_self_set
from .errors import ConfigError, DataError, FingerprintError, NumericError
from .evaluation import bench
from .recurrence import EmbeddingConfig, save_urp_csv, save_urp_pgm, urp
from .self_set import CONFIRMED, SELFSET_SUFFIX, UNLABELED, SelfSet, channel_path, load, save
from .series_core import TimeSeries, WindowPlan, load_series, rescale, windows
from .synthetic import KINDS, AnomalySpec, synth_series

logger = logging.getLogger("radtd.cli")

DATASET_ENV = "RADTD_DATASET_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_DEFAULTS = RadtdConfig()

# (flag, type, help); defaults come from RadtdConfig so the help text cannot drift
_RADTD_FLAGS = [
    ("w", int, "subsequence length"),
    ("m", int, "embedding dimension"),
    ("tau", int, "embedding delay"),
    ("k", int, "URPs per training batch"),
    ("L", int, "hidden nodes of each ELM-AE"),
    ("C", float, "ridge regularisation constant (inf = pseudoinverse)"),
    ("hop", int, "window stride"),
    ("epsilon", float, "manual anomaly threshold in [0, 1); replaces --confidence"),
    ("confidence", float, "confidence level of the automatic threshold"),
    ("merge_epsilon", float, "self-set merge threshold (defaults to the anomaly threshold)"),
    ("seed", int, "root seed for ELM input weights"),
    ("train_fraction", float, "normal training prefix used by sweep and bench"),
    ("l_min", int, "minimum diagonal line length for DET"),
    ("v_min", int, "minimum vertical line length for LAM"),
    ("rqa_stride", int, "window stride of the RQA baselines"),
    ("median_window", int, "trailing window of --rqa_score median"),
]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def _default_text(name: str) -> str:
    value = getattr(_DEFAULTS, name)
    return "unset" if value is None else str(value)


def _add_common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", type=str, help="JSON run config (flags override it)")
    ap.add_argument("--log_level", type=str, default="INFO", help="default=INFO")
    ap.add_argument("--log_format", type=str, choices=["text", "json"], default="text", help="default=text")
    ap.add_argument("--no_manifest", action="store_true", help="Do not write a run manifest next to the outputs")


def _add_schema(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--timestamp_column", type=str, help="default=timestamp (falls back to timestamps)")
    ap.add_argument("--value_columns", type=str, help="Comma-separated value columns (default=value)")
    ap.add_argument("--label_column", type=str, help="default=auto (is_anomaly, anomaly)")


def _add_radtd(ap: argparse.ArgumentParser) -> None:
    for name, typ, text in _RADTD_FLAGS:
        ap.add_argument(f"--{name}", type=typ, default=None, help=f"{text} (default={_default_text(name)})")
    ap.add_argument("--activation", type=str, choices=["sigmoid", "tanh", "sin", "relu"], help="default=sigmoid")
    ap.add_argument("--rqa_score", type=str, choices=["diff", "median"], help="default=diff")
    ap.add_argument("--joint", action="store_true", default=None, help="Fit one self-set on all value columns")
    ap.add_argument("--jobs", type=int, default=None, help="Worker count (default=1)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="radtd", description="Recurrence-plot anomaly detection with ELM autoencoders.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("fit", help="Learn a self-set from a normal series")
    p.add_argument("--input", type=str, required=True, help="Training CSV (assumed normal)")
    p.add_argument("--out", type=str, required=True, help="Output *.selfset.json")
    p.add_argument("--confirmed", action="store_true", help="Label learned patterns confirmed-normal")
    _add_common(p)
    _add_schema(p)
    _add_radtd(p)

    p = sub.add_parser("detect", help="Score a series against a self-set")
    p.add_argument("--model", type=str, required=True, help="*.selfset.json (per-channel files are found by stem)")
    p.add_argument("--input", type=str, required=True)
    p.add_argument("--out_prefix", type=str, help="Output prefix (default=<input without .csv>)")
    p.add_argument("--update_model", type=str, help="Admit normal batches of the input and write the grown self-set here")
    _add_common(p)
    _add_schema(p)
    _add_radtd(p)

    p = sub.add_parser("sweep", help="RQA AUC per recurrence threshold (0.1..5.0) with the RADTD reference")
    p.add_argument("--input", type=str, required=True, help="Labeled CSV")
    p.add_argument("--out", type=str, help="Output CSV (default=<input>.sweep.csv)")
    p.add_argument("--no_radtd", action="store_true", help="Skip the RADTD reference column")
    p.add_argument("--no_progress", action="store_true")
    _add_common(p)
    _add_schema(p)
    _add_radtd(p)

    p = sub.add_parser("bench", help="AUC of every method over a dataset directory")
    p.add_argument("--dataset_dir", type=str, help=f"Dataset root (default=${DATASET_ENV})")
    p.add_argument("--out_dir", type=str, default="bench_out", help="default=bench_out")
    p.add_argument("--methods", type=str, help=f"Comma-separated subset of {','.join(METHODS)} (default=all)")
    p.add_argument("--seeds", type=str, help="Comma-separated seed list (default=0)")
    p.add_argument("--exclude", action="append", default=None, help="Glob to exclude (repeatable, default=*_all.csv)")
    p.add_argument("--no_progress", action="store_true")
    _add_common(p)
    _add_schema(p)
    _add_radtd(p)

    p = sub.add_parser("synth", help="Write a labeled synthetic series")
    p.add_argument("--kind", type=str, choices=list(KINDS), required=True)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--length", type=int, default=500, help="default=500")
    p.add_argument("--seed", type=int, default=0, help="default=0")
    p.add_argument("--positions", type=str, help="Comma-separated anomaly positions (default=random)")
    p.add_argument("--count", type=int, default=1, help="Random anomalies when --positions is absent (default=1)")
    p.add_argument("--magnitude", type=float, default=10.0, help="default=10.0")
    p.add_argument("--width", type=int, default=30, help="Level-shift width (default=30)")
    p.add_argument("--period", type=int, default=50, help="default=50")
    p.add_argument("--log_level", type=str, default="INFO", help="default=INFO")
    p.add_argument("--log_format", type=str, choices=["text", "json"], default="text", help="default=text")

    p = sub.add_parser("export-urp", help="Write the URP of one window as CSV or PGM")
    p.add_argument("--input", type=str, required=True)
    p.add_argument("--out", type=str, required=True, help="*.csv or *.pgm")
    p.add_argument("--start", type=int, default=0, help="0-based window start (default=0)")
    _add_common(p)
    _add_schema(p)
    _add_radtd(p)
    return ap


# ----------------------------------------------------------------------------
# config layering
# ----------------------------------------------------------------------------

def _csv_list(raw: Optional[str]) -> Optional[List[str]]:
    return method_list(raw)


def _int_list(raw: Optional[str]) -> Optional[List[int]]:
    items = _csv_list(raw)
    if items is None:
        return None
    try:
        return [int(x) for x in items]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {raw!r}") from None


def flag_layer(args: argparse.Namespace) -> Dict[str, Any]:
    radtd = {name: getattr(args, name, None) for name, _, _ in _RADTD_FLAGS}
    for name in ("activation", "rqa_score", "joint"):
        radtd[name] = getattr(args, name, None)
    if getattr(args, "update_model", None):
        radtd["update_on_match"] = True
    schema = {
        "timestamp": getattr(args, "timestamp_column", None),
        "values": _csv_list(getattr(args, "value_columns", None)),
        "label": getattr(args, "label_column", None),
    }
    return {
        "radtd": radtd,
        "schema": schema,
        "methods": _csv_list(getattr(args, "methods", None)),
        "seeds": _int_list(getattr(args, "seeds", None)),
        "dataset_dir": getattr(args, "dataset_dir", None),
        "exclude": getattr(args, "exclude", None),
        "jobs": getattr(args, "jobs", None),
    }


def resolve_config(args: argparse.Namespace) -> RunConfig:
    return build_run_config(load_config_file(getattr(args, "config", None)), flag_layer(args))


def _settings(run_cfg: RunConfig, **extra: Any) -> Dict[str, Any]:
    return {**run_cfg.model_dump(mode="json", by_alias=True), **extra}


def _manifest(args: argparse.Namespace, out_dir: Path, settings: Dict[str, Any], started: datetime, outputs, **kw) -> None:
    if getattr(args, "no_manifest", False):
        return
    write_run_manifest(out_dir, args.command, settings, started, datetime.now(timezone.utc), outputs, **kw)


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def _load_input(args: argparse.Namespace, run_cfg: RunConfig) -> TimeSeries:
    return load_series(args.input, run_cfg.schema_)


def cmd_fit(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc)
    run_cfg = resolve_config(args)
    cfg = run_cfg.radtd
    series = _load_input(args, run_cfg)
    label = CONFIRMED if args.confirmed else UNLABELED
    out = Path(args.out)
    outputs: Dict[str, Path] = {}
    if series.d > 1 and not cfg.joint:
        for col, selfset in fit_channels(series, cfg, label=label).items():
            outputs[col] = save(selfset, channel_path(out, col))
    else:
        outputs["model"] = save(fit(series, cfg, label=label), out)
    _manifest(args, out.parent, _settings(run_cfg, input=str(Path(args.input).resolve())), started, outputs)
    return EXIT_OK


def resolve_models(model: str) -> List[Path]:
    path = Path(model)
    if path.exists():
        return [path]
    name = path.name
    stem = name[: -len(SELFSET_SUFFIX)] if name.endswith(SELFSET_SUFFIX) else path.stem
    found = sorted(path.parent.glob(f"{stem}.*{SELFSET_SUFFIX}"))
    if not found:
        raise FileNotFoundError(f"Missing self-set: {path.resolve()}")
    return found


def cmd_detect(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc)
    run_cfg = resolve_config(args)
    cfg = run_cfg.radtd
    sets: List[SelfSet] = [load(p) for p in resolve_models(args.model)]
    series = _load_input(args, run_cfg)

    if len(sets) == 1 and list(sets[0].channels) == list(series.columns):
        by_channel = None
        scores = detect(sets[0], series, cfg, run_cfg.jobs)
    else:
        by_channel = {s.channels[0]: s for s in sets if len(s.channels) == 1}
        if len(by_channel) != len(sets):
            raise FingerprintError(f"self-set columns do not match series columns {list(series.columns)}")
        per_channel = detect_channels(by_channel, series, cfg, run_cfg.jobs)
        scores = combine_channels(per_channel)

    prefix = Path(args.out_prefix) if args.out_prefix else Path(args.input).with_suffix("")
    outputs: Dict[str, Any] = dict(write_scores(scores, prefix))

    if cfg.update_on_match:
        # without --update_model the grown set replaces the loaded one
        target = Path(args.update_model or args.model)
        if by_channel is None:
            outputs["updated_model"] = save(update_self_set(sets[0], series, scores, cfg), target)
        else:
            for col, selfset in by_channel.items():
                sub = series.channel(series.columns.index(col))
                outputs[f"updated_{col}"] = save(update_self_set(selfset, sub, per_channel[col], cfg), channel_path(target, col))

    _manifest(args, prefix.parent, _settings(run_cfg, input=str(Path(args.input).resolve())), started, outputs)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc)
    run_cfg = resolve_config(args)
    series = _load_input(args, run_cfg)
    progress = not args.no_progress and sys.stderr.isatty()
    result = threshold_sweep(series, run_cfg.radtd, include_radtd=not args.no_radtd, jobs=run_cfg.jobs, progress=progress)
    out = Path(args.out) if args.out else Path(args.input).with_suffix(".sweep.csv")
    write_sweep_csv(result, out)
    best = {k: {"auc": v[0], "epsilon": v[1]} for k, v in result.best().items()}
    _manifest(args, out.parent, _settings(run_cfg, input=str(Path(args.input).resolve())), started, {"sweep": out}, outcomes={"best": best, "radtd_auc": result.radtd_auc})
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc)
    load_dotenv()
    if not args.dataset_dir and os.environ.get(DATASET_ENV):
        args.dataset_dir = os.environ[DATASET_ENV]
    run_cfg = resolve_config(args)
    if not run_cfg.dataset_dir:
        raise _UsageError(f"bench: --dataset_dir is required (or set {DATASET_ENV})")
    progress = not args.no_progress and sys.stderr.isatty()
    report = bench(
        Path(run_cfg.dataset_dir),
        methods=run_cfg.methods,
        cfg=run_cfg.radtd,
        seeds=run_cfg.seeds,
        exclude=run_cfg.exclude,
        schema=run_cfg.schema_,
        jobs=run_cfg.jobs,
        progress=progress,
    )
    out_dir = Path(args.out_dir)
    outputs = write_bench(report, out_dir)
    failed = sum(1 for r in report.records if r.status == "failed")
    _manifest(
        args,
        out_dir,
        _settings(run_cfg),
        started,
        outputs,
        outcomes={"rows": len(report.records), "failed": failed, "skipped": len(report.notes)},
        runtimes=report.runtimes(),
    )
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    positions = _int_list(args.positions)
    spec = AnomalySpec(
        positions=None if positions is None else tuple(positions),
        count=args.count,
        magnitude=args.magnitude,
        width=args.width,
        period=args.period,
    )
    series = synth_series(args.kind, args.length, spec, args.seed)
    write_series_csv(series, Path(args.out))
    return EXIT_OK


def cmd_export_urp(args: argparse.Namespace) -> int:
    run_cfg = resolve_config(args)
    cfg = run_cfg.radtd
    series = rescale(_load_input(args, run_cfg))
    wins = windows(series, WindowPlan(cfg.w, 1))
    if not 0 <= args.start < len(wins):
        raise DataError(f"--start {args.start} out of range (0..{len(wins) - 1})")
    rm = urp(wins.segments[args.start], EmbeddingConfig(cfg.m, cfg.tau), origin=args.start)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".csv":
        save_urp_csv(rm, out)
    elif out.suffix.lower() in (".pgm", ".pnm"):
        save_urp_pgm(rm, out)
    else:
        raise ConfigError(f"--out must end in .csv or .pgm (got {out.name})")
    logger.info("[export_urp] wrote: %s | n=%d | start=%d", out, rm.n, args.start)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "fit": cmd_fit,
    "detect": cmd_detect,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
    "synth": cmd_synth,
    "export-urp": cmd_export_urp,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:
        # --help / --version
        return int(exc.code or 0)

    configure_stdout()
    configure_logging(args.log_level, args.log_format)
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"radtd: error: {exc}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        sys.stderr.write(f"radtd: config error: {exc}\n")
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        sys.stderr.write(f"radtd: data error: {exc}\n")
        return EXIT_DATA
    except NumericError as exc:
        sys.stderr.write(f"radtd: numeric error: {exc}\n")
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
