from __future__ import annotations

import argparse
import shutil
import subprocess
import sys
from pathlib import Path


def run_cmd(args: list[str], dry_run: bool = False) -> None:
    print(f"[run_pipeline] cmd: {' '.join(args)}")
    if dry_run:
        return
    subprocess.run(args, check=True)


def main() -> None:
    ap = argparse.ArgumentParser(description="End-to-end demo: synth -> fit -> detect -> sweep")
    ap.add_argument("--work_dir", type=str, default="radtd_demo", help="Folder for every artifact (default=radtd_demo)")
    ap.add_argument("--kind", type=str, default="spike", choices=["spike", "level_shift", "ar1_spike", "seasonal_switch"])
    ap.add_argument("--length", type=int, default=1000, help="default=1000")
    ap.add_argument("--seed", type=int, default=0, help="default=0")
    ap.add_argument("--train_length", type=int, default=300, help="Normal prefix written for fit (default=300)")
    ap.add_argument("--config", type=str, help="JSON run config passed to fit/detect/sweep")
    ap.add_argument("--clean_work_dir", action="store_true", help="Delete work_dir before running")
    ap.add_argument("--skip_sweep", action="store_true")
    ap.add_argument("--dry_run", action="store_true", help="Print the commands without running them")
    args = ap.parse_args()

    python = sys.executable
    work_dir = Path(args.work_dir).resolve()
    config_flag = ["--config", args.config] if args.config else []

    if args.clean_work_dir and work_dir.exists():
        print(f"[run_pipeline] removing work_dir: {work_dir}")
        if not args.dry_run:
            shutil.rmtree(work_dir)
    if not args.dry_run:
        work_dir.mkdir(parents=True, exist_ok=True)

    series_csv = work_dir / f"{args.kind}_{args.seed}.csv"
    train_csv = work_dir / f"{args.kind}_{args.seed}.train.csv"
    model = work_dir / f"{args.kind}_{args.seed}.selfset.json"

    run_cmd(
        [
            python,
            "-m",
            "radtd",
            "synth",
            "--kind",
            args.kind,
            "--length",
            str(args.length),
            "--seed",
            str(args.seed),
            "--out",
            str(series_csv),
        ],
        args.dry_run,
    )

    # the fit input is the normal head of the synthetic series
    if not args.dry_run:
        lines = series_csv.read_text(encoding="utf-8").splitlines()
        train_csv.write_text("\n".join(lines[: args.train_length + 1]) + "\n", encoding="utf-8", newline="\n")
        print(f"[run_pipeline] trimmed {train_csv.name} to {args.train_length} rows")

    run_cmd([python, "-m", "radtd", "fit", "--input", str(train_csv), "--out", str(model), *config_flag], args.dry_run)
    run_cmd(
        [
            python,
            "-m",
            "radtd",
            "detect",
            "--model",
            str(model),
            "--input",
            str(series_csv),
            "--out_prefix",
            str(work_dir / f"{args.kind}_{args.seed}"),
            *config_flag,
        ],
        args.dry_run,
    )

    if not args.skip_sweep and args.kind != "seasonal_switch":
        run_cmd(
            [
                python,
                "-m",
                "radtd",
                "sweep",
                "--input",
                str(series_csv),
                "--out",
                str(work_dir / f"{args.kind}_{args.seed}.sweep.csv"),
                "--no_progress",
                *config_flag,
            ],
            args.dry_run,
        )


if __name__ == "__main__":
    main()
