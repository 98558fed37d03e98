"""Command-line entry point.

Exit codes: 0 success, 1 a validation check failed, 2 bad spec or flags,
3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from irs_oob.config import KINDS, SpecError, load_spec
from irs_oob.experiments import RUNNERS, write_csv

log = logging.getLogger("irs_oob")

EXIT_OK, EXIT_VALIDATION, EXIT_SPEC, EXIT_IO = 0, 1, 2, 3

OUTPUT_NAMES = {
    "se-vs-snr": "se_vs_snr",
    "se-vs-n": "se_vs_n",
    "ccdf": "ccdf",
    "validate": "validate",
}


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="experiment spec file (defaults apply to absent keys)")
    common.add_argument("--seed", type=_u64, help="master seed; overrides sim.seed")
    common.add_argument("--out", type=Path, help="output directory; overrides output.dir")
    common.add_argument("--threads", type=_positive_int, help="worker threads (never changes results)")
    common.add_argument(
        "--debug-phase-identity",
        action="store_true",
        help="cross-check OOB gains under in-band phases vs fresh random phases",
    )
    common.add_argument("--no-plots", action="store_true", help="write CSV only")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="irs-oob",
        description="Out-of-band impact of a single-operator IRS: simulation and closed-form checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the experiment named by experiment.kind in --spec")
    for kind in KINDS:
        sub.add_parser(kind, parents=[common], help=f"run the {kind} experiment")
    return parser


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("IRS_SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"IRS_SIM_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    kind = None if args.command == "run" else args.command
    overrides = {}
    if args.seed is not None:
        overrides["sim.seed"] = args.seed
    if args.out is not None:
        overrides["output.dir"] = str(args.out)
    if args.no_plots:
        overrides["output.plots"] = False
    try:
        spec = load_spec(args.spec, kind=kind, overrides=overrides)
        threads = resolve_threads(args.threads)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as exc:
        print(f"cannot read spec {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    t0 = time.perf_counter()
    runner = RUNNERS[spec.kind]
    if spec.kind == "validate":
        table = runner(spec)
    elif spec.kind == "ccdf":
        table = runner(spec, threads=threads)
    else:
        table = runner(spec, threads=threads, debug_phase_identity=args.debug_phase_identity)
    log.info("%s finished in %.1fs", spec.kind, time.perf_counter() - t0)

    stem = OUTPUT_NAMES[spec.kind]
    csv_path = spec.output_dir / f"{stem}.csv"
    try:
        write_csv(table, csv_path, spec.header_lines())
        written = [csv_path]
        if spec.kind == "validate":
            report = spec.output_dir / "validate_report.txt"
            report.write_text("\n".join(table.summary) + "\n", encoding="utf-8")
            written.append(report)
        elif spec.plots:
            from irs_oob.plotting import RENDERERS

            written.append(RENDERERS[spec.kind](table, spec.output_dir / f"{stem}.png"))
    except OSError as exc:
        print(f"cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    for line in table.summary:
        print(line)
    for p in written:
        print(f"wrote {p}")
    return EXIT_VALIDATION if table.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
