"""Command line entry point: ``weaksource {sweep,partition,analyze}``.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .source_model import SourceError, new_source
from .sweep import ConfigError, SweepConfig, analyze, emit_csv, emit_json, run_sweep
from .typicality import PartitionError, partition_sequences

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

log = logging.getLogger("weaksource")


def _cmd_sweep(args) -> int:
    cfg = SweepConfig.load(args.config)
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.emit_sequences:
        cfg.emit_sequences = True
    if args.timing:
        cfg.record_runtime = True
    cfg.validate()
    out = args.out or cfg.output_path
    if not out:
        raise ConfigError("no output path: pass --out or set output_path in the config")
    out = Path(out)
    fmt = args.format or ("json" if out.suffix == ".json" else "csv")
    seq_dir = out.parent / f"{out.stem}_sequences" if cfg.emit_sequences else None
    rows = run_sweep(cfg, sequences_dir=seq_dir)
    (emit_json if fmt == "json" else emit_csv)(rows, out)
    skipped = sum(r.case_tag == "skipped" for r in rows)
    log.info("wrote %d rows (%d skipped) to %s", len(rows), skipped, out)
    return EXIT_OK


def _cmd_partition(args) -> int:
    try:
        model = new_source(float(p) for p in args.pmf.split(","))
        part = partition_sequences(model, args.n, args.eps)
    except (ValueError, SourceError, PartitionError) as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(part.summary(), indent=1))
    if args.sequences:
        part.write_sequences_csv(args.sequences)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    cfg = SweepConfig.load(args.config)
    print(json.dumps(analyze(cfg), indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weaksource", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and write one row per cell")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--seed", type=int, help="override base_seed (unsigned 64-bit)")
    p.add_argument("--emit-sequences", action="store_true",
                   help="also write every partition's block lists as CSV")
    p.add_argument("--timing", action="store_true",
                   help="fill runtime_ms (makes output non-reproducible)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("partition", help="print the typical/atypical split for one source")
    p.add_argument("--pmf", required=True, help="comma-separated probabilities, e.g. 0.2,0.8")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--sequences", help="write the block lists to this CSV file")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("analyze", help="print exponent reports for every cell of a config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
