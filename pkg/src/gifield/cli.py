"""Command-line front end.

Subcommands mirror the workflow: ``train-dict`` learns and saves the
dictionary, ``build-fields`` materializes the sampling matrices for the
configured grid, ``run`` executes the full measure/reconstruct sweep, and
``report`` summarizes a finished run directory. Exit codes: 0 success,
2 invalid configuration or usage, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from .data import write_matrix
from .errors import ValidationError
from .fieldopt import build_state, gaussian_sampling, nn_lift, optimize_sampling, quantize_matrix
from .harness import (
    DONE_MARKER,
    ExperimentConfig,
    _load_dictionary,
    _resolve_grid,
    load_config,
    run_experiment,
    train_dictionary,
)

log = logging.getLogger(__name__)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.out:
        cfg = dataclasses.replace(cfg, out_dir=str(args.out))
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg,
            field_seed=args.seed,
            training=dataclasses.replace(cfg.training, seed=args.seed),
        )
    return cfg


def _cmd_train_dict(args) -> int:
    cfg = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    if args.limit is not None:
        cfg = dataclasses.replace(cfg, train_count=args.limit)
    out_path = Path(args.out) if args.out else (
        Path(cfg.dictionary_path) if cfg.dictionary_path
        else Path(cfg.out_dir or ".") / "dictionary.gim"
    )
    out_path.parent.mkdir(parents=True, exist_ok=True)
    dictionary = train_dictionary(cfg, out_path)
    print(f"dictionary: {dictionary.n_pixels}x{dictionary.n_atoms} -> {out_path}")
    return 0


def _require_dictionary(cfg: ExperimentConfig) -> ExperimentConfig:
    if not cfg.dictionary_path:
        raise ValidationError("no trained dictionary configured (dictionary.path); "
                              "run train-dict first")
    if not Path(cfg.dictionary_path).is_file():
        raise ValidationError(f"trained dictionary not found: {cfg.dictionary_path}")
    return cfg


def _cmd_build_fields(args) -> int:
    cfg = _require_dictionary(_apply_overrides(load_config(args.config), args))
    cfg.validate()
    psi = _load_dictionary(cfg)
    state = build_state(psi)
    grid = _resolve_grid(cfg, state)
    if args.limit is not None:
        grid = grid[: args.limit]
    out = Path(cfg.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    for sr, m in grid:
        for method in cfg.methods:
            if method == "optimized":
                phi = nn_lift(optimize_sampling(state, m), state.lift)
                if cfg.qbits:
                    phi = quantize_matrix(phi, cfg.qbits)
                path = out / f"field_optimized_m{m}.gim"
                write_matrix(path, phi.rows, meta={
                    "role": "sampling", "provenance": "optimized", "m": m, "sr": sr,
                    "lifted": True, "qbits": cfg.qbits, "lift": state.lift,
                    "dictionary_checksum": state.dictionary_checksum,
                })
                print(f"wrote {path}")
            else:
                for s in range(cfg.gaussian_seeds):
                    raw = gaussian_sampling(m, state.n_pixels, cfg.field_seed + s)
                    phi = nn_lift(raw, max(0.0, -float(raw.rows.min())))
                    if cfg.qbits:
                        phi = quantize_matrix(phi, cfg.qbits)
                    path = out / f"field_gaussian_m{m}_s{cfg.field_seed + s}.gim"
                    write_matrix(path, phi.rows, meta={
                        "role": "sampling", "provenance": "gaussian", "m": m, "sr": sr,
                        "lifted": True, "qbits": cfg.qbits, "seed": cfg.field_seed + s,
                    })
                    print(f"wrote {path}")
    return 0


def _cmd_run(args) -> int:
    cfg = _require_dictionary(_apply_overrides(load_config(args.config), args))
    if args.limit is not None:
        cfg = dataclasses.replace(cfg, test_count=args.limit)
    records = run_experiment(cfg)
    print(f"{len(records)} records -> {cfg.out_dir}/results.csv")
    return 0


def _cmd_report(args) -> int:
    out = Path(args.out) if args.out else Path(load_config(args.config).out_dir)
    results = out / "results.csv"
    if not results.is_file():
        raise ValidationError(f"no results.csv under {out}")
    with open(results, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValidationError(f"{results} has no records")
    if not (out / DONE_MARKER).is_file():
        print("warning: run did not finish (_DONE marker missing)", file=sys.stderr)

    print(f"{'method':<10} {'sr':>6} {'M':>5} {'qbits':>5} {'psnr':>8} "
          f"{'ssim':>8} {'mu':>8} {'exact':>5}")
    for r in rows:
        print(f"{r['method']:<10} {float(r['sr']):>6.3f} {r['M']:>5} {r['qbits']:>5} "
              f"{float(r['psnr_mean']):>8.2f} {float(r['ssim_mean']):>8.4f} "
              f"{float(r['mu']):>8.4f} {r['n_exact']:>5}")
    by_sr: dict[str, dict[str, float]] = {}
    for r in rows:
        by_sr.setdefault(r["sr"], {})[r["method"]] = float(r["psnr_mean"])
    for sr, methods in by_sr.items():
        if "optimized" in methods and "gaussian" in methods:
            gain = methods["optimized"] - methods["gaussian"]
            print(f"SR {float(sr):.3f}: optimized {gain:+.2f} dB vs gaussian")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gifield",
        description="Coherence-optimized light fields for compressive ghost imaging.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler, help_text in (
        ("train-dict", _cmd_train_dict, "learn the dictionary and save it"),
        ("build-fields", _cmd_build_fields, "write the sampling matrices for the grid"),
        ("run", _cmd_run, "full measure/reconstruct sweep with CSV outputs"),
        ("report", _cmd_report, "summarize a finished run directory"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name == "report":
            group = p.add_mutually_exclusive_group(required=True)
            group.add_argument("--config", help="run config whose output dir to read")
            group.add_argument("--out", help="run directory to read")
        else:
            p.add_argument("--config", required=True, help="INI run description")
            p.add_argument("--seed", type=int, help="override field/training seed")
            p.add_argument("--out", help="override the output path")
            p.add_argument("--limit", type=int,
                           help="cap image count (train-dict/run) or grid points")
        p.set_defaults(handler=handler)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - map any runtime failure to exit 1
        log.debug("unhandled failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
