"""Experiment orchestration: sweep sampling ratios, emit CSV tables and curves.

A run is fully described by one INI-style config file: dataset paths, training
knobs, the SR grid, methods, quantization, noise. For every (method, SR) cell
the harness builds and lifts the sampling matrix, forms the equivalent matrix
D = Phi Psi once, reconstructs every test image, and appends one aggregate
record. Outputs: ``results.csv`` (aggregates), ``per_image.csv`` (one row per
test image per cell), per-method curve files, and a zero-byte ``_DONE`` marker
written last so interrupted runs are detectable.

Everything derived from seeds is byte-reproducible across runs; the two
wall-clock columns of results.csv are the only fields that vary.
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import load_idx_images, random_subset, read_matrix, read_matrix_meta, write_matrix
from .dictionary import Dictionary, TrainingConfig, ksvd_train
from .errors import ValidationError
from .fieldopt import (
    FieldOptState,
    build_state,
    gaussian_sampling,
    nn_lift,
    optimize_sampling,
    quantize_matrix,
)
from .imaging import NoiseModel, measure, reconstruct
from .metrics import QualityReport, aggregate, mse, mutual_coherence, psnr, ssim

log = logging.getLogger(__name__)

RESULTS_HEADER = (
    "method,sr,M,qbits,psnr_mean,psnr_std,ssim_mean,ssim_std,mu,"
    "n_exact,build_sec,recon_sec_mean"
)
PER_IMAGE_HEADER = "method,sr,M,qbits,image,mse,psnr,ssim"
DONE_MARKER = "_DONE"

METHODS = ("optimized", "gaussian")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one sweep needs, straight from a config file."""

    train_path: str
    test_path: str
    train_count: int
    train_seed: int
    test_count: int
    test_seed: int
    training: TrainingConfig
    sr_grid: tuple[float, ...]
    m_grid: tuple[int, ...]  # explicit M values; mutually exclusive with sr_grid
    methods: tuple[str, ...]
    qbits: int  # 0 = unquantized
    noise: NoiseModel
    out_dir: str
    gaussian_seeds: int = 3
    field_seed: int = 0
    recon_sparsity: int | None = None  # default: the training budget
    dictionary_path: str | None = None  # load instead of training

    def validate(self) -> None:
        if not self.test_path:
            raise ValidationError("config: data.test path is required")
        if not self.train_path and not self.dictionary_path:
            raise ValidationError("config: data.train path or dictionary.path is required")
        if self.train_count < 1 or self.test_count < 1:
            raise ValidationError("config: image counts must be >= 1")
        if bool(self.sr_grid) == bool(self.m_grid):
            raise ValidationError("config: give exactly one of fields.sr and fields.m")
        for sr in self.sr_grid:
            if not 0.0 < sr <= 1.0:
                raise ValidationError(f"config: sampling ratio {sr} outside (0, 1]")
        for m in self.m_grid:
            if m < 1:
                raise ValidationError(f"config: row count {m} must be >= 1")
        if not self.methods:
            raise ValidationError("config: at least one method")
        for name in self.methods:
            if name not in METHODS:
                raise ValidationError(f"config: unknown method {name!r}")
        if self.qbits != 0 and not 1 <= self.qbits <= 16:
            raise ValidationError("config: qbits must be 0 (off) or in [1, 16]")
        if self.gaussian_seeds < 1:
            raise ValidationError("config: gaussian_seeds must be >= 1")
        if self.recon_sparsity is not None and self.recon_sparsity < 1:
            raise ValidationError("config: run.t0 must be >= 1")
        if not self.out_dir:
            raise ValidationError("config: run.out directory is required")


@dataclass(frozen=True)
class ImageMetrics:
    """Per-test-image reconstruction quality (seed-averaged for gaussian)."""

    index: int
    mse: float
    psnr: float
    ssim: float


@dataclass(frozen=True)
class ExperimentRecord:
    """One (method, SR) cell: aggregates, coherence, and timings."""

    method: str
    sr: float
    m: int
    qbits: int
    report: QualityReport
    mu: float
    n_exact: int  # reconstructions (image x field seed) with infinite PSNR
    build_sec: float
    recon_sec_mean: float
    per_image: tuple[ImageMetrics, ...]

    def __post_init__(self):
        if self.build_sec < 0 or self.recon_sec_mean < 0:
            raise ValueError("timings must be non-negative")
        if len(self.per_image) != self.report.count:
            raise ValueError("per-image rows must match the aggregate count")


def _get(parser: configparser.ConfigParser, section: str, key: str, fallback: str) -> str:
    return parser.get(section, key, fallback=fallback).strip()


def _parse_list(raw: str, convert):
    return tuple(convert(tok.strip()) for tok in raw.split(",") if tok.strip())


def load_config(path) -> ExperimentConfig:
    """Parse an INI-style run description; see the README for the key list."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"config parse error: {exc}") from exc

    try:
        training = TrainingConfig(
            atom_count=int(_get(parser, "dictionary", "atoms", "1024")),
            sparsity=int(_get(parser, "dictionary", "sparsity", "8")),
            sweeps=int(_get(parser, "dictionary", "sweeps", "30")),
            seed=int(_get(parser, "dictionary", "seed", "0")),
            replacement=_get(parser, "dictionary", "replacement", "worst"),
        )
        snr_raw = _get(parser, "noise", "snr_db", "")
        noise = NoiseModel(
            kind=_get(parser, "noise", "kind", "none") or "none",
            snr_db=float(snr_raw) if snr_raw else None,
            seed=int(_get(parser, "noise", "seed", "0")),
        )
        t0_raw = _get(parser, "run", "t0", "")
        cfg = ExperimentConfig(
            train_path=_get(parser, "data", "train", ""),
            test_path=_get(parser, "data", "test", ""),
            train_count=int(_get(parser, "data", "train_count", "2000")),
            train_seed=int(_get(parser, "data", "train_seed", "0")),
            test_count=int(_get(parser, "data", "test_count", "200")),
            test_seed=int(_get(parser, "data", "test_seed", "1")),
            training=training,
            sr_grid=_parse_list(_get(parser, "fields", "sr", ""), float),
            m_grid=_parse_list(_get(parser, "fields", "m", ""), int),
            methods=_parse_list(_get(parser, "fields", "methods", "optimized,gaussian"), str)
            or ("optimized", "gaussian"),
            qbits=int(_get(parser, "fields", "qbits", "0")),
            noise=noise,
            out_dir=_get(parser, "run", "out", ""),
            gaussian_seeds=int(_get(parser, "fields", "gaussian_seeds", "3")),
            field_seed=int(_get(parser, "fields", "seed", "0")),
            recon_sparsity=int(t0_raw) if t0_raw else None,
            dictionary_path=_get(parser, "dictionary", "path", "") or None,
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"config value error: {exc}") from exc
    # default grid: the desk-scale SR sweep
    if not cfg.sr_grid and not cfg.m_grid:
        cfg = dataclasses.replace(cfg, sr_grid=(0.05, 0.10, 0.20, 0.30, 0.51))
    return cfg


def train_dictionary(cfg: ExperimentConfig, out_path) -> Dictionary:
    """Train per config and persist the atoms with their training metadata."""
    cfg.validate()
    if not cfg.train_path:
        raise ValidationError("config: data.train path is required to train")
    data = _subset_or_invalid(cfg.train_path, "train", cfg.train_count, cfg.train_seed)
    log.info(
        "training dictionary: %d signals, %d atoms, T0=%d, %d sweeps",
        len(data), cfg.training.atom_count, cfg.training.sparsity, cfg.training.sweeps,
    )
    start = time.perf_counter()
    dictionary, objectives = ksvd_train(data.as_columns(), cfg.training)
    log.info(
        "trained in %.1f s, objective %.4g -> %.4g",
        time.perf_counter() - start, objectives[0], objectives[-1],
    )
    write_matrix(
        out_path,
        dictionary.atoms,
        meta={
            "role": "dictionary",
            "sparsity": dictionary.sparsity,
            "seed": cfg.training.seed,
            "sweeps": cfg.training.sweeps,
            "train_source": data.source,
            "objective_last": objectives[-1],
        },
    )
    return dictionary


def _subset_or_invalid(path: str, split: str, count: int, seed: int):
    if not Path(path).is_file():
        raise ValidationError(f"{split} dataset not found: {path}")
    try:
        return random_subset(load_idx_images(path, split=split), count, seed)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _load_dictionary(cfg: ExperimentConfig) -> Dictionary:
    if cfg.dictionary_path:
        path = Path(cfg.dictionary_path)
        if not path.is_file():
            raise ValidationError(f"dictionary file not found: {path}")
        meta = read_matrix_meta(path) or {}
        dictionary = Dictionary(
            atoms=read_matrix(path),
            sparsity=int(meta.get("sparsity", cfg.training.sparsity)),
        )
        dictionary.validate()
        return dictionary
    data = _subset_or_invalid(cfg.train_path, "train", cfg.train_count, cfg.train_seed)
    dictionary, _ = ksvd_train(data.as_columns(), cfg.training)
    return dictionary


def _resolve_grid(cfg: ExperimentConfig, state: FieldOptState) -> list[tuple[float, int]]:
    n = state.n_pixels
    if cfg.m_grid:
        grid = [(m / n, m) for m in cfg.m_grid]
    else:
        grid = [(sr, max(1, int(round(sr * n)))) for sr in cfg.sr_grid]
    for _, m in grid:
        if m > state.rank:
            raise ValidationError(
                f"config: M={m} exceeds the dictionary Gram rank {state.rank}"
            )
    return grid


def _noise_for(base: NoiseModel, variant: int, image: int) -> NoiseModel:
    if base.kind == "none":
        return base
    return dataclasses.replace(base, seed=base.seed + 7919 * variant + image)


def _worker_count() -> int:
    raw = os.environ.get("GI_THREADS", "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ValidationError(f"GI_THREADS must be an integer, got {raw!r}") from exc
    return max(1, workers)


def _run_cell(
    method: str,
    sr: float,
    m: int,
    state: FieldOptState,
    psi: Dictionary,
    x_test: np.ndarray,
    cfg: ExperimentConfig,
    workers: int,
) -> ExperimentRecord:
    n_images = x_test.shape[1]
    t0 = cfg.recon_sparsity or psi.sparsity

    # build every field variant for this cell (one optimized, or one per seed)
    build_start = time.perf_counter()
    variants = []
    if method == "optimized":
        phi = nn_lift(optimize_sampling(state, m), state.lift)
        if cfg.qbits:
            phi = quantize_matrix(phi, cfg.qbits)
        variants.append((phi, phi.rows @ psi.atoms))
    else:
        for s in range(cfg.gaussian_seeds):
            raw = gaussian_sampling(m, state.n_pixels, cfg.field_seed + s)
            phi = nn_lift(raw, max(0.0, -float(raw.rows.min())))
            if cfg.qbits:
                phi = quantize_matrix(phi, cfg.qbits)
            variants.append((phi, phi.rows @ psi.atoms))
    build_sec = time.perf_counter() - build_start
    mu = float(np.mean([mutual_coherence(eq) for _, eq in variants]))

    # (variants, images) metric grids
    psnr_grid = np.empty((len(variants), n_images))
    ssim_grid = np.empty_like(psnr_grid)
    mse_grid = np.empty_like(psnr_grid)
    durations = np.empty_like(psnr_grid)

    def one_image(args):
        v_idx, (phi, equivalent), i = args
        x = x_test[:, i]
        y = measure(phi, x, _noise_for(cfg.noise, v_idx, i))
        result = reconstruct(y, phi, psi, t0=t0, equivalent=equivalent)
        return (
            v_idx, i,
            mse(x, result.image), psnr(x, result.image), ssim(x, result.image),
            result.duration_sec,
        )

    tasks = [(v, variant, i) for v, variant in enumerate(variants) for i in range(n_images)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one_image, tasks))
    else:
        outcomes = [one_image(t) for t in tasks]
    for v_idx, i, m_val, p_val, s_val, dur in outcomes:
        mse_grid[v_idx, i] = m_val
        psnr_grid[v_idx, i] = p_val
        ssim_grid[v_idx, i] = s_val
        durations[v_idx, i] = dur

    # pool over field seeds: per-image means, with infinite (exact) PSNRs
    # excluded from the mean and tallied separately
    finite = np.isfinite(psnr_grid)
    pooled_psnr = np.where(
        finite.any(axis=0),
        np.where(finite, psnr_grid, 0.0).sum(axis=0) / np.maximum(finite.sum(axis=0), 1),
        np.inf,
    )
    rows = tuple(
        ImageMetrics(
            index=i,
            mse=float(mse_grid[:, i].mean()),
            psnr=float(pooled_psnr[i]),
            ssim=float(ssim_grid[:, i].mean()),
        )
        for i in range(n_images)
    )
    report = aggregate(
        [r.mse for r in rows], [r.psnr for r in rows], [r.ssim for r in rows]
    )
    record = ExperimentRecord(
        method=method,
        sr=sr,
        m=m,
        qbits=cfg.qbits,
        report=report,
        n_exact=int(np.count_nonzero(~finite)),
        mu=mu,
        build_sec=build_sec,
        recon_sec_mean=float(durations.mean()),
        per_image=rows,
    )
    log.info(
        "%s sr=%.4g M=%d: PSNR %.2f dB, SSIM %.4f, mu %.4f",
        method, sr, m, report.psnr_mean, report.ssim_mean, mu,
    )
    return record


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_results(path: Path, records: list[ExperimentRecord]) -> None:
    lines = [RESULTS_HEADER]
    for r in records:
        q = r.report
        lines.append(
            f"{r.method},{_fmt(r.sr)},{r.m},{r.qbits},{_fmt(q.psnr_mean)},"
            f"{_fmt(q.psnr_std)},{_fmt(q.ssim_mean)},{_fmt(q.ssim_std)},"
            f"{_fmt(r.mu)},{r.n_exact},{_fmt(r.build_sec)},{_fmt(r.recon_sec_mean)}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_per_image(path: Path, records: list[ExperimentRecord]) -> None:
    lines = [PER_IMAGE_HEADER]
    for r in records:
        for row in r.per_image:
            lines.append(
                f"{r.method},{_fmt(r.sr)},{r.m},{r.qbits},{row.index},"
                f"{_fmt(row.mse)},{_fmt(row.psnr)},{_fmt(row.ssim)}"
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def emit_curves(records: list[ExperimentRecord], out_dir) -> list[Path]:
    """Write per-method (sr, psnr_mean) and (sr, ssim_mean) files, sorted by sr."""
    out_dir = Path(out_dir)
    written = []
    for method in dict.fromkeys(r.method for r in records):
        cells = sorted((r for r in records if r.method == method), key=lambda r: r.sr)
        for metric, pick in (("psnr", lambda r: r.report.psnr_mean),
                             ("ssim", lambda r: r.report.ssim_mean)):
            path = out_dir / f"curve_{method}_{metric}.csv"
            lines = [f"sr,{metric}_mean"] + [f"{_fmt(r.sr)},{_fmt(pick(r))}" for r in cells]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
            written.append(path)
        gains = np.diff([c.report.psnr_mean for c in cells])
        if method == "optimized" and len(cells) > 1 and np.any(gains < 0):
            log.warning("optimized PSNR is not monotone over the SR grid: %s",
                        [round(c.report.psnr_mean, 2) for c in cells])
    return written


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Execute the full sweep described by ``cfg`` and write all outputs.

    Returns the records in (method, grid) order. The ``_DONE`` marker is
    written only after every file is flushed, so its absence flags a
    partial run.
    """
    cfg.validate()
    workers = _worker_count()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / DONE_MARKER
    if marker.exists():
        marker.unlink()

    psi = _load_dictionary(cfg)
    state = build_state(psi)
    grid = _resolve_grid(cfg, state)
    test = _subset_or_invalid(cfg.test_path, "test", cfg.test_count, cfg.test_seed)
    if test.pixels_per_image != psi.n_pixels:
        raise ValidationError(
            f"test images have {test.pixels_per_image} pixels, dictionary has {psi.n_pixels}"
        )
    x_test = test.as_columns()

    records = [
        _run_cell(method, sr, m, state, psi, x_test, cfg, workers)
        for method in cfg.methods
        for sr, m in grid
    ]

    _write_results(out / "results.csv", records)
    _write_per_image(out / "per_image.csv", records)
    emit_curves(records, out)
    marker.touch()
    return records
