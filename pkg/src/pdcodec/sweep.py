"""Rate-distortion sweeps over the severity axis.

One sweep encodes each input at every requested severity, decodes it back,
optionally runs the reverse recursion with a chosen restorer, and measures
(bpp, PSNR, SSIM, SSE) against the quantized source.  Results land in a CSV
with the columns ``input,t,K,bpp,psnr_db,ssim,sse``; a failing input emits
one row with empty metric fields and the sweep carries on.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import chain as chain_ops
from .clustering import build_merge_chain, kmeans_palette
from .container import decode_container, encode_container
from .errors import CodecError, ConfigError
from .fileio import read_ften, read_image
from .metrics import compute_bpp, compute_psnr, compute_ssim
from .tensor import (
    MODE_FIXED,
    MODE_MINMAX,
    QuantizedTensor,
    QuantizerConfig,
    quantize,
)

CSV_COLUMNS = ("input", "t", "K", "bpp", "psnr_db", "ssim", "sse")


@dataclass
class SweepConfig:
    inputs: list[str]
    k0: int
    severities: list[int] | None = None  # None = the full range 0 .. K0-1
    quantizer: str = MODE_MINMAX  # applied to .ften inputs; .png is always fixed
    restorer: str = "none"  # none | identity | nearest | oracle | oracle:<ften>
    mode: str = "nearest-centroid"
    out_csv: str | None = None
    seed: int = 0
    max_iters: int = 100
    single_pass: bool = False
    source_width: int | None = None  # bpp denominator override for latent stand-ins
    source_height: int | None = None

    def __post_init__(self):
        if not self.inputs:
            raise ConfigError("sweep needs at least one input")
        if self.k0 < 1:
            raise ConfigError(f"k0 must be >= 1, got {self.k0}")
        if self.severities is not None:
            for t in self.severities:
                if not 0 <= t <= self.k0 - 1:
                    raise ConfigError(f"severity {t} outside [0, {self.k0 - 1}]")
            # canonical ascending order: results never depend on listing order
            self.severities = sorted(set(self.severities))
        if self.quantizer not in (MODE_FIXED, MODE_MINMAX):
            raise ConfigError(f"unknown quantizer {self.quantizer!r}")


@dataclass(frozen=True)
class RDPoint:
    """One (severity, rate, distortion) measurement."""

    input: str
    t: int
    k: int
    bpp: float
    psnr_db: float
    ssim: float
    sse: float


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    try:
        return int(raw)
    except ValueError:
        return raw


def parse_sweep_config(path: str | Path) -> SweepConfig:
    """Parse a key=value sweep description file.

    Recognized keys: ``inputs`` (comma-separated paths), ``k0``,
    ``severities`` (comma-separated ints or ``all``), ``quantizer``,
    ``restorer``, ``mode``, ``out``, ``seed``, ``max_iters``,
    ``single_pass``, ``source_width``, ``source_height``.  Lines starting
    with ``#`` are comments.
    """
    values: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key == "inputs":
            values["inputs"] = [p.strip() for p in raw.split(",") if p.strip()]
        elif key == "severities":
            raw = raw.strip()
            values["severities"] = (
                None if raw == "all" else [int(p) for p in raw.split(",") if p.strip()]
            )
        elif key == "out":
            values["out_csv"] = raw.strip()
        elif key in (
            "k0", "seed", "max_iters", "single_pass", "quantizer",
            "restorer", "mode", "source_width", "source_height",
        ):
            values[key] = _parse_value(raw)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if "inputs" not in values or "k0" not in values:
        raise ConfigError(f"{path}: 'inputs' and 'k0' are required")
    return SweepConfig(**values)


def _load_source(path: str, quantizer: str) -> tuple[QuantizedTensor, QuantizerConfig]:
    if path.endswith(".ften"):
        z = read_ften(path)
        cfg = QuantizerConfig.fixed() if quantizer == MODE_FIXED else QuantizerConfig.minmax_from(z)
        return quantize(z, cfg), cfg
    return read_image(path), QuantizerConfig.fixed()


def _make_restorer(
    spec: str, chain, source_q: QuantizedTensor, cfg: QuantizerConfig
) -> chain_ops.Restorer | None:
    if spec == "none":
        return None
    if spec == "identity":
        return chain_ops.IdentityRestorer()
    if spec == "nearest":
        return chain_ops.NearestCentroidRestorer(chain)
    if spec == "oracle":
        return chain_ops.OracleRestorer(source_q.as_float())
    if spec.startswith("oracle:"):
        target = read_ften(spec.split(":", 1)[1])
        return chain_ops.OracleRestorer(quantize(target, cfg).as_float())
    raise ConfigError(f"unknown restorer {spec!r}")


def _measure(
    cfg: SweepConfig, path: str, source_q: QuantizedTensor, qcfg: QuantizerConfig
) -> list[RDPoint]:
    palette, index_map = kmeans_palette(
        source_q,
        cfg.k0,
        seed=cfg.seed,
        max_iters=cfg.max_iters,
        single_pass=cfg.single_pass,
    )
    chain = build_merge_chain(palette, index_map)
    restorer = _make_restorer(cfg.restorer, chain, source_q, qcfg)

    severities = cfg.severities if cfg.severities is not None else list(range(cfg.k0))
    src_w = cfg.source_width or source_q.width
    src_h = cfg.source_height or source_q.height
    source_f = source_q.data.astype(np.float64)

    points = []
    for t in severities:
        blob = encode_container(chain, t, qcfg).to_bytes()
        decoded = decode_container(blob)
        if restorer is None:
            recon = decoded.render_quantized().data.astype(np.float64)
        else:
            state = decoded.as_state(chain)
            recon = chain_ops.reverse_run(chain, state, restorer, cfg.mode).data
        recon_q = QuantizedTensor(np.clip(np.round(recon), 0, 255).astype(np.uint8))
        psnr = compute_psnr(source_q, recon_q)
        ssim = compute_ssim(source_q, recon_q)
        sse = float(((source_f - recon) ** 2).sum())
        points.append(
            RDPoint(
                input=path,
                t=t,
                k=cfg.k0 - t,
                bpp=compute_bpp(len(blob), src_w, src_h),
                psnr_db=psnr.db,
                ssim=ssim,
                sse=sse,
            )
        )
    return points


def run_sweep(cfg: SweepConfig) -> list[RDPoint]:
    """Run the sweep; returns RD points ordered by (input, t).

    When ``cfg.out_csv`` is set the same rows are written there.  A failing
    input contributes an all-empty metrics row to the CSV (and a warning)
    instead of aborting the sweep.
    """
    points: list[RDPoint] = []
    failures: list[str] = []
    for path in sorted(cfg.inputs):
        try:
            source_q, qcfg = _load_source(path, cfg.quantizer)
            points.extend(_measure(cfg, path, source_q, qcfg))
        except (CodecError, FileNotFoundError) as exc:
            warnings.warn(f"{path}: {exc}", stacklevel=2)
            failures.append(path)
    points.sort(key=lambda p: (p.input, p.t))

    if cfg.out_csv is not None:
        with open(cfg.out_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for p in points:
                writer.writerow(
                    [p.input, p.t, p.k, repr(p.bpp), repr(p.psnr_db), repr(p.ssim), repr(p.sse)]
                )
            for path in sorted(failures):
                writer.writerow([path, "", "", "", "", "", ""])
    return points
