"""Command-line front end.

Subcommands: encode, decode, sweep, metrics, distance, labels.  Exit code 0
means success; failures exit with the category code of the raised error
(see pdcodec.errors and the README table).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import chain as chain_ops
from .clustering import build_merge_chain, elbow_select_k, kmeans_palette
from .container import DecodedImage, decode_container, encode_container
from .errors import CodecError, ConfigError, InsufficientDataError, InvalidInputError
from .fileio import read_ften, read_image, write_ften, write_image
from .metrics import compute_psnr, compute_ssim
from .perceptual import (
    dft2_magnitude,
    extract_patches,
    generate_pseudo_labels,
    perceptual_similarity,
)
from .sweep import parse_sweep_config, run_sweep
from .tensor import (
    MODE_FIXED,
    MODE_MINMAX,
    FeatureTensor,
    QuantizedTensor,
    QuantizerConfig,
    dequantize,
    quantize,
)


def _load_for_coding(path: str, quantizer: str | None):
    """Source tensor + quantizer cfg for the encode path."""
    if path.endswith(".ften"):
        z = read_ften(path)
        mode = quantizer or MODE_MINMAX
        cfg = QuantizerConfig.fixed() if mode == MODE_FIXED else QuantizerConfig.minmax_from(z)
        return quantize(z, cfg), cfg
    if quantizer == MODE_MINMAX:
        raise ConfigError("minmax quantization applies to .ften inputs; images are already 8-bit")
    return read_image(path), QuantizerConfig.fixed()


def _cmd_encode(args) -> int:
    source_q, cfg = _load_for_coding(args.input, args.quantizer)
    palette, index_map = kmeans_palette(
        source_q, args.k0, seed=args.seed, single_pass=args.single_pass_kmeans
    )
    chain = build_merge_chain(palette, index_map)
    blob = encode_container(chain, args.t, cfg).to_bytes()
    Path(args.out).write_bytes(blob)
    print(f"wrote {args.out}: {len(blob)} bytes, K_t={args.k0 - args.t}")
    return 0


def _reverse_with_estimate(decoded: DecodedImage, estimate_path: str, mode: str) -> np.ndarray:
    """Reverse recursion against a chain rebuilt from a supplied z0 estimate.

    The bitstream carries no merge history, so the degradation operator is
    reconstructed by clustering the estimate itself (at the header's K0) and
    the transition equations run against that chain in quantized space.
    """
    header = decoded.header
    estimate = read_ften(estimate_path)
    if estimate.shape != (header.height, header.width, header.channels):
        raise InvalidInputError(
            f"estimate shape {estimate.shape} does not match the container "
            f"({header.height}, {header.width}, {header.channels})"
        )
    est_q = quantize(estimate, header.quantizer)
    palette, index_map = kmeans_palette(est_q, header.k0, seed=0)
    est_chain = build_merge_chain(palette, index_map)
    restorer = chain_ops.OracleRestorer(est_q.as_float())
    z = decoded.render_quantized().data.astype(np.float64)
    for t in range(decoded.severity, 0, -1):
        z = chain_ops.reverse_step(est_chain, FeatureTensor(z), t, restorer, mode).data
    return z


def _cmd_decode(args) -> int:
    decoded = decode_container(Path(args.in_path).read_bytes())
    if args.restorer is None or args.restorer in ("identity", "nearest"):
        # Without transmitted merge history these restorers telescope to the
        # plain rendering; see the README's reverse-process notes.
        values_q = decoded.render_quantized().data.astype(np.float64)
    elif args.restorer.startswith("oracle:"):
        values_q = _reverse_with_estimate(
            decoded, args.restorer.split(":", 1)[1], args.mode
        )
    else:
        raise ConfigError(f"unknown restorer {args.restorer!r}")

    out_q = QuantizedTensor(np.clip(np.round(values_q), 0, 255).astype(np.uint8))
    if args.out.endswith(".ften"):
        write_ften(args.out, dequantize(out_q, decoded.header.quantizer))
    else:
        write_image(args.out, out_q)
    print(f"wrote {args.out}: severity {decoded.severity}, K_t={decoded.header.k_t}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = parse_sweep_config(args.config)
    if args.out is not None:
        cfg.out_csv = args.out
    points = run_sweep(cfg)
    print(f"wrote {cfg.out_csv}: {len(points)} RD points" if cfg.out_csv else f"{len(points)} RD points")
    return 0


def _quantized_pair(ref_path: str, test_path: str):
    if ref_path.endswith(".ften") != test_path.endswith(".ften"):
        raise ConfigError("metrics needs two images or two .ften tensors, not a mix")
    if ref_path.endswith(".ften"):
        ref = read_ften(ref_path)
        cfg = QuantizerConfig.minmax_from(ref)  # shared grid, fitted to the reference
        return quantize(ref, cfg), quantize(read_ften(test_path), cfg)
    return read_image(ref_path), read_image(test_path)


def _cmd_metrics(args) -> int:
    ref_q, test_q = _quantized_pair(args.ref, args.test)
    psnr = compute_psnr(ref_q, test_q)
    ssim = compute_ssim(ref_q, test_q)
    print(f"psnr_db={psnr.db:.6f} identical={str(psnr.identical).lower()}")
    print(f"ssim={ssim:.6f}")
    return 0


def _cmd_distance(args) -> int:
    # comma-separated paths act as stacked feature layers
    layers_a = [dft2_magnitude(read_ften(p)) for p in args.a.split(",")]
    layers_b = [dft2_magnitude(read_ften(p)) for p in args.b.split(",")]
    s = perceptual_similarity(layers_a, layers_b)
    print(f"distance={1.0 - s:.9f} similarity={s:.9f}")
    return 0


def _cmd_labels(args) -> int:
    source = read_image(args.input)
    patches = extract_patches(source.as_float(), args.patch)
    if args.k == "elbow":
        upper = min(8, len(patches))
        if upper < 3:
            raise InsufficientDataError(
                f"elbow selection needs >= 3 candidate K values, have {len(patches)} patches"
            )
        curve = []
        for k in range(1, upper + 1):
            try:
                curve.append((k, generate_pseudo_labels(patches, k, seed=args.seed).sse))
            except CodecError:
                break  # fewer distinct spectra than k; the curve ends here
        choice = elbow_select_k(curve)
        k = choice.k
        print(f"k={k} knee_found={str(choice.knee_found).lower()}")
    else:
        k = int(args.k)
        print(f"k={k}")
    labels = generate_pseudo_labels(patches, k, seed=args.seed)
    cols = source.width // args.patch
    for i, label in enumerate(labels.labels):
        print(f"patch={i} row={i // cols} col={i % cols} label={int(label)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdcodec",
        description="Scalable palette-chain codec: encode/decode .pdc containers, "
        "sweep rate-distortion curves, and evaluate spectral perceptual distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode an image or tensor into a .pdc container")
    p.add_argument("--input", required=True, help="source .png or .ften")
    p.add_argument("--k0", type=int, required=True, help="base palette size")
    p.add_argument("--t", type=int, required=True, help="severity (number of merges)")
    p.add_argument("--out", required=True, help="output .pdc path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quantizer", choices=[MODE_FIXED, MODE_MINMAX], default=None)
    p.add_argument("--single-pass-kmeans", action="store_true")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="decode a .pdc container")
    p.add_argument("--in", dest="in_path", required=True, help="input .pdc path")
    p.add_argument("--out", required=True, help="output .png or .ften")
    p.add_argument("--restorer", default=None, help="identity | nearest | oracle:<ften>")
    p.add_argument("--mode", choices=["hc", "nc"], default="nc")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("sweep", help="rate-distortion sweep over severities")
    p.add_argument("--config", required=True, help="key=value sweep description file")
    p.add_argument("--out", default=None, help="output CSV (overrides the config's out=)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("metrics", help="PSNR/SSIM between two files")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("distance", help="spectral perceptual distance between two tensors")
    p.add_argument("--a", required=True, help="first .ften (comma-separate for multi-layer)")
    p.add_argument("--b", required=True, help="second .ften (comma-separate for multi-layer)")
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("labels", help="pseudo-label image patches by spectral similarity")
    p.add_argument("--input", required=True, help="source .png")
    p.add_argument("--patch", type=int, required=True, help="patch side length")
    p.add_argument("--k", required=True, help="cluster count, or 'elbow'")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_labels)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CodecError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error[FileNotFound]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
