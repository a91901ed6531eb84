"""pdcodec: scalable image/feature compression over content-adaptive palette chains.

The pipeline: quantize a tensor to uint8, build a content-adaptive palette
by k-means, agglomerate it into a hierarchical merge chain, pick a severity
t (palette size K0 - t), and ship (t, palette, Huffman-coded indices) in a
self-contained .pdc container.  Reconstruction can replay the reverse
recursion with a pluggable restoration operator.  Spectral perceptual
tooling and a rate-distortion harness round out the library.
"""

from .chain import (
    MODE_HIERARCHY,
    MODE_NEAREST,
    DegradedState,
    FileRestorer,
    IdentityRestorer,
    NearestCentroidRestorer,
    OracleRestorer,
    Restorer,
    degrade,
    degrade_step,
    project,
    render_values,
    reverse_run,
    reverse_step,
)
from .clustering import (
    ElbowResult,
    IndexMap,
    MergeStep,
    Palette,
    PaletteChain,
    assignment_sse,
    build_merge_chain,
    elbow_select_k,
    kmeans_palette,
)
from .container import (
    BitstreamHeader,
    DecodedImage,
    EncodedImage,
    decode_container,
    encode_container,
)
from .errors import (
    CodecError,
    CodingError,
    ConfigError,
    ConsistencyError,
    CorruptionError,
    DegenerateInputError,
    FormatError,
    InfeasibleError,
    InsufficientDataError,
    InvalidInputError,
    RangeError,
    TruncationError,
)
from .fileio import read_ften, read_image, write_ften, write_image
from .huffman import HuffmanTable, huffman_build, huffman_decode, huffman_encode
from .metrics import PsnrResult, compute_bpp, compute_psnr, compute_ssim
from .perceptual import (
    ContrastiveBatch,
    PseudoLabelSet,
    SpectrumMatrix,
    dft2_magnitude,
    extract_patches,
    generate_pseudo_labels,
    info_nce,
    perceptual_distance,
    perceptual_similarity,
)
from .sweep import RDPoint, SweepConfig, parse_sweep_config, run_sweep
from .tensor import (
    FeatureTensor,
    QuantizedTensor,
    QuantizerConfig,
    dequantize,
    quantize,
)

__version__ = "0.1.0"

__all__ = [
    "BitstreamHeader",
    "CodecError",
    "CodingError",
    "ConfigError",
    "ConsistencyError",
    "ContrastiveBatch",
    "CorruptionError",
    "DecodedImage",
    "DegenerateInputError",
    "DegradedState",
    "ElbowResult",
    "EncodedImage",
    "FeatureTensor",
    "FileRestorer",
    "FormatError",
    "HuffmanTable",
    "IdentityRestorer",
    "IndexMap",
    "InfeasibleError",
    "InsufficientDataError",
    "InvalidInputError",
    "MergeStep",
    "MODE_HIERARCHY",
    "MODE_NEAREST",
    "NearestCentroidRestorer",
    "OracleRestorer",
    "Palette",
    "PaletteChain",
    "PseudoLabelSet",
    "PsnrResult",
    "QuantizedTensor",
    "QuantizerConfig",
    "RangeError",
    "RDPoint",
    "Restorer",
    "SpectrumMatrix",
    "SweepConfig",
    "TruncationError",
    "assignment_sse",
    "build_merge_chain",
    "compute_bpp",
    "compute_psnr",
    "compute_ssim",
    "decode_container",
    "degrade",
    "degrade_step",
    "dequantize",
    "dft2_magnitude",
    "elbow_select_k",
    "encode_container",
    "extract_patches",
    "generate_pseudo_labels",
    "huffman_build",
    "huffman_decode",
    "huffman_encode",
    "info_nce",
    "kmeans_palette",
    "parse_sweep_config",
    "perceptual_distance",
    "perceptual_similarity",
    "project",
    "quantize",
    "read_ften",
    "read_image",
    "render_values",
    "reverse_run",
    "reverse_step",
    "run_sweep",
    "write_ften",
    "write_image",
]
