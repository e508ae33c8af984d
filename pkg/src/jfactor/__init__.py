"""JPEG degradation modeling, blind quality-factor estimation, and metrics."""

__version__ = "0.1.0"

from .codec import (
    BASE_CHROMA_TABLE,
    BASE_LUMA_TABLE,
    CodecConfig,
    QuantTable,
    blockify,
    deblockify,
    dequantize_block,
    fdct8x8,
    idct8x8,
    jpeg_roundtrip,
    quant_table_from_qf,
    quantize_block,
    validate_qf,
)
from .degrade import (
    DegradationRecipe,
    Shift,
    apply_recipe,
    classify_double_regime,
    degrade_double,
    degrade_single,
    shift_crop,
)
from .errors import ValidationError
from .estimate import (
    CurveMinimum,
    MseCurve,
    QfEstimate,
    ShiftDiagnostic,
    estimate_dominant_qf,
    estimate_from_curves,
    estimate_single_qf,
    find_first_minimum,
    format_curve_dump,
    recompression_mse_curve,
    shift_sweep_curves,
)
from .image import PixelImage, load_image, save_png, to_luma
from .metrics import (
    MetricReport,
    blocking_effect_factor,
    metric_report,
    mse,
    psnr,
    psnr_b,
    ssim,
)
from .synth import (
    Manifest,
    SynthConfig,
    entry_rng,
    entry_seed,
    extract_patches,
    iter_entry_shifts,
    parse_shift_policy,
    read_manifest,
    replay,
    synthesize_dataset,
    write_manifest,
)

__all__ = [
    "BASE_CHROMA_TABLE",
    "BASE_LUMA_TABLE",
    "CodecConfig",
    "CurveMinimum",
    "DegradationRecipe",
    "Manifest",
    "MetricReport",
    "MseCurve",
    "PixelImage",
    "QfEstimate",
    "QuantTable",
    "Shift",
    "ShiftDiagnostic",
    "SynthConfig",
    "ValidationError",
    "apply_recipe",
    "blockify",
    "blocking_effect_factor",
    "classify_double_regime",
    "deblockify",
    "degrade_double",
    "degrade_single",
    "dequantize_block",
    "entry_rng",
    "entry_seed",
    "estimate_dominant_qf",
    "estimate_from_curves",
    "estimate_single_qf",
    "extract_patches",
    "fdct8x8",
    "find_first_minimum",
    "format_curve_dump",
    "idct8x8",
    "iter_entry_shifts",
    "jpeg_roundtrip",
    "load_image",
    "metric_report",
    "mse",
    "parse_shift_policy",
    "psnr",
    "psnr_b",
    "quant_table_from_qf",
    "quantize_block",
    "read_manifest",
    "recompression_mse_curve",
    "replay",
    "save_png",
    "shift_crop",
    "shift_sweep_curves",
    "ssim",
    "synthesize_dataset",
    "to_luma",
    "validate_qf",
    "write_manifest",
]
