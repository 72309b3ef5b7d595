"""Light field view sub-sampling, compression, and RD evaluation toolkit."""

from .color import luma_plane, rgb_to_yuv420, yuv420_to_rgb
from .container import (
    CodecConfig,
    ContainerFormatError,
    EncodedLightField,
    decode_lightfield,
    encode_lightfield,
    parse,
    rate_bits,
    serialize,
)
from .core import LightField, ViewIndex, YuvFrame, load_lightfield, save_views, view_at
from .frame_codec import BitstreamError, decode_internal_frame, encode_internal_frame
from .metrics import (
    BdResult,
    RdCurve,
    RdPoint,
    bd_metrics,
    bpp,
    evaluate,
    per_view_stats,
    psnr,
    ssim,
)
from .pipeline import PipelineConfig, gen_synthetic, report_bd, run_pipeline
from .sampling import (
    PATTERN_NAMES,
    SampledLightField,
    SamplingMask,
    SamplingPattern,
    apply_pattern,
    make_mask,
    missing_views,
    snake_order,
)
from .synthesis import (
    BilinearSynthesizer,
    ExternalSynthesizer,
    ReconstructionPlan,
    Synthesizer,
    bilinear_synthesize,
    build_plan,
    make_synthesizer,
    reconstruct,
)

__version__ = "0.1.0"
