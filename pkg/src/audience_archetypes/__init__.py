"""Audience archetypes from referral x content view counts via NMF."""
from .errors import (
    ArchetypeError,
    BadComponent,
    BadDimensions,
    BadValue,
    EmptyInput,
    EmptyMatrix,
    InputFormatError,
    LabelMismatch,
    MissingColumn,
    NumericalError,
    RankTooLarge,
    ShapeError,
    TooManyComponents,
)
from .ingest import (
    CHANNELS,
    ChannelClass,
    IngestConfig,
    ViewRecord,
    ViewershipMatrix,
    build_matrix,
    classify_channel,
    load_config,
    parse_log,
)
from .nmf import (
    FactorizationConfig,
    FactorizationResult,
    compute_residual,
    factorize,
    init_factors,
    normalize_factors,
    update_step,
)
from .personas import (
    Persona,
    align_components,
    extract_personas,
    label_components,
    top_referrals,
    top_video_types,
)
from .report import (
    ChannelSummary,
    HeatmapData,
    heatmap_csv,
    heatmap_data,
    personas_report,
    render_svg,
    summarize_channels,
)
from .synth import PlantedModel, emit_log, gen_planted_factors, ingest_config_for, sample_views

__version__ = "0.1.0"
