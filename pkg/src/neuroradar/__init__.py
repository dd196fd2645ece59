"""Event-driven radar gesture recognition at desk scale.

Synthesizes CW Doppler IF signals from parametric hand motion, encodes
them into sparse +-1 events by asynchronous sigma-delta level-crossing
sampling, classifies five gestures with a <=4 KB quantized MLP, accounts
the savings against a dense ADC/FFT pipeline, and hosts a live demo
where pointer motion drives a mock media player.
"""

from .baseline import (
    AdcConfig,
    ComparisonReport,
    DopplerMap,
    adc_sample,
    classify_dense,
    compare_pipelines,
    packed_event_bytes,
    pool_doppler_map,
    spectrogram,
)
from .encoder import (
    DEFAULT_DELTA,
    Encoder,
    EncoderConfig,
    EncoderMode,
    EventRecord,
    EventStream,
    encode,
    event_stats,
    reconstruct,
)
from .errors import (
    AliasingError,
    ConfigError,
    ContractError,
    EncodingError,
    FormatError,
    InsufficientDataError,
    NeuroradarError,
    QuantizationQualityError,
    SizeBudgetError,
    TrainingDivergedError,
    ValidationError,
)
from .eventfile import read_stream, write_stream
from .gestures import (
    GestureClass,
    GestureParams,
    RadarConfig,
    SampledSignal,
    Trajectory,
    doppler_frequency,
    gesture_trajectory,
    synthesize_if,
)
from .model import (
    FloatModel,
    ModelSpec,
    QuantModel,
    TrainConfig,
    forward,
    infer,
    init_model,
    load_model,
    quantize,
    save_model,
    train,
)
from .pipeline import (
    EventWindow,
    GateConfig,
    activity_gate,
    featurize,
    slice_windows,
)

__version__ = "0.1.0"
