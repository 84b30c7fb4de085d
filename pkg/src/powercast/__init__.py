"""Next-hour household power forecasting with warnings, savings and explanations."""

__version__ = "0.1.0"

from .decision import (  # noqa: F401
    BaselineTable,
    DecisionRecord,
    SavingsReport,
    build_baseline,
    cost_saving,
    decide,
    run_window,
)
from .explain import (  # noqa: F401
    DataAnnotation,
    ExplanationAnswer,
    ModelAnnotation,
    annotate_data,
    annotate_model,
    answer,
)
from .ingest import (  # noqa: F401
    IngestError,
    IngestSummary,
    MinuteRecord,
    load_dataset,
    parse_minute_record,
)
from .model import (  # noqa: F401
    ModelConfig,
    ModelState,
    TrainReport,
    adam_step,
    init_state,
    lstm_backward,
    lstm_forward,
    make_sequences,
    predict_series,
    train,
)
from .preprocess import (  # noqa: F401
    HourlyRecord,
    NormalizationParams,
    SplitSpec,
    fit_minmax,
    impute_missing,
    inverse_scale,
    resample_hourly,
    scale,
    split_chronological,
)
from .store import StoreLayout, load_checkpoint, save_checkpoint  # noqa: F401
