"""Online calibrated prediction sets over competing forecasting models.

Feed a growing time-by-model loss matrix; get, at every step, a set of
candidate models guaranteed to contain next period's empirically best
model at a user-chosen long-run rate, even when the stream is
nonstationary.
"""
from .calibrate import (
    CalibratorState,
    MpsConfig,
    alpha_cost,
    alpha_optimize,
    gate_alpha,
    grid_from_step,
    lambda_update,
    push_beta,
)
from .engine import (
    EngineState,
    StepRecord,
    offline_init,
    online_step,
    read_step_log,
    run,
    write_step_log,
)
from .losses import LossMatrix, append_row, best_model, ingest_csv, write_csv
from .mcs import (
    BootstrapPlan,
    ModelSetFamily,
    beta_realized,
    block_bootstrap_indices,
    default_block_len,
    family_for_prefix,
    mcs_pvalues,
    model_set,
)
from .report import (
    ReportRow,
    build_report,
    loss_ranges,
    moving_miscoverage,
    quality_sets,
    write_report,
)
from .simulate import (
    ArmaSpec,
    DesignSpec,
    arma_experiment_losses,
    fit_ar,
    fit_ma,
    gen_arma_series,
    gen_design,
)

__version__ = "0.1.0"
