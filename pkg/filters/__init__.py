from filters.leverage_filter import LeverageFilterOutcome, leverage_ladder, stable_leverage_filtering
from filters.residual_filter import (
    ResidualFilterOutcome,
    residual_ladder,
    residual_thresholding,
    stable_residual_filtering,
    stable_residual_filtering_fast,
)
