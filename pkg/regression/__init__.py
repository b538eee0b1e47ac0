from regression.weighted_ols import (
    Dataset,
    RegressionState,
    as_weights,
    cross_leverages,
    downdate_remove_point,
    hat_matrix,
    reweight_point,
    support,
    weighted_ols,
)
from regression.goodness import GoodnessParams, GoodnessReport, check_goodness
from regression.divergence import psd_distance
