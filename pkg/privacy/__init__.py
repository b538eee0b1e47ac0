from privacy.mechanisms import (
    PrivacyParams,
    PtrOutcome,
    ptr_check,
    ptr_fail_probability,
    sample_shaped_gaussian,
    truncated_laplace,
)
from privacy.histogram import HistogramRelease, stable_histogram
