"""High-dimensional independence testing with maximum marginal distance
correlation.

The statistic is the largest unbiased distance correlation over all pairs
(column of X, column of Y); p-values come from permutations or from a
closed-form chi-square bound.
"""
__version__ = "0.1.0"

from .dcor import (
    DcorResult,
    fast_univariate_dcor,
    pairwise_distances,
    u_center,
    unbiased_dcor,
    unbiased_dcov,
)
from .errors import (
    DegenerateSample,
    InvalidData,
    InvalidGrid,
    InvalidParameter,
    MaxMarginalError,
    SampleTooSmall,
    ShapeMismatch,
)
from .inference import (
    TestOutcome,
    chisq_avg_pvalue,
    chisq_cdf,
    chisq_full_pvalue,
    chisq_max_pvalue,
    chisquare_test,
    permutation_test,
    run_test,
)
from .marginal import (
    Aggregate,
    MarginalGrid,
    MarginalStatistic,
    UnbiasedDcor,
    avg_marginal,
    marginal_grid,
    max_marginal,
)
from .power import (
    Panel,
    PowerCurve,
    PowerPoint,
    StudyConfig,
    estimate_power,
    power_study,
    preset,
)
from .simgen import (
    PairedSample,
    Scenario,
    gen_fixed_dep,
    gen_increasing_dep,
    sum_diagnostic,
    uniform_stream,
    weight_vector,
)
