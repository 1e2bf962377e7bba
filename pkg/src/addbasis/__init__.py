"""Random k-additive bases: sampling models, bit-vector sumset kernels, exact
and asymptotic analytics, a pair-resampling coupling, and a Monte Carlo
experiment harness."""

from .analytics import (
    PoissonModel,
    PsiTail,
    SteinChenDiagnostics,
    asympt_mean_missing,
    exact_mean_missing_k2,
    exact_missing_prob_k2,
    janson_lower_missing_prob,
    psi_tail,
    stein_chen_diagnostics,
)
from .counting import QBinomial, TupleCounts, count_by_distinct, count_sumtuples, gaussian_binomial
from .coupling import (
    CouplingOutcome,
    conditional_law_exact,
    couple_given_missing,
    coupling_tv_check,
)
from .errors import (
    AddBasisError,
    EnumerationLimitError,
    ResourceLimitError,
    ThresholdRangeError,
    ValidationError,
)
from .experiments import (
    SweepPoint,
    SweepRow,
    TrialStats,
    estimate_basis_prob,
    run_trials,
    sweep,
    tv_empirical_poisson,
)
from .model import (
    Bernoulli,
    FixedSize,
    GroundSet,
    Mode,
    Model,
    SampledSet,
    ThresholdSpec,
    limit_basis_prob,
    make_model,
    sample_bernoulli,
    sample_fixed_size,
    sample_set,
    threshold_constant,
    threshold_p,
    threshold_spec,
    window_bounds,
)
from .sumset import (
    MissingReport,
    SumBitmap,
    is_basis,
    kfold_modular_sumset,
    kfold_sumset,
    missing_in_window,
)

__version__ = "0.1.0"
