"""Binary (one-bit) homodyne detection of quadrature squeezing.

Bayesian discrimination of a coherent and a squeezed hypothesis from sign-only
homodyne outcomes, the non-discretized homodyne baseline, and the sample
budget for lossy satellite links.
"""

from .exceptions import BHDError, ConvergenceError, SampleFormatError, ValidationError
from .ideal import (
    VarianceStatistic,
    ideal_avg_posterior,
    ideal_error_prob,
    ideal_map_decide,
    ideal_success,
    overhead_ratio,
    variance_likelihood,
    variance_posterior,
)
from .link import LinkScenario, acquisition_time, effective_hypotheses, error_curve, required_samples
from .multicopy import (
    DecisionPolicy,
    OutcomeCount,
    count_posterior,
    error_probability,
    log_outcome_distribution,
    multicopy_posterior,
    multicopy_success,
    optimize_multicopy_posterior,
    optimize_multicopy_success,
    outcome_distribution,
    sequence_posterior,
)
from .samples import SampleSet, binarize, generate_samples, ingest, posterior_trace, write_samples
from .single import (
    BinaryOutcome,
    delta_pi,
    optimal_displacement_success,
    optimize_single_posterior,
    p_plus,
    single_posterior,
    single_success,
)
from .states import Hypothesis, QuadratureModel, apply_loss, variance_of_r, variance_to_db

__version__ = "0.1.0"
