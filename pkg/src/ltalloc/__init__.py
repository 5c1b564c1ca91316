"""Long-horizon stock allocation with a mean-reverting Sharpe ratio."""

from .aggregation import (
    ContinuousParams,
    XDistribution,
    exact_moments,
    recover_continuous,
    x_distribution,
    x_percentile,
    x_to_z,
    z_to_x,
)
from .closed_form import (
    AllocationDecomposition,
    NormalSolutionCoefficients,
    Preferences,
    allocation,
    c1_at,
    c2_at,
    constrained_allocation,
    riccati_coefficients,
    sweep,
)
from .errors import (
    BudgetExceeded,
    DegenerateDistribution,
    InvalidParams,
    ModelError,
    NonNormalRegime,
    NonPositiveCount,
    NonPositiveWealth,
    SingularDenominator,
)
from .strategy_search import GridStrategy, SearchResult, exhaustive_search
from .var_kernel import BRANDT_PARAMS, DiscreteVarParams, PathBatch, simulate_paths, validate

__version__ = "0.1.0"
