"""t-level auctions: construction, simulation, learning, and capacity probes."""

from .distributions import (
    DistributionError, Empirical, PiecewiseLinearCdf, ProductPrior,
    TruncatedExponential, Uniform, ValuationDistribution, VirtualValueCurve,
    check_mhr, dist_from_spec, inverse_virtual, iron, prior_from_spec,
    sample_profile, sample_profiles, virtual_value,
)
from .errors import ConfigError, GuardError
from .feasibility import (
    Environment, FeasibilityError, MatroidSpec, env_from_spec, greedy_by_order,
    is_feasible, max_weight_feasible, verify_exchange_property,
)
from .learner import (
    LearnerConfig, SampleSet, empirical_revenue, erm, generalization_gap,
    sample_size_bound,
)
from .levels import (
    LevelConstructionParams, MhrAnchor, build_bounded, build_matroid_levels,
    build_mhr, build_phi_grid, estimate_anchor, solve_epsilon_prime,
)
from .mechanisms import (
    Outcome, TLevelAuction, batch_revenue, level_of, myerson_expected_revenue,
    run_auction, run_general, run_matroid, run_myerson, run_single_item,
    truncated_revenue,
)
from .montecarlo import evaluate
from .shattering import (
    ShatterInstance, build_threshold_universe, count_labelings, is_shatterable,
    labeling_ceiling, pseudo_dim_lower_bound, revenue_labeling,
)

__version__ = "0.1.0"
