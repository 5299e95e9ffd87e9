"""One-bit distributed mean estimation for scale-location families."""

__version__ = "0.1.0"

from .densities import (  # noqa: E402
    GGD,
    BaseDensity,
    HyperbolicSecant,
    Logistic,
    ScaleLocationModel,
    Sin2Custom,
    make_density,
)
from .constants import (  # noqa: E402
    TheoryConstants,
    alpha_star,
    check_eta_condition,
    check_hellinger_bound,
    constants_for,
    ggd_crossing,
    T_of_f,
)
from .protocols import (  # noqa: E402
    AdaptiveConfig,
    FixedFractions,
    MultiThresholdConfig,
    NonAdaptiveConfig,
    TheoremRule,
    adaptive_estimate,
    multi_threshold_estimate,
    nonadaptive_estimate,
)
from .simulation import (  # noqa: E402
    ExperimentConfig,
    SimReport,
    equal_thirds_thresholds,
    run_experiment,
    sweep_beta,
    sweep_splits,
)

__all__ = [
    "__version__",
    "BaseDensity",
    "GGD",
    "Logistic",
    "HyperbolicSecant",
    "Sin2Custom",
    "ScaleLocationModel",
    "make_density",
    "TheoryConstants",
    "T_of_f",
    "alpha_star",
    "check_eta_condition",
    "check_hellinger_bound",
    "constants_for",
    "ggd_crossing",
    "NonAdaptiveConfig",
    "AdaptiveConfig",
    "TheoremRule",
    "FixedFractions",
    "MultiThresholdConfig",
    "nonadaptive_estimate",
    "adaptive_estimate",
    "multi_threshold_estimate",
    "ExperimentConfig",
    "SimReport",
    "equal_thirds_thresholds",
    "run_experiment",
    "sweep_splits",
    "sweep_beta",
]
