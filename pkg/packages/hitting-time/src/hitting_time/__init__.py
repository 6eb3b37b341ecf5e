from hitting_time.errors import BudgetExceeded, GreedyServerError
from hitting_time.sampler import (
    CriticalQueueParams,
    DistanceReport,
    HittingSampler,
    SamplingMethod,
    ks_distance_to_levy,
    monte_carlo_quarter,
    sample_levy,
    sample_zeta,
    sample_zeta_levy,
    sample_zeta_walk,
    sample_zeta_walk_batch,
)
from hitting_time.special import (
    bessel_i_log,
    levy_cdf,
    levy_pdf,
    levy_sf,
    quarter_quadrature,
    zeta_density,
    zeta_survival,
    zeta_tail,
)

__all__ = [
    "BudgetExceeded",
    "CriticalQueueParams",
    "DistanceReport",
    "GreedyServerError",
    "HittingSampler",
    "SamplingMethod",
    "bessel_i_log",
    "ks_distance_to_levy",
    "levy_cdf",
    "levy_pdf",
    "levy_sf",
    "monte_carlo_quarter",
    "quarter_quadrature",
    "sample_levy",
    "sample_zeta",
    "sample_zeta_levy",
    "sample_zeta_walk",
    "sample_zeta_walk_batch",
    "zeta_density",
    "zeta_survival",
    "zeta_tail",
]
