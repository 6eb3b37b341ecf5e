from greedy_experiments.calibration import (
    BANDS_DIR,
    band_json,
    calibrate_lil_band,
    calibrate_recurrence,
    load_band,
    stored_bands,
    write_bands,
)
from greedy_experiments.distances import (
    estimate_quarter,
    hitting_tail_profile,
    levy_ks,
    poisson_diff_distance,
)
from greedy_experiments.estimators import (
    LIL_CONSTANT,
    estimate_turning,
    lil_scaling,
    martingale_audit,
    nt_scaling,
    queue_concentration,
    recurrence_stats,
    tau_growth_series,
)
from greedy_experiments.models import (
    Band,
    EstimateResult,
    MartingaleAudit,
    MartingaleRow,
    OracleReport,
    RegimeReport,
    ScalingPoint,
    ScalingSeries,
)
from greedy_experiments.oracle_check import oracle_agreement, regime_report
from greedy_experiments.reference import CorrelatedWalkEnsemble, reference_correlated_walk

__all__ = [
    "BANDS_DIR",
    "LIL_CONSTANT",
    "Band",
    "CorrelatedWalkEnsemble",
    "EstimateResult",
    "MartingaleAudit",
    "MartingaleRow",
    "OracleReport",
    "RegimeReport",
    "ScalingPoint",
    "ScalingSeries",
    "band_json",
    "calibrate_lil_band",
    "calibrate_recurrence",
    "estimate_quarter",
    "estimate_turning",
    "hitting_tail_profile",
    "levy_ks",
    "lil_scaling",
    "load_band",
    "martingale_audit",
    "nt_scaling",
    "oracle_agreement",
    "poisson_diff_distance",
    "queue_concentration",
    "recurrence_stats",
    "reference_correlated_walk",
    "regime_report",
    "stored_bands",
    "tau_growth_series",
    "write_bands",
]
