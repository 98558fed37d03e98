"""Two-operator IRS downlink simulator with closed-form cross-checks.

Operator X owns an N-element intelligent reflecting surface and configures it
for its scheduled user every slot; operator Y shares the area in another band
and sees whatever phases X chose. The package estimates both operators'
ergodic sum spectral efficiency by Monte Carlo and compares them, along with
the distribution of the out-of-band gain offset, against closed forms.
"""

from irs_oob.geometry import (
    DEFAULT_LAYOUT,
    DEFAULT_PATHLOSS,
    FadingDraw,
    LinkBudget,
    NetworkLayout,
    PathLossParams,
    Position,
    RngStream,
    db_to_linear,
    link_budget,
    linear_to_db,
    path_loss,
    sample_fading,
    sample_uniform_ues,
)
from irs_oob.irs import (
    beamformed_gain,
    effective_channel,
    optimal_phases,
    random_phases,
    snr_and_rate,
)
from irs_oob.analytics import (
    CcdfParams,
    OperatorParams,
    SimonParams,
    ccdf_limit,
    ccdf_z,
    jensen_se_x,
    jensen_se_y,
    mean_gain_x,
    mean_gain_y,
    prob_offset_negative,
    rho12,
    simon_cdf,
)
from irs_oob.montecarlo import (
    EmpiricalCcdf,
    RoundRobinResult,
    SeEstimate,
    SimConfig,
    SlopeFit,
    dominance_check,
    empirical_ccdf,
    fit_slope,
    ks_distance,
    quadrature_ccdf_oracle,
    run_round_robin,
    sample_gain_pairs,
    sample_offsets,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LAYOUT",
    "DEFAULT_PATHLOSS",
    "FadingDraw",
    "LinkBudget",
    "NetworkLayout",
    "PathLossParams",
    "Position",
    "RngStream",
    "db_to_linear",
    "link_budget",
    "linear_to_db",
    "path_loss",
    "sample_fading",
    "sample_uniform_ues",
    "beamformed_gain",
    "effective_channel",
    "optimal_phases",
    "random_phases",
    "snr_and_rate",
    "CcdfParams",
    "OperatorParams",
    "SimonParams",
    "ccdf_limit",
    "ccdf_z",
    "jensen_se_x",
    "jensen_se_y",
    "mean_gain_x",
    "mean_gain_y",
    "prob_offset_negative",
    "rho12",
    "simon_cdf",
    "EmpiricalCcdf",
    "RoundRobinResult",
    "SeEstimate",
    "SimConfig",
    "SlopeFit",
    "dominance_check",
    "empirical_ccdf",
    "fit_slope",
    "ks_distance",
    "quadrature_ccdf_oracle",
    "run_round_robin",
    "sample_gain_pairs",
    "sample_offsets",
]
