"""Channel estimation for unsourced random access with a fluid-antenna receiver."""

__version__ = "0.1.0"

from .aoa import AoaDictionary, AoaEstimate, build_dictionary, estimate_aoa, refine_channel
from .channel import (
    ArrayKind,
    ChannelRealization,
    PortGeometry,
    channel_vector,
    draw_channel_realization,
    select_ports,
)
from .codebook import Codebook, ReceivedFrame, assign_pilots, build_codebook, synthesize_frame
from .config import (
    ActivationPattern,
    CodebookKind,
    CollisionPolicy,
    ConfigError,
    Mode,
    SystemConfig,
    ebn0_to_noise_variance,
)
from .metrics import TrialScore, ad_errors, aoa_nmse, channel_nmse
from .ppce import VandermondeResponse, gap_objective, regularized_solve, select_gap, vandermonde
from .recovery import SompResult, estimate_active_count, somp
from .sim import EstimationReport, ResultRow, run_monte_carlo, run_trial

__all__ = [
    "__version__",
    "AoaDictionary",
    "AoaEstimate",
    "build_dictionary",
    "estimate_aoa",
    "refine_channel",
    "ArrayKind",
    "ChannelRealization",
    "PortGeometry",
    "channel_vector",
    "draw_channel_realization",
    "select_ports",
    "Codebook",
    "ReceivedFrame",
    "assign_pilots",
    "build_codebook",
    "synthesize_frame",
    "ActivationPattern",
    "CodebookKind",
    "CollisionPolicy",
    "ConfigError",
    "Mode",
    "SystemConfig",
    "ebn0_to_noise_variance",
    "TrialScore",
    "ad_errors",
    "aoa_nmse",
    "channel_nmse",
    "VandermondeResponse",
    "gap_objective",
    "regularized_solve",
    "select_gap",
    "vandermonde",
    "SompResult",
    "estimate_active_count",
    "somp",
    "EstimationReport",
    "ResultRow",
    "run_monte_carlo",
    "run_trial",
]
