"""Key-rate and free-space-channel simulator for high-dimensional QKD links.

Protocol layer: HD-Ext-B92 and HD-BB84 secret-key rates, QBER, and noise
tolerances under depolarizing noise. Channel layer: an elliptic-beam Monte
Carlo model of satellite up-/down-links producing transmittance (PDT) and
key-rate (PDR) distributions and PDT-averaged key rates. The ``satqkd``
command-line tool drives deterministic parameter sweeps over both layers.
"""

from .atmosphere import (
    DEFAULT_OPTICS,
    MAX_ZENITH,
    POINTING_MODELS,
    WEATHER_PRESETS,
    BeamMoments,
    BeamSample,
    BeamVector,
    ChannelScene,
    ThetaLawParams,
    beam_moments,
    derived_optics,
    extinction_factor,
    link_geometry,
    sample_beam_vector,
    sample_beam_vectors,
    scene_from_preset,
    theta_law,
    weather_preset,
)
from .bb84 import Bb84Params, bb84_key_rate, bb84_qber, noise_tolerance
from .cli import (
    SimulationConfig,
    SweepRecord,
    emit_pdr,
    emit_pdt,
    emit_records,
    parse_config,
    run_sweep,
)
from .entropy import binary_entropy, shannon_entropy
from .errors import DomainError, NumericError
from .ext_b92 import (
    EveBoundTerms,
    JointDistribution,
    ObservableStats,
    conditional_entropy_ab,
    depolarizing_stats,
    eve_bound_terms,
    ext_b92_key_rate,
    ext_b92_qber,
    joint_distribution,
    von_neumann_lower_bound,
)
from .transmittance import (
    RateDistribution,
    TransmittanceDistribution,
    aperture_transmittance,
    average_key_rate,
    estimate_pdt,
    key_rate_distribution,
)
from .validation import max_noise

__version__ = "0.1.0"

__all__ = [
    "Bb84Params",
    "BeamMoments",
    "BeamSample",
    "BeamVector",
    "ChannelScene",
    "DEFAULT_OPTICS",
    "DomainError",
    "EveBoundTerms",
    "JointDistribution",
    "MAX_ZENITH",
    "NumericError",
    "ObservableStats",
    "POINTING_MODELS",
    "RateDistribution",
    "SimulationConfig",
    "SweepRecord",
    "ThetaLawParams",
    "TransmittanceDistribution",
    "WEATHER_PRESETS",
    "aperture_transmittance",
    "average_key_rate",
    "bb84_key_rate",
    "bb84_qber",
    "beam_moments",
    "binary_entropy",
    "conditional_entropy_ab",
    "depolarizing_stats",
    "derived_optics",
    "emit_pdr",
    "emit_pdt",
    "emit_records",
    "estimate_pdt",
    "eve_bound_terms",
    "ext_b92_key_rate",
    "ext_b92_qber",
    "extinction_factor",
    "joint_distribution",
    "key_rate_distribution",
    "link_geometry",
    "max_noise",
    "noise_tolerance",
    "parse_config",
    "run_sweep",
    "sample_beam_vector",
    "sample_beam_vectors",
    "scene_from_preset",
    "shannon_entropy",
    "theta_law",
    "von_neumann_lower_bound",
    "weather_preset",
]
