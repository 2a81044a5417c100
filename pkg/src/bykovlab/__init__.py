"""Geometric return-map model of a Bykov heteroclinic network under partial
symmetry breaking: local passage maps, global transitions with an unfolding
amplitude, first-return dynamics, horseshoe and switching analysis, and a
scanner for the heteroclinic-tangency parameter ladder."""

__version__ = "0.1.0"

from .errors import (
    BykovError,
    ConfigError,
    CrossingUncertain,
    DegenerateUnfolding,
    InsufficientResolution,
    OnStableManifold,
    RealizationFailed,
    TooFewSamples,
)
from .model import (
    ModelConfig,
    NumericSettings,
    SaddleParameters,
    SectionId,
    SectionPoint,
    UnfoldingModel,
    ValidationReport,
    g_curve,
    h_curve,
    load_config,
    parse_config,
    validate,
)
from .localmaps import CurveSample, classify_curve, d_phi_v, d_phi_w, phi_v, phi_w
from .globalmaps import d_psi_wv, psi_vw, psi_wv
from .returnmap import ReturnOutcome, d_eta, d_zeta, eta, iterate, zeta
from .horseshoe import (
    HeightInterval,
    Rectangle,
    TransitionMatrix,
    build_horseshoe,
    cone_hyperbolicity,
    crossing_count,
    escape_experiment,
    find_multipulse,
    interval_sequence,
    realize_itinerary,
)
from .tangency import (
    PeriodicOrbit,
    TangencyRecord,
    curve_return_profile,
    find_periodic_sinks,
    find_tangencies,
    fold_point,
    horseshoe_tangency_scan,
)
