"""Numerical laboratory for causal order on superposed spacetimes.

Events are worldline coincidences, causal order is the sign of a proper-time
difference along the test particle, and a quantum diffeomorphism acts
independently on each branch. See the demos directory for walk-throughs.
"""

from .causal_order import (
    BranchConfig,
    BranchedScenario,
    EventRecord,
    align_events,
    apply_quantum_diffeo,
    build_branch,
    invariance_sweep,
    order_product,
    reparametrization_no_go_check,
)
from .frames import LightconeReport, make_lightcones_definite, minkowski_normalizer_at
from .geometry import (
    Diffeomorphism,
    MetricField,
    SpacetimePoint,
    make_bump_localized,
    pushforward_curve,
    pushforward_metric,
)
from .quantum import (
    BlochVector,
    DensityMatrix,
    OrderClass,
    QuantumState,
    classify_order,
    postselect_order_qubit,
    referee_transform,
    run_switch_protocol,
    spin_evolve,
    tomography,
)
from .scenarios import definite_control, gravitational_switch, superposed_paths_switch
from .worldlines import Coincidence, Worldline, detect_coincidences, orientation_sign, proper_time, reparametrize

__version__ = "0.1.0"
