"""Nonlocality sharing between one Alice and two sequential Bobs via weak measurements."""

from .optimizer import Optimum, optimal_delta, optimize, violation_region
from .protocol import ChshPair, ProtocolConfig, Scheme, chsh_pair, i2_given_angles, original_closed_forms
from .qmath import ObservableXZ, TwoQubitState, correlator, observable, partial_trace, phi_plus
from .weakmeas import KrausPair, WeakMeasurement, apply_conditional, apply_unconditional, kraus_pair

__version__ = "0.1.0"
