"""Three-observer sequential CHSH scenario.

Alice measures X or Z on qubit 1. Bob1 weakly measures cos(g) X +/- sin(g) Z
on qubit 2 and passes the qubit to Bob2, who projectively measures
cos(d) X +/- sin(d) Z. Everything here is computed by explicit density-matrix
arithmetic on the shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .qmath import TwoQubitState, correlator, kron, observable, phi_plus
from .weakmeas import WeakMeasurement, apply_unconditional, kraus_pair

QUARTER_PI = math.pi / 4
TSIRELSON = 2 * math.sqrt(2)
CLASSICAL_BOUND = 2.0

# Alice's fixed settings: omega = X, omega' = Z
ALICE_ANGLES = (0.0, math.pi / 2)


class Scheme(str, Enum):
    ORIGINAL = "original"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class ProtocolConfig:
    G: float
    gamma: float = QUARTER_PI
    delta: float = QUARTER_PI
    scheme: Scheme = Scheme.OPTIMAL

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (0.0 <= self.G <= 1.0):
            raise ValueError(f"G must lie in [0, 1], got {self.G!r}")
        for name in ("gamma", "delta"):
            v = getattr(self, name)
            if not (0.0 <= v <= QUARTER_PI + 1e-12):
                raise ValueError(f"{name} must lie in [0, pi/4], got {v!r}")
        if self.scheme is Scheme.ORIGINAL and (self.gamma != QUARTER_PI or self.delta != QUARTER_PI):
            raise ValueError("the original scheme fixes gamma = delta = pi/4")

    @classmethod
    def original(cls, G: float) -> ProtocolConfig:
        return cls(G, QUARTER_PI, QUARTER_PI, Scheme.ORIGINAL)

    def bob1_settings(self) -> tuple[float, float]:
        return (self.gamma, -self.gamma)

    def bob2_settings(self) -> tuple[float, float]:
        return (self.delta, -self.delta)


@dataclass(frozen=True)
class ChshPair:
    i1: float
    i2: float

    @property
    def min_value(self) -> float:
        return min(self.i1, self.i2)

    @property
    def double_violation(self) -> bool:
        return self.i1 > CLASSICAL_BOUND and self.i2 > CLASSICAL_BOUND


def chsh_combination(e: dict[tuple[int, int], float]) -> float:
    """E(0,0) + E(1,0) + E(0,1) - E(1,1), keyed by (alice_setting, bob_setting)."""
    return e[0, 0] + e[1, 0] + e[0, 1] - e[1, 1]


def bob1_weak_measurements(G: float, gamma: float) -> tuple[WeakMeasurement, WeakMeasurement]:
    return (
        WeakMeasurement.from_precision(G, gamma),
        WeakMeasurement.from_precision(G, -gamma),
    )


def weak_correlator(state: TwoQubitState, alice_angle: float, wm: WeakMeasurement) -> float:
    """<A x (K+^dag K+ - K-^dag K-)>: Alice's outcome times Bob1's weak outcome."""
    kp, km = kraus_pair(wm)
    effect = kp.conj().T @ kp - km.conj().T @ km
    return state.expectation(kron(observable(alice_angle).matrix, effect))


def i1_value(G: float, gamma: float, state: TwoQubitState | None = None) -> float:
    state = phi_plus() if state is None else state
    wms = bob1_weak_measurements(G, gamma)
    e = {(x, y): weak_correlator(state, ALICE_ANGLES[x], wms[y]) for x in (0, 1) for y in (0, 1)}
    return chsh_combination(e)


def state_after_bob1(G: float, gamma: float, state: TwoQubitState | None = None) -> TwoQubitState:
    """Equal-weight mixture of Bob1's two unconditional channels."""
    state = phi_plus() if state is None else state
    rho = sum(0.5 * apply_unconditional(state, wm, 2).rho for wm in bob1_weak_measurements(G, gamma))
    return TwoQubitState(rho)


def i2_given_angles(G: float, gamma: float, delta: float, state: TwoQubitState | None = None) -> float:
    post = state_after_bob1(G, gamma, state)
    bob2 = (delta, -delta)
    e = {(x, y): correlator(post, ALICE_ANGLES[x], bob2[y]) for x in (0, 1) for y in (0, 1)}
    return chsh_combination(e)


def chsh_pair(config: ProtocolConfig, state: TwoQubitState | None = None) -> ChshPair:
    return ChshPair(
        i1_value(config.G, config.gamma, state),
        i2_given_angles(config.G, config.gamma, config.delta, state),
    )


def original_closed_forms(G: float) -> tuple[float, float]:
    if not (0.0 <= G <= 1.0):
        raise ValueError(f"G must lie in [0, 1], got {G!r}")
    F = math.sqrt(max(0.0, 1 - G * G))
    return TSIRELSON * G, math.sqrt(2) * (1 + F)


def i1_closed_form(G: float, gamma: float) -> float:
    return 2 * G * (math.cos(gamma) + math.sin(gamma))


def i2_closed_form(G: float, gamma: float, delta: float) -> float:
    """Benchmark: 2 cos(d) [F + (1-F) cos^2 g] + 2 sin(d) [F + (1-F) sin^2 g]."""
    F = math.sqrt(max(0.0, 1 - G * G))
    a = F + (1 - F) * math.cos(gamma) ** 2
    b = F + (1 - F) * math.sin(gamma) ** 2
    return 2 * math.cos(delta) * a + 2 * math.sin(delta) * b


def bob2_coefficients(G: float, gamma: float) -> tuple[float, float]:
    """Weights (a, b) with I2 = 2 a cos(delta) + 2 b sin(delta)."""
    F = math.sqrt(max(0.0, 1 - G * G))
    return F + (1 - F) * math.cos(gamma) ** 2, F + (1 - F) * math.sin(gamma) ** 2

