"""Optimal two-outcome weak measurements of X-Z plane observables.

The strength is carried by ``theta`` in [0, pi/4]: theta = 0 is a projective
measurement and theta = pi/4 leaves the qubit untouched. The precision factor
is G = cos(2 theta) and the quality factor is F = sin(2 theta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import DEFAULT_POLICY, TwoQubitState, lift, observable

THETA_MAX = np.pi / 4


@dataclass(frozen=True)
class WeakMeasurement:
    theta: float
    basis_angle: float = np.pi / 2

    def __post_init__(self):
        if not (0.0 <= self.theta <= THETA_MAX + DEFAULT_POLICY.algebraic):
            raise ValueError(f"theta must lie in [0, pi/4], got {self.theta!r}")
        object.__setattr__(self, "theta", float(min(self.theta, THETA_MAX)))

    @classmethod
    def from_precision(cls, G: float, basis_angle: float = np.pi / 2) -> WeakMeasurement:
        return cls(theta_from_precision(G), basis_angle)

    @property
    def precision(self) -> float:
        return float(np.cos(2 * self.theta))

    @property
    def quality(self) -> float:
        return float(np.sin(2 * self.theta))


@dataclass(frozen=True)
class KrausPair:
    k_plus: np.ndarray
    k_minus: np.ndarray

    def __iter__(self):
        yield self.k_plus
        yield self.k_minus

    def for_outcome(self, outcome: int) -> np.ndarray:
        if outcome == +1:
            return self.k_plus
        if outcome == -1:
            return self.k_minus
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")


class ZeroProbabilityOutcome(ValueError):
    """Raised when a conditional branch has (numerically) zero probability."""


def theta_from_precision(G: float) -> float:
    if not (0.0 <= G <= 1.0):
        raise ValueError(f"precision factor G must lie in [0, 1], got {G!r}")
    return float(np.arccos(G) / 2)


def precision_quality(theta: float) -> tuple[float, float]:
    return float(np.cos(2 * theta)), float(np.sin(2 * theta))


def kraus_pair(wm: WeakMeasurement) -> KrausPair:
    """Kraus operators cos(t) P+ + sin(t) P- (outcome +1) and sin(t) P+ + cos(t) P-."""
    p_plus, p_minus = observable(wm.basis_angle).projectors()
    c, s = np.cos(wm.theta), np.sin(wm.theta)
    return KrausPair(c * p_plus + s * p_minus, s * p_plus + c * p_minus)


def _as_state(state) -> TwoQubitState:
    return state if isinstance(state, TwoQubitState) else TwoQubitState(state)


def apply_unconditional(state: TwoQubitState, wm: WeakMeasurement, on_qubit: int = 2) -> TwoQubitState:
    """Outcome-averaged channel rho -> sum_k K rho K^dagger on one qubit."""
    rho = _as_state(state).rho
    out = np.zeros((4, 4), dtype=complex)
    for k in kraus_pair(wm):
        K = lift(k, on_qubit)
        out += K @ rho @ K.conj().T
    return TwoQubitState((out + out.conj().T) / 2)


def apply_conditional(
    state: TwoQubitState, wm: WeakMeasurement, on_qubit: int, outcome: int, atol: float = 1e-15
) -> tuple[TwoQubitState, float]:
    """Post-measurement state and probability for one outcome.

    Raises ZeroProbabilityOutcome if the branch cannot occur.
    """
    rho = _as_state(state).rho
    K = lift(kraus_pair(wm).for_outcome(outcome), on_qubit)
    unnorm = K @ rho @ K.conj().T
    p = float(np.trace(unnorm).real)
    if p <= atol:
        raise ZeroProbabilityOutcome(f"outcome {outcome:+d} has probability {p:.3g}")
    post = unnorm / p
    return TwoQubitState((post + post.conj().T) / 2), p


def outcome_probabilities(rho_1q: np.ndarray, wm: WeakMeasurement) -> tuple[float, float]:
    """Single-qubit outcome probabilities (p(+1), p(-1))."""
    kp, km = kraus_pair(wm)
    return (
        float(np.trace(kp @ rho_1q @ kp.conj().T).real),
        float(np.trace(km @ rho_1q @ km.conj().T).real),
    )


def ancilla_unitary(theta: float) -> np.ndarray:
    """Coupling unitary on system (left) x ancilla (right), ancilla prepared in |0>."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [c, -s, 0, 0],
            [s, c, 0, 0],
            [0, 0, s, -c],
            [0, 0, c, s],
        ],
        dtype=complex,
    )


def dilation_kraus(theta: float) -> KrausPair:
    """System Kraus operators induced by the ancilla circuit in the Z basis.

    Ancilla result 0 maps to outcome +1 and result 1 to outcome -1.
    """
    U = ancilla_unitary(theta).reshape(2, 2, 2, 2)
    # U[s_out, a_out, s_in, a_in]; ancilla input fixed to |0>
    return KrausPair(U[:, 0, :, 0].copy(), U[:, 1, :, 0].copy())


def embed_basis(wm: WeakMeasurement) -> np.ndarray:
    """Unitary taking |0>,|1> to the +1, -1 eigenvectors of the measured observable."""
    a = wm.basis_angle
    # +1 eigenvector of cos(a) X + sin(a) Z has Bloch angle pi/2 - a from Z
    half = (np.pi / 2 - a) / 2
    return np.array([[np.cos(half), -np.sin(half)], [np.sin(half), np.cos(half)]], dtype=complex)


def dilation_kraus_in_basis(wm: WeakMeasurement) -> KrausPair:
    """Ancilla-circuit Kraus pair conjugated into the measurement basis of ``wm``."""
    V = embed_basis(wm)
    kp, km = dilation_kraus(wm.theta)
    return KrausPair(V @ kp @ V.conj().T, V @ km @ V.conj().T)


def degraded_unconditional(rho: np.ndarray, wm: WeakMeasurement, quality: float, on_qubit: int = 2) -> np.ndarray:
    """Unconditional channel with an arbitrary quality factor (G^2 + F^2 <= 1 family).

    Only used to contrast non-optimal measurements against the optimal family.
    """
    p_plus, p_minus = observable(wm.basis_angle).projectors()
    Pp, Pm = lift(p_plus, on_qubit), lift(p_minus, on_qubit)
    dephased = Pp @ rho @ Pp + Pm @ rho @ Pm
    return quality * rho + (1 - quality) * dephased

