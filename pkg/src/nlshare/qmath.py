"""Small complex linear algebra for one and two qubits.

Basis ordering is |00>, |01>, |10>, |11> with qubit 1 (Alice) as the left
tensor factor. 0 corresponds to H polarization and 1 to V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ValidationPolicy:
    """Numerical tolerances used when checking states and identities."""

    positivity: float = 1e-10
    algebraic: float = 1e-12


DEFAULT_POLICY = ValidationPolicy()


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class ObservableXZ:
    """Dichotomic observable cos(angle) X + sin(angle) Z."""

    angle: float

    @property
    def matrix(self) -> np.ndarray:
        return np.cos(self.angle) * X + np.sin(self.angle) * Z

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Spectral projectors onto the +1 and -1 eigenspaces."""
        m = self.matrix
        return (I2 + m) / 2, (I2 - m) / 2


def observable(angle: float) -> ObservableXZ:
    if not np.isfinite(angle):
        raise ValueError(f"observable angle must be finite, got {angle!r}")
    return ObservableXZ(float(angle))


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def check_density_matrix(rho: np.ndarray, dim: int, policy: ValidationPolicy = DEFAULT_POLICY) -> None:
    """Raise InvalidStateError unless rho is a dim x dim density matrix."""
    if rho.shape != (dim, dim):
        raise InvalidStateError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=policy.algebraic, rtol=0):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > policy.positivity:
        raise InvalidStateError(f"density matrix has trace {tr.real:.3g}, expected 1")
    lam_min = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam_min < -policy.positivity:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam_min:.3g}")


@dataclass(frozen=True)
class TwoQubitState:
    """Validated 4x4 density operator over Alice (qubit 1) and Bob (qubit 2)."""

    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        check_density_matrix(rho, 4)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_ket(cls, ket) -> TwoQubitState:
        ket = np.asarray(ket, dtype=complex).reshape(4)
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()))

    def expectation(self, op: np.ndarray) -> float:
        return _real_trace(self.rho @ op)


def _real_trace(m: np.ndarray, tol: float = DEFAULT_POLICY.algebraic) -> float:
    val = np.trace(m)
    if abs(val.imag) > max(tol, 1e-9 * abs(val.real)):
        raise ValueError(f"expectation value has imaginary part {val.imag:.3g}")
    return float(val.real)


def phi_plus() -> TwoQubitState:
    return TwoQubitState.from_ket([1, 0, 0, 1])


def maximally_mixed() -> TwoQubitState:
    return TwoQubitState(np.eye(4, dtype=complex) / 4)


def correlator(state: TwoQubitState, a: float, b: float) -> float:
    """<O(a) x O(b)> for X-Z plane observables at angles a (Alice) and b (Bob)."""
    if not isinstance(state, TwoQubitState):
        state = TwoQubitState(state)
    return state.expectation(kron(observable(a).matrix, observable(b).matrix))


def partial_trace(state: TwoQubitState | np.ndarray, keep: int) -> np.ndarray:
    """Reduced 2x2 density matrix of qubit ``keep`` (1 or 2)."""
    rho = state.rho if isinstance(state, TwoQubitState) else np.asarray(state)
    r = rho.reshape(2, 2, 2, 2)
    if keep == 1:
        return np.einsum("ijkj->ik", r)
    if keep == 2:
        return np.einsum("jijk->ik", r)
    raise ValueError(f"keep must be 1 or 2, got {keep!r}")


def lift(op: np.ndarray, qubit: int) -> np.ndarray:
    """Lift a single-qubit operator to the two-qubit space."""
    if qubit == 1:
        return np.kron(op, I2)
    if qubit == 2:
        return np.kron(I2, op)
    raise ValueError(f"qubit must be 1 or 2, got {qubit!r}")


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
