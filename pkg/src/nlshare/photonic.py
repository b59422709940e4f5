"""Jones-calculus model of the dual-rail optical weak measurement.

A photon state is a (polarization x rail) amplitude array. Polarization index 0
is H and 1 is V. Rails are parallel spatial modes; a beam displacer (BD) moves
the V component by a fixed number of rails and leaves H in place.

Angle conventions: ``phi`` is the polarization basis angle, i.e. the measured
basis is cos(phi)|H> + sin(phi)|V> and its orthogonal partner
sin(phi)|H> - cos(phi)|V>. The same basis is the +1/-1 eigenbasis of the X-Z
observable at angle pi/2 - 2 phi (see :func:`observable_angle`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import TwoQubitState, kron
from .weakmeas import KrausPair, WeakMeasurement, kraus_pair

H, V = 0, 1
FULL_RAILS = ("l", "u", "aux1", "aux2")
SIMPLIFIED_RAILS = ("l", "c", "u")


def hwp(angle: float) -> np.ndarray:
    """Half-wave plate with fast axis at ``angle`` from H."""
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    # snap rounding dust so that 0 and 45 degree plates are exact permutations
    c, s = (0.0 if abs(v) < 1e-15 else v for v in (c, s))
    return np.array([[c, s], [s, -c]], dtype=complex)


def polarization_angle(obs_angle: float) -> float:
    """Polarization basis angle phi whose |phi> is the +1 eigenvector of O(obs_angle)."""
    return math.pi / 4 - obs_angle / 2


def observable_angle(phi: float) -> float:
    return math.pi / 2 - 2 * phi


def basis_state(phi: float) -> np.ndarray:
    return np.array([math.cos(phi), math.sin(phi)], dtype=complex)


def basis_state_perp(phi: float) -> np.ndarray:
    return np.array([math.sin(phi), -math.cos(phi)], dtype=complex)


@dataclass
class DualRailState:
    amplitudes: np.ndarray
    modes: tuple[str, ...]

    @classmethod
    def from_polarization(cls, pol: Sequence[complex], modes: tuple[str, ...], rail: str = "l") -> DualRailState:
        pol = np.asarray(pol, dtype=complex)
        if pol.shape != (2,) or abs(np.linalg.norm(pol) - 1) > 1e-12:
            raise ValueError("input polarization must be a normalized 2-vector")
        amps = np.zeros((2, len(modes)), dtype=complex)
        amps[:, modes.index(rail)] = pol
        return cls(amps, modes)

    def amplitude(self, pol: int, mode: str) -> complex:
        return complex(self.amplitudes[pol, self.modes.index(mode)])

    def rail(self, mode: str) -> np.ndarray:
        return self.amplitudes[:, self.modes.index(mode)].copy()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def mode_probabilities(self) -> dict[str, float]:
        p = (abs(self.amplitudes) ** 2).sum(axis=0)
        return {m: float(v) for m, v in zip(self.modes, p)}


@dataclass(frozen=True)
class OpticalElement:
    """A half-wave plate over some rails, or a beam displacer shifting V."""

    kind: str
    modes: tuple[int, ...] = ()
    angle: float | None = None
    shift: int = 0
    label: str = ""

    def apply(self, amps: np.ndarray) -> np.ndarray:
        out = amps.copy()
        if self.kind == "HWP":
            m = hwp(self.angle)
            for r in self.modes:
                out[:, r] = m @ amps[:, r]
        elif self.kind == "BD":
            n = amps.shape[1]
            out[V] = 0
            for r in range(n):
                if abs(amps[V, r]) < 1e-14:
                    continue
                dest = r + self.shift
                if not 0 <= dest < n:
                    raise ValueError(f"{self.label or 'BD'} displaces V out of rail {r} beyond the layout")
                out[V, dest] = amps[V, r]
        else:
            raise ValueError(f"unknown element kind {self.kind!r}")
        return out

    def describe(self, rails: Sequence[str]) -> dict:
        d = {"kind": self.kind, "angle": self.angle, "modes": [rails[r] for r in self.modes]}
        if self.kind == "BD":
            d["modes"] = list(rails)
            d["shift"] = self.shift
        if self.label:
            d["label"] = self.label
        return d


@dataclass
class Network:
    elements: list[OpticalElement]
    rails: tuple[str, ...]
    input_rail: str = "l"

    def propagate(self, state: DualRailState) -> DualRailState:
        amps = state.amplitudes
        for el in self.elements:
            amps = el.apply(amps)
        return DualRailState(amps, self.rails)

    def run(self, pol: Sequence[complex]) -> DualRailState:
        return self.propagate(DualRailState.from_polarization(pol, self.rails, self.input_rail))

    def rail_operator(self, mode: str) -> np.ndarray:
        """2x2 map from input polarization to the polarization found in ``mode``."""
        cols = [self.run(e).rail(mode) for e in np.eye(2, dtype=complex)]
        return np.column_stack(cols)

    def to_json(self) -> str:
        return json.dumps([el.describe(self.rails) for el in self.elements], indent=2)


def _hwp(angle, *rails, label=""):
    return OpticalElement("HWP", tuple(rails), float(angle), 0, label)


def _bd(shift, label=""):
    return OpticalElement("BD", (), None, shift, label)


def swap_elements() -> list[OpticalElement]:
    """Three BDs and four 45 degree plates exchanging polarization and rail (l, u).

    Uses two auxiliary rails (2, 3) above u.
    """
    q = math.pi / 4
    return [
        _bd(+2, "BD2"),
        _hwp(q, 2, label="HWP45a"),
        _bd(-2, "BD3"),
        _hwp(q, 1, label="HWP45b"),
        _hwp(q, 2, label="HWP45c"),
        _bd(-1, "BD4"),
        _hwp(q, 1, label="HWP45d"),
    ]


def hv_weak_elements(theta: float) -> list[OpticalElement]:
    """Split by polarization, then rotate each arm (HWP3 on l, HWP2 + 0 deg plate on u)."""
    return [
        _bd(+1, "BD1"),
        _hwp(theta / 2, 0, label="HWP3"),
        _hwp(theta / 2, 1, label="HWP2"),
        _hwp(0.0, 1, label="HWP0"),
    ]


def full_network(theta: float, phi: float) -> Network:
    """Full weak-measurement network; rail l reads outcome +1 and rail u outcome -1."""
    els = [_hwp(phi / 2, 0, label="HWP1")]
    els += hv_weak_elements(theta)
    els += swap_elements()
    els += [_hwp(phi / 2, 0, label="HWP4"), _hwp(phi / 2, 1, label="HWP4'")]
    return Network(els, FULL_RAILS)


def hv_network(theta: float) -> Network:
    """The H/V-basis core (no basis-change plates)."""
    return Network(hv_weak_elements(theta) + swap_elements(), FULL_RAILS)


def simulate_full(theta: float, phi: float, pol: Sequence[complex]) -> DualRailState:
    return full_network(theta, phi).run(pol)


def coupled_state(theta: float, alpha: complex, beta: complex, phi: float = 0.0) -> DualRailState:
    """alpha|e>(c|l> + s|u>) + beta|e_perp>(s|l> + c|u>), the polarization-rail coupled state.

    |e> and |e_perp> are basis_state(phi) and basis_state_perp(phi). Note that
    basis_state_perp(0) = -|V>; the bare H/V form is what :func:`hv_network`
    produces.
    """
    c, s = math.cos(theta), math.sin(theta)
    e, ep = basis_state(phi), basis_state_perp(phi)
    amps = np.zeros((2, len(FULL_RAILS)), dtype=complex)
    amps[:, 0] = alpha * c * e + beta * s * ep
    amps[:, 1] = alpha * s * e + beta * c * ep
    return DualRailState(amps, FULL_RAILS)


def simplified_network(theta: float, phi: float, outcome: int = +1) -> Network:
    """Simplified layout: post-selecting the central rail realises one Kraus operator.

    Rotating HWP1 and HWP4 by an extra pi/4 selects the -1 outcome instead.
    """
    if outcome not in (+1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    plate = phi / 2 if outcome == +1 else phi / 2 + math.pi / 4
    els = [
        _hwp(plate, 0, label="HWP1"),
        _bd(+1, "BD1"),
        _hwp((math.pi / 2 - theta) / 2, 0, label="HWP2"),
        _hwp(theta / 2, 1, label="HWP3"),
        _bd(+1, "BD2"),
        _hwp(math.pi / 4, 1, label="HWP45"),
        _hwp(plate, 1, label="HWP4"),
    ]
    return Network(els, SIMPLIFIED_RAILS)


class ZeroPostSelection(ValueError):
    pass


def simulate_simplified(theta: float, phi: float, outcome: int, pol: Sequence[complex]) -> tuple[np.ndarray, float]:
    """Normalized polarization in the central rail and its post-selection probability."""
    out = simplified_network(theta, phi, outcome).run(pol).rail("c")
    p = float(np.vdot(out, out).real)
    if p <= 1e-15:
        raise ZeroPostSelection(f"central rail is empty for outcome {outcome:+d}")
    return out / math.sqrt(p), p


def weak_measurement_for(theta: float, phi: float) -> WeakMeasurement:
    return WeakMeasurement(theta, observable_angle(phi))


def full_kraus(theta: float, phi: float) -> KrausPair:
    net = full_network(theta, phi)
    return KrausPair(net.rail_operator("l"), net.rail_operator("u"))


def simplified_kraus(theta: float, phi: float) -> KrausPair:
    return KrausPair(
        simplified_network(theta, phi, +1).rail_operator("c"),
        simplified_network(theta, phi, -1).rail_operator("c"),
    )


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over global phase of ||a - e^{i t} b|| (spectral norm)."""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.linalg.norm(a - phase * b, 2))


def kraus_distance(got: KrausPair, want: KrausPair) -> float:
    return max(phase_aligned_distance(g, w) for g, w in zip(got, want))


def swap_check() -> dict:
    """Check the swap subnetwork maps |p>|m> to |m>|p> on (H, V) x (l, u)."""
    net = Network(swap_elements(), FULL_RAILS)
    labels = [("H", "l"), ("H", "u"), ("V", "l"), ("V", "u")]
    expected = {("H", "l"): ("H", "l"), ("H", "u"): ("V", "l"), ("V", "l"): ("H", "u"), ("V", "u"): ("V", "u")}
    pol_idx = {"H": H, "V": V}
    rail_idx = {"l": 0, "u": 1}

    cols = []
    mapping = {}
    for p, m in labels:
        amps = np.zeros((2, len(FULL_RAILS)), dtype=complex)
        amps[pol_idx[p], rail_idx[m]] = 1
        out = net.propagate(DualRailState(amps, FULL_RAILS)).amplitudes
        leaked = float(np.abs(out[:, 2:]).sum())
        col = np.array([out[pol_idx[q], rail_idx[r]] for q, r in labels])
        cols.append(col)
        hit = [labels[i] for i in np.flatnonzero(np.abs(col) > 0.5)]
        mapping[f"{p}{m}"] = "".join(hit[0]) if len(hit) == 1 and leaked == 0 else None
    M = np.column_stack(cols)
    perm = np.zeros((4, 4))
    for j, lab in enumerate(labels):
        perm[labels.index(expected[lab]), j] = 1
    table_ok = all(mapping[f"{p}{m}"] == "".join(expected[p, m]) for p, m in labels)
    unitary_err = float(np.abs(M.conj().T @ M - np.eye(4)).max())
    perm_err = float(np.abs(M - perm).max())
    return {
        "mapping": mapping,
        "table_ok": table_ok,
        "unitarity_error": unitary_err,
        "permutation_error": perm_err,
        "passed": table_ok and unitary_err == 0.0 and perm_err == 0.0,
    }


def hwp2_composite_error(theta: float) -> float:
    """Compare the u-arm plates (HWP2 at theta/2 then 0 deg) with one plate at pi/2 - theta/2 on |V>."""
    v = np.array([0, 1], dtype=complex)
    return float(np.abs(hwp(0.0) @ hwp(theta / 2) @ v - hwp(math.pi / 2 - theta / 2) @ v).max())


def source_state() -> TwoQubitState:
    """(|HH> - |VV>)/sqrt(2) as emitted by the photon-pair source."""
    return TwoQubitState.from_ket([1, 0, 0, -1])


def to_canonical(state: TwoQubitState) -> TwoQubitState:
    """Local Z on Alice's photon (a 0 deg HWP), mapping the source state to |Phi+>."""
    U = kron(hwp(0.0), np.eye(2))
    return TwoQubitState(U @ state.rho @ U.conj().T)


def verify(theta: float, phi: float, tol: float = 1e-10, rng: np.random.Generator | None = None) -> dict:
    """Equivalence report for one (theta, phi) setting."""
    rng = np.random.default_rng(0) if rng is None else rng
    want = kraus_pair(weak_measurement_for(theta, phi))
    d_b = kraus_distance(full_kraus(theta, phi), want)
    d_c = kraus_distance(simplified_kraus(theta, phi), want)

    amp_err = 0.0
    for _ in range(4):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        alpha, beta = np.vdot(basis_state(phi), v), np.vdot(basis_state_perp(phi), v)
        got = simulate_full(theta, phi, v).amplitudes
        amp_err = max(amp_err, float(np.abs(got - coupled_state(theta, alpha, beta, phi).amplitudes).max()))
    sw = swap_check()
    distance = max(d_b, d_c, amp_err)
    return {
        "theta": theta,
        "phi": phi,
        "G": math.cos(2 * theta),
        "F": math.sin(2 * theta),
        "full_channel_distance": d_b,
        "simplified_channel_distance": d_c,
        "coupled_amplitude_error": amp_err,
        "swap": sw,
        "max_distance": distance,
        "tolerance": tol,
        "passed": bool(distance < tol and sw["passed"]),
    }
