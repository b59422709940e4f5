"""Max-min optimisation of the two CHSH parameters over Bob1/Bob2 angles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .protocol import (
    CLASSICAL_BOUND,
    QUARTER_PI,
    ProtocolConfig,
    Scheme,
    bob2_coefficients,
    chsh_pair,
    i1_value,
    i2_given_angles,
    original_closed_forms,
)

# 2 sqrt(2) G = sqrt(2) (1 + sqrt(1 - G^2)) at G = 4/5; below it I1 is the bottleneck
CROSSOVER_G = 0.8

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


class NonBracketingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Optimum:
    g: float
    gamma_star: float
    delta_star: float
    i1: float
    i2: float
    scheme_used: Scheme

    @property
    def value(self) -> float:
        return min(self.i1, self.i2)

    def as_dict(self) -> dict:
        return {
            "g": self.g,
            "gamma_star": self.gamma_star,
            "delta_star": self.delta_star,
            "i1": self.i1,
            "i2": self.i2,
            "value": self.value,
            "scheme_used": self.scheme_used.value,
        }


class Region(NamedTuple):
    g_low: float
    g_high: float


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9) -> float:
    """Maximiser of a unimodal f on [a, b].

    Near a smooth maximum, f differences fall below double precision once the
    bracket is ~1e-8 wide, so ``tol`` much below that buys nothing.
    """
    h = b - a
    if h <= tol:
        return (a + b) / 2
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(n - 1):
        h *= INV_PHI
        if fc > fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * h
            fd = f(d)
    return (a + d) / 2 if fc > fd else (c + b) / 2


def optimal_delta_analytic(G: float, gamma: float) -> float:
    a, b = bob2_coefficients(G, gamma)
    return math.atan2(b, a)


def optimal_delta_golden(G: float, gamma: float, tol: float = 1e-9) -> float:
    return golden_section_max(lambda d: i2_given_angles(G, gamma, d), 0.0, QUARTER_PI, tol)


def optimal_delta(G: float, gamma: float, check: bool = False, check_tol: float = 1e-6) -> float:
    """Bob2 angle maximising I2 at fixed (G, gamma).

    The tangent form tan(delta) = b / a is the primary path; with ``check`` the
    result is compared against a golden-section search on the density-matrix I2.
    """
    delta = optimal_delta_analytic(G, gamma)
    if check:
        alt = optimal_delta_golden(G, gamma)
        if abs(alt - delta) > check_tol:
            raise ArithmeticError(
                f"optimal delta mismatch at G={G}, gamma={gamma}: tangent {delta!r} vs search {alt!r}"
            )
    return delta


def equalization_gap(G: float, gamma: float) -> float:
    """I1 - max_delta I2 at fixed (G, gamma); increasing in gamma."""
    return i1_value(G, gamma) - i2_given_angles(G, gamma, optimal_delta(G, gamma))


def bisect_root(
    h: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9, max_iter: int = 60, ftol: float = 1e-13
) -> float:
    """Root of an increasing function with h(lo) <= 0 <= h(hi).

    An endpoint with |h| <= ftol is returned as the root directly.
    """
    h_lo, h_hi = h(lo), h(hi)
    if h_lo >= -ftol:
        return lo
    if h_hi <= ftol:
        return hi
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2
        if h(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def optimize(G: float, gamma_tol: float = 1e-12) -> Optimum:
    if not (0.0 <= G <= 1.0):
        raise ValueError(f"G must lie in [0, 1], got {G!r}")
    if G < CROSSOVER_G:
        pair = chsh_pair(ProtocolConfig.original(G))
        return Optimum(G, QUARTER_PI, QUARTER_PI, pair.i1, pair.i2, Scheme.ORIGINAL)

    gap = lambda g: equalization_gap(G, g)  # noqa: E731
    if gap(QUARTER_PI) < -1e-12:
        raise NonBracketingError(f"I1 < I2 at gamma = pi/4 for G={G}; no equalising root")
    if gap(0.0) > 1e-12:
        raise NonBracketingError(f"I1 > I2 at gamma = 0 for G={G}; no equalising root")
    gamma = bisect_root(gap, 0.0, QUARTER_PI, tol=gamma_tol)
    delta = optimal_delta(G, gamma)
    pair = chsh_pair(ProtocolConfig(G, gamma, delta, Scheme.OPTIMAL))
    return Optimum(G, gamma, delta, pair.i1, pair.i2, Scheme.OPTIMAL)


def min_chsh(G: float, scheme: Scheme | str) -> float:
    scheme = Scheme(scheme)
    if scheme is Scheme.ORIGINAL:
        return chsh_pair(ProtocolConfig.original(G)).min_value
    return optimize(G).value


def _bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    """Boundary between pred(lo) and pred(hi) (which must differ)."""
    p_lo = pred(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def violation_region(scheme: Scheme | str, tol: float = 1e-9) -> Region:
    """Endpoints of {G : min(I1, I2) > 2}.

    The optimal scheme reaches exactly 2 at G = 1, so its upper endpoint is 1
    and is excluded from the region.
    """
    scheme = Scheme(scheme)
    violated = lambda g: min_chsh(g, scheme) > CLASSICAL_BOUND  # noqa: E731
    low = _bisect_predicate(violated, 0.0, CROSSOVER_G, tol)
    high = 1.0 if violated(1.0) else _bisect_predicate(violated, CROSSOVER_G, 1.0, tol)
    return Region(low, high)


def original_min(G: float) -> float:
    return min(original_closed_forms(G))
