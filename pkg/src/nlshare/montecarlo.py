"""Finite-statistics simulation of the sequential CHSH experiment.

Trials are split into fixed-size blocks. Each block draws from its own PCG64
stream spawned from the user seed, so results are reproducible and blocks can
be evaluated in any order (or in parallel) before their counts are summed.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .protocol import ALICE_ANGLES, ProtocolConfig, bob1_weak_measurements
from .qmath import TwoQubitState, kron, observable, phi_plus
from .weakmeas import ZeroProbabilityOutcome, apply_conditional

RNG_ALGORITHM = "numpy.PCG64/SeedSequence.spawn"
DEFAULT_BLOCK = 1 << 16
CSV_HEADER = ("alice_setting", "bob1_setting", "bob2_setting", "a", "b1", "b2", "count")

SETTINGS = list(itertools.product((0, 1), repeat=3))
# outcome index o = 4*ia + 2*ib1 + ib2 with index 0 <-> +1 and 1 <-> -1
OUTCOMES = list(itertools.product((+1, -1), repeat=3))


class InsufficientDataError(ValueError):
    pass


@dataclass
class TrialBatch:
    """Counts indexed by [x, y1, y2, a, b1, b2] with outcome index 0 <-> +1."""

    shots: int
    seed: int
    counts: np.ndarray = field(repr=False)
    config: ProtocolConfig | None = None
    block_size: int = DEFAULT_BLOCK

    def count(self, x, y1, y2, a, b1, b2) -> int:
        idx = lambda o: 0 if o == +1 else 1  # noqa: E731
        return int(self.counts[x, y1, y2, idx(a), idx(b1), idx(b2)])

    def merge(self, other: TrialBatch) -> TrialBatch:
        return TrialBatch(self.shots + other.shots, self.seed, self.counts + other.counts, self.config, self.block_size)

    def metadata(self) -> dict:
        return {"shots": self.shots, "seed": self.seed, "rng": RNG_ALGORITHM, "block_size": self.block_size}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for x, y1, y2 in SETTINGS:
                for o, (a, b1, b2) in enumerate(OUTCOMES):
                    ia, ib1, ib2 = np.unravel_index(o, (2, 2, 2))
                    w.writerow([x, y1, y2, a, b1, b2, int(self.counts[x, y1, y2, ia, ib1, ib2])])

    @classmethod
    def from_csv(cls, path, seed: int = 0) -> TrialBatch:
        counts = np.zeros((2,) * 6, dtype=np.int64)
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {reader.fieldnames}")
            for row in reader:
                idx = [int(row["alice_setting"]), int(row["bob1_setting"]), int(row["bob2_setting"])]
                idx += [0 if int(row[k]) == 1 else 1 for k in ("a", "b1", "b2")]
                counts[tuple(idx)] += int(row["count"])
        return cls(int(counts.sum()), seed, counts)


@dataclass(frozen=True)
class Estimate:
    i1_hat: float
    i2_hat: float
    i1_se: float
    i2_se: float

    def sigmas_above(self, bound: float = 2.0) -> tuple[float, float]:
        return (self.i1_hat - bound) / self.i1_se, (self.i2_hat - bound) / self.i2_se


def outcome_distribution(config: ProtocolConfig, x: int, y1: int, y2: int, state: TwoQubitState | None = None) -> np.ndarray:
    """Joint probabilities of (a, b1, b2) for one setting triple, in OUTCOMES order.

    Bob1's outcome is drawn first from the weak measurement on the shared
    state; Alice and Bob2 then measure projectively on the collapsed state.
    """
    state = phi_plus() if state is None else state
    wm = bob1_weak_measurements(config.G, config.gamma)[y1]
    bob2_angle = (config.delta, -config.delta)[y2]
    alice = observable(ALICE_ANGLES[x]).projectors()
    bob2 = observable(bob2_angle).projectors()
    probs = np.zeros(8)
    for ib1, b1 in enumerate((+1, -1)):
        try:
            post, p_b1 = apply_conditional(state, wm, 2, b1)
        except ZeroProbabilityOutcome:
            continue
        for ia, ib2 in itertools.product((0, 1), repeat=2):
            p = post.expectation(kron(alice[ia], bob2[ib2]))
            probs[4 * ia + 2 * ib1 + ib2] = p_b1 * max(p, 0.0)
    return probs / probs.sum()


def _block_counts(dists: np.ndarray, n: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    settings = rng.integers(0, 8, size=n)
    u = rng.random(n)
    cdf = np.cumsum(dists, axis=1)
    cdf[:, -1] = 1.0
    outcome = (u[:, None] >= cdf[settings]).sum(axis=1)
    flat = np.bincount(settings * 8 + outcome, minlength=64)
    return flat.reshape((2,) * 6)


def run_trials(
    config: ProtocolConfig,
    shots: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK,
    workers: int = 1,
    state: TwoQubitState | None = None,
) -> TrialBatch:
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots!r}")
    dists = np.array([outcome_distribution(config, *s, state=state) for s in SETTINGS])
    n_blocks = math.ceil(shots / block_size)
    sizes = [block_size] * (n_blocks - 1) + [shots - block_size * (n_blocks - 1)]
    streams = np.random.SeedSequence(seed).spawn(n_blocks)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(_block_counts, [dists] * n_blocks, sizes, streams))
    else:
        parts = [_block_counts(dists, n, s) for n, s in zip(sizes, streams)]
    counts = np.sum(parts, axis=0, dtype=np.int64)
    return TrialBatch(shots, seed, counts, config, block_size)


def _correlator(n: np.ndarray) -> tuple[float, float, int]:
    """Correlator and its binomial standard error from a 2x2 outcome table."""
    total = int(n.sum())
    e = float(n[0, 0] + n[1, 1] - n[0, 1] - n[1, 0]) / total
    return e, math.sqrt(max(1 - e * e, 0.0) / total), total


def pair_correlators(batch: TrialBatch, pair: str) -> dict[tuple[int, int], tuple[float, float]]:
    """(E, SE) per (alice_setting, bob_setting) for pair 'bob1' or 'bob2'."""
    c = batch.counts
    out = {}
    for x, y in itertools.product((0, 1), repeat=2):
        if pair == "bob1":
            table = c[x, y].sum(axis=(0, 3))  # over y2, b2 -> [a, b1]
        elif pair == "bob2":
            table = c[x, :, y].sum(axis=(0, 2))  # over y1, b1 -> [a, b2]
        else:
            raise ValueError(pair)
        if table.sum() == 0:
            raise InsufficientDataError(f"no trials with alice_setting={x}, {pair}_setting={y}")
        e, se, _ = _correlator(table)
        out[x, y] = (e, se)
    return out


def estimate_chsh(batch: TrialBatch) -> Estimate:
    for x, y1, y2 in SETTINGS:
        if batch.counts[x, y1, y2].sum() == 0:
            raise InsufficientDataError(
                f"setting combination (alice={x}, bob1={y1}, bob2={y2}) was never observed"
            )
    vals = []
    for pair in ("bob1", "bob2"):
        e = pair_correlators(batch, pair)
        chsh = e[0, 0][0] + e[1, 0][0] + e[0, 1][0] - e[1, 1][0]
        se = math.sqrt(sum(v[1] ** 2 for v in e.values()))
        vals.append((chsh, se))
    return Estimate(vals[0][0], vals[1][0], vals[0][1], vals[1][1])


def alice_marginals(batch: TrialBatch) -> np.ndarray:
    """P(a = +1) for every (x, y1, y2) setting triple, shape (2, 2, 2)."""
    c = batch.counts
    n_plus = c[:, :, :, 0].sum(axis=(3, 4))
    return n_plus / c.sum(axis=(3, 4, 5))
