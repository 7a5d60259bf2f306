"""Rotational-differential harness over the extended quarter round.

Trials pair a uniform random quad x with x xor delta, run both through r
quarter rounds, and classify the output difference by Hamming weight.  Since
the quarter round is a bijection, the output difference for a nonzero delta
can never be exactly zero; the headline collision metric is therefore the
near-collision rate: output difference weight at most ``partial_threshold_bits``
(weight zero, only reachable with delta = 0, is tracked separately).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cipher import ROTATIONS, qrf_vec, rotl32, MASK32

_IDEAL_BOUND = 2.0 ** -32

if hasattr(np, "bitwise_count"):
    def _popcount(arr: np.ndarray) -> np.ndarray:
        return np.bitwise_count(arr).astype(np.int64)
else:  # numpy < 2.0
    _POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)

    def _popcount(arr: np.ndarray) -> np.ndarray:
        by = arr.view(np.uint8).reshape(arr.shape + (arr.dtype.itemsize,))
        return _POP8[by].sum(axis=-1)


def seed_delta(pattern_words, k: int) -> tuple[int, ...]:
    """Derive an input difference from pattern words.

    Each delta word is rotl(p, k) xor rotl((p << k) mod 2^32, k): the same
    k-bit rotation applied to the word and to its non-rotating left shift.
    k = 0 or p = 0 give a zero word.
    """
    if not 0 <= k < 32:
        raise ValueError("shift amount k must be in [0, 32)")
    words = tuple(int(p) & MASK32 for p in pattern_words)
    if not words:
        raise ValueError("pattern yields no words")
    return tuple(rotl32(p, k) ^ rotl32((p << k) & MASK32, k) for p in words)


@dataclass(frozen=True)
class TrialConfig:
    trials: int = 1 << 20
    rounds: tuple[int, ...] = (1, 2, 4, 8)
    partial_threshold_bits: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        if self.trials < 1 << 10:
            raise ValueError("trials must be >= 2^10")
        if not self.rounds:
            raise ValueError("rounds set must be nonempty")
        object.__setattr__(self, "rounds", tuple(sorted(set(self.rounds))))


@dataclass
class CollisionStats:
    rounds: int
    trials: int
    full_collisions: int        # output difference exactly zero
    partial_collisions: int     # 0 < weight <= threshold
    p_hat: float                # (full + partial) / trials
    sigma: float                # binomial standard error of p_hat
    passes_bound: bool          # p_hat < 2^-32 + 3 sigma

    @property
    def collisions(self) -> int:
        return self.full_collisions + self.partial_collisions

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "trials": self.trials,
            "full_collisions": self.full_collisions,
            "partial_collisions": self.partial_collisions,
            "collisions": self.collisions,
            "p_hat": self.p_hat,
            "sigma": self.sigma,
            "passes_bound": self.passes_bound,
        }


def _make_stats(rounds: int, trials: int, full: int, partial: int) -> CollisionStats:
    p_hat = (full + partial) / trials
    sigma = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    passes = p_hat < _IDEAL_BOUND + 3.0 * sigma
    return CollisionStats(rounds, trials, full, partial, p_hat, sigma, passes)


def collision_trial_batch(
    delta,
    cfg: TrialConfig,
    rotations=ROTATIONS,
    qrf_variant: str = "native",
    word_bits: int = 32,
    batch: int = 1 << 20,
) -> dict[int, CollisionStats]:
    """Per-round collision statistics for one input difference.

    ``delta`` holds 4 words (one quad) or 8 (two quads evaluated jointly,
    with the difference weight summed over both).  Fully reproducible from
    ``cfg.rng_seed``; results are independent of the batch size.
    """
    delta = tuple(int(d) for d in delta)
    if len(delta) not in (4, 8):
        raise ValueError("delta must hold 4 or 8 words")
    n_quads = len(delta) // 4
    rng = np.random.default_rng(cfg.rng_seed)
    max_round = max(cfg.rounds)
    full = {r: 0 for r in cfg.rounds}
    partial = {r: 0 for r in cfg.rounds}
    hi = 1 << word_bits
    remaining = cfg.trials
    with np.errstate(over="ignore"):
        while remaining > 0:
            n = min(batch, remaining)
            remaining -= n
            quads = []
            for q in range(n_quads):
                x = [rng.integers(0, hi, n, dtype=np.uint32) for _ in range(4)]
                xp = [w ^ np.uint32(delta[4 * q + i]) for i, w in enumerate(x)]
                quads.append((x, xp))
            state = [[list(x), list(xp)] for x, xp in quads]
            for r in range(1, max_round + 1):
                for pair in state:
                    for side in (0, 1):
                        pair[side] = list(
                            qrf_vec(*pair[side], rotations=rotations,
                                    variant=qrf_variant, word_bits=word_bits)
                        )
                if r in full:
                    hw = np.zeros(n, dtype=np.int64)
                    for x, xp in state:
                        for wa, wb in zip(x, xp):
                            hw += _popcount(wa ^ wb)
                    full[r] += int((hw == 0).sum())
                    partial[r] += int(
                        ((hw > 0) & (hw <= cfg.partial_threshold_bits)).sum()
                    )
    return {
        r: _make_stats(r, cfg.trials, full[r], partial[r]) for r in cfg.rounds
    }


def default_delta_set(seed_patterns=None) -> list[tuple[int, ...]]:
    """Default input differences for the campaign.

    Sparse single-bit differences in the c and d lanes (the slowest-diffusing
    injection points after one round), shift-seeded differences, and one
    dense pattern-seeded difference.  Extra patterns, e.g. frequent m-grams
    from a keystream scan, extend the set via ``seed_patterns``.
    """
    deltas = [
        (0, 0, 0x80000000, 0),
        (0, 0, 0, 0x80000000),
        (0, 0, 0, 1),
        (0, 0, 0, seed_delta((1,), 1)[0]),
        (0, 0, seed_delta((1,), 3)[0], 0),
        (0xDEADBEEF, 0x61707865, 0x3320646E, 0x9E3779B9),
    ]
    for p in seed_patterns or []:
        deltas.append(seed_delta((0, 0, p, p), 5))
    return deltas


def propagation_track(
    delta,
    x_quad: tuple[int, int, int, int],
    max_rounds: int,
    rotations=ROTATIONS,
    qrf_variant: str = "native",
) -> list[tuple[int, int, int, int]]:
    """Per-round output differences for one paired evaluation.

    The round-r entry is y_r xor y'_r where y follows x and y' follows
    x xor delta (the paired-evaluation reading of difference propagation;
    the quarter round itself is not linear over differences).
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    from .cipher import qrf

    delta = tuple(int(d) for d in delta[:4])
    x = tuple(int(w) for w in x_quad)
    xp = tuple(w ^ d for w, d in zip(x, delta))
    out = []
    for _ in range(max_rounds):
        x = qrf(x, rotations=rotations, variant=qrf_variant)
        xp = qrf(xp, rotations=rotations, variant=qrf_variant)
        out.append(tuple(a ^ b for a, b in zip(x, xp)))
    return out


@dataclass
class AvalancheProfile:
    """Flip-probability matrix: entry [i, j] is the probability that flipping
    input bit i of the 128-bit quad flips output bit j after ``rounds``
    quarter rounds.  Bits are numbered word-major (word index * 32 + bit)."""

    matrix: np.ndarray
    trials: int
    rounds: int

    @property
    def word_means(self) -> np.ndarray:
        """Mean flip probability per output word (averaged over all input
        flip positions and output bit positions)."""
        return self.matrix.mean(axis=0).reshape(4, 32).mean(axis=1)

    @property
    def word_profiles(self) -> np.ndarray:
        """Per-output-bit flip probability, shape (4, 32), averaged over
        input flip positions."""
        return self.matrix.mean(axis=0).reshape(4, 32)


def avalanche_profile(
    rounds: int,
    trials: int,
    rotations=ROTATIONS,
    qrf_variant: str = "native",
    rng_seed: int = 0,
) -> AvalancheProfile:
    """Measure per-bit flip probabilities of the quarter round.

    For each of the 128 input bit positions, ``trials`` random quads are
    evaluated with and without that bit flipped and output bit flips are
    accumulated.  rounds=0 is the identity map (exact indicator profile).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    matrix = np.zeros((128, 128), dtype=np.float64)
    shifts = np.arange(32, dtype=np.uint32)
    with np.errstate(over="ignore"):
        for in_word in range(4):
            for in_bit in range(32):
                x = [rng.integers(0, 1 << 32, trials, dtype=np.uint32) for _ in range(4)]
                xp = list(x)
                xp[in_word] = x[in_word] ^ np.uint32(1 << in_bit)
                if rounds > 0:
                    y, yp = list(x), list(xp)
                    for _ in range(rounds):
                        y = list(qrf_vec(*y, rotations=rotations, variant=qrf_variant))
                        yp = list(qrf_vec(*yp, rotations=rotations, variant=qrf_variant))
                else:
                    y, yp = x, xp
                row = 32 * in_word + in_bit
                for out_word in range(4):
                    d = y[out_word] ^ yp[out_word]
                    flips = ((d[:, None] >> shifts[None, :]) & np.uint32(1)).sum(axis=0)
                    matrix[row, 32 * out_word: 32 * out_word + 32] = flips / trials
    return AvalancheProfile(matrix, trials, rounds)


@dataclass
class SweepResult:
    rotations: tuple[int, ...]
    collision: CollisionStats       # at the largest configured round count
    mean_flipped_bits: float
    flipped_bits_se: float

    def as_dict(self) -> dict:
        return {
            "rotations": list(self.rotations),
            "collision_p_hat": self.collision.p_hat,
            "collision_passes_bound": self.collision.passes_bound,
            "mean_flipped_bits": self.mean_flipped_bits,
            "flipped_bits_se": self.flipped_bits_se,
        }


def rotation_sweep(
    constant_sets,
    cfg: TrialConfig,
    delta=(0, 0, 0, 0x80000000),
    qrf_variant: str = "native",
) -> list[SweepResult]:
    """Collision and diffusion metrics for substituted rotation constants.

    Mean flipped bits are measured on single-bit input differences after the
    largest configured round count (where diffusion has saturated for any
    rotation amounts in [1, 31]).
    """
    results = []
    max_round = max(cfg.rounds)
    for rotations in constant_sets:
        rotations = tuple(int(r) for r in rotations)
        if len(rotations) != 6 or any(not 1 <= r <= 31 for r in rotations):
            raise ValueError(f"rotation set {rotations} must be six amounts in [1, 31]")
        stats_by_round = collision_trial_batch(
            delta, cfg, rotations=rotations, qrf_variant=qrf_variant
        )
        collision = stats_by_round[max_round]
        # diffusion: weight of the output difference for a single random
        # input bit flip, after max_round rounds
        rng = np.random.default_rng(cfg.rng_seed ^ 0x5EED)
        n = min(cfg.trials, 1 << 16)
        x = [rng.integers(0, 1 << 32, n, dtype=np.uint32) for _ in range(4)]
        word = rng.integers(0, 4, n)
        bit = rng.integers(0, 32, n, dtype=np.uint32)
        xp = list(x)
        with np.errstate(over="ignore"):
            for wi in range(4):
                mask = np.where(word == wi, np.uint32(1) << bit, np.uint32(0))
                xp[wi] = x[wi] ^ mask.astype(np.uint32)
            y, yp = list(x), list(xp)
            for _ in range(max_round):
                y = list(qrf_vec(*y, rotations=rotations, variant=qrf_variant))
                yp = list(qrf_vec(*yp, rotations=rotations, variant=qrf_variant))
        hw = np.zeros(n, dtype=np.int64)
        for a, b in zip(y, yp):
            hw += _popcount(a ^ b)
        mean = float(hw.mean())
        se = float(hw.std(ddof=1) / math.sqrt(n))
        results.append(SweepResult(rotations, collision, mean, se))
    return results


@dataclass
class AdvantageEstimate:
    adv: float
    samples: int
    confidence_interval: tuple[float, float]  # signed difference of rates

    @property
    def contains_zero(self) -> bool:
        lo, hi = self.confidence_interval
        return lo <= 0.0 <= hi


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, centre - half), min(1.0, centre + half)


def distinguisher_advantage(
    detector,
    cipher_stream: bytes,
    random_stream: bytes,
    samples: int,
) -> AdvantageEstimate:
    """Acceptance-rate gap of a boolean detector between two streams.

    Each stream is split into ``samples`` equal chunks; the detector is
    evaluated per chunk.  The confidence interval combines per-rate Wilson
    intervals into a conservative interval for the signed rate difference.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if len(cipher_stream) != len(random_stream):
        raise ValueError("streams must have equal length")
    chunk = len(cipher_stream) // samples
    if chunk == 0:
        raise ValueError("streams too short for the requested sample count")

    def rate(stream: bytes) -> int:
        hits = 0
        for i in range(samples):
            if detector(stream[i * chunk: (i + 1) * chunk]):
                hits += 1
        return hits

    k_hits = rate(cipher_stream)
    r_hits = rate(random_stream)
    k_lo, k_hi = wilson_interval(k_hits, samples)
    r_lo, r_hi = wilson_interval(r_hits, samples)
    diff = k_hits / samples - r_hits / samples
    ci = (k_lo - r_hi, k_hi - r_lo)
    return AdvantageEstimate(abs(diff), samples, ci)
