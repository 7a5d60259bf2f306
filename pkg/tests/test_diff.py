import itertools
import math
import random

import numpy as np
import pytest

from keystream_lab.diff import (
    AdvantageEstimate,
    TrialConfig,
    avalanche_profile,
    collision_trial_batch,
    default_delta_set,
    distinguisher_advantage,
    propagation_track,
    rotation_sweep,
    seed_delta,
    wilson_interval,
)

from helpers import qrf_forward, qrf_small


class TestSeedDelta:
    def test_frozen_value(self):
        assert seed_delta((1,), 1) == (6,)

    def test_zero_inputs(self):
        assert seed_delta((0,), 7) == (0,)
        assert seed_delta((0xDEADBEEF,), 0) == (0,)

    def test_word_count_preserved(self):
        assert len(seed_delta((1, 2, 3, 4), 5)) == 4

    def test_shift_range_validated(self):
        with pytest.raises(ValueError):
            seed_delta((1,), 32)
        with pytest.raises(ValueError):
            seed_delta((1,), -1)
        with pytest.raises(ValueError):
            seed_delta((), 1)


class TestTrialConfig:
    def test_rounds_sorted_and_deduped(self):
        cfg = TrialConfig(rounds=(4, 1, 4, 2))
        assert cfg.rounds == (1, 2, 4)

    def test_minimum_trials(self):
        with pytest.raises(ValueError):
            TrialConfig(trials=100)

    def test_empty_rounds_rejected(self):
        with pytest.raises(ValueError):
            TrialConfig(rounds=())


class TestCollisionTrials:
    CFG = TrialConfig(trials=1 << 12, rounds=(1, 2), rng_seed=42)

    def test_zero_delta_always_collides(self):
        stats = collision_trial_batch((0, 0, 0, 0), self.CFG)
        for st in stats.values():
            assert st.full_collisions == st.trials
            assert st.partial_collisions == 0
            assert st.p_hat == 1.0
            assert not st.passes_bound

    def test_nonzero_delta_never_fully_collides(self):
        # the quarter round is a bijection, so exact collisions need delta = 0
        stats = collision_trial_batch((0, 0, 0, 0x80000000), self.CFG)
        for st in stats.values():
            assert st.full_collisions == 0

    def test_reproducible_and_batch_invariant(self):
        delta = (0, 0, 0, 1)
        a = collision_trial_batch(delta, self.CFG, batch=1 << 12)
        b = collision_trial_batch(delta, self.CFG, batch=1 << 12)
        assert {r: s.as_dict() for r, s in a.items()} == \
               {r: s.as_dict() for r, s in b.items()}

    def test_eight_word_delta_accepted(self):
        stats = collision_trial_batch((0,) * 7 + (1,), self.CFG)
        assert set(stats) == {1, 2}

    def test_bad_delta_length(self):
        with pytest.raises(ValueError):
            collision_trial_batch((0, 0, 0), self.CFG)

    def test_exhaustive_small_width_oracle(self):
        """Exhaustively enumerate the 4-bit-word quarter round and compare
        near-collision rates against the sampling harness at the same width."""
        bits, thresh = 4, 2
        delta = (0, 0, 0, 8)
        total = 0
        near = 0
        for quad in itertools.product(range(16), repeat=4):
            xp = tuple((w ^ d) & 0xF for w, d in zip(quad, delta))
            y = qrf_small(quad, bits)
            yp = qrf_small(xp, bits)
            hw = sum(bin(a ^ b).count("1") for a, b in zip(y, yp))
            total += 1
            if 0 < hw <= thresh:
                near += 1
        exact_p = near / total
        cfg = TrialConfig(trials=1 << 16, rounds=(1,),
                          partial_threshold_bits=thresh, rng_seed=3)
        st = collision_trial_batch(delta, cfg, word_bits=bits)[1]
        # sampled estimate within 5 binomial sigma of the exhaustive truth
        sigma = math.sqrt(exact_p * (1 - exact_p) / cfg.trials)
        assert st.full_collisions == 0
        assert abs(st.p_hat - exact_p) <= 5 * max(sigma, 1e-9)

    def test_decay_with_rounds(self):
        cfg = TrialConfig(trials=1 << 16, rounds=(1, 2, 4), rng_seed=0)
        stats = collision_trial_batch((0, 0, 0, 0x80000000), cfg)
        assert stats[1].collisions > stats[2].collisions
        assert stats[4].collisions == 0
        assert stats[4].passes_bound

    def test_default_delta_set_nonzero(self):
        deltas = default_delta_set(seed_patterns=[0xABCD])
        assert len(deltas) == 7
        assert all(any(w for w in d) for d in deltas)
        assert all(len(d) == 4 for d in deltas)


class TestPropagation:
    def test_matches_paired_evaluation(self):
        rng = random.Random(4)
        for _ in range(20):
            x = tuple(rng.getrandbits(32) for _ in range(4))
            delta = tuple(rng.getrandbits(32) for _ in range(4))
            track = propagation_track(delta, x, 3)
            y = x
            yp = tuple(a ^ d for a, d in zip(x, delta))
            for r in range(3):
                y = qrf_forward(*y)
                yp = qrf_forward(*yp)
                assert track[r] == tuple(a ^ b for a, b in zip(y, yp))

    def test_round_count_validated(self):
        with pytest.raises(ValueError):
            propagation_track((1, 0, 0, 0), (0, 0, 0, 0), 0)


class TestAvalanche:
    def test_identity_at_zero_rounds(self):
        profile = avalanche_profile(0, trials=8, rng_seed=1)
        assert np.array_equal(profile.matrix, np.eye(128))

    def test_probabilities_in_range(self):
        profile = avalanche_profile(1, trials=64, rng_seed=2)
        assert profile.matrix.min() >= 0.0
        assert profile.matrix.max() <= 1.0
        assert profile.matrix.shape == (128, 128)

    def test_two_rounds_near_half(self):
        profile = avalanche_profile(2, trials=2000, rng_seed=3)
        means = profile.word_means
        assert means.shape == (4,)
        assert np.all(means > 0.4) and np.all(means < 0.6)

    def test_reproducible(self):
        a = avalanche_profile(1, trials=32, rng_seed=9)
        b = avalanche_profile(1, trials=32, rng_seed=9)
        assert np.array_equal(a.matrix, b.matrix)

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            avalanche_profile(1, trials=0)


class TestSweep:
    def test_sweep_shapes_and_bound(self):
        cfg = TrialConfig(trials=1 << 14, rounds=(4,), rng_seed=5)
        sets = [(16, 12, 8, 7, 4, 2), (7, 9, 13, 18, 4, 2)]
        results = rotation_sweep(sets, cfg)
        assert [r.rotations for r in results] == sets
        for res in results:
            assert res.collision.passes_bound
            # diffusion saturates near 64 of 128 bits
            assert 55 < res.mean_flipped_bits < 73
            assert res.flipped_bits_se > 0

    def test_invalid_rotation_set(self):
        cfg = TrialConfig(trials=1 << 10, rounds=(1,))
        with pytest.raises(ValueError):
            rotation_sweep([(16, 12, 8)], cfg)
        with pytest.raises(ValueError):
            rotation_sweep([(0, 12, 8, 7, 4, 2)], cfg)


class TestAdvantage:
    def test_wilson_basics(self):
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi
        assert wilson_interval(0, 10)[0] == 0.0
        assert wilson_interval(10, 10)[1] == 1.0
        with pytest.raises(ValueError):
            wilson_interval(0, 0)

    def test_identical_behaviour_contains_zero(self):
        rng = random.Random(8)
        a = rng.randbytes(4096)
        b = rng.randbytes(4096)
        est = distinguisher_advantage(lambda chunk: False, a, b, samples=16)
        assert est.adv == 0.0
        assert est.contains_zero

    def test_perfect_detector_excludes_zero(self):
        a = b"\x00" * 4096
        b_ = b"\xff" * 4096
        est = distinguisher_advantage(lambda c: c[0] == 0, a, b_, samples=64)
        assert est.adv == 1.0
        assert not est.contains_zero

    def test_validation(self):
        with pytest.raises(ValueError):
            distinguisher_advantage(lambda c: True, b"ab", b"a", 1)
        with pytest.raises(ValueError):
            distinguisher_advantage(lambda c: True, b"ab", b"cd", 0)
        with pytest.raises(ValueError):
            distinguisher_advantage(lambda c: True, b"ab", b"cd", 5)
