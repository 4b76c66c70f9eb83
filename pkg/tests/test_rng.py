"""Unit tests for the seeded Philox generator."""

import numpy as np
import pytest

from qamnet.tools.rng import SeededRNG


class TestSeededRNG:
    """Tests for determinism and stream separation."""

    def test_same_seed_same_numbers(self):
        """Test two generators with one (seed, stream) agree bitwise."""
        a = SeededRNG(42, 3).phases(100)
        b = SeededRNG(42, 3).phases(100)

        assert a.tobytes() == b.tobytes()

    def test_streams_differ(self):
        """Test different streams of one seed give different numbers."""
        assert not np.array_equal(SeededRNG(42, 0).uniform(0, 1, 8), SeededRNG(42, 1).uniform(0, 1, 8))

    def test_key_layout(self):
        """Test the Philox key packs seed and stream into two 64-bit words."""
        rng = SeededRNG(7, 5)
        reference = np.random.Generator(np.random.Philox(key=np.array([7, 5], dtype=np.uint64)))

        assert rng.uniform(0, 1, 4).tobytes() == reference.uniform(0, 1, 4).tobytes()

    def test_fork(self):
        """Test fork keeps the seed and switches the stream."""
        child = SeededRNG(9).fork(4)

        assert (child.seed, child.stream) == (9, 4)
        assert child.phases(3).tobytes() == SeededRNG(9, 4).phases(3).tobytes()

    def test_ranges(self):
        """Test each draw stays within its documented range."""
        rng = SeededRNG(1)

        phases = rng.phases(10_000)
        assert phases.min() >= 0.0 and phases.max() < 2 * np.pi
        assert set(np.unique(rng.signs(1000)).tolist()) == {-1.0, 1.0}
        assert all(0 <= rng.integers(5) < 5 for _ in range(200))

    def test_choice_is_distinct(self):
        """Test choice draws distinct indices."""
        picks = SeededRNG(2).choice(20, 20)

        assert sorted(picks.tolist()) == list(range(20))

    def test_u64_bounds(self):
        """Test negative and oversized seeds are rejected."""
        with pytest.raises(ValueError):
            SeededRNG(-1)
        with pytest.raises(ValueError):
            SeededRNG(2**64)
        SeededRNG(2**64 - 1, 2**64 - 1)
