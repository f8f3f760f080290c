import math

import numpy as np
import pytest
from scipy import stats

from dpknn import NoiseSource, noisy_argmax, noisy_count


def test_noise_source_is_replayable():
    a = NoiseSource(99)
    b = NoiseSource(99)
    assert a.standard_normal() == b.standard_normal()
    np.testing.assert_array_equal(a.standard_normal(8), b.standard_normal(8))
    assert a.draws == b.draws == 9


def test_noise_source_seeds_differ():
    assert NoiseSource(1).standard_normal() != NoiseSource(2).standard_normal()


def test_noisy_count_tiny_sigma_recovers_count():
    assert noisy_count(100, 1e-12, 30, NoiseSource(0)) == pytest.approx(100.0, abs=1e-9)


def test_noisy_count_clamps_to_floor():
    assert noisy_count(5, 1e-12, 30, NoiseSource(0)) == 30.0


def test_noisy_count_deterministic_under_seed():
    runs = [noisy_count(50, 10.0, 30, NoiseSource(777)) for _ in range(2)]
    assert runs[0] == runs[1]


def test_noisy_count_validation():
    with pytest.raises(ValueError):
        noisy_count(10, 0.0, 30, NoiseSource(0))
    with pytest.raises(ValueError):
        noisy_count(10, 1.0, 0.5, NoiseSource(0))


def test_noisy_argmax_empty_votes_rejected():
    with pytest.raises(ValueError):
        noisy_argmax(np.array([]), 1.0, NoiseSource(0))
    with pytest.raises(ValueError):
        noisy_argmax(np.array([1.0, 2.0]), 0.0, NoiseSource(0))


def test_noisy_argmax_follows_clear_margin():
    src = NoiseSource(5)
    votes = np.array([0.0, 50.0, 0.0])
    assert all(noisy_argmax(votes, 1.0, src) == 1 for _ in range(50))


def test_noisy_argmax_shift_invariant():
    votes = np.array([3.0, 1.0, 2.0, 0.5])
    a = [noisy_argmax(votes, 2.0, NoiseSource(s)) for s in range(200)]
    b = [noisy_argmax(votes + 17.5, 2.0, NoiseSource(s)) for s in range(200)]
    assert a == b


def test_two_class_selection_frequency_matches_gaussian_cdf():
    # votes (1, 0), unit variance: P(class 0) = P(N(0, 2) < 1) = Phi(1/sqrt(2))
    src = NoiseSource(2024)
    votes = np.array([1.0, 0.0])
    draws = 10_000
    wins = sum(noisy_argmax(votes, 1.0, src) == 0 for _ in range(draws))
    expected = stats.norm.cdf(1.0 / math.sqrt(2.0))
    assert expected == pytest.approx(0.7602, abs=1e-4)
    assert wins / draws == pytest.approx(expected, abs=0.02)


def test_equal_votes_select_uniformly():
    src = NoiseSource(4242)
    votes = np.zeros(4)
    draws = 10_000
    counts = np.bincount(
        [noisy_argmax(votes, 3.0, src) for _ in range(draws)], minlength=4
    )
    assert stats.chisquare(counts).pvalue > 0.01


def test_gaussian_moments():
    src = NoiseSource(31337)
    n = 100_000
    sample = src.standard_normal(n)
    # mean and variance within three standard errors of N(0, 1)
    assert abs(sample.mean()) <= 3.0 / math.sqrt(n)
    assert abs(sample.var() - 1.0) <= 3.0 * math.sqrt(2.0 / n)
