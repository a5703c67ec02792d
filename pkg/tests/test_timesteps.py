"""Mixture timestep distribution: sampling statistics and interval mass."""

import numpy as np
import pytest

from flashsr.diffusion.timesteps import (
    TimestepDistribution,
    default_few_step,
    interval_prob,
    sample_timestep,
)


def test_default_parameters():
    d = default_few_step()
    np.testing.assert_allclose(d.centers, [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(d.stds, [0.1] * 4)
    np.testing.assert_allclose(d.weights, [0.25] * 4)


def test_validation():
    with pytest.raises(ValueError):
        TimestepDistribution(centers=(0.5,), stds=(0.1,), weights=(0.9,))
    with pytest.raises(ValueError):
        TimestepDistribution(centers=(0.5, 0.7), stds=(0.1,), weights=(1.0,))
    with pytest.raises(ValueError):
        TimestepDistribution(centers=(1.5,), stds=(0.1,), weights=(1.0,))
    with pytest.raises(ValueError):
        TimestepDistribution(centers=(0.5,), stds=(-0.1,), weights=(1.0,))


def test_samples_in_unit_interval(rng):
    d = default_few_step()
    x = sample_timestep(d, rng, size=20000)
    assert x.shape == (20000,)
    assert np.all(x >= 0.0) and np.all(x <= 1.0)


def test_scalar_draw(rng):
    t = sample_timestep(default_few_step(), rng)
    assert np.isscalar(t) or np.ndim(t) == 0
    assert 0.0 <= float(t) <= 1.0


def test_interval_prob_total_mass():
    d = default_few_step()
    assert interval_prob(d, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    # disjoint partition sums to one
    edges = np.linspace(0.0, 1.0, 11)
    total = sum(interval_prob(d, a, b) for a, b in zip(edges[:-1], edges[1:]))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_atom_distribution(rng):
    # zero-width components become point masses
    d = TimestepDistribution(centers=(0.25, 0.75), stds=(0.0, 0.0), weights=(0.3, 0.7))
    x = sample_timestep(d, rng, size=4000)
    assert set(np.unique(x)) == {0.25, 0.75}
    assert interval_prob(d, 0.2, 0.3) == pytest.approx(0.3)
    assert interval_prob(d, 0.7, 0.8) == pytest.approx(0.7)
    frac = np.mean(x == 0.75)
    assert abs(frac - 0.7) < 0.03


def test_chi_square_against_interval_prob():
    # sampled histogram agrees with interval_prob mass
    d = default_few_step()
    rng = np.random.default_rng(7)
    n = 100000
    x = sample_timestep(d, rng, size=n)
    edges = np.linspace(0.0, 1.0, 21)
    counts, _ = np.histogram(x, bins=edges)
    expected = np.array(
        [interval_prob(d, a, b) for a, b in zip(edges[:-1], edges[1:])]) * n
    keep = expected > 5
    chi2 = np.sum((counts[keep] - expected[keep]) ** 2 / expected[keep])
    dof = keep.sum() - 1
    # chi2 critical value at p=0.001 for dof<=19 is < 45; generous bound
    assert chi2 < max(45.0, 3.0 * dof)


def test_clipping_accumulates_at_one():
    # the 1.0-centered component clips half its mass to the boundary
    d = default_few_step()
    rng = np.random.default_rng(11)
    x = sample_timestep(d, rng, size=50000)
    assert np.mean(x == 1.0) > 0.10
