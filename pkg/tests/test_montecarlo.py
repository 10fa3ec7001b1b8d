import numpy as np
import pytest

from heatstat.errors import ConfigError
from heatstat.exact import conditional_table, heat_distribution, moments
from heatstat.models import (
    HermitianSpec,
    InitialState,
    Observable,
    ProtocolSpec,
    Trajectory,
    WaitingTimeDistribution,
)
from heatstat.montecarlo import (
    BLOCK_SIZE,
    empirical_conditional,
    empirical_heat_histogram,
    estimate_jarzynski,
    estimate_moment,
    sample_trajectories,
    sample_trajectory,
    total_variation,
)
from heatstat.protocol import IIDSampler, boundary_matrix_A, boundary_matrix_B
from heatstat.scheduler import BatchScheduler


def test_batch_shapes_and_heat(qutrit_spec, serial):
    batch = sample_trajectories(qutrit_spec, 1000, seed=3, scheduler=serial)
    assert len(batch) == 1000
    assert batch.outcomes.shape == (1000, qutrit_spec.M)
    assert set(np.unique(batch.waits)) <= {0.4, 1.3}
    E = qutrit_spec.energies
    np.testing.assert_array_equal(batch.heat, E[batch.final] - E[batch.initial])
    t = batch.trajectory(5)
    assert len(t.outcomes) == qutrit_spec.M
    assert t.heat == pytest.approx(E[t.final] - E[t.initial])


def test_same_seed_same_output_for_any_thread_count(qutrit_spec):
    count = 2 * BLOCK_SIZE + 17
    a = sample_trajectories(qutrit_spec, count, seed=11, scheduler=BatchScheduler(1))
    b = sample_trajectories(qutrit_spec, count, seed=11, scheduler=BatchScheduler(4))
    for name in ("initial", "outcomes", "waits", "final", "heat"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    c = sample_trajectories(qutrit_spec, count, seed=12, scheduler=BatchScheduler(1))
    assert not np.array_equal(a.outcomes, c.outcomes)


def test_single_trajectory_is_reproducible(qutrit_spec):
    assert sample_trajectory(qutrit_spec, 5) == sample_trajectory(qutrit_spec, 5)


@pytest.mark.slow
def test_jarzynski_and_conditional_frequencies(qutrit_spec):
    count = 100_000
    batch = sample_trajectories(qutrit_spec, count, seed=2024, scheduler=BatchScheduler(2))
    report = estimate_jarzynski(qutrit_spec, count, batch=batch)
    assert report.count == count
    assert report.passed
    assert report.as_dict()["pass"] is True

    freq, _ = empirical_conditional(batch, qutrit_spec.dimension)
    exact = conditional_table(qutrit_spec).matrix
    per_initial = np.bincount(batch.initial, minlength=qutrit_spec.dimension)
    sigma = np.sqrt(exact * (1.0 - exact) / per_initial[None, :])
    assert np.all(np.abs(freq - exact) <= 5 * sigma + 1e-12)

    histogram = empirical_heat_histogram(qutrit_spec, count, batch=batch)
    assert histogram.total_mass() == pytest.approx(1.0)
    assert total_variation(histogram, heat_distribution(qutrit_spec)) < 0.02

    moment = estimate_moment(qutrit_spec, 1, count, batch=batch)
    assert moment.expected == pytest.approx(moments(qutrit_spec, 1))
    assert abs(moment.mean - moment.expected) <= 5 * moment.stderr


def test_jarzynski_needs_beta_for_non_gibbs_state(qutrit_spec):
    spec = ProtocolSpec(qutrit_spec.system, qutrit_spec.observable, InitialState.explicit([0.2, 0.3, 0.5]),
                        qutrit_spec.waits, qutrit_spec.M)
    with pytest.raises(ConfigError):
        estimate_jarzynski(spec, 10)
    report = estimate_jarzynski(spec, 100, beta=0.5)
    assert report.expected is None
    assert report.passed is None


def test_correlated_sampler_path(qutrit_spec, serial):
    def alternating(rng, count, M):
        first = rng.choice([0.4, 1.3], size=(count, 1))
        return np.where(np.arange(M)[None, :] % 2 == 0, first, 1.7 - first)

    spec = ProtocolSpec(qutrit_spec.system, qutrit_spec.observable, qutrit_spec.initial, alternating, qutrit_spec.M)
    batch = sample_trajectories(spec, 500, seed=1, scheduler=serial)
    np.testing.assert_allclose(batch.waits[:, 0] + batch.waits[:, 1], 1.7)


@pytest.mark.slow
def test_sampler_path_agrees_with_exact(qutrit_spec, serial):
    count = 60_000
    spec = ProtocolSpec(qutrit_spec.system, qutrit_spec.observable, qutrit_spec.initial,
                        IIDSampler(qutrit_spec.waits), qutrit_spec.M)
    batch = sample_trajectories(spec, count, seed=5, scheduler=serial)
    freq, _ = empirical_conditional(batch, spec.dimension)
    exact = conditional_table(qutrit_spec).matrix
    per_initial = np.bincount(batch.initial, minlength=spec.dimension)
    sigma = np.sqrt(exact * (1.0 - exact) / per_initial[None, :])
    assert np.all(np.abs(freq - exact) <= 5 * sigma + 1e-12)


def test_invalid_count(qutrit_spec):
    with pytest.raises(ConfigError):
        sample_trajectories(qutrit_spec, 0)


def test_single_trajectory_matches_first_of_batch(qutrit_spec, serial):
    batch = sample_trajectories(qutrit_spec, 3, seed=5, scheduler=serial)
    assert sample_trajectory(qutrit_spec, 5) == batch.trajectory(0)


def test_trajectory_streams_do_not_depend_on_count(qutrit_spec):
    short = sample_trajectories(qutrit_spec, 10, seed=9, scheduler=BatchScheduler(1))
    long = sample_trajectories(qutrit_spec, BLOCK_SIZE + 10, seed=9, scheduler=BatchScheduler(3))
    for name in ("initial", "outcomes", "waits", "final", "heat"):
        np.testing.assert_array_equal(getattr(short, name), getattr(long, name)[:10])
    i = BLOCK_SIZE + 3
    own = np.random.default_rng(np.random.SeedSequence([9, i]))
    assert sample_trajectory(qutrit_spec, own) == long.trajectory(i)


def _identity_observable_spec(initial: InitialState) -> ProtocolSpec:
    energies = np.array([-1.0, 0.3, 1.2])
    return ProtocolSpec(HermitianSpec.from_energies(energies),
                        Observable(np.array([0.0, 1.0, 2.0]), np.eye(3, dtype=complex)),
                        initial, WaitingTimeDistribution.deterministic(0.9), 4)


def test_identity_observable_gives_zero_heat(serial):
    spec = _identity_observable_spec(InitialState.gibbs([-1.0, 0.3, 1.2], 0.7))
    batch = sample_trajectories(spec, 2000, seed=4, scheduler=serial)
    assert np.all(batch.heat == 0.0)
    np.testing.assert_array_equal(batch.final, batch.initial)
    report = estimate_jarzynski(spec, 2000, batch=batch)
    assert report.mean == 1.0
    assert report.stderr == 0.0
    assert report.passed is True


def test_golden_trajectory_for_frozen_dynamics():
    spec = _identity_observable_spec(InitialState.explicit([0.0, 1.0, 0.0]))
    expected = Trajectory(initial=1, outcomes=(1, 1, 1, 1), waits=(0.9, 0.9, 0.9, 0.9), final=1, heat=0.0)
    for seed in (0, 1, 123456789):
        assert sample_trajectory(spec, seed) == expected


def test_zero_wait_reduces_to_two_point_statistics(qutrit_spec, serial):
    spec = ProtocolSpec(qutrit_spec.system, qutrit_spec.observable, qutrit_spec.initial,
                        WaitingTimeDistribution.deterministic(0.0), 3)
    two_point = boundary_matrix_B(spec.system, spec.observable) @ boundary_matrix_A(spec.system, spec.observable, 0.0)
    np.testing.assert_allclose(conditional_table(spec).matrix, two_point, atol=1e-12)

    count = 20_000
    batch = sample_trajectories(spec, count, seed=8, scheduler=serial)
    assert np.all(batch.outcomes == batch.outcomes[:, :1])
    freq, _ = empirical_conditional(batch, spec.dimension)
    per_initial = np.bincount(batch.initial, minlength=spec.dimension)
    sigma = np.sqrt(two_point * (1.0 - two_point) / per_initial[None, :])
    assert np.all(np.abs(freq - two_point) <= 5 * sigma + 1e-12)
