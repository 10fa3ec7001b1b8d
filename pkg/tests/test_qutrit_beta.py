import numpy as np
import pytest

from heatstat.errors import ConfigError, DegenerateRoot, NoRootInBracket
from heatstat.asymptotics import asymptotic_char_fn
from heatstat.exact import char_fn
from heatstat.models import InitialMode, WaitingTimeDistribution
from heatstat.presets import random_observable
from heatstat.qutrit_beta import (
    QutritEnsemble,
    asymptotic_G,
    asymptotic_G_direct,
    asymptotic_beta_bar,
    beta_eff_slope,
    normalization,
    qutrit_spec,
    solve_beta_eff,
    sweep_fig1,
)
from heatstat.scheduler import BatchScheduler

ENERGIES = (-2.0, 0.0, 1.0)


def test_weights_and_b_coefficients():
    ens = QutritEnsemble(ENERGIES, alpha=1.5, beta=0.7)
    c = ens.weights
    assert c.sum() == pytest.approx(1.0, abs=1e-15)
    b1, b2, b3 = ens.b_coefficients
    d1, d2, d3 = ens.deltas
    assert c[1] / c[0] == pytest.approx(np.exp(-b1 * d1), rel=1e-12)
    assert c[2] / c[1] == pytest.approx(np.exp(-b2 * d2), rel=1e-12)
    assert c[0] / c[2] == pytest.approx(np.exp(-b3 * d3), rel=1e-12)
    assert b1 * d1 + b2 * d2 + b3 * d3 == pytest.approx(0.0, abs=1e-12)
    assert normalization(ENERGIES) == pytest.approx(np.sqrt(42.0))


def test_alpha_zero_is_gibbs():
    ens = QutritEnsemble(ENERGIES, alpha=0.0, beta=1.3)
    boltz = np.exp(-1.3 * np.array(ENERGIES))
    np.testing.assert_allclose(ens.weights, boltz / boltz.sum(), rtol=1e-14)
    assert solve_beta_eff(ens) == 1.3


def test_from_weights_inverts_parametrization():
    ens = QutritEnsemble(ENERGIES, alpha=-4.2, beta=2.1)
    back = QutritEnsemble.from_weights(ENERGIES, ens.weights)
    assert back.alpha == pytest.approx(-4.2, abs=1e-10)
    assert back.beta == pytest.approx(2.1, abs=1e-10)
    with pytest.raises(ConfigError):
        QutritEnsemble.from_weights(ENERGIES, [0.5, 0.5, 0.0])


def test_unsorted_energies_rejected():
    with pytest.raises(ConfigError):
        QutritEnsemble((0.0, -2.0, 1.0), 1.0, 1.0)


def test_asymptotic_G_two_paths_agree():
    ens = QutritEnsemble(ENERGIES, alpha=3.0, beta=1.0)
    eps = np.linspace(-4.0, 4.0, 41)
    np.testing.assert_allclose(asymptotic_G(ens, eps), asymptotic_G_direct(ens, eps), rtol=1e-12)
    assert asymptotic_G(ens, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_asymptotic_G_matches_large_M_exact_engine():
    ens = QutritEnsemble(ENERGIES, alpha=2.0, beta=0.5)
    spec = qutrit_spec(ens, random_observable(3, ["4"]),
                       WaitingTimeDistribution(np.array([0.6, 1.7]), np.array([0.5, 0.5])), 600)
    assert spec.initial.mode == InitialMode.QUTRIT
    for eps in (0.3, -0.9):
        limit = asymptotic_G(ens, eps)
        assert abs(asymptotic_char_fn(spec, 1j * eps).value - limit) <= 1e-10
        assert abs(char_fn(spec, 1j * eps).value - limit) <= 1e-6


def test_shift_invariance():
    base = QutritEnsemble(ENERGIES, alpha=-3.0, beta=1.0)
    shifted = QutritEnsemble(tuple(e + 5.0 for e in ENERGIES), alpha=-3.0, beta=1.0)
    np.testing.assert_allclose(base.weights, shifted.weights, rtol=1e-12)
    assert solve_beta_eff(shifted) == pytest.approx(solve_beta_eff(base), abs=1e-9)


def test_beta_eff_root_and_mirror():
    ens = QutritEnsemble(ENERGIES, alpha=-5.0, beta=1.0)
    root = solve_beta_eff(ens)
    assert abs(asymptotic_G(ens, root) - 1.0) <= 1e-10
    assert root != 0.0
    mirrored = QutritEnsemble((-1.0, 0.0, 2.0), alpha=-5.0, beta=-1.0)
    assert solve_beta_eff(mirrored) == pytest.approx(-root, abs=1e-9)


def test_degenerate_root_for_tiny_alpha():
    with pytest.raises(DegenerateRoot):
        solve_beta_eff(QutritEnsemble(ENERGIES, alpha=1e-9, beta=0.0))


def test_no_root_in_small_bracket():
    ens = QutritEnsemble(ENERGIES, alpha=-20.0, beta=3.0)
    with pytest.raises(NoRootInBracket):
        solve_beta_eff(ens, eps_max=0.5)


def test_beta_bar_value_and_bounds():
    beta_bar = asymptotic_beta_bar(ENERGIES)
    assert beta_bar == pytest.approx(-0.48, abs=0.01)
    assert np.exp(2 * beta_bar) + np.exp(-beta_bar) == pytest.approx(2.0, abs=1e-12)
    assert -np.log(2.0) < beta_bar < np.log(2.0) / 2
    assert asymptotic_beta_bar((-1.0, 0.0, 1.0)) == 0.0
    wide = asymptotic_beta_bar((-1.0, 0.0, 50.0))
    assert 0.95 * np.log(2.0) <= wide < np.log(2.0)


def test_plateau_and_slope():
    beta_bar = asymptotic_beta_bar(ENERGIES)
    for beta in (0.0, 1.0, 2.0, 3.0):
        assert solve_beta_eff(QutritEnsemble(ENERGIES, 50.0, beta)) == pytest.approx(beta_bar, abs=1e-3)
    r = beta_eff_slope(ENERGIES)
    assert r == pytest.approx(-1.0 / np.sqrt(42.0))
    for beta in (0.0, 2.0):
        far = solve_beta_eff(QutritEnsemble(ENERGIES, -40.0, beta))
        near = solve_beta_eff(QutritEnsemble(ENERGIES, -30.0, beta))
        assert (far - near) / -10.0 == pytest.approx(r, rel=0.02)


@pytest.mark.slow
def test_fig1_sweep_passes_through_beta():
    alphas = np.linspace(-30.0, 10.0, 81)
    rows = sweep_fig1(ENERGIES, (0.0, 1.0, 2.0, 3.0), alphas, scheduler=BatchScheduler(2))
    assert len(rows) == 4 * 81
    assert [r.beta for r in rows[:81]] == [0.0] * 81
    for row in rows:
        if row.alpha == 0.0:
            assert row.beta_eff == pytest.approx(row.beta, abs=1e-8)
    assert not any(r.error for r in rows)


def test_sweep_records_failures_as_gaps():
    rows = sweep_fig1(ENERGIES, (0.0,), [1e-9, 0.0], scheduler=BatchScheduler(1))
    assert [r.alpha for r in rows] == [0.0, 1e-9]
    failed = [r for r in rows if r.error]
    assert len(failed) == 1
    assert failed[0].error == "DegenerateRoot"
    assert np.isnan(failed[0].beta_eff)
