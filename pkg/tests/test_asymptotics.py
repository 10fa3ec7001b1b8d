import numpy as np
import pytest

from heatstat.asymptotics import (
    asymptotic_char_fn,
    block_projector,
    convergence_profile,
    detect_blocks,
    estimate_rate,
    fixed_point_multiplicity,
    limiting_conditional,
    limiting_final_populations,
    thermalization_report,
    zeno_escape,
    zeno_scaling,
)
from heatstat.errors import ConfigError, DegenerateFit
from heatstat.exact import char_fn, conditional_table, final_populations
from heatstat.models import (
    HermitianSpec,
    InitialState,
    Observable,
    ProtocolSpec,
    Regime,
    WaitingTimeDistribution,
)
from heatstat.presets import block_observable, qubit_observable
from heatstat.protocol import protocol_matrices
from heatstat.qcore import matrix_power

from conftest import random_spec


def block_spec(M: int = 2) -> ProtocolSpec:
    """{E1, E2}를 섞고 E3를 고립시킨 2+1 블록"""
    energies = np.array([-1.0, 0.4, 1.5])
    return ProtocolSpec(
        HermitianSpec.from_energies(energies),
        block_observable(3, ["2", "1"]),
        InitialState.explicit([0.5, 0.3, 0.2]),
        WaitingTimeDistribution(np.array([0.7, 1.9]), np.array([0.5, 0.5])),
        M,
    )


def generic_specs(rng, count: int, M: int):
    """R = 1이고 스펙트럼 간격이 있는 (|lambda_2| < 0.9) 무작위 세 준위 스펙"""
    found = []
    while len(found) < count:
        spec = random_spec(rng, 3, M, atoms=2)
        if detect_blocks(spec).count == 1 and estimate_rate(spec) < 0.9:
            found.append(spec)
    return found


def test_generic_spec_has_single_block(rng):
    for spec in generic_specs(rng, 20, 500):
        L_bar = protocol_matrices(spec).L_bar
        assert np.max(np.abs(matrix_power(L_bar, spec.M - 1) - 1.0 / 3)) <= 1e-6
        np.testing.assert_allclose(final_populations(spec), 1.0 / 3, atol=1e-6)


def test_partial_thermalization_block_formula():
    spec = block_spec(M=400)
    blocks = detect_blocks(spec)
    assert blocks.blocks == ((0, 1), (2,))
    P = limiting_conditional(spec)
    np.testing.assert_array_equal(P, [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(final_populations(spec), limiting_final_populations(spec), atol=1e-6)
    np.testing.assert_allclose(limiting_final_populations(spec), [0.4, 0.4, 0.2], atol=1e-12)


def test_block_projector_is_idempotent():
    P = block_projector(detect_blocks(block_spec()), 3)
    np.testing.assert_allclose(P @ P, P, atol=1e-15)


def test_fixed_point_multiplicity_counts_blocks():
    spec = block_spec()
    assert fixed_point_multiplicity(spec) == pytest.approx(2.0, abs=1e-6)


def test_thermalization_regimes(rng):
    assert thermalization_report(block_spec(M=50)).regime == Regime.PARTIAL
    generic = random_spec(rng, 3, 50, atoms=2)
    report = thermalization_report(generic)
    assert report.regime == Regime.INFINITE_TEMPERATURE
    assert report.as_dict()["R"] == 1
    assert 0.0 <= report.rate < 1.0
    energies = np.array([-1.0, 0.0, 1.0])
    frozen = ProtocolSpec(HermitianSpec.from_energies(energies), Observable.energy_basis(3),
                          InitialState.gibbs(energies, 1.0), WaitingTimeDistribution.deterministic(1.0), 10)
    assert thermalization_report(frozen).regime == Regime.ZENO_FROZEN


def test_convergence_profile_decreases(rng):
    spec = generic_specs(rng, 1, 10)[0]
    profile = convergence_profile(spec, [1, 10, 100, 400])
    distances = [d for _, d in profile]
    assert distances[-1] <= 1e-6
    assert distances[-1] <= distances[0]
    with pytest.raises(ConfigError):
        convergence_profile(spec, [10, 5])


def test_asymptotic_charfn_matches_large_M():
    spec = block_spec(M=400)
    for u in (0.0, 0.7, -1.3, 0.4j):
        assert abs(asymptotic_char_fn(spec, u).value - char_fn(spec, u).value) <= 1e-6
    assert abs(asymptotic_char_fn(spec, 0.0).value - 1.0) <= 1e-12


def test_asymptotic_charfn_trivial_for_commuting_observable():
    energies = np.array([-1.0, 0.5, 2.0])
    spec = ProtocolSpec(HermitianSpec.from_energies(energies), Observable.energy_basis(3),
                        InitialState.gibbs(energies, 0.3), WaitingTimeDistribution.deterministic(1.0), 3)
    for u in (0.2, 1.1, -2.0):
        assert abs(asymptotic_char_fn(spec, u).value - 1.0) <= 1e-12


def qubit_zeno_spec(M: int = 10) -> ProtocolSpec:
    s = 1 / np.sqrt(2)
    return ProtocolSpec(HermitianSpec.from_energies([-1.0, 1.0]), qubit_observable(2, [str(s), str(s)]),
                        InitialState.explicit([0.5, 0.5]), WaitingTimeDistribution.deterministic(0.1), M)


def test_zeno_scaling_slope():
    slope, escapes = zeno_scaling(qubit_zeno_spec(), 1.0, [10, 20, 50, 100, 200, 500, 1000])
    assert slope == pytest.approx(-1.0, abs=0.1)
    assert [M for M, _ in escapes] == [10, 20, 50, 100, 200, 500, 1000]
    assert all(a > b for (_, a), (_, b) in zip(escapes, escapes[1:]))


def test_zeno_escape_matches_conditional_off_diagonal():
    spec = qubit_zeno_spec()
    e = zeno_escape(spec, 1.0, 10)
    assert 0.0 < e < 0.5


def test_zeno_scaling_degenerate():
    energies = np.array([-1.0, 1.0])
    spec = ProtocolSpec(HermitianSpec.from_energies(energies), Observable.energy_basis(2),
                        InitialState.explicit([0.5, 0.5]), WaitingTimeDistribution.deterministic(1.0), 2)
    with pytest.raises(DegenerateFit):
        zeno_scaling(spec, 1.0, [10, 100])
    with pytest.raises(DegenerateFit):
        zeno_scaling(qubit_zeno_spec(), 1.0, [10])


def test_zeno_escape_halves_when_measurements_double():
    spec = qubit_zeno_spec()
    for M in (100, 400):
        ratio = zeno_escape(spec, 1.0, 2 * M) / zeno_escape(spec, 1.0, M)
        assert 0.45 <= ratio <= 0.55
