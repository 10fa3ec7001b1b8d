import numpy as np
import pytest

from heatstat.errors import ConfigError
from heatstat.models import unitarity_deviation
from heatstat.presets import KNOWN_PRESETS, observable_from_preset


def test_energy_preset_is_identity():
    obs = observable_from_preset("energy", 3)
    np.testing.assert_array_equal(obs.basis, np.eye(3))


def test_qubit_preset_layout():
    obs = observable_from_preset("qubit(0.6, 0.8)", 2)
    np.testing.assert_allclose(obs.basis, [[-0.8, 0.6], [0.6, 0.8]])
    np.testing.assert_array_equal(obs.values, [1.0, 2.0])


@pytest.mark.parametrize("preset, n, field", [
    ("qubit(0.6, 0.8)", 3, "observable"),
    ("qubit(0.6)", 2, "observable"),
    ("qubit(0.6, 0.6)", 2, "observable.a"),
    ("qubit(x, 0.8)", 2, "observable.a"),
    ("random(abc)", 3, "observable.seed"),
    ("block(2, 2)", 3, "observable"),
    ("energy(1)", 2, "observable"),
    ("fourier", 3, "observable"),
])
def test_bad_presets_name_the_field(preset, n, field):
    with pytest.raises(ConfigError) as info:
        observable_from_preset(preset, n)
    assert info.value.field == field


def test_random_preset_is_reproducible():
    a = observable_from_preset("random(11)", 4)
    b = observable_from_preset(" random( 11 ) ", 4)
    np.testing.assert_array_equal(a.basis, b.basis)
    assert unitarity_deviation(a.basis) < 1e-12


def test_block_preset_keeps_blocks_separate():
    W = observable_from_preset("block(2,1)", 3).basis
    assert unitarity_deviation(W) < 1e-12
    np.testing.assert_allclose(np.abs(W[:2, :2]) ** 2, 0.5)
    np.testing.assert_array_equal(W[2], [0, 0, 1])
    np.testing.assert_array_equal(W[:2, 2], [0, 0])


def test_known_presets():
    assert sorted(KNOWN_PRESETS) == ["block", "energy", "qubit", "random"]
