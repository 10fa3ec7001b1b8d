import os
from typing import Optional

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.stats import unitary_group

from heatstat.models import (
    HermitianSpec,
    InitialState,
    Observable,
    ProtocolSpec,
    WaitingTimeDistribution,
)
from heatstat.scheduler import BatchScheduler

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=8, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def haar_unitary(n: int, seed: int) -> np.ndarray:
    if n == 1:
        return np.eye(1, dtype=complex)
    return unitary_group.rvs(n, random_state=seed)


def random_energies(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.sort(rng.uniform(-2.0, 2.0, n))


def random_waits(rng: np.random.Generator, atoms: int) -> WaitingTimeDistribution:
    return WaitingTimeDistribution(rng.uniform(0.05, 3.0, atoms), rng.dirichlet(np.ones(atoms)))


def random_spec(rng: np.random.Generator, n: int, M: int, beta: Optional[float] = None,
                atoms: Optional[int] = None) -> ProtocolSpec:
    """무작위 에너지, Haar 관측량, 깁스 또는 무작위 대각 초기 상태"""
    energies = random_energies(rng, n)
    W = haar_unitary(n, int(rng.integers(2 ** 31)))
    initial = (InitialState.gibbs(energies, beta) if beta is not None
               else InitialState.explicit(rng.dirichlet(np.ones(n))))
    waits = random_waits(rng, atoms if atoms is not None else int(rng.integers(1, 4)))
    return ProtocolSpec(HermitianSpec.from_energies(energies), Observable(np.arange(n, dtype=float), W),
                        initial, waits, M)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def qutrit_spec() -> ProtocolSpec:
    """세 준위, 깁스 beta=0.7, 두 원자 대기 시간"""
    energies = np.array([-1.0, 0.3, 1.2])
    return ProtocolSpec(
        HermitianSpec.from_energies(energies),
        Observable(np.array([0.0, 1.0, 2.0]), haar_unitary(3, 7)),
        InitialState.gibbs(energies, 0.7),
        WaitingTimeDistribution(np.array([0.4, 1.3]), np.array([0.25, 0.75])),
        4,
    )


@pytest.fixture
def serial() -> BatchScheduler:
    return BatchScheduler(threads=1)
