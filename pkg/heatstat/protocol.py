"""
측정 프로토콜과 고전 확률 행렬
결과 확률은 열 확률 벡터 규약을 따른다: 성분 (i, j) = j -> i 전이 확률.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ConfigError, DimensionMismatch, UnsupportedDistribution
from .models import (
    HermitianSpec,
    Observable,
    ProtocolSpec,
    StochasticMatrix,
    WaitingTimeDistribution,
)
from .qcore import propagator

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-12


def _check_dims(spec: HermitianSpec, obs: Observable) -> None:
    if spec.dimension != obs.dimension:
        raise DimensionMismatch(f"시스템 차원 {spec.dimension} != 관측량 차원 {obs.dimension}")


def transition_matrix_L(spec: HermitianSpec, obs: Observable, tau: float) -> StochasticMatrix:
    """L(tau)_{ij} = |<alpha_i|U(tau)|alpha_j>|^2 (이중 확률 행렬)"""
    _check_dims(spec, obs)
    W = obs.basis
    U = propagator(spec, tau).phases
    amplitudes = W.conj().T @ (U[:, None] * W)
    return np.abs(amplitudes) ** 2


def boundary_matrix_A(spec: HermitianSpec, obs: Observable, tau: float) -> StochasticMatrix:
    """A(tau)_{kn} = |<alpha_k|U(tau)|E_n>|^2: 에너지 고유상태에서 첫 관측 결과로의 전이"""
    _check_dims(spec, obs)
    U = propagator(spec, tau).phases
    return np.abs(obs.basis.conj().T * U[None, :]) ** 2


def boundary_matrix_B(spec: HermitianSpec, obs: Observable) -> StochasticMatrix:
    """B_{mk} = |<E_m|alpha_k>|^2: 마지막 관측 결과에서 최종 에너지 측정으로"""
    _check_dims(spec, obs)
    return np.abs(obs.basis) ** 2


def averaged_matrix(build: Callable[[float], StochasticMatrix],
                    waits: WaitingTimeDistribution) -> StochasticMatrix:
    """sum_k p_k build(tau_k)"""
    total = None
    for tau, p in zip(waits.taus, waits.probs):
        term = p * np.asarray(build(float(tau)), dtype=float)
        total = term if total is None else total + term
    return total


def stochastic_deviation(T: np.ndarray, doubly: bool = False) -> float:
    """열 합(doubly=True면 행 합도)의 1로부터 최대 편차"""
    dev = float(np.max(np.abs(T.sum(axis=0) - 1.0)))
    if doubly:
        dev = max(dev, float(np.max(np.abs(T.sum(axis=1) - 1.0))))
    return dev


def is_stochastic(T: np.ndarray, doubly: bool = False, tol: float = STOCHASTIC_TOL) -> bool:
    return bool(np.all(T >= -tol) and np.all(T <= 1 + tol) and stochastic_deviation(T, doubly) <= tol)


@dataclass(frozen=True)
class ProtocolMatrices:
    """대기 시간 평균을 취한 A, L과 B, 그리고 원자별 행렬"""
    A_bar: np.ndarray
    L_bar: np.ndarray
    B: np.ndarray
    A_atoms: np.ndarray
    L_atoms: np.ndarray


def require_finite_waits(spec: ProtocolSpec) -> WaitingTimeDistribution:
    if not isinstance(spec.waits, WaitingTimeDistribution):
        raise UnsupportedDistribution("정확 엔진은 유한 지지 i.i.d. 대기 시간 분포만 지원합니다")
    return spec.waits


def protocol_matrices(spec: ProtocolSpec) -> ProtocolMatrices:
    """ProtocolSpec에서 정확 엔진과 몬테카를로가 공유하는 행렬 묶음을 만든다"""
    waits = require_finite_waits(spec)
    system, obs = spec.system, spec.observable
    A_atoms = np.stack([boundary_matrix_A(system, obs, t) for t in waits.taus])
    L_atoms = np.stack([transition_matrix_L(system, obs, t) for t in waits.taus])
    A_bar = np.tensordot(waits.probs, A_atoms, axes=1)
    L_bar = np.tensordot(waits.probs, L_atoms, axes=1)
    return ProtocolMatrices(A_bar, L_bar, boundary_matrix_B(system, obs), A_atoms, L_atoms)


# 연속 대기 시간 밀도 (설정 파일에서 이름으로 선택)
def _uniform(params: Dict[str, float]) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: np.ones_like(t)


def _exponential(params: Dict[str, float]) -> Callable[[np.ndarray], np.ndarray]:
    rate = float(params.get("rate", 1.0))
    return lambda t: rate * np.exp(-rate * t)


def _gaussian(params: Dict[str, float]) -> Callable[[np.ndarray], np.ndarray]:
    mean = float(params["mean"])
    std = float(params["std"])
    return lambda t: np.exp(-0.5 * ((t - mean) / std) ** 2)


DENSITIES: Dict[str, Callable[[Dict[str, float]], Callable[[np.ndarray], np.ndarray]]] = {
    "uniform": _uniform,
    "exponential": _exponential,
    "gaussian": _gaussian,
}


def quadrature_waits(density: str, interval, nodes: int = 64,
                     params: Optional[Dict[str, float]] = None) -> WaitingTimeDistribution:
    """이름 있는 연속 밀도를 구적 원자 분포로 변환"""
    if density not in DENSITIES:
        raise ConfigError("waits.quadrature.density", f"알 수 없는 밀도 '{density}' (가능: {sorted(DENSITIES)})")
    try:
        pdf = DENSITIES[density](params or {})
    except KeyError as exc:
        raise ConfigError(f"waits.quadrature.{exc.args[0]}", "필수 파라미터가 없습니다") from exc
    waits = WaitingTimeDistribution.from_density(pdf, tuple(interval), nodes)
    logger.debug("구적 대기 시간 분포: density=%s, atoms=%d, mean=%.6g", density, waits.taus.size, waits.mean())
    return waits


@dataclass(frozen=True)
class IIDSampler:
    """유한 분포에서 tau_j를 독립적으로 뽑는 SequenceSampler"""
    waits: WaitingTimeDistribution

    def __call__(self, rng: np.random.Generator, count: int, M: int) -> np.ndarray:
        idx = rng.choice(self.waits.taus.size, size=(count, M), p=self.waits.probs)
        return self.waits.taus[idx]
