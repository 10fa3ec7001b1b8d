from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Protocol, Tuple, Union, runtime_checkable

import numpy as np

from .errors import ConfigError, DimensionMismatch


# 에너지 기저가 모든 연산자의 기준 기저
ComplexMatrix = np.ndarray
StochasticMatrix = np.ndarray

UNITARY_TOL = 1e-10
PROB_TOL = 1e-12


def unitarity_deviation(W: np.ndarray) -> float:
    """||W^H W - I||_max"""
    n = W.shape[1]
    return float(np.max(np.abs(W.conj().T @ W - np.eye(n))))


@dataclass(frozen=True)
class HermitianSpec:
    """에너지 준위(오름차순)와 고유벡터(열) 묶음"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.eigenvalues, dtype=float)
        W = np.asarray(self.eigenvectors, dtype=complex)
        if E.ndim != 1 or E.size < 1:
            raise ConfigError("system.energies", "비어 있지 않은 1차원 실수 목록이어야 합니다")
        if not np.all(np.isfinite(E)):
            raise ConfigError("system.energies", "유한한 값이어야 합니다")
        if W.shape != (E.size, E.size):
            raise DimensionMismatch(f"고유벡터 행렬 크기 {W.shape} != ({E.size}, {E.size})")
        if np.any(np.diff(E) < 0):
            raise ConfigError("system.energies", "오름차순으로 정렬되어 있어야 합니다")
        if unitarity_deviation(W) > UNITARY_TOL:
            raise ConfigError("system.eigenvectors", "고유벡터 행렬이 유니터리가 아닙니다")
        object.__setattr__(self, "eigenvalues", E)
        object.__setattr__(self, "eigenvectors", W)

    @classmethod
    def from_energies(cls, energies) -> "HermitianSpec":
        """에너지 목록만으로 만드는 대각 해밀토니안 (정렬은 호출자가 보장)"""
        E = np.asarray(energies, dtype=float)
        return cls(E, np.eye(E.size, dtype=complex))

    @property
    def dimension(self) -> int:
        return int(self.eigenvalues.size)


@dataclass(frozen=True)
class UnitaryPropagator:
    """에너지 기저에서의 U(tau) = diag(e^{-i E_k tau})"""
    tau: float
    phases: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.phases.size)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.phases)


@dataclass(frozen=True)
class Observable:
    """중간 측정 관측량. basis의 k번째 열이 에너지 기저로 쓴 |alpha_k>"""
    values: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.basis, dtype=complex)
        vals = np.asarray(self.values, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ConfigError("observable.unitary", "정방 행렬이어야 합니다")
        if vals.shape != (W.shape[0],):
            raise ConfigError("observable.values", f"길이가 {W.shape[0]}이어야 합니다")
        if not np.all(np.isfinite(W)):
            raise ConfigError("observable.unitary", "유한한 값이어야 합니다")
        if unitarity_deviation(W) > UNITARY_TOL:
            raise ConfigError("observable.unitary", "고유기저 행렬이 유니터리가 아닙니다 (허용 오차 1e-10)")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "basis", W)

    @property
    def dimension(self) -> int:
        return int(self.values.size)

    @classmethod
    def energy_basis(cls, n: int) -> "Observable":
        """H와 가환인 관측량 (W = I)"""
        return cls(np.arange(n, dtype=float), np.eye(n, dtype=complex))


class InitialMode(str, Enum):
    EXPLICIT = "explicit"
    GIBBS = "gibbs"
    QUTRIT = "qutrit"


@dataclass(frozen=True)
class InitialState:
    """에너지 기저에서 대각인 초기 상태 rho_0 = sum_k c_k |E_k><E_k|"""
    weights: np.ndarray
    mode: InitialMode = InitialMode.EXPLICIT
    beta: Optional[float] = None
    alpha: Optional[float] = None
    partition: Optional[float] = None

    def __post_init__(self):
        c = np.asarray(self.weights, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ConfigError("initial.weights", "비어 있지 않은 1차원 목록이어야 합니다")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ConfigError("initial.weights", "음이 아닌 유한한 값이어야 합니다")
        if abs(c.sum() - 1.0) > PROB_TOL:
            raise ConfigError("initial.weights", f"합이 1이어야 합니다 (현재 {c.sum():.15g})")
        object.__setattr__(self, "weights", c)

    @classmethod
    def explicit(cls, weights) -> "InitialState":
        return cls(np.asarray(weights, dtype=float))

    @classmethod
    def gibbs(cls, energies, beta: float) -> "InitialState":
        """c_k = e^{-beta E_k} / Z. 지수는 최소 에너지 기준으로 이동해서 계산"""
        E = np.asarray(energies, dtype=float)
        shift = E.min() if beta >= 0 else E.max()
        boltz = np.exp(-beta * (E - shift))
        Z = float(np.exp(-beta * shift) * boltz.sum())
        return cls(boltz / boltz.sum(), InitialMode.GIBBS, beta=float(beta), partition=Z)

    @property
    def dimension(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True)
class WaitingTimeDistribution:
    """유한 지지 대기 시간 분포: (tau_k, p_k) 원자 목록"""
    taus: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if taus.ndim != 1 or taus.size < 1 or taus.shape != probs.shape:
            raise ConfigError("waits.atoms", "tau와 확률 목록의 길이가 같고 비어 있지 않아야 합니다")
        if np.any(taus < 0) or not np.all(np.isfinite(taus)):
            raise ConfigError("waits.atoms", "tau는 0 이상의 유한한 값이어야 합니다")
        if np.unique(taus).size != taus.size:
            raise ConfigError("waits.atoms", "tau 값이 서로 달라야 합니다")
        if np.any(probs <= 0):
            raise ConfigError("waits.atoms", "확률은 양수여야 합니다")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ConfigError("waits.atoms", f"확률의 합이 1이어야 합니다 (현재 {probs.sum():.15g})")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def deterministic(cls, tau: float) -> "WaitingTimeDistribution":
        return cls(np.array([float(tau)]), np.array([1.0]))

    @classmethod
    def from_atoms(cls, atoms: List[Tuple[float, float]]) -> "WaitingTimeDistribution":
        if not atoms:
            raise ConfigError("waits.atoms", "원자가 하나 이상 필요합니다")
        taus, probs = zip(*atoms)
        return cls(np.array(taus, dtype=float), np.array(probs, dtype=float))

    @classmethod
    def from_density(cls, density: Callable[[np.ndarray], np.ndarray],
                     interval: Tuple[float, float], nodes: int = 64) -> "WaitingTimeDistribution":
        """연속 밀도를 구간 위 Gauss-Legendre 구적점으로 축약한다.

        가중치 w_k * density(tau_k)를 정규화해서 확률로 쓰고, 0인 원자는 버린다.
        """
        lo, hi = map(float, interval)
        if not (0 <= lo < hi) or not np.isfinite(hi):
            raise ConfigError("waits.quadrature.interval", "0 <= lo < hi 인 유한 구간이어야 합니다")
        if nodes < 1:
            raise ConfigError("waits.quadrature.nodes", "1 이상이어야 합니다")
        x, w = np.polynomial.legendre.leggauss(nodes)
        taus = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        mass = w * np.asarray(density(taus), dtype=float)
        if np.any(mass < 0) or mass.sum() <= 0:
            raise ConfigError("waits.quadrature.density", "구간 위에서 음이 아니고 적분이 양수여야 합니다")
        keep = mass > 0
        probs = mass[keep] / mass[keep].sum()
        # 정규화 후 남는 반올림 오차는 가장 큰 원자에 몰아준다
        probs[np.argmax(probs)] += 1.0 - probs.sum()
        return cls(taus[keep], probs)

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.taus.tolist(), self.probs.tolist()))

    def mean(self) -> float:
        return float(np.dot(self.taus, self.probs))


@runtime_checkable
class SequenceSampler(Protocol):
    """대기 시간 시퀀스 샘플러: (rng, count, M) -> shape (count, M) 배열

    tau_1..tau_M 사이 상관을 허용한다. 몬테카를로 경로에서만 쓰인다.
    """

    def __call__(self, rng: np.random.Generator, count: int, M: int) -> np.ndarray: ...


Waits = Union[WaitingTimeDistribution, SequenceSampler]


@dataclass(frozen=True)
class ProtocolSpec:
    """측정 프로토콜 전체: 시스템, 관측량, 초기 상태, 대기 시간, 측정 횟수 M"""
    system: HermitianSpec
    observable: Observable
    initial: InitialState
    waits: Waits
    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("M", "1 이상의 정수여야 합니다")
        n = self.system.dimension
        if self.observable.dimension != n:
            raise DimensionMismatch(f"관측량 차원 {self.observable.dimension} != 시스템 차원 {n}")
        if self.initial.dimension != n:
            raise DimensionMismatch(f"초기 상태 차원 {self.initial.dimension} != 시스템 차원 {n}")
        object.__setattr__(self, "M", int(self.M))

    @property
    def dimension(self) -> int:
        return self.system.dimension

    @property
    def energies(self) -> np.ndarray:
        return self.system.eigenvalues


@dataclass(frozen=True)
class ConditionalTable:
    """p_{m|n}: 열 n이 초기 에너지 인덱스, 행 m이 최종 에너지 인덱스"""
    matrix: np.ndarray


@dataclass(frozen=True)
class HeatDistribution:
    """열량 Q = E_m - E_n 위의 이산 분포 (support 오름차순)"""
    support: np.ndarray
    probs: np.ndarray
    merge_tol: float = 0.0

    def total_mass(self) -> float:
        return float(np.sum(self.probs))

    def as_dict(self) -> Dict[float, float]:
        return dict(zip(self.support.tolist(), self.probs.tolist()))


@dataclass(frozen=True)
class CharFnValue:
    u: complex
    value: complex


@dataclass(frozen=True)
class Trajectory:
    """단일 궤적: 초기 n, 중간 결과 k_1..k_M, 대기 시간, 최종 m, 열량 Q"""
    initial: int
    outcomes: Tuple[int, ...]
    waits: Tuple[float, ...]
    final: int
    heat: float


class EstimatorTarget(str, Enum):
    JARZYNSKI_EXP = "jarzynski_exp"
    MOMENT_Q = "moment_q"


@dataclass(frozen=True)
class EstimatorReport:
    count: int
    mean: float
    stderr: float
    target: EstimatorTarget
    parameter: float
    expected: Optional[float] = None

    @property
    def passed(self) -> Optional[bool]:
        """기댓값이 있으면 |mean - expected| <= 3 stderr 여부"""
        if self.expected is None:
            return None
        return abs(self.mean - self.expected) <= 3.0 * self.stderr

    def as_dict(self) -> dict:
        return {
            "target": self.target.value,
            "parameter": self.parameter,
            "n": self.count,
            "mean": self.mean,
            "stderr": self.stderr,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class BlockStructure:
    """관측량 고유 인덱스의 불변 부분공간 분할"""
    blocks: Tuple[Tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.blocks)

    @property
    def dimensions(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def labels(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=int)
        for r, block in enumerate(self.blocks):
            out[list(block)] = r
        return out


class Regime(str, Enum):
    INFINITE_TEMPERATURE = "infinite_temperature"
    PARTIAL = "partial"
    ZENO_FROZEN = "zeno_frozen"


@dataclass(frozen=True)
class ThermalizationReport:
    regime: Regime
    blocks: BlockStructure
    limiting: np.ndarray
    distance_to_mixed: float
    rate: float
    converged: bool = True
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "R": self.blocks.count,
            "blocks": [list(b) for b in self.blocks.blocks],
            "limiting_conditional": self.limiting.tolist(),
            "distance_to_mixed": self.distance_to_mixed,
            "rate": self.rate,
            "converged": self.converged,
            "notes": list(self.notes),
        }
