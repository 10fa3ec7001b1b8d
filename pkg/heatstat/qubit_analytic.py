"""
두 준위 닫힌 형식
E_{+-} = +-E, |alpha_1> = a|E+> - b|E->, |alpha_2> = b|E+> + a|E->, 두 개의 대기 원자.
"""

import logging
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.stats import binom

from .errors import ConfigError, DegenerateObservable, OrderTooHigh
from .models import (
    CharFnValue,
    HermitianSpec,
    InitialState,
    Observable,
    ProtocolSpec,
    WaitingTimeDistribution,
)
from .qcore import matrix_power

logger = logging.getLogger(__name__)

PARAM_TOL = 1e-12
MAX_DERIVATIVE_ORDER = 3


@dataclass(frozen=True)
class QubitParams:
    E: float
    a: complex
    b: complex
    c1: float
    p1: float
    tau1: float
    tau2: float
    M: int

    def __post_init__(self):
        if not self.E > 0:
            raise ConfigError("qubit.E", "양수여야 합니다")
        a, b = complex(self.a), complex(self.b)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > PARAM_TOL:
            raise ConfigError("qubit.a", "|a|^2 + |b|^2 = 1 이어야 합니다")
        if abs((a.conjugate() * b).imag) > PARAM_TOL:
            raise ConfigError("qubit.b", "a* b = a b* (상대 위상이 실수) 이어야 합니다")
        if not 0.0 <= self.c1 <= 1.0:
            raise ConfigError("qubit.c1", "[0, 1] 범위여야 합니다")
        if not 0.0 <= self.p1 <= 1.0:
            raise ConfigError("qubit.p1", "[0, 1] 범위여야 합니다")
        if self.tau1 < 0 or self.tau2 < 0:
            raise ConfigError("qubit.tau", "0 이상이어야 합니다")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("qubit.M", "1 이상의 정수여야 합니다")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def c2(self) -> float:
        return 1.0 - self.c1

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    @property
    def a2(self) -> float:
        return abs(self.a) ** 2

    @property
    def b2(self) -> float:
        return abs(self.b) ** 2


def gibbs_c1(E: float, beta: float) -> float:
    """깁스 상태에서 E+ 준위의 가중치 e^{-beta E} / (e^{-beta E} + e^{beta E})"""
    return float(1.0 / (1.0 + np.exp(2.0 * beta * E)))


def nu(params: QubitParams, tau: float) -> float:
    """nu(tau) = |<alpha_1|U(tau)|alpha_2>|^2 = 2|a|^2|b|^2 (1 - cos 2E tau)"""
    return 2.0 * params.a2 * params.b2 * (1.0 - np.cos(2.0 * params.E * tau))


def zeta(params: QubitParams) -> float:
    return params.p1 * nu(params, params.tau1) + params.p2 * nu(params, params.tau2)


def transfer(v: float) -> np.ndarray:
    return np.array([[1.0 - v, v], [v, 1.0 - v]])


def _weights(params: QubitParams) -> np.ndarray:
    """행 k, 열 (E+, E-)인 |<E|alpha_k>|^2"""
    return np.array([[params.a2, params.b2], [params.b2, params.a2]])


def _levels(params: QubitParams) -> np.ndarray:
    return np.array([params.E, -params.E])


def derivative_vectors(params: QubitParams, u: complex, order: int):
    """A^l(u)_k = i^l <alpha_k|H^l e^{iuH}|alpha_k>, B^l(u)_k = (-i)^l <alpha_k|H^l e^{-iuH} rho_0|alpha_k>"""
    E = _levels(params)
    c = np.array([params.c1, params.c2])
    w = _weights(params)
    u = complex(u)
    A = (1j ** order) * (w @ (E ** order * np.exp(1j * u * E)))
    B = ((-1j) ** order) * (w @ (E ** order * np.exp(-1j * u * E) * c))
    return A, B


def f_vector(params: QubitParams, u: complex) -> np.ndarray:
    return derivative_vectors(params, u, 0)[0]


def g_vector(params: QubitParams, u: complex) -> np.ndarray:
    return derivative_vectors(params, u, 0)[1]


def averaged_transfer(params: QubitParams) -> np.ndarray:
    return transfer(zeta(params))


def qubit_char_fn(params: QubitParams, u: complex) -> CharFnValue:
    """G(u) = f(u) (p1 L(tau1) + p2 L(tau2))^{M-1} g(u). 두 L이 가환이라 이항 합과 같다."""
    L_bar = matrix_power(averaged_transfer(params), params.M - 1)
    return CharFnValue(complex(u), complex(f_vector(params, u) @ L_bar @ g_vector(params, u)))


def qubit_char_fn_binomial(params: QubitParams, u: complex) -> CharFnValue:
    """이항 합 그대로의 G(u). 이항 가중치는 scipy.stats.binom.pmf로 계산한다."""
    L1 = transfer(nu(params, params.tau1))
    L2 = transfer(nu(params, params.tau2))
    f, g = f_vector(params, u), g_vector(params, u)
    n = params.M - 1
    weights = binom.pmf(np.arange(n + 1), n, params.p1)
    total = 0j
    for j, w in enumerate(weights):
        if w == 0.0:
            continue
        total += w * (f @ matrix_power(L1, j) @ matrix_power(L2, n - j) @ g)
    return CharFnValue(complex(u), complex(total))


def qubit_char_fn_limit(params: QubitParams, u: complex) -> CharFnValue:
    """M -> inf: G(u) = (1 + e^{2iuE})/2 - c1 sinh(2iuE)"""
    if params.a2 == 0.0 or params.b2 == 0.0 or zeta(params) <= 0.0:
        raise DegenerateObservable("a, b != 0 이고 zeta > 0 일 때만 극한식이 성립합니다 (불연속)")
    x = 2j * complex(u) * params.E
    return CharFnValue(complex(u), complex((1.0 + np.exp(x)) / 2.0 - params.c1 * np.sinh(x)))


def qubit_char_fn_derivative(params: QubitParams, u: complex, order: int) -> complex:
    """d^n G / du^n = sum_l C(n, l) A^l(u)^T L_bar^{M-1} B^{n-l}(u)"""
    if order > MAX_DERIVATIVE_ORDER:
        raise OrderTooHigh(f"미분 차수 {order} > {MAX_DERIVATIVE_ORDER}")
    if order < 0:
        raise ValueError(f"미분 차수는 0 이상이어야 합니다: {order}")
    L_bar = matrix_power(averaged_transfer(params), params.M - 1)
    total = 0j
    for ell in range(order + 1):
        A, _ = derivative_vectors(params, u, ell)
        _, B = derivative_vectors(params, u, order - ell)
        total += comb(order, ell) * (A @ L_bar @ B)
    return complex(total)


def qubit_effective_beta(params: QubitParams) -> float:
    """두 준위 혼합 상태의 역온도 beta = ln(c2/c1) / (E+ - E-)"""
    if not 0.0 < params.c1 < 1.0:
        raise ConfigError("qubit.c1", "순수 상태에는 유한한 역온도가 없습니다")
    return float(np.log(params.c2 / params.c1) / (2.0 * params.E))


def qubit_spec(params: QubitParams) -> ProtocolSpec:
    """같은 설정의 일반 ProtocolSpec (에너지 오름차순: E-, E+)"""
    a, b = params.a, params.b
    W = np.array([[-b, a], [a, b]], dtype=complex)
    atoms = {}
    for tau, p in ((params.tau1, params.p1), (params.tau2, params.p2)):
        if p > 0:
            atoms[tau] = atoms.get(tau, 0.0) + p
    return ProtocolSpec(
        system=HermitianSpec.from_energies([-params.E, params.E]),
        observable=Observable(np.array([1.0, 2.0]), W),
        initial=InitialState.explicit([params.c2, params.c1]),
        waits=WaitingTimeDistribution.from_atoms(sorted(atoms.items())),
        M=params.M,
    )
