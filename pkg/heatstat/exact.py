"""
정확 열량 통계 모듈
조건부 전이 확률, 열량 분포, 특성 함수, 모멘트, 유니탈리티 항등식을 계산합니다.
"""

import itertools
import logging
from typing import Iterable, List, Optional

import numpy as np

from .errors import OrderTooHigh, RangeExceeded, TooLarge
from .models import CharFnValue, ConditionalTable, HeatDistribution, ProtocolSpec
from .protocol import protocol_matrices, require_finite_waits
from .qcore import matrix_power, propagator
from .scheduler import get_scheduler

logger = logging.getLogger(__name__)

MAX_EXPONENT = 700.0
MAX_MOMENT_ORDER = 4
ENUMERATION_LIMIT = 100_000


def conditional_table(spec: ProtocolSpec) -> ConditionalTable:
    """p_{m|n} = [B L_bar^{M-1} A_bar]_{mn}"""
    mats = protocol_matrices(spec)
    table = mats.B @ matrix_power(mats.L_bar, spec.M - 1) @ mats.A_bar
    logger.debug("조건부 전이 확률 계산: N=%d, M=%d, atoms=%d", spec.dimension, spec.M, mats.A_atoms.shape[0])
    return ConditionalTable(table)


def merge_tolerance(energies: np.ndarray) -> float:
    """에너지 폭에 비례하는 열량 지지점 병합 허용 오차"""
    spread = float(np.max(energies) - np.min(energies))
    return 1e-9 * spread if spread > 0 else 1e-9


def coalesce(values: np.ndarray, weights: np.ndarray, tol: float):
    """정렬 후 tol 이내로 붙은 값들을 묶고 질량을 합한다 (대표값은 첫 원소)"""
    order = np.argsort(values, kind="stable")
    values, weights = values[order], weights[order]
    support: List[float] = []
    probs: List[float] = []
    for q, w in zip(values, weights):
        if support and q - support[-1] <= tol:
            probs[-1] += w
        else:
            support.append(float(q))
            probs.append(float(w))
    return np.array(support), np.array(probs)


def heat_matrix(energies: np.ndarray) -> np.ndarray:
    """Q_{mn} = E_m - E_n"""
    return energies[:, None] - energies[None, :]


def heat_distribution(spec: ProtocolSpec) -> HeatDistribution:
    """Prob(Q) = sum_{m,n} delta(Q - (E_m - E_n)) p_{m|n} p_n"""
    E = spec.energies
    joint = conditional_table(spec).matrix * spec.initial.weights[None, :]
    tol = merge_tolerance(E)
    support, probs = coalesce(heat_matrix(E).ravel(), joint.ravel(), tol)
    keep = probs > 0
    return HeatDistribution(support[keep], probs[keep], tol)


def _check_exponent(u: complex, Q: np.ndarray) -> None:
    # e^{iuQ}의 실수 지수 = -Im(u) Q
    worst = abs(complex(u).imag) * float(np.max(np.abs(Q))) if Q.size else 0.0
    if worst > MAX_EXPONENT:
        raise RangeExceeded(f"u={u}에서 지수 {worst:.4g}가 한계 {MAX_EXPONENT}를 넘습니다")


def char_fn_from_table(table: np.ndarray, energies: np.ndarray, weights: np.ndarray, u: complex) -> complex:
    """G(u) = sum_{n,m} c_n e^{iu(E_m - E_n)} p_{m|n} (고정된 합산 순서)"""
    Q = heat_matrix(energies)
    _check_exponent(u, Q)
    return complex(np.sum(np.exp(1j * complex(u) * Q) * table * weights[None, :]))


def char_fn(spec: ProtocolSpec, u: complex) -> CharFnValue:
    table = conditional_table(spec).matrix
    return CharFnValue(complex(u), char_fn_from_table(table, spec.energies, spec.initial.weights, u))


def char_fn_grid(spec: ProtocolSpec, us: Iterable[complex], scheduler=None) -> List[CharFnValue]:
    """u 격자 위의 G(u). 격자점은 서로 독립이라 병렬 실행해도 결과가 같다."""
    table = conditional_table(spec).matrix
    E, c = spec.energies, spec.initial.weights
    us = [complex(u) for u in us]
    scheduler = scheduler or get_scheduler()
    values = scheduler.map(lambda u: char_fn_from_table(table, E, c, u), us)
    return [CharFnValue(u, g) for u, g in zip(us, values)]


def moments(spec: ProtocolSpec, order: int) -> float:
    """<Q^l> = sum_i Q_i^l Prob(Q_i)"""
    if order > MAX_MOMENT_ORDER:
        raise OrderTooHigh(f"모멘트 차수 {order} > {MAX_MOMENT_ORDER}")
    if order < 0:
        raise ValueError(f"모멘트 차수는 0 이상이어야 합니다: {order}")
    dist = heat_distribution(spec)
    return float(np.sum(dist.support ** order * dist.probs))


def final_populations(spec: ProtocolSpec) -> np.ndarray:
    """최종 에너지 측정 결과 확률 p~_m = sum_n p_{m|n} c_n"""
    return conditional_table(spec).matrix @ spec.initial.weights


def _enumeration_size(spec: ProtocolSpec, atoms: int) -> int:
    return (spec.dimension * atoms) ** spec.M


def brute_force_conditional(spec: ProtocolSpec) -> np.ndarray:
    """모든 결과 시퀀스와 대기 원자 시퀀스를 나열해 p_{m|n}을 직접 합산한다.

    경로마다 V = P_{k_M} U(tau_M) ... P_{k_1} U(tau_1)를 만들고 |<E_m|V|E_n>|^2에
    대기 시간 확률을 곱해 더한다.
    """
    waits = require_finite_waits(spec)
    size = _enumeration_size(spec, waits.taus.size)
    if size > ENUMERATION_LIMIT:
        raise TooLarge(f"나열 크기 {size} > {ENUMERATION_LIMIT}")
    N, M = spec.dimension, spec.M
    W = spec.observable.basis
    projectors = [np.outer(W[:, k], W[:, k].conj()) for k in range(N)]
    unitaries = [propagator(spec.system, t).matrix for t in waits.taus]
    table = np.zeros((N, N))
    for ks in itertools.product(range(N), repeat=M):
        for atoms in itertools.product(range(waits.taus.size), repeat=M):
            V = np.eye(N, dtype=complex)
            weight = 1.0
            for k, a in zip(ks, atoms):
                V = projectors[k] @ unitaries[a] @ V
                weight *= waits.probs[a]
            table += weight * np.abs(V) ** 2
    return table


def unitality_check(spec: ProtocolSpec, M: Optional[int] = None) -> float:
    """||sum_k E_tau[V_k V_k^H] - I||_max 를 결과 시퀀스 전수 나열로 계산한다.

    접두사를 공유하는 깊이 우선 나열로, 단계마다 대기 원자 전체에 대한 평균을 취한다
    (tau_j가 독립이므로 j번째 단계에서 평균해도 된다).
    """
    waits = require_finite_waits(spec)
    M = spec.M if M is None else int(M)
    N = spec.dimension
    if N ** M > ENUMERATION_LIMIT:
        raise TooLarge(f"결과 시퀀스 수 {N}^{M} > {ENUMERATION_LIMIT}")
    W = spec.observable.basis
    projectors = [np.outer(W[:, k], W[:, k].conj()) for k in range(N)]
    unitaries = [propagator(spec.system, t).matrix for t in waits.taus]
    total = np.zeros((N, N), dtype=complex)

    def descend(X: np.ndarray, depth: int) -> None:
        nonlocal total
        if depth == M:
            total += X
            return
        Y = sum(p * (U @ X @ U.conj().T) for p, U in zip(waits.probs, unitaries))
        for P in projectors:
            descend(P @ Y @ P, depth + 1)

    descend(np.eye(N, dtype=complex), 0)
    deviation = float(np.max(np.abs(total - np.eye(N))))
    logger.info("유니탈리티 검사: N=%d, M=%d, 편차=%.3e", N, M, deviation)
    return deviation
