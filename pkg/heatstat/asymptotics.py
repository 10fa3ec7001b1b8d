"""
큰 M 점근 분석 모듈
불변 부분공간(블록) 탐지, L의 고정점 사영, 무한 온도/부분 열화 진단, 제논 스케일링을 다룹니다.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, DegenerateFit, RangeExceeded
from .exact import MAX_EXPONENT, heat_matrix
from .models import (
    BlockStructure,
    CharFnValue,
    ProtocolSpec,
    Regime,
    ThermalizationReport,
)
from .protocol import protocol_matrices, transition_matrix_L
from .qcore import matrix_power

logger = logging.getLogger(__name__)

ESCAPE_FLOOR = 1e-14


def hamiltonian_in_observable_basis(spec: ProtocolSpec) -> np.ndarray:
    """H^(alpha) = W^H diag(E) W"""
    W = spec.observable.basis
    return W.conj().T @ (spec.energies[:, None] * W)


def detect_blocks(spec: ProtocolSpec, tol: float = 1e-10) -> BlockStructure:
    """alpha 기저의 H에서 |H_ij| > tol * ||H||_max 인 간선으로 그래프를 만들고 연결 성분을 돌려준다"""
    H = hamiltonian_in_observable_basis(spec)
    scale = float(np.max(np.abs(H)))
    adjacency = np.abs(H) > tol * scale if scale > 0 else np.zeros(H.shape, dtype=bool)
    np.fill_diagonal(adjacency, False)
    count, labels = connected_components(csr_matrix(adjacency), directed=False)
    blocks = tuple(tuple(int(i) for i in np.flatnonzero(labels == r)) for r in range(count))
    # 가장 작은 인덱스 순으로 정렬해 결과를 고정
    blocks = tuple(sorted(blocks, key=lambda b: b[0]))
    logger.debug("블록 구조: R=%d, dims=%s", len(blocks), [len(b) for b in blocks])
    return BlockStructure(blocks)


def block_projector(blocks: BlockStructure, n: int) -> np.ndarray:
    """pi_{k_M|k_1} = 1/dim S_r (같은 블록), 0 (다른 블록)"""
    P = np.zeros((n, n))
    for block in blocks.blocks:
        idx = np.array(block)
        P[np.ix_(idx, idx)] = 1.0 / idx.size
    return P


def limiting_conditional(spec: ProtocolSpec, blocks: Optional[BlockStructure] = None) -> np.ndarray:
    blocks = blocks or detect_blocks(spec)
    return block_projector(blocks, spec.dimension)


def fixed_point_multiplicity(spec: ProtocolSpec, power: int = 4096) -> float:
    """tr(L_bar^K) -> rank(P) = R. detect_blocks의 R과 교차 검증용"""
    L_bar = protocol_matrices(spec).L_bar
    return float(np.trace(matrix_power(L_bar, power)))


def convergence_profile(spec: ProtocolSpec, M_list: Sequence[int]) -> List[Tuple[int, float]]:
    """M마다 ||L_bar^{M-1} - pi||_max"""
    M_list = [int(m) for m in M_list]
    if any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ConfigError("thermalize.M_list", "증가 순서여야 합니다")
    if M_list and M_list[0] < 1:
        raise ConfigError("thermalize.M_list", "M은 1 이상이어야 합니다")
    L_bar = protocol_matrices(spec).L_bar
    P = limiting_conditional(spec)
    profile: List[Tuple[int, float]] = []
    current = np.eye(spec.dimension)
    steps = 0
    for M in M_list:
        current = current @ matrix_power(L_bar, M - 1 - steps)
        steps = M - 1
        profile.append((M, float(np.max(np.abs(current - P)))))
    if len(profile) >= 2 and profile[-1][1] > 1e-6 and profile[-1][1] >= 0.5 * profile[0][1]:
        logger.warning("수렴하지 않는 프로파일: 공명 tau에서 |lambda|=1 고유값이 추가로 있을 수 있습니다 (마지막 거리 %.3e)",
                       profile[-1][1])
    return profile


def estimate_rate(spec: ProtocolSpec, iterations: int = 200) -> float:
    """(L_bar - P)에 대한 거듭제곱 반복으로 |lambda_2|를 추정한다"""
    L_bar = protocol_matrices(spec).L_bar
    P = limiting_conditional(spec)
    D = L_bar - P
    x = np.random.default_rng(0).standard_normal(spec.dimension)
    x -= P @ x
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.0
    x /= norm
    rate = 0.0
    for _ in range(iterations):
        y = D @ x
        norm = np.linalg.norm(y)
        if norm < 1e-300:
            return 0.0
        rate = float(norm)
        x = y / norm
    return rate


def limiting_final_populations(spec: ProtocolSpec, blocks: Optional[BlockStructure] = None) -> np.ndarray:
    """M -> inf에서 p~_m = sum_r (Pi_r)_mm / dim S_r * sum_n (Pi_r)_nn c_n"""
    blocks = blocks or detect_blocks(spec)
    W = spec.observable.basis
    c = spec.initial.weights
    out = np.zeros(spec.dimension)
    for block in blocks.blocks:
        diag = np.sum(np.abs(W[:, list(block)]) ** 2, axis=1)
        out += diag * float(diag @ c) / len(block)
    return out


def thermalization_report(spec: ProtocolSpec, zeno_threshold: float = 1e-3,
                          tol: float = 1e-10) -> ThermalizationReport:
    """M = spec.M에서의 열화 상태를 진단한다"""
    blocks = detect_blocks(spec, tol)
    mats = protocol_matrices(spec)
    P = block_projector(blocks, spec.dimension)
    power = matrix_power(mats.L_bar, spec.M - 1)
    # alpha 기저 점유: pi~ = L_bar^{M-1} A_bar c
    populations = power @ mats.A_bar @ spec.initial.weights
    N = spec.dimension
    distance = float(np.max(np.abs(populations - 1.0 / N)))
    leakage = float(1.0 - np.min(np.diag(mats.L_bar)))
    notes: List[str] = []
    if blocks.count == N or leakage < zeno_threshold:
        regime = Regime.ZENO_FROZEN
        notes.append(f"단계당 누설 {leakage:.3e}")
    elif blocks.count == 1:
        regime = Regime.INFINITE_TEMPERATURE
    else:
        regime = Regime.PARTIAL
    rate = estimate_rate(spec)
    converged = float(np.max(np.abs(power - P))) <= 1e-6
    if rate > 1 - 1e-12 and blocks.count < N:
        notes.append("고정점 외의 |lambda|=1 모드가 있어 블록 극한으로 수렴하지 않습니다")
    report = ThermalizationReport(regime, blocks, P, distance, rate, converged, notes)
    logger.info("열화 진단: regime=%s, R=%d, rate=%.4g", regime.value, blocks.count, rate)
    return report


def asymptotic_char_fn(spec: ProtocolSpec, u: complex, blocks: Optional[BlockStructure] = None) -> CharFnValue:
    """M -> inf 특성 함수 G(u) = sum_r (1/dim S_r) Tr[rho_0 e^{-iHu} Pi_r] Tr[e^{iHu} Pi_r]"""
    blocks = blocks or detect_blocks(spec)
    E = spec.energies
    u = complex(u)
    worst = abs(u.imag) * float(np.max(np.abs(heat_matrix(E))))
    if worst > MAX_EXPONENT:
        raise RangeExceeded(f"u={u}에서 지수 {worst:.4g}가 한계를 넘습니다")
    W = spec.observable.basis
    c = spec.initial.weights
    value = 0j
    for block in blocks.blocks:
        diag = np.sum(np.abs(W[:, list(block)]) ** 2, axis=1)
        left = np.sum(c * np.exp(-1j * u * E) * diag)
        right = np.sum(np.exp(1j * u * E) * diag)
        value += left * right / len(block)
    return CharFnValue(u, complex(value))


def zeno_escape(spec: ProtocolSpec, total_time: float, M: int) -> float:
    """tau = T/M 고정 간격에서 M번 측정 후 탈출 확률 1 - mean_k [L^{M-1}]_kk"""
    L = transition_matrix_L(spec.system, spec.observable, total_time / M)
    power = matrix_power(L, M - 1)
    # 1 - 대각 대신 비대각 열 질량을 더해 상쇄 오차를 피한다
    off = power.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.mean(off.sum(axis=0)))


def zeno_scaling(spec: ProtocolSpec, total_time: float, M_list: Sequence[int]) -> Tuple[float, List[Tuple[int, float]]]:
    """log(escape) 대 log(M)의 최소제곱 기울기. 제논 영역에서는 약 -1"""
    M_list = [int(m) for m in M_list]
    if len(M_list) < 2:
        raise DegenerateFit("M_list에 두 개 이상의 값이 필요합니다")
    if np.log10(max(M_list) / min(M_list)) < 1.5:
        logger.warning("M_list 범위가 1.5 decade보다 좁습니다: %s", M_list)
    escapes = [(M, zeno_escape(spec, total_time, M)) for M in M_list]
    usable = [(M, e) for M, e in escapes if e > ESCAPE_FLOOR]
    if len(usable) < 2:
        raise DegenerateFit(f"탈출 확률이 {ESCAPE_FLOOR} 아래로 떨어져 기울기를 맞출 수 없습니다")
    x = np.log([M for M, _ in usable])
    y = np.log([e for _, e in usable])
    slope = float(np.polyfit(x, y, 1)[0])
    logger.info("제논 스케일링 기울기: %.4f (점 %d개)", slope, len(usable))
    return slope, escapes
