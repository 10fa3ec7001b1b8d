"""
밀집 복소 선형대수 유틸리티
N <= ~64 준위 크기를 가정하며, 에너지 기저를 기준 기저로 사용합니다.
"""

import logging

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian
from .models import HermitianSpec, UnitaryPropagator

logger = logging.getLogger(__name__)

MAX_DIMENSION = 1024
MAX_SWEEPS = 100


def _as_square(A, name: str = "A") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name}는 정방 행렬이어야 합니다: shape={A.shape}")
    return A


def matmul(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise DimensionMismatch(f"곱셈 차원 불일치: {A.shape} x {B.shape}")
    return A @ B


def adjoint(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise DimensionMismatch(f"2차원 행렬이어야 합니다: shape={A.shape}")
    return A.conj().T


def trace(A) -> complex:
    A = _as_square(A)
    return complex(np.trace(A))


def matrix_power(A, exponent: int) -> np.ndarray:
    """제곱을 반복하는 행렬 거듭제곱. exponent = 0이면 단위행렬"""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"정방 행렬이어야 합니다: shape={A.shape}")
    if int(exponent) != exponent or exponent < 0:
        raise ValueError(f"지수는 0 이상의 정수여야 합니다: {exponent}")
    return np.linalg.matrix_power(A, int(exponent))


def propagator(H: HermitianSpec, tau: float) -> UnitaryPropagator:
    """U(tau) = e^{-iH tau}. 에너지 기저에서 대각이므로 위상만 계산한다."""
    tau = float(tau)
    if not np.isfinite(tau):
        raise ValueError(f"tau는 유한해야 합니다: {tau}")
    return UnitaryPropagator(tau, np.exp(-1j * H.eigenvalues * tau))


def _rotation(app: float, aqq: float, apq: complex):
    """(p, q) 블록의 비대각 성분을 없애는 2x2 유니터리 G (열 p, q에 작용)"""
    r = abs(apq)
    phase = apq / r
    theta = (aqq - app) / (2.0 * r)
    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # 위상 회전 diag(1, e^{-i phi}) 뒤에 실수 Jacobi 회전
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)


def jacobi_eigh(A, tol: float = 1e-12) -> HermitianSpec:
    """순환 Jacobi 회전으로 에르미트 행렬을 대각화한다.

    Args:
        A: 에르미트 행렬
        tol: 에르미트성 허용 오차 (|A - A^H|_max)

    Returns:
        오름차순 고유값과 유니터리 고유벡터 행렬
    """
    A = _as_square(A)
    n = A.shape[0]
    if n > MAX_DIMENSION:
        raise DimensionMismatch(f"N={n}은 지원 범위(<= {MAX_DIMENSION})를 넘습니다")
    deviation = float(np.max(np.abs(A - A.conj().T)))
    if deviation > tol:
        raise NotHermitian(deviation, tol)

    work = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    scale = max(float(np.linalg.norm(work)), np.finfo(float).tiny)
    threshold = 4 * n * np.finfo(float).eps * scale

    for sweep in range(MAX_SWEEPS + 1):
        off = float(np.linalg.norm(work - np.diag(np.diag(work))))
        if off <= threshold:
            logger.debug("Jacobi 수렴: N=%d, sweeps=%d", n, sweep)
            break
        if sweep == MAX_SWEEPS:
            raise NoConvergence(f"Jacobi 회전이 {MAX_SWEEPS} sweep 안에 수렴하지 않았습니다 (off={off:.3e})")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if abs(apq) <= threshold / n:
                    continue
                G = _rotation(work[p, p].real, work[q, q].real, apq)
                idx = [p, q]
                work[:, idx] = work[:, idx] @ G
                work[idx, :] = G.conj().T @ work[idx, :]
                work[p, q] = work[q, p] = 0.0
                V[:, idx] = V[:, idx] @ G

    eigenvalues = np.real(np.diag(work))
    order = np.argsort(eigenvalues, kind="stable")
    return HermitianSpec(eigenvalues[order], V[:, order])


def reconstruct(spec: HermitianSpec) -> np.ndarray:
    """W diag(E) W^H"""
    W = spec.eigenvectors
    return (W * spec.eigenvalues) @ W.conj().T
