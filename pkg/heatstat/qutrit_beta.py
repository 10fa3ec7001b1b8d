"""
세 준위 유효 역온도 분석
(alpha, beta) 매개화, 유사 분배 함수, 점근 G(i eps), beta_eff 근 찾기, 그림 재현용 스윕을 제공합니다.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, brentq
from scipy.special import logsumexp

from .errors import ConfigError, DegenerateRoot, NoRootInBracket, NumericalError, RangeExceeded
from .models import HermitianSpec, InitialMode, InitialState, Observable, ProtocolSpec, Waits
from .scheduler import BatchScheduler, get_scheduler

logger = logging.getLogger(__name__)

MAX_LOG = 700.0
CROSS_CHECK_TOL = 1e-12
SCAN_POINTS = 10_000
ROOT_TOL = 1e-12

DEFAULT_ENERGIES = (-2.0, 0.0, 1.0)
DEFAULT_BETAS = (0.0, 1.0, 2.0, 3.0)


class MultipleRoots(UserWarning):
    """0이 아닌 근 후보가 여러 개일 때"""


def _check_energies(energies) -> np.ndarray:
    E = np.asarray(energies, dtype=float)
    if E.shape != (3,) or not (E[0] < E[1] < E[2]):
        raise ConfigError("fig1.energies", "E1 < E2 < E3 인 세 값이어야 합니다")
    return E


def normalization(energies) -> float:
    """v = sqrt(3 (D1^2 + D2^2 + D3^2))"""
    E = _check_energies(energies)
    d = np.array([E[1] - E[0], E[2] - E[1], E[0] - E[2]])
    return float(np.sqrt(3.0 * np.sum(d ** 2)))


@dataclass(frozen=True)
class QutritEnsemble:
    """세 준위 초기 상태 c_k = exp(-beta E_k + (alpha/v) s_k) / Z~(alpha, beta)

    s = ((E2-E3)^2, (E3-E1)^2, (E1-E2)^2). alpha = 0이면 깁스 상태.
    """
    energies: np.ndarray
    alpha: float
    beta: float
    deltas: np.ndarray = field(init=False, repr=False)
    v: float = field(init=False)
    squares: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        E = _check_energies(self.energies)
        object.__setattr__(self, "energies", E)
        object.__setattr__(self, "deltas", np.array([E[1] - E[0], E[2] - E[1], E[0] - E[2]]))
        object.__setattr__(self, "v", normalization(E))
        object.__setattr__(self, "squares", np.array([(E[1] - E[2]) ** 2, (E[2] - E[0]) ** 2, (E[0] - E[1]) ** 2]))

    def exponents(self, beta=None) -> np.ndarray:
        """-beta E_k + (alpha/v) s_k. beta에 배열을 주면 마지막 축이 k"""
        beta = self.beta if beta is None else np.asarray(beta, dtype=float)
        return -np.multiply.outer(beta, self.energies) + (self.alpha / self.v) * self.squares

    def log_pseudo_partition(self, beta=None):
        return logsumexp(self.exponents(beta), axis=-1)

    def pseudo_partition(self, beta=None):
        """Z~(alpha, beta)"""
        log_z = self.log_pseudo_partition(beta)
        if np.any(np.abs(log_z) > MAX_LOG):
            raise RangeExceeded(f"Z~ 지수 {np.max(np.abs(log_z)):.4g}가 한계를 넘습니다")
        return np.exp(log_z)

    @property
    def weights(self) -> np.ndarray:
        x = self.exponents()
        return np.exp(x - logsumexp(x))

    @property
    def b_coefficients(self) -> np.ndarray:
        """c2/c1 = e^{-b1 D1}, c3/c2 = e^{-b2 D2}, c1/c3 = e^{-b3 D3}"""
        d1, d2, d3 = self.deltas
        return self.beta + (self.alpha / self.v) * np.array([d3 - d2, d1 - d3, d2 - d1])

    def initial_state(self) -> InitialState:
        c = self.weights
        c[np.argmax(c)] += 1.0 - c.sum()
        return InitialState(c, InitialMode.QUTRIT, beta=self.beta, alpha=self.alpha,
                            partition=float(self.pseudo_partition()))

    def mirrored(self) -> "QutritEnsemble":
        """{beta -> -beta, E_k -> -E_k} 변환 (같은 초기 상태, 열량 부호 반전)"""
        return QutritEnsemble(-self.energies[::-1], self.alpha, -self.beta)

    @classmethod
    def from_weights(cls, energies, weights) -> "QutritEnsemble":
        """c_k에서 (alpha, beta)를 역으로 구한다 (로그 비율 2x2 선형계)"""
        E = _check_energies(energies)
        c = np.asarray(weights, dtype=float)
        if c.shape != (3,) or np.any(c <= 0):
            raise ConfigError("initial.weights", "양수 세 개여야 합니다")
        v = normalization(E)
        s = np.array([(E[1] - E[2]) ** 2, (E[2] - E[0]) ** 2, (E[0] - E[1]) ** 2])
        logc = np.log(c)
        lhs = np.array([[-(E[1] - E[0]), (s[1] - s[0]) / v],
                        [-(E[2] - E[1]), (s[2] - s[1]) / v]])
        rhs = np.array([logc[1] - logc[0], logc[2] - logc[1]])
        beta, alpha = np.linalg.solve(lhs, rhs)
        return cls(E, float(alpha), float(beta))


def log_asymptotic_G(ens: QutritEnsemble, eps) -> np.ndarray:
    """log G(i eps) = log Z(eps)/Z(0) + log Z~(alpha, beta-eps)/Z~(alpha, beta)"""
    eps = np.asarray(eps, dtype=float)
    log_z = logsumexp(-np.multiply.outer(eps, ens.energies), axis=-1) - np.log(3.0)
    return log_z + ens.log_pseudo_partition(ens.beta - eps) - ens.log_pseudo_partition()


def asymptotic_G_direct(ens: QutritEnsemble, eps) -> np.ndarray:
    """(1/3) sum_m e^{-eps E_m} sum_n c_n e^{eps E_n}"""
    eps = np.asarray(eps, dtype=float)
    left = logsumexp(-np.multiply.outer(eps, ens.energies), axis=-1)
    right = logsumexp(np.multiply.outer(eps, ens.energies) + np.log(ens.weights), axis=-1)
    log_g = left + right - np.log(3.0)
    if np.any(np.abs(log_g) > MAX_LOG):
        raise RangeExceeded("직접 합의 지수가 한계를 넘습니다")
    return np.exp(log_g)


def asymptotic_G(ens: QutritEnsemble, eps, check: bool = True):
    """큰 M 극한(무한 온도)에서의 G(i eps)"""
    log_g = log_asymptotic_G(ens, eps)
    if np.any(np.abs(log_g) > MAX_LOG):
        raise RangeExceeded(f"G(i eps) 지수 {np.max(np.abs(log_g)):.4g}가 한계 {MAX_LOG}를 넘습니다")
    value = np.exp(log_g)
    if check:
        direct = asymptotic_G_direct(ens, eps)
        gap = np.max(np.abs(value - direct) / np.maximum(1.0, np.abs(value)))
        if gap > CROSS_CHECK_TOL:
            logger.warning("Z 경로와 직접 합 경로가 어긋납니다: 상대 오차 %.3e", gap)
    return float(value) if np.ndim(value) == 0 else value


def _sign_changes(x: np.ndarray, h: np.ndarray) -> List[Tuple[float, float]]:
    brackets = []
    for i in range(x.size - 1):
        if h[i] == 0.0:
            brackets.append((x[i], x[i]))
        elif h[i] * h[i + 1] < 0:
            brackets.append((x[i], x[i + 1]))
    if h[-1] == 0.0:
        brackets.append((x[-1], x[-1]))
    return brackets


def solve_beta_eff(ens: QutritEnsemble, eps_max: Optional[float] = None, delta: Optional[float] = None,
                   points: int = SCAN_POINTS) -> float:
    """G(i beta_eff) = 1 의 0이 아닌 근.

    [-eps_max, eps_max]에서 (-delta, delta)를 빼고 균등 격자로 부호 변화를 찾은 뒤 이분법으로 다듬는다.
    """
    if ens.alpha == 0.0:
        return float(ens.beta)
    if ens.beta < 0:
        return -solve_beta_eff(ens.mirrored(), eps_max, delta, points)

    width = float(ens.energies[2] - ens.energies[0])
    eps_max = 50.0 / width if eps_max is None else float(eps_max)
    delta = 1e-6 * width if delta is None else float(delta)
    grid = np.linspace(-eps_max, eps_max, points)
    left = np.concatenate([grid[grid <= -delta], [-delta]])
    right = np.concatenate([[delta], grid[grid >= delta]])

    h_left = log_asymptotic_G(ens, left)
    h_right = log_asymptotic_G(ens, right)
    brackets = _sign_changes(left, h_left) + _sign_changes(right, h_right)
    if not brackets:
        if h_left[-1] > 0 and h_right[0] > 0:
            raise DegenerateRoot(f"0이 아닌 근이 delta={delta:.3g} 안에서 0과 겹칩니다")
        raise NoRootInBracket((-eps_max, eps_max))

    def h(x: float) -> float:
        return float(log_asymptotic_G(ens, x))

    roots = []
    for lo, hi in brackets:
        if lo == hi:
            roots.append(float(lo))
            continue
        roots.append(float(bisect(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)))
    if len(roots) > 1:
        warnings.warn(f"근 후보가 {len(roots)}개입니다: {roots}; beta에 가장 가까운 근을 씁니다", MultipleRoots)
        logger.warning("beta_eff 근 후보 %d개: %s", len(roots), roots)
    root = min(roots, key=lambda r: abs(r - ens.beta))
    residual = abs(float(asymptotic_G(ens, root, check=False)) - 1.0)
    if residual > ROOT_TOL:
        logger.warning("beta_eff 잔차 |G-1| = %.3e > %.1e", residual, ROOT_TOL)
    return root


def asymptotic_beta_bar(energies) -> float:
    """e^{b (E2-E1)} + e^{-b (E3-E2)} = 2 의 0이 아닌 근 (alpha -> +inf 점근값)"""
    E = _check_energies(energies)
    d1, d2 = E[1] - E[0], E[2] - E[1]
    if d1 == d2:
        return 0.0

    def f(x: float) -> float:
        return float(np.exp(x * d1) + np.exp(-x * d2) - 2.0)

    lower, upper = -np.log(2.0) / d2, np.log(2.0) / d1
    # 볼록 함수의 최솟점: f < 0
    x_min = float(np.log(d2 / d1) / (d1 + d2))
    root = brentq(f, lower, x_min, xtol=1e-15) if d1 > d2 else brentq(f, x_min, upper, xtol=1e-15)
    if not lower < root < upper:
        raise NumericalError(f"beta_bar={root}가 한계 ({lower}, {upper}) 밖에 있습니다")
    return float(root)


def beta_eff_slope(energies) -> float:
    """alpha -> -inf에서 beta_eff ~ r alpha, r = (E1 + E3 - 2 E2) / v"""
    E = _check_energies(energies)
    return float((E[0] + E[2] - 2.0 * E[1]) / normalization(E))


@dataclass(frozen=True)
class SweepRow:
    beta: float
    alpha: float
    beta_eff: float
    error: str = ""


def sweep_fig1(energies: Sequence[float] = DEFAULT_ENERGIES, beta_list: Sequence[float] = DEFAULT_BETAS,
               alpha_grid: Optional[Sequence[float]] = None,
               scheduler: Optional[BatchScheduler] = None) -> List[SweepRow]:
    """(beta, alpha) 격자 위의 beta_eff. 점별 실패는 NaN 행으로 남긴다."""
    E = _check_energies(energies)
    alphas = np.linspace(-30.0, 10.0, 81) if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    points = [(float(b), float(a)) for b in sorted(beta_list) for a in sorted(alphas)]

    def evaluate(point: Tuple[float, float]) -> SweepRow:
        beta, alpha = point
        try:
            return SweepRow(beta, alpha, solve_beta_eff(QutritEnsemble(E, alpha, beta)))
        except NumericalError as exc:
            logger.warning("beta_eff 실패 (beta=%g, alpha=%g): %s", beta, alpha, exc)
            return SweepRow(beta, alpha, float("nan"), type(exc).__name__)

    scheduler = scheduler or get_scheduler()
    logger.info("beta_eff 스윕 시작: 점 %d개", len(points))
    rows = scheduler.map(evaluate, points)
    failed = sum(1 for r in rows if r.error)
    logger.info("beta_eff 스윕 완료: 실패 %d개", failed)
    return rows


def qutrit_spec(ens: QutritEnsemble, observable: Observable, waits: Waits, M: int) -> ProtocolSpec:
    return ProtocolSpec(HermitianSpec.from_energies(ens.energies), observable, ens.initial_state(), waits, M)
