"""
궤적 몬테카를로 샘플러
양자 상태는 표현하지 않고, 사영 측정 뒤의 순수 상태가 만드는 고전 결과 사슬만 시뮬레이션한다.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError
from .exact import coalesce, heat_matrix, merge_tolerance, moments
from .models import (
    EstimatorReport,
    EstimatorTarget,
    HeatDistribution,
    InitialMode,
    ProtocolSpec,
    Trajectory,
    WaitingTimeDistribution,
)
from .protocol import protocol_matrices
from .scheduler import BatchScheduler, get_scheduler

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class TrajectoryBatch:
    """궤적 묶음 (열 단위 배열)"""
    initial: np.ndarray
    outcomes: np.ndarray
    waits: np.ndarray
    final: np.ndarray
    heat: np.ndarray

    def __len__(self) -> int:
        return int(self.initial.size)

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(
            initial=int(self.initial[i]),
            outcomes=tuple(int(k) for k in self.outcomes[i]),
            waits=tuple(float(t) for t in self.waits[i]),
            final=int(self.final[i]),
            heat=float(self.heat[i]),
        )

    @classmethod
    def concatenate(cls, parts: Sequence["TrajectoryBatch"]) -> "TrajectoryBatch":
        return cls(*(np.concatenate([getattr(p, name) for p in parts]) for name in
                     ("initial", "outcomes", "waits", "final", "heat")))


def _pick(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """행마다 누적 분포 cdf (count, N)에서 균등 난수 u로 인덱스를 뽑는다"""
    idx = np.sum(cdf <= u[:, None], axis=1)
    return np.minimum(idx, cdf.shape[1] - 1)


def _column_cdf(T: np.ndarray) -> np.ndarray:
    """열 확률 행렬의 열별 누적합, shape (..., N_from, N_to)"""
    return np.cumsum(np.swapaxes(T, -1, -2), axis=-1)


def _trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _draw(spec: ProtocolSpec, rng: np.random.Generator) -> Tuple[np.ndarray, Optional[np.ndarray], np.ndarray]:
    """궤적 하나가 쓰는 난수: 대기 시간 M개, (유한 분포면) 원자 인덱스, 결과용 균등 난수 M+2개"""
    M = spec.M
    waits = spec.waits
    if isinstance(waits, WaitingTimeDistribution):
        cdf = np.broadcast_to(np.cumsum(waits.probs), (M, waits.probs.size))
        atom_idx = _pick(cdf, rng.random(M))
        taus = waits.taus[atom_idx]
    else:
        taus = np.asarray(waits(rng, 1, M), dtype=float)
        if taus.shape != (1, M) or np.any(taus < 0):
            raise ConfigError("waits.sampler", f"샘플러는 음이 아닌 shape (count, {M}) 배열을 돌려줘야 합니다")
        taus = taus[0]
        atom_idx = None
    return taus, atom_idx, rng.random(M + 2)


def _sample_block(spec: ProtocolSpec, rngs: Sequence[np.random.Generator]) -> TrajectoryBatch:
    """궤적별 생성기 목록으로 한 블록을 뽑는다. 전이 단계는 블록 단위로 벡터화한다."""
    N, M = spec.dimension, spec.M
    E = spec.energies
    W = spec.observable.basis
    count = len(rngs)

    draws = [_draw(spec, rng) for rng in rngs]
    taus = np.stack([d[0] for d in draws])
    u = np.stack([d[2] for d in draws])
    atom_idx = None if draws[0][1] is None else np.stack([d[1] for d in draws])

    initial = _pick(np.broadcast_to(np.cumsum(spec.initial.weights), (count, N)), u[:, 0])
    outcomes = np.empty((count, M), dtype=int)

    if atom_idx is not None:
        mats = protocol_matrices(spec)
        cdf_A = _column_cdf(mats.A_atoms)
        cdf_L = _column_cdf(mats.L_atoms)
        outcomes[:, 0] = _pick(cdf_A[atom_idx[:, 0], initial], u[:, 1])
        for j in range(1, M):
            outcomes[:, j] = _pick(cdf_L[atom_idx[:, j], outcomes[:, j - 1]], u[:, j + 1])
    else:
        # 연속 tau: 현재 상태의 열만 즉석에서 계산
        first = np.abs(W.conj()[initial] * np.exp(-1j * E[initial] * taus[:, 0])[:, None]) ** 2
        outcomes[:, 0] = _pick(np.cumsum(first, axis=1), u[:, 1])
        for j in range(1, M):
            phased = np.exp(-1j * np.outer(taus[:, j], E)) * W[:, outcomes[:, j - 1]].T
            probs = np.abs(phased @ W.conj()) ** 2
            outcomes[:, j] = _pick(np.cumsum(probs, axis=1), u[:, j + 1])

    cdf_B = _column_cdf(np.abs(W) ** 2)
    final = _pick(cdf_B[outcomes[:, -1]], u[:, M + 1])
    return TrajectoryBatch(initial, outcomes, taus, final, E[final] - E[initial])


def sample_trajectory(spec: ProtocolSpec, rng: Union[np.random.Generator, int]) -> Trajectory:
    """궤적 하나를 뽑는다. 정수 seed를 주면 sample_trajectories의 0번 궤적과 같다."""
    if not isinstance(rng, np.random.Generator):
        rng = _trajectory_rng(rng, 0)
    return _sample_block(spec, [rng]).trajectory(0)


def sample_trajectories(spec: ProtocolSpec, count: int, seed: int = 0,
                        scheduler: Optional[BatchScheduler] = None) -> TrajectoryBatch:
    """count개 궤적을 고정 크기 블록으로 나눠 뽑는다.

    궤적 i는 SeedSequence([seed, i])에서 스트림을 받는다. 블록은 병렬 실행 단위일 뿐이라
    i번 궤적은 count, BLOCK_SIZE, 작업자 수와 무관하다.
    """
    if count < 1:
        raise ConfigError("sample.count", "1 이상이어야 합니다")
    starts = list(range(0, count, BLOCK_SIZE))
    scheduler = scheduler or get_scheduler()
    logger.info("궤적 샘플링 시작: count=%d, blocks=%d, N=%d, M=%d", count, len(starts), spec.dimension, spec.M)

    def run(start: int) -> TrajectoryBatch:
        stop = min(start + BLOCK_SIZE, count)
        return _sample_block(spec, [_trajectory_rng(seed, i) for i in range(start, stop)])

    batch = TrajectoryBatch.concatenate(scheduler.map(run, starts))
    logger.info("궤적 샘플링 완료: %d개", len(batch))
    return batch


def _report(values: np.ndarray, target: EstimatorTarget, parameter: float,
            expected: Optional[float]) -> EstimatorReport:
    n = int(values.size)
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((values - mean) ** 2) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return EstimatorReport(n, mean, stderr, target, parameter, expected)


def estimate_jarzynski(spec: ProtocolSpec, count: int, seed: int = 0,
                       batch: Optional[TrajectoryBatch] = None,
                       scheduler: Optional[BatchScheduler] = None,
                       beta: Optional[float] = None) -> EstimatorReport:
    """<e^{-beta Q}>의 표본 평균.

    깁스 초기 상태면 beta는 상태의 역온도이고 기댓값은 1이다. 다른 초기 상태는 beta를 직접 줘야 하며
    기댓값 없이 평균만 보고한다.
    """
    gibbs = spec.initial.mode == InitialMode.GIBBS
    if beta is None:
        if not gibbs:
            raise ConfigError("sample.beta", "gibbs 초기 상태가 아니면 beta가 필요합니다")
        beta = spec.initial.beta
    beta = float(beta)
    expected = 1.0 if gibbs and beta == spec.initial.beta else None
    batch = batch if batch is not None else sample_trajectories(spec, count, seed, scheduler)
    report = _report(np.exp(-beta * batch.heat), EstimatorTarget.JARZYNSKI_EXP, beta, expected)
    logger.info("Jarzynski 추정: mean=%.6f, stderr=%.3e, pass=%s", report.mean, report.stderr, report.passed)
    return report


def estimate_moment(spec: ProtocolSpec, order: int, count: int, seed: int = 0,
                    batch: Optional[TrajectoryBatch] = None,
                    scheduler: Optional[BatchScheduler] = None) -> EstimatorReport:
    """<Q^l>의 표본 평균. 유한 대기 분포면 정확 모멘트를 기댓값으로 붙인다."""
    batch = batch if batch is not None else sample_trajectories(spec, count, seed, scheduler)
    expected = moments(spec, order) if isinstance(spec.waits, WaitingTimeDistribution) else None
    return _report(batch.heat.astype(float) ** order, EstimatorTarget.MOMENT_Q, float(order), expected)


def empirical_heat_histogram(spec: ProtocolSpec, count: int, seed: int = 0,
                             binning: Union[None, int, Sequence[float]] = None,
                             batch: Optional[TrajectoryBatch] = None,
                             scheduler: Optional[BatchScheduler] = None) -> HeatDistribution:
    """표본 열량의 경험 분포.

    binning이 없으면 정확한 지지점 E_m - E_n에 각 표본을 붙이고, 정수나 구간 경계를
    주면 numpy.histogram 구간 중심을 지지점으로 쓴다.
    """
    batch = batch if batch is not None else sample_trajectories(spec, count, seed, scheduler)
    Q = batch.heat
    n = len(batch)
    if binning is None:
        E = spec.energies
        tol = merge_tolerance(E)
        support, _ = coalesce(heat_matrix(E).ravel(), np.ones(E.size ** 2), tol)
        pos = np.clip(np.searchsorted(support, Q), 1, max(support.size - 1, 1))
        left = support[pos - 1]
        right = support[np.minimum(pos, support.size - 1)]
        idx = np.where(np.abs(Q - left) <= np.abs(right - Q), pos - 1, np.minimum(pos, support.size - 1))
        counts = np.bincount(idx, minlength=support.size).astype(float)
    else:
        counts, edges = np.histogram(Q, bins=binning)
        counts = counts.astype(float)
        support = 0.5 * (edges[:-1] + edges[1:])
        tol = float(np.min(np.diff(edges))) / 2
    keep = counts > 0
    return HeatDistribution(support[keep], counts[keep] / n, tol)


def empirical_conditional(batch: TrajectoryBatch, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """경험적 P(m|n)과 성분별 표준 오차 sqrt(p(1-p)/count_n)"""
    counts = np.zeros((N, N))
    np.add.at(counts, (batch.final, batch.initial), 1.0)
    per_initial = counts.sum(axis=0)
    denom = np.where(per_initial > 0, per_initial, 1.0)
    freq = counts / denom[None, :]
    stderr = np.sqrt(freq * (1.0 - freq) / denom[None, :])
    return freq, stderr


def total_variation(a: HeatDistribution, b: HeatDistribution, tol: Optional[float] = None) -> float:
    """두 이산 분포의 총변동 거리 (지지점은 tol 이내면 같은 점으로 본다)"""
    tol = max(a.merge_tol, b.merge_tol) if tol is None else tol
    values = np.concatenate([a.support, b.support])
    signed = np.concatenate([a.probs, -b.probs])
    _, diffs = coalesce(values, signed, tol)
    return 0.5 * float(np.sum(np.abs(diffs)))
