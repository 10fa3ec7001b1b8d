import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def threads_from_env(default: int = 1) -> int:
    """HEATSTAT_THREADS 환경 변수에서 작업자 수를 읽는다"""
    raw = os.getenv("HEATSTAT_THREADS")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("HEATSTAT_THREADS 값이 정수가 아닙니다: %r (기본값 %d 사용)", raw, default)
        return default
    return max(1, value)


class BatchScheduler:
    """독립 작업 묶음을 스레드 풀에서 실행하는 스케줄러

    결과 순서는 항상 입력 순서와 같으므로 작업자 수와 무관하게 같은 결과를 준다.
    """

    def __init__(self, threads: int = 1):
        self.threads = max(1, int(threads))

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self.threads == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        logger.debug("배치 실행: 작업 %d개, 작업자 %d개", len(items), self.threads)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))


# 전역 스케줄러 인스턴스
_scheduler_instance: Optional[BatchScheduler] = None


def get_scheduler() -> BatchScheduler:
    """스케줄러 인스턴스를 반환 (싱글톤)"""
    global _scheduler_instance
    if _scheduler_instance is None:
        _scheduler_instance = BatchScheduler(threads=threads_from_env())
    return _scheduler_instance


def configure_scheduler(threads: Optional[int] = None) -> BatchScheduler:
    """--threads 인자 또는 환경 변수로 전역 스케줄러를 다시 만든다"""
    global _scheduler_instance
    _scheduler_instance = BatchScheduler(threads=threads if threads else threads_from_env())
    logger.info("배치 스케줄러 설정: 작업자 %d개", _scheduler_instance.threads)
    return _scheduler_instance
