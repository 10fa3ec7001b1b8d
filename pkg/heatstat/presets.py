"""미리 정의된 관측량 프리셋 매핑"""

import logging
import re
from typing import Callable, Dict, List, Sequence

import numpy as np
from scipy.stats import unitary_group

from .errors import ConfigError
from .models import Observable

logger = logging.getLogger(__name__)

_PRESET_PATTERN = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")


def _args(raw: str) -> List[str]:
    return [part.strip() for part in raw.split(",") if part.strip()] if raw else []


def _float_arg(name: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"observable.{name}", f"숫자가 아닙니다: {raw!r}") from exc


def energy_observable(n: int, args: Sequence[str] = ()) -> Observable:
    """W = I, H와 가환"""
    if args:
        raise ConfigError("observable", "energy 프리셋은 인자를 받지 않습니다")
    return Observable.energy_basis(n)


def qubit_observable(n: int, args: Sequence[str]) -> Observable:
    """(E-, E+) 기저에서 W = [[-b, a], [a, b]]"""
    if n != 2:
        raise ConfigError("observable", f"qubit 프리셋은 2준위 전용입니다 (N={n})")
    if len(args) != 2:
        raise ConfigError("observable", "qubit(a, b) 형식이어야 합니다")
    a, b = (_float_arg(name, raw) for name, raw in zip(("a", "b"), args))
    if abs(a * a + b * b - 1.0) > 1e-10:
        raise ConfigError("observable.a", "a^2 + b^2 = 1 이어야 합니다")
    return Observable(np.array([1.0, 2.0]), np.array([[-b, a], [a, b]], dtype=complex))


def random_observable(n: int, args: Sequence[str]) -> Observable:
    """Haar 무작위 고유기저"""
    if len(args) != 1:
        raise ConfigError("observable", "random(seed) 형식이어야 합니다")
    try:
        seed = int(args[0])
    except ValueError as exc:
        raise ConfigError("observable.seed", f"정수가 아닙니다: {args[0]!r}") from exc
    W = unitary_group.rvs(n, random_state=seed) if n > 1 else np.eye(1, dtype=complex)
    return Observable(np.arange(n, dtype=float), W)


def block_observable(n: int, args: Sequence[str]) -> Observable:
    """에너지 인덱스를 연속 블록으로 나누고 각 블록 안에서 DFT 기저를 쓴다.

    block(2,1)이면 {E1,E2}는 완전히 섞이고 E3는 그대로 남는다.
    """
    try:
        sizes = [int(s) for s in args]
    except ValueError as exc:
        raise ConfigError("observable", "block(d1, d2, ...) 인자는 정수여야 합니다") from exc
    if not sizes or any(d < 1 for d in sizes) or sum(sizes) != n:
        raise ConfigError("observable", f"블록 크기의 합이 N={n}이어야 합니다")
    W = np.zeros((n, n), dtype=complex)
    start = 0
    for d in sizes:
        k = np.arange(d)
        W[start:start + d, start:start + d] = np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
        start += d
    return Observable(np.arange(n, dtype=float), W)


# 프리셋 이름 -> 생성 함수 (N, 인자 목록)
KNOWN_PRESETS: Dict[str, Callable[[int, Sequence[str]], Observable]] = {
    "energy": energy_observable,
    "qubit": qubit_observable,
    "random": random_observable,
    "block": block_observable,
}


def observable_from_preset(preset: str, n: int) -> Observable:
    """'qubit(0.6, 0.8)' 같은 문자열을 관측량으로 변환"""
    match = _PRESET_PATTERN.match(preset)
    if not match or match.group(1) not in KNOWN_PRESETS:
        raise ConfigError("observable", f"알 수 없는 프리셋 '{preset}' (가능: {sorted(KNOWN_PRESETS)})")
    name, raw = match.group(1), match.group(2)
    logger.debug("관측량 프리셋 %s 사용 (N=%d)", name, n)
    return KNOWN_PRESETS[name](n, _args(raw))
