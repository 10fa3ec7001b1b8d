import hashlib
import json
import logging
import math
from typing import Any, Union

import numpy as np

from .errors import ConfigError


logger = logging.getLogger(__name__)

Cell = Union[bool, int, float, str]


def canonical_json(document: Any) -> str:
    """키 정렬, 공백 없는 JSON 문자열"""
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def create_config_hash(document: Any) -> str:
    """설정 문서의 SHA-256 해시 (출력 메타데이터용)"""
    return hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()


def format_float(x: float) -> str:
    """17자리 유효숫자. 정수처럼 보이면 '.0'을 붙여 타입을 보존한다."""
    text = format(float(x), ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def format_cell(value: Cell) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def parse_cell(text: str) -> Cell:
    """format_cell의 역변환: true/false -> bool, 정수 -> int, 실수/inf/nan -> float, 나머지는 문자열"""
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        return text
    if math.isfinite(value) or text in ("nan", "inf", "-inf"):
        return value
    return text


def parse_complex(entry: Any, field: str) -> complex:
    """실수 또는 [re, im] 쌍"""
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry):
        return complex(entry[0], entry[1])
    raise ConfigError(field, f"실수 또는 [re, im] 쌍이어야 합니다: {entry!r}")


def parse_matrix(rows: Any, field: str) -> np.ndarray:
    """행 목록을 복소 정방 행렬로 변환"""
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(field, "행 목록이어야 합니다")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ConfigError(field, f"{n}x{n} 정방 행렬이어야 합니다")
    return np.array([[parse_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(rows)], dtype=complex)


def parse_real_list(values: Any, field: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise ConfigError(field, "비어 있지 않은 숫자 목록이어야 합니다")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in values):
        raise ConfigError(field, "숫자만 허용됩니다")
    out = np.array(values, dtype=float)
    if not np.all(np.isfinite(out)):
        raise ConfigError(field, "유한한 값이어야 합니다")
    return out

