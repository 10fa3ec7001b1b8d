"""heatstat 예외 계층

CLI 종료 코드와 1:1로 대응한다: ConfigError 계열은 2, NumericalError 계열은 3.
"""

from typing import Optional


class HeatstatError(Exception):
    """heatstat 최상위 예외"""

    exit_code = 1

    def to_payload(self) -> dict:
        """stderr로 내보낼 JSON 페이로드"""
        return {"error": type(self).__name__, "message": str(self)}


class ConfigError(HeatstatError, ValueError):
    """설정/입력 검증 실패. 문제 필드와 제약 조건을 함께 보관한다."""

    exit_code = 2

    def __init__(self, field: str, constraint: str):
        super().__init__(f"{field}: {constraint}")
        self.field = field
        self.constraint = constraint

    def to_payload(self) -> dict:
        payload = super().to_payload()
        payload["field"] = self.field
        return payload


class NumericalError(HeatstatError):
    """수치 계산 실패"""

    exit_code = 3


class NotHermitian(NumericalError):
    def __init__(self, deviation: float, tol: float):
        super().__init__(f"행렬이 에르미트가 아닙니다: |A - A^H|_max = {deviation:.3e} > {tol:.3e}")
        self.deviation = deviation


class NoConvergence(NumericalError):
    pass


class DimensionMismatch(NumericalError, ValueError):
    pass


class RangeExceeded(NumericalError):
    pass


class UnsupportedDistribution(NumericalError):
    pass


class OrderTooHigh(NumericalError, ValueError):
    pass


class TooLarge(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class DegenerateObservable(NumericalError):
    pass


class NoRootInBracket(NumericalError):
    def __init__(self, interval: tuple, message: Optional[str] = None):
        lo, hi = interval
        super().__init__(message or f"구간 [{lo:.6g}, {hi:.6g}] 안에서 부호 변화를 찾지 못했습니다.")
        self.interval = interval


class DegenerateRoot(NumericalError):
    pass


class InvariantViolation(NumericalError):
    pass
