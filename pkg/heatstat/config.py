"""
실험 설정 파일 로더
JSON 문서를 엄격하게 검증해서 불변 데이터클래스로 바꾸고, 완전히 결정된 ProtocolSpec을 만든다.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from .errors import ConfigError, DimensionMismatch, HeatstatError, NotHermitian
from .models import HermitianSpec, InitialState, Observable, ProtocolSpec, WaitingTimeDistribution
from .presets import observable_from_preset
from .protocol import quadrature_waits
from .qcore import jacobi_eigh
from .qutrit_beta import DEFAULT_BETAS, DEFAULT_ENERGIES, QutritEnsemble
from .utils import create_config_hash, parse_matrix, parse_real_list

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {"system", "observable", "initial", "waits", "M", "seed",
                  "exact", "sample", "thermalize", "zeno", "fig1", "validate"}


def _check_keys(block: Any, allowed: Iterable[str], path: str) -> Dict[str, Any]:
    if not isinstance(block, dict):
        raise ConfigError(path or "config", "객체여야 합니다")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "알 수 없는 키입니다")
    return block


def _one_of(block: Dict[str, Any], choices: Tuple[str, ...], path: str) -> str:
    present = [k for k in choices if k in block]
    if len(present) != 1:
        raise ConfigError(path, f"{' | '.join(choices)} 중 정확히 하나가 필요합니다")
    return present[0]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ConfigError(path, "유한한 숫자여야 합니다")
    return float(value)


def _integer(value: Any, path: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(path, f"{minimum} 이상의 정수여야 합니다")
    return value


def _int_list(values: Any, path: str) -> Tuple[int, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError(path, "비어 있지 않은 정수 목록이어야 합니다")
    return tuple(_integer(v, f"{path}[{i}]") for i, v in enumerate(values))


def _grid(value: Any, path: str) -> Tuple[float, ...]:
    """숫자 목록 또는 {"start", "stop", "num"}"""
    if isinstance(value, dict):
        _check_keys(value, ("start", "stop", "num"), path)
        try:
            start, stop = _number(value["start"], f"{path}.start"), _number(value["stop"], f"{path}.stop")
            num = _integer(value["num"], f"{path}.num")
        except KeyError as exc:
            raise ConfigError(f"{path}.{exc.args[0]}", "필수 키입니다") from exc
        return tuple(np.linspace(start, stop, num).tolist())
    return tuple(parse_real_list(value, path).tolist())


@dataclass(frozen=True)
class ExactTask:
    u_grid: Tuple[float, ...] = tuple(np.linspace(-5.0, 5.0, 101).tolist())
    max_order: int = 2
    plot: bool = True


@dataclass(frozen=True)
class SampleTask:
    count: int = 100_000
    log_count: int = 20
    beta: Optional[float] = None


@dataclass(frozen=True)
class ThermalizeTask:
    M_list: Tuple[int, ...] = (1, 2, 5, 10, 20, 50, 100, 200, 500)


@dataclass(frozen=True)
class ZenoTask:
    total_time: float = 1.0
    M_list: Tuple[int, ...] = (10, 20, 50, 100, 200, 500, 1000)


@dataclass(frozen=True)
class Fig1Task:
    energies: Tuple[float, ...] = DEFAULT_ENERGIES
    beta_list: Tuple[float, ...] = DEFAULT_BETAS
    alpha_grid: Tuple[float, ...] = tuple(np.linspace(-30.0, 10.0, 81).tolist())


@dataclass(frozen=True)
class ValidateTask:
    max_unitality_M: int = 4


def _parse_exact(block: Any) -> ExactTask:
    _check_keys(block, ("u_grid", "max_order", "plot"), "exact")
    defaults = ExactTask()
    plot = block.get("plot", defaults.plot)
    if not isinstance(plot, bool):
        raise ConfigError("exact.plot", "true/false 여야 합니다")
    return ExactTask(
        u_grid=_grid(block["u_grid"], "exact.u_grid") if "u_grid" in block else defaults.u_grid,
        max_order=_integer(block.get("max_order", defaults.max_order), "exact.max_order"),
        plot=plot,
    )


def _parse_sample(block: Any) -> SampleTask:
    _check_keys(block, ("count", "log_count", "beta"), "sample")
    beta = block.get("beta")
    return SampleTask(
        count=_integer(block.get("count", SampleTask.count), "sample.count"),
        log_count=_integer(block.get("log_count", SampleTask.log_count), "sample.log_count", minimum=0),
        beta=None if beta is None else _number(beta, "sample.beta"),
    )


def _parse_thermalize(block: Any) -> ThermalizeTask:
    _check_keys(block, ("M_list",), "thermalize")
    return ThermalizeTask(_int_list(block["M_list"], "thermalize.M_list")) if "M_list" in block else ThermalizeTask()


def _parse_zeno(block: Any) -> ZenoTask:
    _check_keys(block, ("total_time", "M_list"), "zeno")
    defaults = ZenoTask()
    total_time = _number(block.get("total_time", defaults.total_time), "zeno.total_time")
    if total_time <= 0:
        raise ConfigError("zeno.total_time", "양수여야 합니다")
    M_list = _int_list(block["M_list"], "zeno.M_list") if "M_list" in block else defaults.M_list
    return ZenoTask(total_time, M_list)


def _parse_fig1(block: Any) -> Fig1Task:
    _check_keys(block, ("energies", "beta_list", "alpha_grid"), "fig1")
    defaults = Fig1Task()
    return Fig1Task(
        energies=tuple(parse_real_list(block["energies"], "fig1.energies").tolist())
        if "energies" in block else defaults.energies,
        beta_list=tuple(parse_real_list(block["beta_list"], "fig1.beta_list").tolist())
        if "beta_list" in block else defaults.beta_list,
        alpha_grid=_grid(block["alpha_grid"], "fig1.alpha_grid") if "alpha_grid" in block else defaults.alpha_grid,
    )


def _parse_validate(block: Any) -> ValidateTask:
    _check_keys(block, ("max_unitality_M",), "validate")
    return ValidateTask(_integer(block.get("max_unitality_M", ValidateTask.max_unitality_M),
                                 "validate.max_unitality_M"))


def _diagonalize(matrix: np.ndarray, path: str) -> HermitianSpec:
    """설정에서 읽은 행렬의 고유값 분해. 입력 문제는 필드 경로가 붙은 ConfigError로 바꾼다."""
    try:
        return jacobi_eigh(matrix)
    except NotHermitian as exc:
        raise ConfigError(path, f"에르미트 행렬이어야 합니다 (편차 {exc.deviation:.3e})") from exc
    except DimensionMismatch as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_system(block: Any) -> HermitianSpec:
    _check_keys(block, ("energies", "hamiltonian"), "system")
    kind = _one_of(block, ("energies", "hamiltonian"), "system")
    if kind == "energies":
        return HermitianSpec.from_energies(parse_real_list(block["energies"], "system.energies"))
    return _diagonalize(parse_matrix(block["hamiltonian"], "system.hamiltonian"), "system.hamiltonian")


def parse_observable(block: Any, system: HermitianSpec) -> Observable:
    """관측량 행렬은 시스템과 같은 (실험실) 기저로 읽어서 에너지 기저로 돌린다. 프리셋은 에너지 기저 기준."""
    n = system.dimension
    if isinstance(block, str):
        return observable_from_preset(block, n)
    _check_keys(block, ("unitary", "values", "hermitian"), "observable")
    kind = _one_of(block, ("unitary", "hermitian"), "observable")
    V = system.eigenvectors
    if kind == "hermitian":
        if "values" in block:
            raise ConfigError("observable.values", "hermitian과 함께 쓸 수 없습니다")
        O = parse_matrix(block["hermitian"], "observable.hermitian")
        if O.shape != (n, n):
            raise ConfigError("observable.hermitian", f"{n}x{n} 행렬이어야 합니다")
        eig = _diagonalize(V.conj().T @ O @ V, "observable.hermitian")
        return Observable(eig.eigenvalues, eig.eigenvectors)
    W = parse_matrix(block["unitary"], "observable.unitary")
    if W.shape != (n, n):
        raise ConfigError("observable.unitary", f"{n}x{n} 행렬이어야 합니다")
    values = parse_real_list(block["values"], "observable.values") if "values" in block else np.arange(n, dtype=float)
    return Observable(values, V.conj().T @ W)


def parse_initial(block: Any, system: HermitianSpec) -> InitialState:
    _check_keys(block, ("weights", "gibbs", "qutrit"), "initial")
    kind = _one_of(block, ("weights", "gibbs", "qutrit"), "initial")
    if kind == "weights":
        weights = parse_real_list(block["weights"], "initial.weights")
        if weights.size != system.dimension:
            raise ConfigError("initial.weights", f"길이가 시스템 차원 {system.dimension}이어야 합니다 (현재 {weights.size})")
        return InitialState.explicit(weights)
    if kind == "gibbs":
        return InitialState.gibbs(system.eigenvalues, _number(block["gibbs"], "initial.gibbs"))
    params = _check_keys(block["qutrit"], ("alpha", "beta"), "initial.qutrit")
    if system.dimension != 3:
        raise ConfigError("initial.qutrit", f"세 준위 시스템에서만 쓸 수 있습니다 (N={system.dimension})")
    alpha = _number(params.get("alpha", 0.0), "initial.qutrit.alpha")
    beta = _number(params.get("beta", 0.0), "initial.qutrit.beta")
    return QutritEnsemble(system.eigenvalues, alpha, beta).initial_state()


def parse_waits(block: Any) -> WaitingTimeDistribution:
    _check_keys(block, ("tau", "atoms", "quadrature"), "waits")
    kind = _one_of(block, ("tau", "atoms", "quadrature"), "waits")
    if kind == "tau":
        tau = _number(block["tau"], "waits.tau")
        if tau < 0:
            raise ConfigError("waits.tau", "0 이상이어야 합니다")
        return WaitingTimeDistribution.deterministic(tau)
    if kind == "atoms":
        atoms = block["atoms"]
        if not isinstance(atoms, list) or not all(isinstance(a, list) and len(a) == 2 for a in atoms):
            raise ConfigError("waits.atoms", "[tau, p] 쌍의 목록이어야 합니다")
        return WaitingTimeDistribution.from_atoms(
            [(_number(t, f"waits.atoms[{i}][0]"), _number(p, f"waits.atoms[{i}][1]")) for i, (t, p) in enumerate(atoms)])
    quad = _check_keys(block["quadrature"], ("density", "interval", "nodes", "rate", "mean", "std"), "waits.quadrature")
    if "density" not in quad or "interval" not in quad:
        raise ConfigError("waits.quadrature", "density와 interval이 필요합니다")
    interval = parse_real_list(quad["interval"], "waits.quadrature.interval")
    if interval.size != 2:
        raise ConfigError("waits.quadrature.interval", "[lo, hi] 형식이어야 합니다")
    params = {k: _number(quad[k], f"waits.quadrature.{k}") for k in ("rate", "mean", "std") if k in quad}
    nodes = _integer(quad.get("nodes", 64), "waits.quadrature.nodes")
    return quadrature_waits(str(quad["density"]), tuple(interval.tolist()), nodes, params)


@dataclass(frozen=True)
class ExperimentConfig:
    """검증이 끝난 실험 설정"""
    document: Dict[str, Any]
    config_hash: str
    seed: int = 0
    M: Optional[int] = None
    system: Optional[HermitianSpec] = None
    observable: Optional[Observable] = None
    initial: Optional[InitialState] = None
    waits: Optional[WaitingTimeDistribution] = None
    exact: ExactTask = field(default_factory=ExactTask)
    sample: SampleTask = field(default_factory=SampleTask)
    thermalize: ThermalizeTask = field(default_factory=ThermalizeTask)
    zeno: ZenoTask = field(default_factory=ZenoTask)
    fig1: Fig1Task = field(default_factory=Fig1Task)
    validate: ValidateTask = field(default_factory=ValidateTask)

    def protocol_spec(self) -> ProtocolSpec:
        """프로토콜 블록이 모두 있어야 한다"""
        for name in ("system", "observable", "initial", "waits", "M"):
            if getattr(self, name) is None:
                raise ConfigError(name, "이 명령에는 필수 항목입니다")
        return ProtocolSpec(self.system, self.observable, self.initial, self.waits, self.M)


def parse_config(document: Any) -> ExperimentConfig:
    """JSON 호환 문서를 ExperimentConfig로 변환. 알 수 없는 키는 점 경로와 함께 거부한다."""
    _check_keys(document, TOP_LEVEL_KEYS, "")
    system = parse_system(document["system"]) if "system" in document else None
    if system is None and any(k in document for k in ("observable", "initial")):
        raise ConfigError("system", "observable/initial을 쓰려면 system이 필요합니다")
    observable = parse_observable(document["observable"], system) if "observable" in document else None
    initial = parse_initial(document["initial"], system) if "initial" in document else None
    waits = parse_waits(document["waits"]) if "waits" in document else None
    M = _integer(document["M"], "M") if "M" in document else None
    seed = _integer(document.get("seed", 0), "seed", minimum=0)

    config = ExperimentConfig(
        document=document,
        config_hash=create_config_hash(document),
        seed=seed,
        M=M,
        system=system,
        observable=observable,
        initial=initial,
        waits=waits,
        exact=_parse_exact(document.get("exact", {})),
        sample=_parse_sample(document.get("sample", {})),
        thermalize=_parse_thermalize(document.get("thermalize", {})),
        zeno=_parse_zeno(document.get("zeno", {})),
        fig1=_parse_fig1(document.get("fig1", {})),
        validate=_parse_validate(document.get("validate", {})),
    )
    if all(getattr(config, name) is not None for name in ("system", "observable", "initial", "waits", "M")):
        try:
            config.protocol_spec()
        except DimensionMismatch as exc:
            raise ConfigError("config", str(exc)) from exc
    logger.info("설정 로드 완료: hash=%s, N=%s, M=%s", config.config_hash[:12],
                system.dimension if system else None, M)
    return config


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError("config", f"파일을 찾을 수 없습니다: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"JSON 파싱 실패: {exc}") from exc
    try:
        return parse_config(document)
    except HeatstatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("config", str(exc)) from exc
