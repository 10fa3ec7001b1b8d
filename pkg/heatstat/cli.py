"""
heatstat 명령행 인터페이스
heatstat <exact|sample|thermalize|zeno|fig1|validate> --config <path> --out <dir> [--seed N] [--threads N]
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv

from .asymptotics import (
    convergence_profile,
    fixed_point_multiplicity,
    limiting_final_populations,
    thermalization_report,
    zeno_scaling,
)
from .config import ExperimentConfig, load_config
from .errors import HeatstatError, InvariantViolation
from .exact import (
    ENUMERATION_LIMIT,
    char_fn,
    char_fn_grid,
    conditional_table,
    heat_distribution,
    moments,
    unitality_check,
)
from .models import InitialMode, unitarity_deviation
from .montecarlo import (
    empirical_conditional,
    empirical_heat_histogram,
    estimate_jarzynski,
    estimate_moment,
    sample_trajectories,
)
from .plotting import beta_eff_svg, charfn_svg, escape_svg
from .protocol import protocol_matrices, stochastic_deviation
from .qutrit_beta import asymptotic_beta_bar, beta_eff_slope, sweep_fig1
from .scheduler import configure_scheduler
from .storage import ResultStorage
from .utils import format_float

logger = logging.getLogger(__name__)

VALIDATION_TOL = 1e-10


def _tuple_text(values: Sequence, fmt: Callable = str) -> str:
    return "(" + ", ".join(fmt(v) for v in values) + ")"


def cmd_exact(config: ExperimentConfig, storage: ResultStorage) -> List[str]:
    """열량 분포, u 격자 위 특성 함수, 모멘트"""
    spec = config.protocol_spec()
    task = config.exact
    dist = heat_distribution(spec)
    storage.save_table("heat_distribution.csv", ("Q", "prob"),
                       [(float(q), float(p)) for q, p in zip(dist.support, dist.probs)])

    values = char_fn_grid(spec, task.u_grid)
    storage.save_table("charfn.csv", ("re_u", "im_u", "re_G", "im_G"),
                       [(v.u.real, v.u.imag, v.value.real, v.value.imag) for v in values])

    storage.save_table("moments.csv", ("order", "moment"),
                       [(order, moments(spec, order)) for order in range(1, task.max_order + 1)])
    if task.plot:
        storage.save_svg("charfn.svg", charfn_svg(task.u_grid, [v.value for v in values]))
    return storage.written


def cmd_sample(config: ExperimentConfig, storage: ResultStorage) -> List[str]:
    """몬테카를로 궤적, 경험 분포, Jarzynski 추정"""
    spec = config.protocol_spec()
    task = config.sample
    batch = sample_trajectories(spec, task.count, config.seed)
    obs_values = spec.observable.values

    rows = []
    for i in range(min(task.log_count, len(batch))):
        t = batch.trajectory(i)
        rows.append((i, t.initial, _tuple_text(t.outcomes), _tuple_text(obs_values[list(t.outcomes)], format_float),
                     _tuple_text(t.waits, format_float), t.final, t.heat))
    storage.save_table("trajectories.csv", ("index", "n", "outcomes", "alpha_values", "waits", "m", "Q"), rows)

    histogram = empirical_heat_histogram(spec, task.count, batch=batch)
    storage.save_table("heat_histogram.csv", ("Q", "freq"),
                       [(float(q), float(p)) for q, p in zip(histogram.support, histogram.probs)])

    first = estimate_moment(spec, 1, task.count, batch=batch)
    second = estimate_moment(spec, 2, task.count, batch=batch)
    storage.save_json("summary.json", {
        "count": len(batch),
        "seed": config.seed,
        "moments": [first.as_dict() | {"expected": first.expected}, second.as_dict() | {"expected": second.expected}],
        "final_frequencies": np.bincount(batch.final, minlength=spec.dimension).astype(float).tolist(),
    })

    freq, stderr = empirical_conditional(batch, spec.dimension)
    exact = conditional_table(spec).matrix
    storage.save_table("conditional.csv", ("m", "n", "freq", "stderr", "exact"),
                       [(m, n, float(freq[m, n]), float(stderr[m, n]), float(exact[m, n]))
                        for n in range(spec.dimension) for m in range(spec.dimension)])

    if spec.initial.mode == InitialMode.GIBBS or task.beta is not None:
        report = estimate_jarzynski(spec, task.count, batch=batch, beta=task.beta)
        storage.save_json("jarzynski.json", report.as_dict())
    else:
        logger.warning("gibbs 초기 상태가 아니고 sample.beta도 없어 Jarzynski 추정을 건너뜁니다")
    return storage.written


def cmd_thermalize(config: ExperimentConfig, storage: ResultStorage) -> List[str]:
    """블록 구조, 수렴 프로파일, 열화 영역"""
    spec = config.protocol_spec()
    report = thermalization_report(spec)
    multiplicity = fixed_point_multiplicity(spec)
    if abs(multiplicity - report.blocks.count) > 1e-6:
        logger.warning("tr(L_bar^K) = %.6g 가 블록 수 R = %d 와 다릅니다", multiplicity, report.blocks.count)
    storage.save_json("blocks.json", report.as_dict() | {
        "fixed_point_trace": multiplicity,
        "limiting_final_populations": limiting_final_populations(spec, report.blocks).tolist(),
    })
    storage.save_table("convergence.csv", ("M", "distance"), convergence_profile(spec, config.thermalize.M_list))
    print(report.regime.value)
    return storage.written


def cmd_zeno(config: ExperimentConfig, storage: ResultStorage) -> List[str]:
    """고정 총 시간 T에서 탈출 확률 대 M"""
    spec = config.protocol_spec()
    task = config.zeno
    slope, escapes = zeno_scaling(spec, task.total_time, task.M_list)
    storage.save_table("escape.csv", ("M", "escape"), escapes)
    storage.save_json("slope.json", {"slope": slope, "total_time": task.total_time, "M_list": list(task.M_list)})
    storage.save_svg("escape.svg", escape_svg([M for M, _ in escapes], [e for _, e in escapes]))
    return storage.written


def cmd_fig1(config: ExperimentConfig, storage: ResultStorage) -> List[str]:
    """세 준위 beta_eff 곡선"""
    task = config.fig1
    rows = sweep_fig1(task.energies, task.beta_list, task.alpha_grid)
    storage.save_table("beta_eff.csv", ("beta", "alpha", "beta_eff", "error"),
                       [(r.beta, r.alpha, r.beta_eff, r.error) for r in rows])
    curves: Dict[float, List[List[float]]] = {}
    for r in rows:
        curves.setdefault(r.beta, []).append([r.alpha, r.beta_eff])
    storage.save_svg("beta_eff.svg", beta_eff_svg(curves))
    storage.save_json("beta_eff_asymptotics.json", {
        "beta_bar": asymptotic_beta_bar(task.energies),
        "slope": beta_eff_slope(task.energies),
        "failed_points": sum(1 for r in rows if r.error),
    })
    return storage.written


def cmd_validate(config: ExperimentConfig, storage: ResultStorage) -> List[str]:
    """값싼 불변량 검사. 하나라도 실패하면 InvariantViolation"""
    spec = config.protocol_spec()
    mats = protocol_matrices(spec)
    checks = [
        ("observable_unitarity", unitarity_deviation(spec.observable.basis)),
        ("L_bar_doubly_stochastic", stochastic_deviation(mats.L_bar, doubly=True)),
        ("A_bar_stochastic", stochastic_deviation(mats.A_bar)),
        ("B_stochastic", stochastic_deviation(mats.B)),
        ("G0_equals_1", abs(char_fn(spec, 0.0).value - 1.0)),
        ("heat_mass_equals_1", abs(heat_distribution(spec).total_mass() - 1.0)),
    ]
    M = min(spec.M, config.validate.max_unitality_M)
    while M > 1 and spec.dimension ** M > ENUMERATION_LIMIT:
        M -= 1
    checks.append((f"unitality_M{M}", unitality_check(spec, M)))
    if spec.initial.mode == InitialMode.GIBBS:
        checks.append(("jarzynski_G_i_beta", abs(char_fn(spec, 1j * spec.initial.beta).value - 1.0)))

    results = [{"check": name, "deviation": value, "tol": VALIDATION_TOL, "pass": value <= VALIDATION_TOL}
               for name, value in checks]
    storage.save_json("validate.json", {"checks": results})
    failed = [r["check"] for r in results if not r["pass"]]
    for r in results:
        logger.info("검사 %-26s 편차=%.3e %s", r["check"], r["deviation"], "OK" if r["pass"] else "FAIL")
    if failed:
        raise InvariantViolation(f"불변량 검사 실패: {', '.join(failed)}")
    return storage.written


COMMANDS: Dict[str, Callable[[ExperimentConfig, ResultStorage], List[str]]] = {
    "exact": cmd_exact,
    "sample": cmd_sample,
    "thermalize": cmd_thermalize,
    "zeno": cmd_zeno,
    "fig1": cmd_fig1,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatstat", description="반복 사영 측정의 열량 통계")
    parser.add_argument("command", choices=sorted(COMMANDS), help="실행할 하위 명령")
    parser.add_argument("--config", required=True, help="JSON 실험 설정 파일 경로")
    parser.add_argument("--out", required=True, help="결과 출력 디렉토리")
    parser.add_argument("--seed", type=int, help="설정의 seed 덮어쓰기")
    parser.add_argument("--threads", type=int, help="작업자 수 (기본: HEATSTAT_THREADS 또는 1)")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG 로그 출력")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """메인 실행 함수. 종료 코드: 0 성공, 2 설정 오류, 3 수치 오류"""
    load_dotenv()
    args = build_parser().parse_args(argv)
    level = "DEBUG" if args.verbose else os.getenv("HEATSTAT_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    configure_scheduler(args.threads)

    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        storage = ResultStorage(args.out, metadata={
            "command": args.command,
            "config_hash": config.config_hash,
            "seed": config.seed,
        })
        written = COMMANDS[args.command](config, storage)
    except HeatstatError as exc:
        logger.error("%s 실패: %s", args.command, exc)
        sys.stderr.write(json.dumps(exc.to_payload(), ensure_ascii=False) + "\n")
        return exc.exit_code
    logger.info("%s 완료: 파일 %d개", args.command, len(written))
    return 0


if __name__ == "__main__":
    sys.exit(main())
