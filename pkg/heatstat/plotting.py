"""
SVG 선 그래프 출력
matplotlib Agg 백엔드로 그리고, 해시 솔트와 날짜 메타데이터를 고정해서 같은 입력이면 같은 바이트를 낸다.
"""

import io
import logging
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASHSALT = "heatstat"


def _render(fig) -> str:
    buffer = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "path"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buffer.getvalue()


def charfn_svg(us: Sequence[float], values: Sequence[complex]) -> str:
    """실수 u 격자 위의 |G(u)|와 arg G(u)"""
    u = np.asarray(us, dtype=float)
    G = np.asarray(values, dtype=complex)
    fig, (ax_abs, ax_arg) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
    ax_abs.plot(u, np.abs(G), color="tab:blue")
    ax_abs.set_ylabel("|G(u)|")
    ax_arg.plot(u, np.angle(G), color="tab:orange")
    ax_arg.set_ylabel("arg G(u)")
    ax_arg.set_xlabel("u")
    fig.tight_layout()
    return _render(fig)


def beta_eff_svg(curves: Dict[float, Sequence[Sequence[float]]]) -> str:
    """beta마다 (alpha, beta_eff) 꺾은선 하나. NaN 점은 끊어서 그린다."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for beta in sorted(curves):
        alphas, values = np.asarray(curves[beta], dtype=float).T
        ax.plot(alphas, values, label=f"beta = {beta:g}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("beta_eff")
    ax.legend()
    fig.tight_layout()
    logger.debug("beta_eff 그래프: 곡선 %d개", len(curves))
    return _render(fig)


def escape_svg(Ms: Sequence[int], escapes: Sequence[float]) -> str:
    """탈출 확률 대 M (로그-로그)"""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(np.asarray(Ms, dtype=float), np.asarray(escapes, dtype=float), marker="o")
    ax.set_xlabel("M")
    ax.set_ylabel("escape probability")
    fig.tight_layout()
    return _render(fig)
