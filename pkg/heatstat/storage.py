import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

from . import __version__
from .errors import ConfigError
from .utils import Cell, format_cell, parse_cell


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResultTable:
    """열 이름, 행, 메타데이터(설정 해시, 도구 버전, 시드)로 이루어진 결과 표"""
    columns: Tuple[str, ...]
    rows: Tuple[Tuple[Cell, ...], ...]
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        object.__setattr__(self, "metadata", {str(k): str(v) for k, v in self.metadata.items()})
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ConfigError(f"table.rows[{i}]", f"열 {len(self.columns)}개가 필요합니다 (현재 {len(row)})")

    def column(self, name: str) -> List[Cell]:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def emit_table(table: ResultTable) -> str:
    """'# key=value' 메타데이터 줄(키 정렬), 헤더, 행 순서의 CSV 텍스트"""
    buffer = io.StringIO()
    for key in sorted(table.metadata):
        buffer.write(f"# {key}={table.metadata[key]}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def parse_table(text: str) -> ResultTable:
    """emit_table의 역변환"""
    metadata: Dict[str, str] = {}
    lines = text.splitlines()
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition("=")
        metadata[key] = value
    else:
        body_start = len(lines)
    reader = csv.reader(lines[body_start:])
    header = next(reader, None)
    if header is None:
        raise ConfigError("table", "헤더 줄이 없습니다")
    rows = [tuple(parse_cell(cell) for cell in row) for row in reader]
    return ResultTable(tuple(header), tuple(rows), metadata)


class ResultStorage:
    """출력 디렉토리에 표, JSON, SVG를 순서대로 기록하는 클래스"""

    def __init__(self, out_dir: str, metadata: Dict[str, Any] = None):
        self.out_dir = out_dir
        self.metadata = {"tool_version": __version__, **(metadata or {})}
        self.written: List[str] = []
        self.ensure_output_directory()

    def ensure_output_directory(self) -> None:
        """출력 디렉토리가 존재하는지 확인하고 없으면 생성"""
        os.makedirs(self.out_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _write_text(self, name: str, text: str) -> str:
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        self.written.append(path)
        logger.info("결과 저장: %s", path)
        return path

    def save_table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Cell]]) -> str:
        table = ResultTable(tuple(columns), tuple(tuple(r) for r in rows), self.metadata)
        return self._write_text(name, emit_table(table))

    def save_json(self, name: str, document: Any) -> str:
        payload = {"metadata": {k: str(v) for k, v in self.metadata.items()}, **document}
        return self._write_text(name, json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n")

    def save_svg(self, name: str, svg: str) -> str:
        return self._write_text(name, svg)

    def load_table(self, name: str) -> ResultTable:
        with open(self._path(name), "r", encoding="utf-8") as f:
            return parse_table(f.read())
