# transport/services/artifacts.py
"""CSV / JSON 산출물 기록. 실수는 17 자리 유효숫자, 줄바꿈은 LF."""
import csv
import json
import logging
import math
from pathlib import Path

import numpy as np

from ..exceptions import DomainError

logger = logging.getLogger(__name__)


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return '%.17g' % float(value)


def prepare_output_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def check_writable(paths, force: bool = False):
    """기존 파일은 force 없이는 덮어쓰지 않습니다 (쓰기 전에 한 번에 확인)"""
    existing = [str(p) for p in paths if Path(p).exists()]
    if existing and not force:
        raise DomainError(f"이미 있는 파일을 덮어쓰려면 --force 가 필요합니다: {', '.join(existing)}")


def write_csv(path, header, rows, force: bool = False) -> Path:
    path = Path(path)
    check_writable([path], force)
    with path.open('w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(x) for x in row])
    logger.debug("wrote %s", path)
    return path


def jsonable(value):
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path, payload: dict, force: bool = False) -> Path:
    path = Path(path)
    check_writable([path], force)
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + '\n', encoding='utf-8')
    logger.debug("wrote %s", path)
    return path


def read_csv(path):
    """(header, float 행렬)"""
    with Path(path).open(newline='', encoding='utf-8') as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))
