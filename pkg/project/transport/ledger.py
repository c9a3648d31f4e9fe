# transport/ledger.py
"""실행 기록 저장. 기록 실패가 계산 결과를 막지 않도록 DB 오류는 로그만 남깁니다."""
import logging

from django.db import DatabaseError

from .models import RunRecord
from .services.artifacts import jsonable

logger = logging.getLogger(__name__)


def record_run(subcommand: str, manifest: dict, verdict: str, exit_code: int,
               output_dir: str = '', summary: dict = None):
    try:
        return RunRecord.objects.create(
            subcommand=subcommand,
            manifest=jsonable(manifest or {}),
            verdict=verdict,
            exit_code=exit_code,
            output_dir=str(output_dir or ''),
            summary=jsonable(summary or {}),
        )
    except DatabaseError as exc:
        logger.warning("run ledger unavailable, %s not recorded: %s", subcommand, exc)
        return None
