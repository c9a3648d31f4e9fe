# transport/management/base.py
"""
배치 명령 공통 뼈대.

설정 병합 순서 (뒤가 앞을 덮어씀): 프리셋 < --config 파일 < --set key=value < 명령행 플래그.
병합 결과는 명령별 Serializer 로 검증하고, 실행 결과는 RunRecord 로 남깁니다.
"""
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from dotenv import dotenv_values

from ..conf import nonlocal_setting
from ..exceptions import DomainError, TransportError
from ..ledger import record_run
from ..services.artifacts import prepare_output_dir

EXIT_CODES = ("종료 코드: 0 정상 완료, 2 잘못된 입력 또는 가정 위반, 3 인증 실패, "
              "4 부등식 위반, 5 수치 불안정 (부분 trace 저장), 10 폭발 검출 (정상 실행)")

BLOWUP_EXIT = 10

def _normalize_key(key: str) -> str:
    return key.strip().replace('-', '_')


class TransportCommand(BaseCommand):
    subcommand = None
    serializer_class = None

    def create_parser(self, prog_name, subcommand, **kwargs):
        kwargs.setdefault('epilog', EXIT_CODES)
        return super().create_parser(prog_name, subcommand, **kwargs)

    def add_arguments(self, parser):
        parser.add_argument('--config', help="key=value 형식의 설정 파일")
        parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                            help="설정 파일 값을 덮어씀 (여러 번 사용 가능)")
        parser.add_argument('--output', help="산출물 디렉터리")
        parser.add_argument('--force', action='store_true', default=None, help="기존 파일 덮어쓰기")
        parser.add_argument('--seed', type=int)
        self.add_spec_arguments(parser)

    def add_spec_arguments(self, parser):
        pass

    # === 설정 병합 ===

    def preset_layer(self, merged: dict) -> dict:
        """프리셋 값 (기본은 없음)"""
        return {}

    def _field_names(self):
        return set(self.serializer_class().fields)

    def _resolve_key(self, key: str, fields: set) -> str:
        key = _normalize_key(key)
        by_lower = {name.lower(): name for name in fields}
        if key in fields:
            return key
        if key.lower() in by_lower:
            return by_lower[key.lower()]
        raise DomainError(f"알 수 없는 설정 키: {key} (가능한 키: {', '.join(sorted(fields))})")

    def _file_layer(self, path, fields) -> dict:
        if not path:
            return {}
        if not Path(path).is_file():
            raise DomainError(f"설정 파일이 없습니다: {path}")
        values = dotenv_values(path)
        return {self._resolve_key(k, fields): v for k, v in values.items() if v is not None}

    def _override_layer(self, overrides, fields) -> dict:
        layer = {}
        for item in overrides or []:
            if '=' not in item:
                raise DomainError(f"--set 은 key=value 형식이어야 합니다: {item}")
            key, value = item.split('=', 1)
            layer[self._resolve_key(key, fields)] = value.strip()
        return layer

    def build_manifest(self, options: dict) -> dict:
        fields = self._field_names()
        merged = {}
        merged.update(self._file_layer(options.get('config'), fields))
        merged.update(self._override_layer(options.get('overrides'), fields))
        # verbosity, stdout 같은 Django 옵션은 필드가 아니라서 빠짐
        merged.update({k: v for k, v in options.items() if k in fields and v is not None})
        return {**self.preset_layer(merged), **merged}

    # === 실행 ===

    def run(self, data: dict, out: Path):
        """(verdict, exit_code, summary) 를 돌려줍니다"""
        raise NotImplementedError

    def output_dir(self, data: dict) -> Path:
        return prepare_output_dir(data.get('output') or Path(nonlocal_setting('OUTPUT_DIR')) / self.subcommand)

    def handle(self, *args, **options):
        try:
            manifest = self.build_manifest(options)
        except TransportError as exc:
            record_run(self.subcommand, {}, 'failed', exc.exit_code, summary={'error': str(exc)})
            raise CommandError(str(exc), returncode=exc.exit_code)

        serializer = self.serializer_class(data=manifest)
        if not serializer.is_valid():
            record_run(self.subcommand, manifest, 'failed', 2, summary={'errors': serializer.errors})
            raise CommandError(f"잘못된 설정: {dict(serializer.errors)}", returncode=2)
        data = serializer.validated_data
        recorded = {k: v for k, v in data.items() if k != 'solver_config'}

        out = self.output_dir(data)
        try:
            verdict, exit_code, summary = self.run(data, out)
        except TransportError as exc:
            record_run(self.subcommand, recorded, 'failed', exc.exit_code, out, {'error': str(exc)})
            self.stderr.write(self.style.ERROR(f"[{type(exc).__name__}] {exc}"))
            raise CommandError(str(exc), returncode=exc.exit_code)

        record_run(self.subcommand, recorded, verdict, exit_code, out, summary)
        if exit_code == BLOWUP_EXIT:
            self.stdout.write(self.style.WARNING(f"폭발 검출 ({out})"))
            raise SystemExit(BLOWUP_EXIT)
        self.stdout.write(self.style.SUCCESS(f"완료: {verdict} ({out})"))
