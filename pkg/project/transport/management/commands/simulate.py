# transport/management/commands/simulate.py
import logging
import math

from transport.exceptions import DiagnosticError, NumericalInstability
from transport.management.base import BLOWUP_EXIT, TransportCommand
from transport.serializers import RunMetadataSerializer, SimulateManifestSerializer
from transport.services.artifacts import check_writable, prepare_output_dir, write_csv, write_json
from transport.services.solver import (PRESETS, TRACE_COLUMNS, BumpProfile, burgers_blowup_time,
                                       gronwall_check, make_initial_bump, ode_inequality_check,
                                       refinement_study, run)

logger = logging.getLogger(__name__)


def _ode_record(report) -> dict:
    return {
        'checked': report.checked, 'reason': report.reason, 'samples': report.samples,
        'fraction': report.fraction, 'increasing_fraction': report.increasing_fraction,
        'passed': report.passed,
    }


class Command(TransportCommand):
    help = "반지름 방향 수송 방정식을 시간 전진하고 trace.csv, snapshots/, metadata.json 을 씁니다"
    subcommand = 'simulate'
    serializer_class = SimulateManifestSerializer

    def add_spec_arguments(self, parser):
        parser.add_argument('--preset', choices=sorted(PRESETS))
        parser.add_argument('--dim', type=int)
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--delta', type=float)
        parser.add_argument('--grid-n', type=int, help="격자 칸 수 M")
        parser.add_argument('--r-max', type=float)
        parser.add_argument('--cutoff-L', type=float, help="폭발 범함수의 절단 반지름")
        parser.add_argument('--cfl', type=float)
        parser.add_argument('--t-end', type=float)
        parser.add_argument('--height', type=float, help="초기 bump 의 높이 u0(0)")
        parser.add_argument('--radius', type=float, help="초기 bump 의 지지 반지름")
        parser.add_argument('--threshold-factor', type=float)
        parser.add_argument('--blowup-threshold', type=float)
        parser.add_argument('--output-stride', type=int)
        parser.add_argument('--grid-strength', type=float)
        parser.add_argument('--refine', action='store_true', default=None,
                            help="폭발 판정이 없어도 2M 격자로 다시 돌려 비교")

    def preset_layer(self, merged):
        name = merged.get('preset')
        return dict(PRESETS.get(name, {}))

    def _write_trace(self, out, trace, force):
        write_csv(out / 'trace.csv', TRACE_COLUMNS, trace.rows(), force)

    def run(self, data, out):
        config = data['solver_config']
        force = data['force']
        snapshot_dir = prepare_output_dir(out / 'snapshots')

        def u0_factory(grid):
            return make_initial_bump(data['height'], data['radius'], grid, config.spec)

        u0 = u0_factory(config.make_grid(edge=data['radius']))
        check_writable([out / 'trace.csv', out / 'metadata.json'], force)
        try:
            result = run(config, u0)
        except NumericalInstability as exc:
            if exc.trace is not None:
                self._write_trace(out, exc.trace, True)
                logger.error("partial trace written to %s", out / 'trace.csv')
            raise

        snapshot_paths = [snapshot_dir / f'snapshot_{i:05d}.csv' for i in range(len(result.snapshots))]
        check_writable(snapshot_paths, force)
        self._write_trace(out, result.trace, force)
        for path, snap in zip(snapshot_paths, result.snapshots):
            write_csv(path, ['t', 'r', 'u', 'v'],
                      ((snap.t, r, u, v) for r, u, v in zip(result.grid, snap.u, snap.v)), force)

        metadata = {**result.metadata(), 'preset': data.get('preset')}
        alpha = config.spec.alpha
        if 0.0 < alpha < 2.0:
            try:
                report = ode_inequality_check(result.trace)
                metadata['ode_check'] = _ode_record(report)
            except DiagnosticError as exc:
                metadata['ode_check'] = {'checked': False, 'reason': str(exc), 'samples': len(result.trace),
                                         'fraction': None, 'increasing_fraction': None, 'passed': False}
        elif alpha == 0.0 and len(result.trace) >= 2:
            metadata['gronwall_bounded'] = gronwall_check(result.trace)
        elif config.spec.local_limit:
            oracle = burgers_blowup_time(BumpProfile(data['height'], data['radius']))
            metadata['oracle_T_star'] = oracle
            if result.detected_time is not None and math.isfinite(oracle):
                metadata['oracle_shift'] = abs(result.detected_time - oracle) / oracle

        # 폭발 판정은 2 격자 비교와 함께만 보고
        if data['refine'] or result.blowup:
            refinement = refinement_study(config, u0_factory, coarse=result, edge=data['radius'])
            metadata['refinement'] = refinement.as_record()
            if not refinement.consistent:
                logger.warning("refinement %d -> %d is not consistent (shift=%s)",
                               refinement.coarse_M, refinement.fine_M, refinement.shift)

        serializer = RunMetadataSerializer(data=metadata)
        if not serializer.is_valid():
            raise DiagnosticError(f"metadata 가 스키마와 맞지 않습니다: {dict(serializer.errors)}")
        write_json(out / 'metadata.json', metadata, force)

        self.stdout.write(
            f"{config.spec}: verdict={result.verdict}, t={result.final_time:.6g}, "
            f"predicted T*={metadata['predicted_T_star']}, detected={result.detected_time}")
        exit_code = BLOWUP_EXIT if result.blowup else 0
        summary = {k: v for k, v in metadata.items() if k != 'refinement'}
        if 'refinement' in metadata:
            summary['refinement_consistent'] = metadata['refinement']['consistent']
        return result.verdict, exit_code, summary
