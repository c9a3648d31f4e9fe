# transport/management/commands/certify.py
import logging

import numpy as np

from transport.exceptions import CertificationFailure, DiagnosticError
from transport.management.base import TransportCommand
from transport.serializers import CertificateSerializer, CertifyManifestSerializer
from transport.services.artifacts import check_writable, write_csv, write_json
from transport.services.kernel import KernelSpec
from transport.services.mellin import analytic_lower_bound, positivity_certificate

logger = logging.getLogger(__name__)

SYMBOL_COLUMNS = ('lambda', 're_H1', 'im_H1', 're_H', 'im_H')


def _symbol_rows(grid, h1, h):
    return zip(grid, h1.real, h1.imag, h.real, h.imag)


def _failed_record(spec, delta, grid, h) -> dict:
    re_h = np.where(np.isfinite(h.real), h.real, np.inf)
    i_min = int(np.argmin(re_h))
    try:
        lower = analytic_lower_bound(spec, delta)
    except CertificationFailure:
        lower = None
    return {
        'dim': spec.d, 'alpha': spec.alpha, 'delta': delta,
        'positivity_constant': float(re_h[i_min]) if np.isfinite(re_h[i_min]) else None,
        'analytic_lower_bound': lower,
        'argmin_lambda': float(grid[i_min]),
        'grid_size': int(grid.size),
        'lambda_max': float(grid[-1]),
    }


class Command(TransportCommand):
    help = "lambda 격자 위에서 Re H(lambda) > 0 을 확인하고 symbol.csv 와 certificate.json 을 씁니다"
    subcommand = 'certify'
    serializer_class = CertifyManifestSerializer

    def add_spec_arguments(self, parser):
        parser.add_argument('--dim', type=int)
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--delta', type=float)
        parser.add_argument('--lambda-max', type=float)
        parser.add_argument('--lambda-points', type=int)

    def _write(self, out, force, grid, h1, h, record):
        serializer = CertificateSerializer(data=record)
        if not serializer.is_valid():
            raise DiagnosticError(f"인증서가 스키마와 맞지 않습니다: {dict(serializer.errors)}")
        write_csv(out / 'symbol.csv', SYMBOL_COLUMNS, _symbol_rows(grid, h1, h), force)
        write_json(out / 'certificate.json', record, force)

    def run(self, data, out):
        spec = KernelSpec(data['dim'], data['alpha'])
        delta, force = data['delta'], data['force']
        check_writable([out / 'symbol.csv', out / 'certificate.json'], force)

        try:
            symbol = positivity_certificate(spec, delta, data['lambda_max'], n_points=data['lambda_points'])
        except CertificationFailure as exc:
            values = getattr(exc, 'values', None)
            if values is not None:
                grid, h1, h = values
                self._write(out, force, grid, h1, h, {**_failed_record(spec, delta, grid, h), 'passed': False})
            raise

        record = {**symbol.as_record(), 'passed': True}
        self._write(out, force, symbol.lambda_grid, symbol.H1_values, symbol.H_values, record)
        self.stdout.write(
            f"{spec}, delta={delta:g}: min Re H = {symbol.positivity_constant:.6g} "
            f"(lambda = {symbol.argmin_lambda:.4g}), 해석적 하한 {symbol.analytic_lower_bound:.6g}")
        return 'ok', 0, record
