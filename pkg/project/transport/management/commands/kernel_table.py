# transport/management/commands/kernel_table.py
import logging

import numpy as np

from transport.exceptions import CertificationFailure
from transport.management.base import TransportCommand
from transport.serializers import KernelTableManifestSerializer
from transport.services.artifacts import check_writable, write_csv
from transport.services.kernel import KernelSpec, kernel_table, series_coefficients

logger = logging.getLogger(__name__)


def coefficient_positivity(spec: KernelSpec, coeffs: np.ndarray) -> dict:
    """
    a_{2n+1} 부호 점검.
    alpha > 0 이면 모든 계수가 양수, alpha = 0 (d >= 3) 이면 a_1 만 양수이고 나머지는 0.
    """
    if spec.alpha > 0.0:
        passed = bool(np.all(coeffs > 0.0))
        expected = 'all positive'
    else:
        rest_zero = bool(np.all(np.abs(coeffs[1:]) < 1e-14))
        if spec.d == 2:
            passed = rest_zero and abs(coeffs[0]) < 1e-14
            expected = 'all zero'
        else:
            passed = rest_zero and coeffs[0] > 0.0
            expected = 'a_1 positive, rest zero'
    return {
        'expected': expected,
        'passed': passed,
        'nonzero': int(np.count_nonzero(np.abs(coeffs) >= 1e-14)),
        'min_coefficient': float(coeffs.min()),
        'n_coeffs': int(coeffs.size),
    }


class Command(TransportCommand):
    help = "커널 g_{d,alpha} 표 (kernel.csv) 와 테일러 계수 표 (coefficients.csv) 를 씁니다"
    subcommand = 'kernel_table'
    serializer_class = KernelTableManifestSerializer

    def add_spec_arguments(self, parser):
        parser.add_argument('--dim', type=int)
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--r-max', type=float)
        parser.add_argument('--grid-n', type=int, help="표의 r 점 개수")
        parser.add_argument('--n-coeffs', type=int, help="계수 개수 (n = 0..n_coeffs-1)")

    def run(self, data, out):
        spec = KernelSpec(data['dim'], data['alpha'])
        kernel_path, coeff_path = out / 'kernel.csv', out / 'coefficients.csv'
        check_writable([kernel_path, coeff_path], data['force'])

        r, g = kernel_table(spec, np.linspace(0.0, data['r_max'], data['grid_n']))
        coeffs = series_coefficients(spec, data['n_coeffs'] - 1)
        write_csv(kernel_path, ['r', 'g'], zip(r, g), data['force'])
        write_csv(coeff_path, ['n', 'a'], zip(range(coeffs.size), coeffs), data['force'])

        summary = coefficient_positivity(spec, coeffs)
        logger.info("kernel table %s: %s", spec, summary)
        if not summary['passed']:
            raise CertificationFailure(
                f"계수 부호가 기대 ({summary['expected']}) 와 다릅니다: min a = {summary['min_coefficient']:.3e}")
        self.stdout.write(
            f"{spec}: a_(2n+1), n < {summary['n_coeffs']}: {summary['expected']} "
            f"(0 아닌 계수 {summary['nonzero']} 개)")
        return 'ok', 0, summary
