# transport/management/commands/inequality.py
import logging

import numpy as np
from tqdm import tqdm

from transport.conf import nonlocal_setting
from transport.exceptions import InequalityViolation
from transport.management.base import TransportCommand
from transport.serializers import InequalityManifestSerializer
from transport.services.artifacts import check_writable, write_csv, write_json
from transport.services.kernel import KernelSpec
from transport.services.operators import RadialField, graded_grid, rhs_functional, weighted_pairing
from transport.services.solver import certified_constant

logger = logging.getLogger(__name__)

BUMP_TERMS = 3
INEQUALITY_COLUMNS = (('index',) + tuple(f'c{k}' for k in range(BUMP_TERMS))
                      + tuple(f's{k}' for k in range(BUMP_TERMS)) + ('pairing', 'rhs', 'ratio', 'passed'))


def random_bumps(rng: np.random.Generator, n: int):
    """f(r) = sum c_k exp(-s_k r^2), c in [0.1, 1], s in [0.5, 8]"""
    for _ in range(n):
        yield rng.uniform(0.1, 1.0, BUMP_TERMS), rng.uniform(0.5, 8.0, BUMP_TERMS)


class Command(TransportCommand):
    help = "무작위 매끄러운 시험 함수 묶음에서 가중 양성 부등식을 확인합니다 (inequality.csv, report.json)"
    subcommand = 'inequality'
    serializer_class = InequalityManifestSerializer

    def add_spec_arguments(self, parser):
        parser.add_argument('--dim', type=int)
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--delta', type=float)
        parser.add_argument('--n-functions', type=int)
        parser.add_argument('--grid-n', type=int)
        parser.add_argument('--r-max', type=float)
        parser.add_argument('--tolerance', type=float, help="상대 허용오차")
        parser.add_argument('--lambda-max', type=float)
        parser.add_argument('--lambda-points', type=int)

    def run(self, data, out):
        spec = KernelSpec(data['dim'], data['alpha'])
        delta, force, tol = data['delta'], data['force'], data['tolerance']
        csv_path, report_path = out / 'inequality.csv', out / 'report.json'
        check_writable([csv_path, report_path], force)

        constant = certified_constant(spec, delta, data['lambda_max'], data['lambda_points'])
        grid = graded_grid(data['grid_n'], data['r_max'], focus=(0.0,))
        rng = np.random.default_rng(data['seed'])

        rows, ratios = [], []
        bumps = random_bumps(rng, data['n_functions'])
        for i, (c, s) in enumerate(tqdm(bumps, total=data['n_functions'], desc='inequality',
                                        disable=not nonlocal_setting('PROGRESS'))):
            f = RadialField(grid, np.exp(-np.outer(grid ** 2, s)) @ c, spec)
            pairing, rhs = weighted_pairing(f, delta), rhs_functional(f, delta)
            ratio = pairing / rhs
            ok = ratio >= constant * (1.0 - tol)
            ratios.append(ratio)
            rows.append((i, *c, *s, pairing, rhs, ratio, ok))

        ratios = np.asarray(ratios)
        violations = [int(row[0]) for row in rows if not row[-1]]
        report = {
            'dim': spec.d, 'alpha': spec.alpha, 'delta': delta,
            'seed': data['seed'], 'n_functions': data['n_functions'],
            'certified_constant': constant, 'tolerance': tol,
            'min_ratio': float(ratios.min()), 'max_ratio': float(ratios.max()),
            'violations': violations, 'passed': not violations,
        }
        write_csv(csv_path, INEQUALITY_COLUMNS, rows, force)
        write_json(report_path, report, force)
        logger.info("inequality %s delta=%g: min ratio %.6g, C=%.6g", spec, delta, ratios.min(), constant)

        if violations:
            raise InequalityViolation(
                f"{len(violations)} 개 함수에서 비율이 C(1 - tol) = {constant * (1.0 - tol):.6g} 보다 작습니다: "
                f"min ratio {ratios.min():.6g}")
        self.stdout.write(f"{spec}, delta={delta:g}: min ratio {ratios.min():.6g} >= C = {constant:.6g}")
        return 'ok', 0, report
