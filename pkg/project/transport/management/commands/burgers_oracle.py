# transport/management/commands/burgers_oracle.py
import logging
import math

import numpy as np

from transport.exceptions import DomainError
from transport.management.base import TransportCommand
from transport.serializers import BurgersOracleManifestSerializer
from transport.services.artifacts import check_writable, write_csv, write_json
from transport.services.solver import BumpProfile, burgers_blowup_time, burgers_exact

logger = logging.getLogger(__name__)


class Command(TransportCommand):
    help = "u_t + (u_r)^2 = 0 의 특성선 정확해를 T* 의 비율 시각마다 씁니다 (burgers_oracle.csv)"
    subcommand = 'burgers_oracle'
    serializer_class = BurgersOracleManifestSerializer

    def add_spec_arguments(self, parser):
        parser.add_argument('--height', type=float)
        parser.add_argument('--radius', type=float)
        parser.add_argument('--grid-n', type=int, help="격자 칸 수")
        parser.add_argument('--r-max', type=float)
        parser.add_argument('--fractions', help="T* 의 비율, 쉼표로 구분 (예: 0.25,0.5)")

    def run(self, data, out):
        profile = BumpProfile(data['height'], data['radius'])
        force = data['force']
        csv_path, meta_path = out / 'burgers_oracle.csv', out / 'burgers_oracle.json'
        check_writable([csv_path, meta_path], force)

        T = burgers_blowup_time(profile)
        if not math.isfinite(T):
            raise DomainError("초기값의 2 계 도함수가 음수인 곳이 없어 충격이 생기지 않습니다")
        grid = np.linspace(0.0, data['r_max'], data['grid_n'] + 1)
        rows = []
        for fraction in data['fractions']:
            t = fraction * T
            u = burgers_exact(profile, t, grid)
            rows.extend((fraction, t, r, value) for r, value in zip(grid, u))
        write_csv(csv_path, ['fraction', 't', 'r', 'u'], rows, force)

        metadata = {
            'height': profile.height, 'radius': profile.radius, 'T_star': T,
            'fractions': list(data['fractions']), 'grid_n': data['grid_n'], 'r_max': data['r_max'],
        }
        write_json(meta_path, metadata, force)
        logger.info("burgers oracle: T*=%.17g", T)
        self.stdout.write(f"T* = {T:.17g}")
        return 'ok', 0, metadata
