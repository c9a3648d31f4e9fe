# transport/services/solver.py
"""
반지름 방향 수송 방정식 u_t + v u_r = 0 의 시간 전진과 폭발 진단.

- 반라그랑주 방식: 절점마다 특성선을 중점 규칙으로 거꾸로 추적하고 PCHIP 으로 값을 읽습니다.
  PCHIP 은 새 극값을 만들지 않으므로 값의 범위가 그대로 보존됩니다.
- 속도는 스텝마다 새로 계산하고 스텝 안에서는 고정합니다 (중간 시각 값은 직전 두 속도로 외삽).
- alpha = 2 는 v = d_r u 인 국소 극한 u_t + (u_r)^2 = 0 입니다. 자기 수송이라 반라그랑주 대신
  2 차 ENO 기울기, Godunov 해밀토니안, SSP-RK3 로 풀고 특성선 정확해를 함께 제공합니다.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
import logging
import math
import warnings

import numpy as np
from scipy import optimize
from tqdm import tqdm

from ..conf import nonlocal_setting
from ..exceptions import (CFLViolation, DiagnosticError, DomainError, HypothesisViolation,
                          NumericalInstability, OriginNotMaximumWarning)
from .kernel import KernelSpec
from .mellin import positivity_certificate
from .operators import (GL_ORDER, SUPPORT_FRACTION, RadialField, VelocityField, blowup_functional,
                        graded_grid, support_radius, velocity)

logger = logging.getLogger(__name__)

# 시나리오 프리셋 (명령행 이름 그대로)
PRESETS = {
    'blowup': {
        'dim': 2, 'alpha': 1.0, 'grid_n': 400, 'r_max': 1.2, 'radius': 1.0, 'height': 1.0,
        'cfl': 0.5, 'threshold_factor': 100.0, 'output_stride': 20,
    },
    'global-alpha0': {
        'dim': 3, 'alpha': 0.0, 'grid_n': 200, 'r_max': 1.2, 'radius': 1.0, 'height': 1.0,
        'cfl': 0.5, 't_end': 50.0, 'output_stride': 20,
    },
    'burgers': {
        'dim': 2, 'alpha': 2.0, 'grid_n': 2000, 'r_max': 1.2, 'radius': 1.0, 'height': 1.0,
        'cfl': 0.5, 'threshold_factor': 10.0, 'output_stride': 5, 'grid_strength': 0.0,
    },
}


# ===== 초기 프로파일 =====

@dataclass(frozen=True)
class BumpProfile:
    """h exp(1 - 1/(1 - (r/a)^2)), r < a. 해석적 1, 2 계 도함수 포함."""
    height: float
    radius: float

    def __post_init__(self):
        if not self.height > 0 or not self.radius > 0:
            raise DomainError(f"높이와 반지름은 양수여야 합니다: {self.height}, {self.radius}")

    @property
    def extent(self) -> float:
        return self.radius

    def _parts(self, r):
        x = np.abs(np.asarray(r, dtype=float)) / self.radius
        inside = x < 1.0
        xs = np.where(inside, x, 0.0)
        q = 1.0 - xs ** 2
        u = np.where(inside, self.height * np.exp(1.0 - 1.0 / q), 0.0)
        f1 = -2.0 * xs / q ** 2
        f2 = -2.0 / q ** 2 - 8.0 * xs ** 2 / q ** 3
        return u, f1, f2

    def value(self, r):
        return self._parts(r)[0]

    def d1(self, r):
        u, f1, _ = self._parts(r)
        return np.sign(np.asarray(r, dtype=float)) * u * f1 / self.radius

    def d2(self, r):
        u, f1, f2 = self._parts(r)
        return u * (f2 + f1 ** 2) / self.radius ** 2


@dataclass(frozen=True)
class GaussianProfile:
    """h exp(-(r/w)^2)"""
    height: float
    width: float = 1.0

    @property
    def extent(self) -> float:
        # exp(-x^2) < 1e-16
        return 6.07 * self.width

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.height * np.exp(-(r / self.width) ** 2)

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        return -2.0 * r / self.width ** 2 * self.value(r)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        return (4.0 * r ** 2 / self.width ** 4 - 2.0 / self.width ** 2) * self.value(r)


def make_initial_bump(center_height: float, radius: float, grid, spec: KernelSpec) -> RadialField:
    """매끄럽고 지지 집합이 콤팩트하며 원점에서 최대인 초기값"""
    grid = np.asarray(grid, dtype=float)
    if not radius < SUPPORT_FRACTION * grid[-1]:
        raise DomainError(f"반지름 {radius} 는 {SUPPORT_FRACTION} R_max = {SUPPORT_FRACTION * grid[-1]:.4g} 보다 작아야 합니다")
    profile = BumpProfile(center_height, radius)
    return RadialField(grid, profile.value(grid), spec)


# ===== 설정과 기록 =====

def default_delta(alpha: float) -> float:
    """허용 구간 (0, min(alpha, 2 - alpha)) 의 중점. 그 밖의 alpha 는 0.5"""
    if 0.0 < alpha < 2.0:
        return min(alpha, 2.0 - alpha) / 2.0
    return 0.5


@dataclass(frozen=True)
class SolverConfig:
    spec: KernelSpec
    delta: float = None
    grid_M: int = 400
    R_max: float = 1.2
    L: float = None
    cfl: float = 0.5
    t_end: float = None
    blowup_grad_threshold: float = None
    threshold_factor: float = 100.0
    output_stride: int = 1
    dt_max: float = None
    grid_strength: float = 4.0
    quadrature_order: int = GL_ORDER

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise DomainError(f"cfl 은 (0, 1) 안이어야 합니다: {self.cfl}")
        if int(self.grid_M) != self.grid_M or self.grid_M < 2:
            raise DomainError(f"grid_M 은 2 이상의 정수여야 합니다: {self.grid_M}")
        if int(self.output_stride) != self.output_stride or self.output_stride < 1:
            raise DomainError(f"output_stride 는 1 이상의 정수여야 합니다: {self.output_stride}")
        if not self.R_max > 0:
            raise DomainError(f"R_max 는 양수여야 합니다: {self.R_max}")
        for name in ('L', 't_end', 'blowup_grad_threshold', 'dt_max'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise DomainError(f"{name} 은 양수여야 합니다: {value}")
        if not self.threshold_factor > 1.0:
            raise DomainError(f"threshold_factor 는 1 보다 커야 합니다: {self.threshold_factor}")

        alpha = self.spec.alpha
        if self.delta is None:
            object.__setattr__(self, 'delta', default_delta(alpha))
        if 0.0 < alpha < 2.0:
            upper = min(alpha, 2.0 - alpha)
            if not 0.0 < self.delta < upper:
                raise HypothesisViolation(f"delta 는 (0, {upper:g}) 안이어야 합니다: {self.delta}")
        elif not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta 는 (0, 1) 안이어야 합니다: {self.delta}")

    def make_grid(self, M: int = None, edge: float = None) -> np.ndarray:
        """원점과 지지 경계 근처가 촘촘한 격자"""
        edge = edge or self.L or self.R_max / 1.2
        return graded_grid(M or self.grid_M, self.R_max, focus=(0.0, edge), strength=self.grid_strength)


TRACE_COLUMNS = ('t', 'I', 'grad_sup', 'support_radius', 'u_origin',
                 'curvature_sup', 'compression_sup', 'grad_argmax', 'velocity_gradient_sup')


@dataclass
class BlowupTrace:
    """
    output_stride 마다 남기는 진단값.
    monitored 는 판정에 쓰는 양 (alpha = 2 는 압축 곡률 max(-u_rr, 0), 그 밖은 기울기).
    """
    delta: float
    L: float
    C_tilde: float = None
    predicted_T_star: float = math.inf
    threshold: float = math.inf
    monitored: str = 'grad_sup'
    times: list = field(default_factory=list)
    I_values: list = field(default_factory=list)
    grad_sup: list = field(default_factory=list)
    support_radius: list = field(default_factory=list)
    u_at_origin: list = field(default_factory=list)
    curvature_sup: list = field(default_factory=list)
    compression_sup: list = field(default_factory=list)
    grad_argmax: list = field(default_factory=list)
    velocity_gradient_sup: list = field(default_factory=list)

    def record(self, t: float, I: float, diagnostics: dict):
        self.times.append(float(t))
        self.I_values.append(float(I))
        for name in ('grad_sup', 'support_radius', 'curvature_sup', 'compression_sup', 'grad_argmax',
                     'velocity_gradient_sup'):
            getattr(self, name).append(diagnostics[name])
        self.u_at_origin.append(diagnostics['u_origin'])

    def __len__(self):
        return len(self.times)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def rows(self):
        columns = (self.times, self.I_values, self.grad_sup, self.support_radius, self.u_at_origin,
                   self.curvature_sup, self.compression_sup, self.grad_argmax, self.velocity_gradient_sup)
        return list(zip(*columns))


@dataclass(frozen=True)
class Snapshot:
    t: float
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)


@dataclass
class RunResult:
    config: SolverConfig
    grid: np.ndarray = field(repr=False)
    trace: BlowupTrace
    snapshots: list = field(repr=False)
    verdict: str = 'completed'
    detected_time: float = None
    t_end: float = None
    final_time: float = 0.0
    steps: int = 0
    clamped: int = 0

    @property
    def blowup(self) -> bool:
        return self.verdict == 'blowup'

    def metadata(self) -> dict:
        trace = self.trace
        finite = math.isfinite(trace.predicted_T_star)
        return {
            'dim': self.config.spec.d,
            'alpha': self.config.spec.alpha,
            'delta': self.config.delta,
            'grid_n': self.config.grid_M,
            'r_max': self.config.R_max,
            'cutoff_L': trace.L,
            'cfl': self.config.cfl,
            't_end': self.t_end,
            'verdict': self.verdict,
            'monitored': trace.monitored,
            'threshold': trace.threshold if math.isfinite(trace.threshold) else None,
            'C_tilde': trace.C_tilde,
            'predicted_T_star': trace.predicted_T_star if finite else None,
            'detected_time': self.detected_time,
            'final_time': self.final_time,
            'steps': self.steps,
            'clamped_feet': self.clamped,
            'samples': len(trace),
        }


# ===== 진단 =====

def steepest_slope(u: RadialField):
    """
    (sup|d_r u|, 위치). 절점 PCHIP 기울기와 칸 기울기 |du/dr| 중 큰 쪽.
    PCHIP 절점 기울기는 원점 극대 옆에서 제한되어 원점으로 무너지는 경우를 놓칩니다.
    """
    grid, w = u.grid, np.abs(u.nodal_derivative)
    cells = np.abs(np.diff(u.values) / np.diff(grid))
    i, k = int(np.argmax(w)), int(np.argmax(cells))
    if cells[k] > w[i]:
        return float(cells[k]), float(0.5 * (grid[k] + grid[k + 1]))
    return float(w[i]), float(grid[i])


def field_diagnostics(u: RadialField, v: VelocityField) -> dict:
    curvature = np.gradient(u.nodal_derivative, u.grid)
    grad, where = steepest_slope(u)
    return {
        'grad_sup': grad,
        'grad_argmax': where,
        'curvature_sup': float(np.max(np.abs(curvature))),
        'compression_sup': float(max(0.0, -curvature.min())),
        'velocity_gradient_sup': float(np.max(np.abs(np.gradient(v.values, u.grid)))),
        'support_radius': support_radius(u),
        'u_origin': u.at_origin(),
    }


def _functional(u: RadialField, delta: float, L: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', OriginNotMaximumWarning)
        return blowup_functional(u, delta, L)


@lru_cache(maxsize=32)
def _certified(spec: KernelSpec, delta: float, lambda_max: float, n_points: int) -> float:
    return positivity_certificate(spec, delta, lambda_max, n_points=n_points).positivity_constant


def certified_constant(spec: KernelSpec, delta: float, lambda_max: float = None, n_points: int = None) -> float:
    """격자 인증한 C_{d,alpha,delta} (격자 설정별 캐시)"""
    lambda_max = float(lambda_max or nonlocal_setting('LAMBDA_MAX'))
    n_points = int(n_points or nonlocal_setting('LAMBDA_POINTS'))
    return _certified(spec, float(delta), lambda_max, n_points)


def c_tilde(constant: float, alpha: float, delta: float, L: float) -> float:
    """
    dI/dt >= C_tilde I^2 의 상수.
    (0, L) 위 Cauchy-Schwarz (가중치 r^{-(1+alpha+delta)/2}, r^{(alpha-delta-1)/2}) 로
    I^2 <= L^{alpha-delta}/(alpha-delta) * int (u(0)-u)^2 r^{-1-alpha-delta}.
    """
    if not alpha > delta:
        raise HypothesisViolation(f"alpha > delta 여야 합니다: alpha={alpha}, delta={delta}")
    return constant * (alpha - delta) / L ** (alpha - delta)


def predict_blowup_time(u0: RadialField, delta: float, L: float, constant: float = None) -> float:
    """비교 ODE I' = C_tilde I^2 의 폭발 시각 1/(C_tilde I(0)). I(0) = 0 이면 inf"""
    alpha = u0.spec.alpha
    if not 0.0 < alpha < 2.0:
        raise HypothesisViolation(f"폭발 시각 예측은 alpha in (0, 2) 에서만 정의합니다: {alpha}")
    I0 = blowup_functional(u0, delta, L)
    if I0 <= 0.0:
        return math.inf
    constant = certified_constant(u0.spec, delta) if constant is None else constant
    return 1.0 / (c_tilde(constant, alpha, delta, L) * I0)


# ===== 시간 전진 =====

def _eno_slopes(grid: np.ndarray, values: np.ndarray):
    """
    2 차 ENO 한쪽 기울기 (p-, p+). 비균등 격자의 Newton 분할차분을 씁니다.
    유령 절점: 왼쪽은 짝함수 반사, 오른쪽은 마지막 값 상수 연장.
    """
    h = grid[-1] - grid[-2]
    x = np.concatenate([-grid[2:0:-1], grid, grid[-1] + h * np.arange(1.0, 3.0)])
    u = np.concatenate([values[2:0:-1], values, np.repeat(values[-1], 2)])
    D = np.diff(u) / np.diff(x)
    Q = np.diff(D) / (x[2:] - x[:-2])
    j = np.arange(2, grid.size + 2)
    left = np.where(np.abs(Q[j - 2]) <= np.abs(Q[j - 1]), Q[j - 2], Q[j - 1])
    right = np.where(np.abs(Q[j - 1]) <= np.abs(Q[j]), Q[j - 1], Q[j])
    p_minus = D[j - 1] + (x[j] - x[j - 1]) * left
    p_plus = D[j] - (x[j + 1] - x[j]) * right
    return p_minus, p_plus


def hamilton_jacobi_rate(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """u_t = -H(u_r), H(p) = p^2 의 Godunov 수치 해밀토니안"""
    p_minus, p_plus = _eno_slopes(grid, values)
    H = np.maximum(np.maximum(p_minus, 0.0) ** 2, np.minimum(p_plus, 0.0) ** 2)
    # 짝함수라 u_r(0) = 0
    H[0] = 0.0
    return -H


def hamilton_jacobi_dt(grid: np.ndarray, values: np.ndarray, cfl: float) -> float:
    p_minus, p_plus = _eno_slopes(grid, values)
    speed = 2.0 * max(float(np.max(np.abs(p_minus))), float(np.max(np.abs(p_plus))))
    return cfl * float(np.min(np.diff(grid))) / speed if speed > 0 else math.inf


def hamilton_jacobi_step(grid: np.ndarray, values: np.ndarray, dt: float) -> np.ndarray:
    """SSP-RK3 한 스텝 (증분 꼴이라 변화율 0 인 절점은 값이 그대로)"""
    k1 = hamilton_jacobi_rate(grid, values)
    k2 = hamilton_jacobi_rate(grid, values + dt * k1)
    k3 = hamilton_jacobi_rate(grid, values + 0.25 * dt * (k1 + k2))
    return values + dt * (k1 + k2 + 4.0 * k3) / 6.0


def _advance(u: RadialField, dt: float, v: VelocityField, v_prev: VelocityField = None,
             dt_prev: float = None):
    """한 스텝의 발 위치 추적과 보간. (새 값, 잘린 발 개수)"""
    if u.spec.local_limit:
        return hamilton_jacobi_step(u.grid, u.values, dt), 0
    grid, R = u.grid, u.r_max
    speed = v.values
    if v_prev is not None and dt_prev:
        speed = speed + 0.5 * dt * (speed - v_prev.values) / dt_prev
    half = VelocityField(grid, speed)

    mid = grid - 0.5 * dt * speed
    clamped = int(np.count_nonzero(np.abs(mid) > R))
    mid = np.clip(mid, -R, R)
    foot = grid - dt * half(mid)
    clamped += int(np.count_nonzero(np.abs(foot) > R))
    foot = np.clip(foot, -R, R)
    return u(foot), clamped


def stable_dt(u: RadialField, v: VelocityField, cfl: float) -> float:
    if u.spec.local_limit:
        return hamilton_jacobi_dt(u.grid, u.values, cfl)
    h_min = float(np.min(np.diff(u.grid)))
    return cfl * h_min / v.sup if v.sup > 0 else math.inf


def step(u: RadialField, dt: float, v: VelocityField = None, v_prev: VelocityField = None,
         dt_prev: float = None, cfl: float = 0.9) -> RadialField:
    """한 스텝 전진. dt 가 stable_dt 를 넘으면 CFLViolation"""
    if not dt > 0:
        raise DomainError(f"dt 는 양수여야 합니다: {dt}")
    v = velocity(u) if v is None else v
    limit = stable_dt(u, v, cfl)
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.4g} 가 CFL 한계 {limit:.4g} 를 넘습니다")
    values, clamped = _advance(u, dt, v, v_prev, dt_prev)
    if clamped:
        logger.warning("foot points clamped to the grid: %d", clamped)
    if not np.all(np.isfinite(values)):
        raise NumericalInstability("스텝 결과에 NaN 이 있습니다")
    return u.with_values(values)


def advance_to(u: RadialField, t_final: float, cfl: float = 0.5, dt_max: float = None):
    """진단 없이 t_final 까지 전진. (장, 스텝 수)"""
    t, steps = 0.0, 0
    v_prev = dt_prev = None
    while t < t_final * (1.0 - 1e-14):
        v = velocity(u)
        dt = min(stable_dt(u, v, cfl), dt_max or math.inf, t_final - t)
        values, _ = _advance(u, dt, v, v_prev, dt_prev)
        if not np.all(np.isfinite(values)):
            raise NumericalInstability(f"t={t:.6g} 에서 NaN 발생")
        u = u.with_values(values)
        v_prev, dt_prev = v, dt
        t += dt
        steps += 1
    return u, steps


def _burgers_time_from_field(u: RadialField) -> float:
    curvature = np.gradient(u.nodal_derivative, u.grid)
    low = float(curvature.min())
    return -1.0 / (2.0 * low) if low < 0 else math.inf


def run(config: SolverConfig, u0: RadialField, progress: bool = None) -> RunResult:
    """
    t_end 까지 (또는 판정량이 문턱을 넘을 때까지) 전진.
    t_end 를 주지 않으면 2 * predicted_T_star.
    alpha = 0 은 전역 정칙 경우라 문턱을 따로 주지 않으면 폭발 판정을 하지 않습니다.
    """
    spec = config.spec
    if u0.spec != spec:
        raise DomainError(f"초기값의 spec({u0.spec}) 이 설정({spec}) 과 다릅니다")
    if not spec.local_limit:
        spec.require_kernel()
    progress = nonlocal_setting('PROGRESS') if progress is None else progress

    delta = config.delta
    L = config.L or support_radius(u0) or SUPPORT_FRACTION * u0.r_max
    L = min(L, u0.r_max)
    trace = BlowupTrace(delta=delta, L=L, monitored='compression_sup' if spec.local_limit else 'grad_sup')

    I0 = _functional(u0, delta, L)
    if 0.0 < spec.alpha < 2.0:
        trace.C_tilde = c_tilde(certified_constant(spec, delta), spec.alpha, delta, L)
        trace.predicted_T_star = 1.0 / (trace.C_tilde * I0) if I0 > 0 else math.inf
    elif spec.local_limit:
        trace.predicted_T_star = _burgers_time_from_field(u0)

    t_end = config.t_end
    if t_end is None:
        if not math.isfinite(trace.predicted_T_star):
            raise DomainError("예측 폭발 시각이 무한대라 t_end 를 직접 지정해야 합니다")
        t_end = 2.0 * trace.predicted_T_star
    dt_max = config.dt_max or t_end / 200.0

    v = velocity(u0, config.quadrature_order)
    diagnostics = field_diagnostics(u0, v)
    base = diagnostics[trace.monitored]
    if config.blowup_grad_threshold:
        trace.threshold = config.blowup_grad_threshold
    elif spec.alpha > 0.0 and base > 0.0:
        trace.threshold = config.threshold_factor * base
    trace.record(0.0, I0, diagnostics)
    snapshots = [Snapshot(0.0, u0.values, v.values)]
    logger.info("run %s delta=%g L=%g: T*=%.6g t_end=%.6g threshold=%.6g",
                spec, delta, L, trace.predicted_T_star, t_end, trace.threshold)

    result = RunResult(config=config, grid=u0.grid, trace=trace, snapshots=snapshots, t_end=t_end)
    u, t = u0, 0.0
    v_prev = dt_prev = None
    with tqdm(total=t_end, disable=not progress, desc=f"simulate {spec}", unit='t') as bar:
        while t < t_end * (1.0 - 1e-14):
            dt = min(stable_dt(u, v, config.cfl), dt_max, t_end - t)
            values, clamped = _advance(u, dt, v, v_prev, dt_prev)
            if not np.all(np.isfinite(values)):
                raise NumericalInstability(f"t={t:.6g} 에서 NaN 발생", trace=trace)
            result.clamped += clamped
            v_prev, dt_prev = v, dt
            u = u.with_values(values)
            t += dt
            result.steps += 1
            bar.update(dt)
            try:
                v = velocity(u, config.quadrature_order)
            except NumericalInstability as exc:
                exc.trace = trace
                raise

            diagnostics = field_diagnostics(u, v)
            crossed = diagnostics[trace.monitored] >= trace.threshold
            if result.steps % config.output_stride == 0 or crossed or t >= t_end * (1.0 - 1e-14):
                trace.record(t, _functional(u, delta, L), diagnostics)
                snapshots.append(Snapshot(t, u.values, v.values))
            if crossed:
                result.verdict, result.detected_time = 'blowup', t
                break

    result.final_time = t
    if result.clamped:
        logger.warning("%d foot points were clamped to [0, R_max]", result.clamped)
    logger.info("run %s finished: verdict=%s t=%.6g steps=%d", spec, result.verdict, t, result.steps)
    return result


# ===== 사후 점검 =====

@dataclass(frozen=True)
class InequalityReport:
    checked: bool
    reason: str = ''
    samples: int = 0
    fraction: float = None
    increasing_fraction: float = None
    C_tilde: float = None
    doubling_time: float = None
    doubling_bound: float = None
    required_fraction: float = 0.95

    @property
    def passed(self) -> bool:
        if not self.checked:
            return True
        doubling_ok = self.doubling_time is None or self.doubling_time <= self.doubling_bound
        return self.fraction >= self.required_fraction and doubling_ok


def ode_inequality_check(trace: BlowupTrace, tolerance: float = 1e-3,
                         required_fraction: float = 0.95) -> InequalityReport:
    """
    판정 문턱 전 표본에서 중심차분 dI/dt >= C_tilde I^2 (상대 허용오차) 를 확인.
    비교 ODE I(t) = I0 / (1 - C_tilde I0 t) 로 두 배가 되는 시각이 1/(C_tilde I0) 이하인지도 봅니다.
    """
    if trace.C_tilde is None:
        return InequalityReport(checked=False, reason='alpha 가 (0, 2) 밖이라 가정이 성립하지 않음',
                                samples=len(trace), required_fraction=required_fraction)
    monitored = trace.array(trace.monitored)
    keep = monitored < trace.threshold
    t = trace.array('times')[keep]
    I = trace.array('I_values')[keep]
    if t.size < 10:
        raise DiagnosticError(f"문턱 전 표본이 {t.size} 개뿐입니다 (10 개 이상 필요)")

    dI = np.gradient(I, t)[1:-1]
    bound = trace.C_tilde * I[1:-1] ** 2
    ok = dI >= (1.0 - tolerance) * bound
    increasing = np.diff(I) > 0

    doubled = np.nonzero(I >= 2.0 * I[0])[0]
    doubling_time = float(t[doubled[0]] - t[0]) if doubled.size and I[0] > 0 else None
    doubling_bound = 1.0 / (trace.C_tilde * I[0]) if I[0] > 0 else math.inf
    return InequalityReport(
        checked=True, samples=int(t.size), fraction=float(ok.mean()),
        increasing_fraction=float(increasing.mean()), C_tilde=trace.C_tilde,
        doubling_time=doubling_time, doubling_bound=doubling_bound,
        required_fraction=required_fraction,
    )


def gronwall_check(trace: BlowupTrace, slack: float = 2.0) -> bool:
    """
    w_t + v w_r = -v_r w 에서 나오는 상계
    sup|u_r|(t) <= sup|u_r|(0) exp(int_0^t sup|v_r|) 를 slack 배까지 허용해 확인.
    """
    if len(trace) < 2:
        raise DiagnosticError("표본이 2 개 이상 필요합니다")
    t = trace.array('times')
    growth = np.concatenate([[0.0], np.cumsum(np.diff(t) * 0.5 * (trace.array('velocity_gradient_sup')[1:]
                                                                  + trace.array('velocity_gradient_sup')[:-1]))])
    grad = trace.array('grad_sup')
    return bool(np.all(grad <= slack * grad[0] * np.exp(growth)))


@dataclass(frozen=True)
class RefinementSummary:
    coarse_M: int
    fine_M: int
    coarse_time: float
    fine_time: float
    shift: float
    consistent: bool

    def as_record(self) -> dict:
        return {
            'coarse_M': self.coarse_M, 'fine_M': self.fine_M,
            'coarse_time': self.coarse_time, 'fine_time': self.fine_time,
            'shift': self.shift, 'consistent': self.consistent,
        }


def refinement_study(config: SolverConfig, u0_factory, coarse: RunResult = None,
                     progress: bool = None, max_shift: float = 0.2, edge: float = None) -> RefinementSummary:
    """
    격자 2 배 (2M) 로 다시 돌려 판정 시각 변화를 봅니다.
    폭발 판정은 두 격자의 검출 시각 차가 max_shift 미만일 때만 일관적이라고 봅니다.
    """
    coarse = coarse or run(config, u0_factory(config.make_grid(edge=edge)), progress)
    fine_config = replace(config, grid_M=2 * config.grid_M)
    fine = run(fine_config, u0_factory(fine_config.make_grid(edge=edge)), progress)
    if coarse.blowup and fine.blowup:
        shift = abs(fine.detected_time - coarse.detected_time) / coarse.detected_time
        consistent = shift < max_shift
    else:
        shift = None
        consistent = coarse.verdict == fine.verdict
    summary = RefinementSummary(config.grid_M, fine_config.grid_M, coarse.detected_time,
                                fine.detected_time, shift, consistent)
    logger.info("refinement %s: %s", config.spec, summary)
    return summary


# ===== Burgers 특성선 정확해 (alpha = 2) =====

def burgers_blowup_time(profile, samples: int = 200_001) -> float:
    """T* = -1 / (2 min u0''). u0'' >= 0 이면 inf"""
    r = np.linspace(0.0, profile.extent, samples)
    low = float(np.min(profile.d2(r)))
    return -1.0 / (2.0 * low) if low < 0 else math.inf


def burgers_exact(profile, t: float, r) -> np.ndarray:
    """
    u_t + (u_r)^2 = 0 의 충격 전 해.
    r = r0 + 2 t u0'(r0) 를 풀고 u = u0(r0) + t u0'(r0)^2.
    """
    if t < 0:
        raise DomainError(f"t 는 0 이상이어야 합니다: {t}")
    T = burgers_blowup_time(profile)
    if t >= T:
        raise DomainError(f"t={t:.6g} 는 충격 시각 T*={T:.6g} 이후입니다")
    r = np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
    sample = np.linspace(0.0, profile.extent, 20_001)
    speed = 1.01 * float(np.max(np.abs(profile.d1(sample))))

    def d1(x):
        return float(profile.d1(x))

    feet = np.empty_like(r)
    for i, ri in enumerate(r):
        if ri == 0.0 or t == 0.0:
            feet[i] = ri
            continue
        feet[i] = optimize.brentq(lambda x: x + 2.0 * t * d1(x) - ri, 0.0, ri + 2.0 * t * speed + 1e-12,
                                  xtol=1e-15, rtol=4.0 * np.finfo(float).eps)
    return profile.value(feet) + t * profile.d1(feet) ** 2


@dataclass(frozen=True)
class ConvergenceReport:
    spacings: tuple
    errors: tuple
    order: float


def convergence_order(profile, t: float, grids=(200, 400, 800), r_max: float = None,
                      cfl: float = 0.5, dim: int = 1) -> ConvergenceReport:
    """균등 격자에서 Burgers 정확해 대비 sup 오차의 로그-로그 기울기"""
    r_max = r_max or profile.extent / 0.8
    spec = KernelSpec(dim, 2.0)
    spacings, errors = [], []
    for M in grids:
        grid = np.linspace(0.0, r_max, M + 1)
        u, _ = advance_to(RadialField(grid, profile.value(grid), spec), t, cfl)
        errors.append(float(np.max(np.abs(u.values - burgers_exact(profile, t, grid)))))
        spacings.append(r_max / M)
    order, _ = np.polyfit(np.log(spacings), np.log(errors), 1)
    return ConvergenceReport(tuple(spacings), tuple(errors), float(order))
