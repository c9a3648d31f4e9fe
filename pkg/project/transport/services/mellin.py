# transport/services/mellin.py
"""
Mellin 심볼 H_1(lambda), H(lambda) 계산과 양성 상수 인증.

H_1(lambda) = sum_n a_{2n+1} [1/(i lambda + 2n + b1) + 1/(-i lambda + 2n + b2)]
  b1 = alpha/2 - delta/2,  b2 = d + alpha/2 + delta/2
H(lambda)   = ((alpha+delta)^2/4 + lambda^2) H_1(lambda)

항은 n^{alpha-3} 로만 줄어들어 alpha -> 2 에서 직접 합으로는 수렴이 느립니다.
N 이후 꼬리는 a(x) 의 매끄러운 연장을 적분해서 더합니다 (중점 Euler-Maclaurin).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy import integrate
from scipy import special as sp

from ..conf import nonlocal_setting
from ..exceptions import CertificationFailure, DomainError, HypothesisViolation
from .kernel import KernelSpec, SeriesCoefficients, coefficient_function, default_series, kernel_values

logger = logging.getLogger(__name__)

# 직접 합의 최소 항 수, lambda 대비 배수
HEAD_TERMS = 2000
HEAD_PER_LAMBDA = 10
JACOBI_NODES = 48


@dataclass(frozen=True)
class MellinSymbol:
    """격자 위의 H_1, H 값과 인증된 양성 상수 (인증 후 불변)"""
    spec: KernelSpec
    delta: float
    lambda_grid: np.ndarray = field(repr=False)
    H1_values: np.ndarray = field(repr=False)
    H_values: np.ndarray = field(repr=False)
    positivity_constant: float
    analytic_lower_bound: float
    argmin_lambda: float

    def __post_init__(self):
        for arr in (self.lambda_grid, self.H1_values, self.H_values):
            arr.setflags(write=False)

    def as_record(self) -> dict:
        """인증서 JSON 레코드"""
        return {
            'dim': self.spec.d,
            'alpha': self.spec.alpha,
            'delta': self.delta,
            'positivity_constant': self.positivity_constant,
            'analytic_lower_bound': self.analytic_lower_bound,
            'argmin_lambda': self.argmin_lambda,
            'grid_size': int(self.lambda_grid.size),
            'lambda_max': float(self.lambda_grid[-1]),
        }


# ===== 가정 확인 =====

def check_convergence(spec: KernelSpec, delta: float):
    """H_1 적분 수렴 조건: 0 < alpha < 2, delta < alpha"""
    spec.require_kernel()
    if not spec.alpha > 0.0:
        raise HypothesisViolation(f"Mellin 심볼은 alpha > 0 에서만 정의합니다: {spec.alpha}")
    if not delta < spec.alpha:
        raise HypothesisViolation(f"delta < alpha 여야 적분이 수렴합니다: delta={delta}, alpha={spec.alpha}")


def check_positivity_hypotheses(spec: KernelSpec, delta: float):
    """하한 가정: delta in (-alpha, alpha)"""
    check_convergence(spec, delta)
    if not -spec.alpha < delta:
        raise HypothesisViolation(f"delta > -alpha 여야 합니다: delta={delta}, alpha={spec.alpha}")


def check_theorem_hypotheses(spec: KernelSpec, delta: float):
    """가중 부등식 가정: delta in (-alpha, alpha), delta + alpha < 2"""
    check_positivity_hypotheses(spec, delta)
    if not delta + spec.alpha < 2.0:
        raise HypothesisViolation(f"delta + alpha < 2 여야 합니다: delta={delta}, alpha={spec.alpha}")


def _offsets(spec: KernelSpec, delta: float):
    return spec.alpha / 2.0 - delta / 2.0, spec.d + spec.alpha / 2.0 + delta / 2.0


# ===== 급수 + 꼬리 적분 =====

def _jacobi_rule(alpha: float):
    """int_0^1 t^{1-alpha} F(t) dt 용 Gauss-Jacobi 규칙"""
    u, w = sp.roots_jacobi(JACOBI_NODES, 0.0, 1.0 - alpha)
    t = 0.5 * (1.0 + u)
    return t, w * 0.5 ** (2.0 - alpha)


def _weighted_sum(spec: KernelSpec, lam: float, term, head_terms: int = None) -> complex:
    """
    sum_{n>=0} a(n) term(n, lam).
    n < N 직접 합, 나머지는 int_{N-1/2}^inf a(x) term(x) dx + h'(N-1/2)/24.
    꼬리 적분은 x = X/t 로 바꿔 t^{1-alpha} 가중 Gauss-Jacobi 로 계산합니다.
    """
    a = coefficient_function(spec)
    n_head = max(head_terms or HEAD_TERMS, int(math.ceil(HEAD_PER_LAMBDA * abs(lam))))
    n = np.arange(n_head, dtype=float)
    head = np.sum(a(n) * term(n, lam))

    X = n_head - 0.5
    t, w = _jacobi_rule(spec.alpha)
    x = X / t
    F = a(x) * term(x, lam) * X * t ** (spec.alpha - 3.0)
    tail = np.sum(w * F)

    def h(xx):
        return a(np.asarray(xx, dtype=float)) * term(np.asarray(xx, dtype=float), lam)
    correction = (h(X + 0.5) - h(X - 0.5)) / 24.0
    return complex(head + tail + correction)


def _resolve_series(spec: KernelSpec, coeffs: SeriesCoefficients = None) -> SeriesCoefficients:
    if coeffs is None:
        return default_series(spec)
    if coeffs.spec != spec:
        raise DomainError(f"계수의 spec({coeffs.spec}) 이 요청한 spec({spec}) 과 다릅니다")
    return coeffs


def h1_series(spec: KernelSpec, delta: float, lam: float, coeffs: SeriesCoefficients = None) -> complex:
    """H_1(lambda) 급수 평가"""
    check_convergence(spec, delta)
    series = _resolve_series(spec, coeffs)
    b1, b2 = _offsets(spec, delta)

    def term(x, lam_):
        return 1.0 / (1j * lam_ + 2.0 * x + b1) + 1.0 / (-1j * lam_ + 2.0 * x + b2)
    return _weighted_sum(spec, float(lam), term, head_terms=series.truncation_N + 1)


def h_symbol(spec: KernelSpec, delta: float, lam: float, coeffs: SeriesCoefficients = None) -> complex:
    """H(lambda) = ((alpha+delta)^2/4 + lambda^2) H_1(lambda)"""
    factor = (spec.alpha + delta) ** 2 / 4.0 + lam ** 2
    return factor * h1_series(spec, delta, lam, coeffs)


def re_h_expansion(spec: KernelSpec, delta: float, lam: float, coeffs: SeriesCoefficients = None) -> float:
    """실수 전개로 직접 계산한 Re H(lambda)"""
    check_convergence(spec, delta)
    series = _resolve_series(spec, coeffs)
    b1, b2 = _offsets(spec, delta)
    lam = float(lam)

    def term(x, lam_):
        p, q = 2.0 * x + b1, 2.0 * x + b2
        return p / (lam_ ** 2 + p ** 2) + q / (lam_ ** 2 + q ** 2)
    factor = (spec.alpha + delta) ** 2 / 4.0 + lam ** 2
    return factor * _weighted_sum(spec, lam, term, head_terms=series.truncation_N + 1).real


def analytic_lower_bound(spec: KernelSpec, delta: float, coeffs: SeriesCoefficients = None) -> float:
    """((alpha+delta)^2/4) sum a_{2n+1} / (d + 2n + alpha/2 + delta/2)"""
    check_positivity_hypotheses(spec, delta)
    series = _resolve_series(spec, coeffs)
    _, b2 = _offsets(spec, delta)

    def term(x, lam_):
        return 1.0 / (2.0 * x + b2)
    value = (spec.alpha + delta) ** 2 / 4.0 * _weighted_sum(spec, 0.0, term, head_terms=series.truncation_N + 1).real
    if not value > 0:
        raise CertificationFailure(f"해석적 하한이 양수가 아닙니다: {value}")
    return float(value)


def h1_direct_integral(spec: KernelSpec, delta: float, lam: float) -> complex:
    """
    진단용: H_1 을 적분으로 직접 계산.
    (1, inf) 는 반사로 (0, 1) 에 접어서
    int_0^1 (r^{i lam - 2 + b1} + r^{-i lam + d - 2 + alpha/2 + delta/2}) g(r) dr
    """
    check_convergence(spec, delta)
    b1, b2 = _offsets(spec, delta)
    r_switch = nonlocal_setting('R_SWITCH')

    def integrand(r, part):
        g = float(kernel_values(spec, np.array([r]))[0])
        log_r = math.log(r)
        z = np.exp((1j * lam - 2.0 + b1) * log_r) + np.exp((-1j * lam + b2 - 2.0) * log_r)
        value = z * g
        return value.real if part == 'real' else value.imag

    total = 0.0 + 0.0j
    for lo, hi in ((0.0, r_switch), (r_switch, 1.0)):
        re, _ = integrate.quad(integrand, lo, hi, args=('real',), epsabs=1e-12, epsrel=1e-11, limit=400)
        im, _ = integrate.quad(integrand, lo, hi, args=('imag',), epsabs=1e-12, epsrel=1e-11, limit=400)
        total += re + 1j * im
    return complex(total)


# ===== 격자 인증 =====

def lambda_grid(lambda_max: float, n_points: int = None) -> np.ndarray:
    """[0, 10] 촘촘한 선형 격자 + [10, lambda_max] 기하 격자"""
    if not lambda_max > 0:
        raise DomainError(f"lambda_max 는 양수여야 합니다: {lambda_max}")
    n_points = int(n_points or nonlocal_setting('LAMBDA_POINTS'))
    if n_points < 4:
        raise DomainError(f"lambda 격자 점은 4 개 이상이어야 합니다: {n_points}")
    if lambda_max <= 10.0:
        return np.linspace(0.0, lambda_max, n_points)
    n_lin = max(2, n_points // 4)
    linear = np.linspace(0.0, 10.0, n_lin, endpoint=False)
    geometric = np.geomspace(10.0, lambda_max, n_points - n_lin)
    return np.concatenate([linear, geometric])


def _evaluate_grid(spec, delta, grid, series):
    return np.array([h1_series(spec, delta, lam, series) for lam in grid])


def positivity_certificate(spec: KernelSpec, delta: float, lambda_max: float = None,
                           coeffs: SeriesCoefficients = None, n_points: int = None) -> MellinSymbol:
    """
    격자 위 Re H > 0 을 확인하고 최소값을 양성 상수로 기록합니다.
    최소 위치는 가정하지 않고 그대로 기록합니다.
    """
    check_theorem_hypotheses(spec, delta)
    series = _resolve_series(spec, coeffs)
    lambda_max = float(lambda_max or nonlocal_setting('LAMBDA_MAX'))
    grid = lambda_grid(lambda_max, n_points)

    threads = int(nonlocal_setting('THREADS'))
    if threads > 1:
        chunks = np.array_split(grid, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(lambda chunk: _evaluate_grid(spec, delta, chunk, series), chunks)
            h1 = np.concatenate(list(parts))
    else:
        h1 = _evaluate_grid(spec, delta, grid, series)

    h = ((spec.alpha + delta) ** 2 / 4.0 + grid ** 2) * h1
    re_h = h.real
    failure = None
    if not np.all(np.isfinite(re_h)):
        failure = CertificationFailure(f"Re H 에 유한하지 않은 값이 있습니다 ({spec}, delta={delta})")
    elif np.any(re_h <= 0.0):
        i_bad = int(np.nonzero(re_h <= 0.0)[0][0])
        failure = CertificationFailure(
            f"Re H <= 0 발견: lambda={grid[i_bad]:.6g}, Re H={re_h[i_bad]:.6g} ({spec}, delta={delta})")
    if failure is not None:
        # 명령이 실패한 격자 값도 기록할 수 있게 붙여 둠
        failure.values = (grid, h1, h)
        raise failure

    lower = analytic_lower_bound(spec, delta, series)
    i_min = int(np.argmin(re_h))
    symbol = MellinSymbol(
        spec=spec, delta=float(delta), lambda_grid=grid, H1_values=h1, H_values=h,
        positivity_constant=float(re_h[i_min]), analytic_lower_bound=lower,
        argmin_lambda=float(grid[i_min]),
    )
    logger.info("certified %s delta=%g: C=%.6g (lower bound %.6g, argmin lambda=%g)",
                spec, delta, symbol.positivity_constant, lower, symbol.argmin_lambda)
    return symbol


def growth_slope(spec: KernelSpec, delta: float, lambda_lo: float = 1e2, lambda_hi: float = 1e3,
                 n_points: int = 16) -> float:
    """log Re H 대 log lambda 최소제곱 기울기 (alpha 에 가까워야 함)"""
    if not 0 < lambda_lo < lambda_hi:
        raise DomainError(f"0 < lambda_lo < lambda_hi 여야 합니다: {lambda_lo}, {lambda_hi}")
    grid = np.geomspace(lambda_lo, lambda_hi, n_points)
    re_h = np.array([re_h_expansion(spec, delta, lam) for lam in grid])
    slope, _ = np.polyfit(np.log(grid), np.log(re_h), 1)
    return float(slope)
