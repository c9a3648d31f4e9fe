# transport/services/kernel.py
"""
반지름 방향 합성곱 커널 g_{d,alpha} 구성과 평가.

- d >= 2: 원점 근처는 테일러 급수, r > 1/r_switch 는 반사 항등식
  g(r) = r^{-(d-2+alpha)} g(1/r), 그 사이 띠는 각도 적분의 적응 구적.
- d = 1: 닫힌 형태 (alpha < 1, alpha = 1, alpha > 1 세 갈래).
- 정규화 상수 C_{d,alpha} 는 1 로 둡니다 (시간 척도만 바뀜).
"""
from dataclasses import dataclass, field
from functools import lru_cache
import logging
import math

import numpy as np
from scipy import integrate
from scipy import special as sp

from ..conf import nonlocal_setting
from ..exceptions import DomainError, SingularPointError, UnsupportedError
from .special import log_beta, log_gamma, sphere_area

logger = logging.getLogger(__name__)

# 급수 절단 상한 (alpha -> 2 에서도 r_switch 기하 감쇠가 이 안에서 끝남)
MAX_SERIES_TERMS = 200_000


@dataclass(frozen=True)
class KernelSpec:
    """차원 d 와 지수 alpha"""
    d: int
    alpha: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"차원 d 는 1 이상의 정수여야 합니다: {self.d}")
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha 가 유한하지 않습니다: {self.alpha}")
        object.__setattr__(self, 'd', int(self.d))
        object.__setattr__(self, 'alpha', float(self.alpha))

    @property
    def local_limit(self) -> bool:
        """alpha = 2: 커널 없이 v = d_r u"""
        return self.alpha == 2.0

    @property
    def reflection_exponent(self) -> float:
        return self.d - 2 + self.alpha

    @property
    def singular(self) -> bool:
        """r = 1 에서 커널이 발산하는지"""
        return self.alpha >= 1.0

    def require_kernel(self):
        """커널 평가가 가능한 범위인지 확인"""
        if self.alpha > 2.0:
            raise UnsupportedError(f"alpha > 2 는 지원하지 않습니다: {self.alpha}")
        if self.local_limit:
            raise UnsupportedError("alpha = 2 는 국소 극한입니다 (커널 없음, v = d_r u)")
        if self.d == 1:
            if self.alpha <= 0.0:
                raise DomainError(f"d = 1 에서는 alpha 가 (0, 2) 안에 있어야 합니다: {self.alpha}")
        elif self.alpha < 0.0:
            raise DomainError(f"alpha 는 0 이상이어야 합니다: {self.alpha}")
        return self

    def __str__(self):
        return f"d={self.d}, alpha={self.alpha:g}"


# ===== 테일러 계수 =====

def coefficient_function(spec: KernelSpec):
    """
    실수 x 에서 정의되는 a(x) (x = n 이면 a_{2n+1}).
    로그-Beta 항등식으로 곱 공식을 다시 쓴 형태라 큰 n 에서도 넘침이 없습니다.
    Mellin 급수의 꼬리 적분에도 씁니다.
    """
    spec.require_kernel()
    d, alpha = spec.d, spec.alpha

    if d == 1:
        if alpha == 1.0:
            return lambda x: 2.0 / (2.0 * np.asarray(x, dtype=float) + 1.0)
        # 2 B(2x + alpha, 2 - alpha) / (|Gamma(alpha - 1)| Gamma(2 - alpha))
        log_c = math.log(2.0) - log_gamma(alpha - 1.0) - log_gamma(2.0 - alpha)
        return lambda x: np.exp(log_c + log_beta(2.0 * np.asarray(x, dtype=float) + alpha, 2.0 - alpha))

    sigma = sphere_area(d).sigma
    if alpha == 0.0:
        a1 = sigma * (d - 2) / d

        def alpha_zero(x):
            x = np.asarray(x, dtype=float)
            return np.where(x == 0.0, a1, 0.0)
        return alpha_zero

    # sigma_d (d+alpha-2)/2 * Gamma(d/2) / (Gamma(alpha/2) Gamma((d+alpha)/2) Gamma(1-alpha/2)^2)
    #   * B(x + alpha/2, 1 - alpha/2) * B(x + (d+alpha)/2, 1 - alpha/2)
    half = alpha / 2.0
    log_c = (math.log(sigma * (d + alpha - 2) / 2.0) + log_gamma(d / 2.0)
             - log_gamma(half) - log_gamma((d + alpha) / 2.0) - 2.0 * log_gamma(1.0 - half))

    def general(x):
        x = np.asarray(x, dtype=float)
        return np.exp(log_c + log_beta(x + half, 1.0 - half) + log_beta(x + (d + alpha) / 2.0, 1.0 - half))
    return general


def series_coefficients(spec: KernelSpec, n_max: int) -> np.ndarray:
    """a_{2n+1}, n = 0..n_max"""
    if n_max < 0:
        raise DomainError(f"n_max 는 0 이상이어야 합니다: {n_max}")
    return coefficient_function(spec)(np.arange(n_max + 1, dtype=float))


def taylor_coefficient(spec: KernelSpec, n: int) -> float:
    """g 의 원점 테일러 계수 a_{2n+1}"""
    if int(n) != n or n < 0:
        raise DomainError(f"n 은 0 이상의 정수여야 합니다: {n}")
    return float(coefficient_function(spec)(float(n)))


@dataclass(frozen=True)
class SeriesCoefficients:
    """절단된 테일러 급수 (생성 후 불변)"""
    spec: KernelSpec
    coeffs: np.ndarray = field(repr=False)
    truncation_N: int
    tail_bound: float
    r_switch: float

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    def evaluate(self, r):
        """sum a_{2n+1} r^{2n+1} (홀함수, |r| < 1)"""
        r = np.asarray(r, dtype=float)
        return r * np.polynomial.polynomial.polyval(r * r, self.coeffs)


def build_series(spec: KernelSpec, tol: float, r_switch: float = None) -> SeriesCoefficients:
    """
    a_{2N+1} r_s^{2N+1} / (1 - r_s^2) < tol 이 되는 가장 작은 N 까지 계수를 모읍니다.
    a_{2n+1} 은 n 에 대해 감소하므로 tail_bound = a_{2N+3} r_s^{2N+3} / (1 - r_s^2) 는 엄밀한 상계입니다.
    """
    spec.require_kernel()
    if not tol > 0:
        raise DomainError(f"tol 은 양수여야 합니다: {tol}")
    r_switch = float(r_switch or nonlocal_setting('R_SWITCH'))
    if not 0.0 < r_switch < 1.0:
        raise DomainError(f"r_switch 는 (0, 1) 안이어야 합니다: {r_switch}")

    if spec.d >= 2 and spec.alpha == 0.0:
        coeffs = series_coefficients(spec, 0)
        return SeriesCoefficients(spec, coeffs, 0, 0.0, r_switch)

    a = coefficient_function(spec)
    scale = 1.0 / (1.0 - r_switch ** 2)
    n_max = 64
    while True:
        n = np.arange(n_max + 1, dtype=float)
        coeffs = a(n)
        stop = coeffs * r_switch ** (2 * n + 1) * scale
        below = np.nonzero(stop < tol)[0]
        if below.size:
            N = int(below[0])
            break
        if n_max >= MAX_SERIES_TERMS:
            raise DomainError(f"급수가 {MAX_SERIES_TERMS} 항 안에서 tol={tol} 에 도달하지 못했습니다")
        n_max *= 2

    tail = float(a(N + 1.0) * r_switch ** (2 * N + 3) * scale)
    logger.debug("series %s: N=%d tail=%.3e", spec, N, tail)
    return SeriesCoefficients(spec, np.array(coeffs[:N + 1]), N, tail, r_switch)


@lru_cache(maxsize=64)
def default_series(spec: KernelSpec) -> SeriesCoefficients:
    return build_series(spec, nonlocal_setting('SERIES_TOL'))


# ===== 커널 평가 =====

def _closed_form_1d(alpha: float, r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide='ignore'):
        if alpha < 1.0:
            return np.abs(1 + r) ** (1 - alpha) - np.abs(1 - r) ** (1 - alpha)
        if alpha == 1.0:
            return np.log(np.abs(1 + r)) - np.log(np.abs(1 - r))
        return np.abs(1 - r) ** (1 - alpha) - np.abs(1 + r) ** (1 - alpha)


def _angular_breakpoints(r: float):
    """theta = 0 근처 준특이 구간 분할점 (폭 ~ |1 - r|)"""
    gap = abs(1.0 - r)
    points = [math.pi / 2]
    if gap > 0:
        points += [gap * 10.0 ** k for k in range(4) if gap * 10.0 ** k < math.pi / 2]
    return sorted(points)


def kernel_quadrature(spec: KernelSpec, r: float, form: str = 'cosine') -> float:
    """
    각도 적분을 직접 적응 구적 (scipy quad = QUADPACK Gauss-Kronrod).
    form='cosine'  : sigma_{d-1} int cos(t) sin^{d-2}(t) / A^{d-2+alpha} dt
    form='positive': 부분적분한 형태 sigma_{d-1} r (d-2+alpha)/(d-1) int sin^d(t) / A^{d+alpha} dt
    """
    spec.require_kernel()
    d, alpha = spec.d, spec.alpha
    if r < 0:
        raise DomainError(f"r 은 0 이상이어야 합니다: {r}")
    if spec.singular and r == 1.0:
        raise SingularPointError("alpha >= 1 이면 r = 1 은 특이점입니다")
    if d == 1:
        return float(_closed_form_1d(alpha, r))

    sigma_prev = sphere_area(d - 1).sigma
    gap2 = (1.0 - r) ** 2

    def a2(theta):
        # r^2 + 1 - 2 r cos(theta) 를 소거 없이 계산
        return gap2 + 4.0 * r * math.sin(theta / 2.0) ** 2

    if form == 'cosine':
        def integrand(theta):
            return math.cos(theta) * math.sin(theta) ** (d - 2) * a2(theta) ** (-(d - 2 + alpha) / 2.0)
        prefactor = sigma_prev
    elif form == 'positive':
        def integrand(theta):
            return math.sin(theta) ** d * a2(theta) ** (-(d + alpha) / 2.0)
        prefactor = sigma_prev * r * (d - 2 + alpha) / (d - 1)
        if prefactor == 0.0:
            return 0.0
    else:
        raise DomainError(f"알 수 없는 적분 형태: {form}")

    value, _ = integrate.quad(integrand, 0.0, math.pi, points=_angular_breakpoints(r),
                              epsabs=1e-13, epsrel=1e-12, limit=500)
    return float(prefactor * value)


def kernel_eval(spec: KernelSpec, r: float) -> float:
    """
    g_{d,alpha}(r), r >= 0.
    [0, r_s] 급수, [1/r_s, inf) 반사 + 급수, 그 사이 각도 구적.
    """
    spec.require_kernel()
    r = float(r)
    if r < 0:
        raise DomainError(f"r 은 0 이상이어야 합니다 (음수는 홀함수 성질로 처리): {r}")
    if r == 0.0:
        return 0.0
    if spec.singular and r == 1.0:
        raise SingularPointError("alpha >= 1 이면 r = 1 은 특이점입니다. 주치값 구적을 쓰세요.")
    if spec.d == 1:
        return float(_closed_form_1d(spec.alpha, r))

    series = default_series(spec)
    if r <= series.r_switch:
        return float(series.evaluate(r))
    if r >= 1.0 / series.r_switch:
        return float(r ** (-spec.reflection_exponent) * series.evaluate(1.0 / r))
    return kernel_quadrature(spec, r, form='positive')


def kernel_values(spec: KernelSpec, r) -> np.ndarray:
    """
    배열용 g. |r| < 1 에서 g(r) = a_1 r 2F1(alpha/2, (d+alpha)/2; d/2+1; r^2),
    |r| > 1 은 반사 항등식. 속도 연산자 조립의 기본 경로입니다.
    """
    spec.require_kernel()
    r = np.asarray(r, dtype=float)
    sign = np.sign(r)
    s = np.abs(r)
    if spec.singular and np.any(s == 1.0):
        raise SingularPointError("alpha >= 1 이면 |r| = 1 에서 평가할 수 없습니다")
    if spec.d == 1:
        return sign * _closed_form_1d(spec.alpha, s)

    d, alpha = spec.d, spec.alpha
    a1 = float(coefficient_function(spec)(0.0))
    if a1 == 0.0:
        return np.zeros_like(s)
    a, b, c = alpha / 2.0, (d + alpha) / 2.0, d / 2.0 + 1.0
    out = np.empty_like(s)
    inner = s <= 1.0
    out[inner] = a1 * s[inner] * sp.hyp2f1(a, b, c, s[inner] ** 2)
    outer = ~inner
    so = s[outer]
    out[outer] = a1 * so ** (-(d - 1 + alpha)) * sp.hyp2f1(a, b, c, so ** -2)
    return sign * out


def singular_coefficient(spec: KernelSpec) -> float:
    """
    r -> 1 근처 주요항 계수 c.
    alpha > 1: g ~ c |r-1|^{1-alpha},  alpha = 1: g ~ -c log|r-1|,  alpha < 1: 0
    """
    spec.require_kernel()
    if spec.alpha < 1.0:
        return 0.0
    if spec.d == 1:
        return 1.0
    sigma_prev = sphere_area(spec.d - 1).sigma
    if spec.alpha == 1.0:
        return sigma_prev
    return sigma_prev * 0.5 * math.exp(log_beta((spec.d - 1) / 2.0, (spec.alpha - 1) / 2.0))


def kernel_table(spec: KernelSpec, r_grid) -> tuple:
    """CSV 출력용 (r, g) 표. alpha >= 1 이면 r = 1 은 건너뜁니다."""
    r = np.asarray(r_grid, dtype=float)
    if np.any(r < 0):
        raise DomainError("표 격자는 0 이상이어야 합니다")
    if spec.singular:
        r = r[r != 1.0]
    return r, kernel_values(spec, r)
