# transport/services/special.py
"""
특수함수 모음 (Gamma, Beta, 이중 계승, 단위구 표면적).
다른 모든 서비스 모듈이 공유합니다. 상태가 없는 순수 함수라 스레드에서 그대로 써도 됩니다.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import special as sp

from ..exceptions import DomainError

# 이 값 이하에서는 이중 계승을 정수로 정확히 계산
EXACT_DOUBLE_FACTORIAL_MAX = 170


@dataclass(frozen=True)
class SphereArea:
    """R^d 단위구 표면적 sigma_d"""
    d: int
    sigma: float


def _require_positive(name: str, value: float):
    if not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} 는 양수여야 합니다: {value}")


def gamma_fn(x: float) -> float:
    """Gamma(x), x > 0"""
    _require_positive('x', x)
    return float(sp.gamma(x))


def log_gamma(x):
    """log|Gamma(x)| (배열 가능)"""
    return sp.gammaln(x)


def beta_fn(a: float, b: float) -> float:
    """B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b)"""
    _require_positive('a', a)
    _require_positive('b', b)
    return float(sp.beta(a, b))


def log_beta(a, b):
    """log B(a, b). 큰 a 에서도 점근 전개로 정확합니다 (배열 가능)."""
    return sp.betaln(a, b)


def sphere_area(d: int) -> SphereArea:
    """sigma_d = 2 pi^{d/2} / Gamma(d/2)"""
    if int(d) != d or d < 1:
        raise DomainError(f"차원 d 는 1 이상의 정수여야 합니다: {d}")
    d = int(d)
    sigma = 2.0 * math.pi ** (d / 2.0) / sp.gamma(d / 2.0)
    return SphereArea(d=d, sigma=float(sigma))


def double_factorial(n: int):
    """n!! = n(n-2)(n-4)..., 0!! = (-1)!! = 1. n > 170 이면 float 로 계산"""
    if int(n) != n or n < -1:
        raise DomainError(f"n 은 -1 이상의 정수여야 합니다: {n}")
    n = int(n)
    if n <= 0:
        return 1
    if n <= EXACT_DOUBLE_FACTORIAL_MAX:
        return math.prod(range(n, 0, -2))
    return float(sp.factorial2(n, exact=False))
