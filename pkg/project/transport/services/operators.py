# transport/services/operators.py
"""
비국소 속도 T u 와 가중 범함수.

v(r) = int_0^inf d_rho u(rho) g(r/rho) rho^{1-alpha} d rho

d_rho u 는 짝 확장한 PCHIP 보간의 절점 도함수 w_j 를 모자 함수로 잇고,
v = K w 의 곱 적분 행렬 K 를 (spec, grid) 마다 한 번 조립해 시간 스텝마다 재사용합니다.
rho = r_i 에 닿는 두 칸은 기하 분할하고, alpha > 1 이면 가장 안쪽 칸에 Gauss-Jacobi 규칙을 씁니다.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import logging
import math
import warnings

import numpy as np
from scipy import integrate
from scipy import special as sp
from scipy.interpolate import PchipInterpolator

from ..conf import nonlocal_setting
from ..exceptions import DomainError, NumericalInstability, OriginNotMaximumWarning
from .kernel import KernelSpec, kernel_values
from .mellin import check_theorem_hypotheses, h1_series

logger = logging.getLogger(__name__)

GL_ORDER = 8
GRADING_RATIO = 0.2
GRADING_LEVELS = 10
ORIGIN_LEVELS = 30
# 정의역 절단 규칙: d_r u 의 지지 집합이 0.9 R_max 안에 있어야 함
SUPPORT_FRACTION = 0.9
SUPPORT_TOL = 1e-10


# ===== 반지름 방향 장 =====

def _check_grid(grid: np.ndarray):
    if grid.ndim != 1 or grid.size < 3:
        raise DomainError("격자는 3 점 이상의 1 차원 배열이어야 합니다")
    if grid[0] != 0.0:
        raise DomainError(f"격자는 r = 0 에서 시작해야 합니다: {grid[0]}")
    if not np.all(np.diff(grid) > 0):
        raise DomainError("격자는 순증가해야 합니다")
    if not np.all(np.isfinite(grid)):
        raise DomainError("격자에 유한하지 않은 값이 있습니다")


def _mirror(grid: np.ndarray, values: np.ndarray, parity: int) -> PchipInterpolator:
    x = np.concatenate([-grid[:0:-1], grid])
    y = np.concatenate([parity * values[:0:-1], values])
    return PchipInterpolator(x, y, extrapolate=False)


@dataclass(frozen=True)
class RadialField:
    """격자 위 반지름 함수 u(r_i). 보간은 r = 0 에 대해 짝 확장한 PCHIP 입니다."""
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    spec: KernelSpec

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        _check_grid(grid)
        if values.shape != grid.shape:
            raise DomainError(f"값 {values.shape} 과 격자 {grid.shape} 크기가 다릅니다")
        if not np.all(np.isfinite(values)):
            raise DomainError("장에 유한하지 않은 값이 있습니다")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @cached_property
    def interpolant(self) -> PchipInterpolator:
        return _mirror(self.grid, self.values, parity=1)

    @cached_property
    def nodal_derivative(self) -> np.ndarray:
        """절점에서의 d_r u (r = 0 에서 정확히 0)"""
        w = self.interpolant.derivative()(self.grid)
        w[0] = 0.0
        w.setflags(write=False)
        return w

    def __call__(self, r):
        return self.interpolant(np.abs(np.asarray(r, dtype=float)))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return np.sign(r) * self.interpolant.derivative()(np.abs(r))

    def with_values(self, values) -> 'RadialField':
        return RadialField(self.grid, values, self.spec)

    def at_origin(self) -> float:
        return float(self.values[0])


@dataclass(frozen=True)
class VelocityField:
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    quadrature_error_estimate: float = 0.0

    @cached_property
    def interpolant(self) -> PchipInterpolator:
        """홀함수 확장"""
        return _mirror(self.grid, self.values, parity=-1)

    def __call__(self, r):
        return self.interpolant(np.asarray(r, dtype=float))

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def graded_grid(M: int, r_max: float, focus=(0.0,), strength: float = 4.0, width: float = None) -> np.ndarray:
    """
    밀도 1 + strength * sum exp(-|r - f| / width) 의 역 CDF 로 만든 격자.
    r_0 = 0, r_M = r_max, focus 근처가 촘촘합니다. strength = 0 이면 균등 격자.
    """
    if M < 2:
        raise DomainError(f"격자 칸 수 M 은 2 이상이어야 합니다: {M}")
    if not r_max > 0:
        raise DomainError(f"r_max 는 양수여야 합니다: {r_max}")
    if strength < 0:
        raise DomainError(f"strength 는 0 이상이어야 합니다: {strength}")
    if strength == 0:
        return np.linspace(0.0, r_max, M + 1)
    width = width or 0.05 * r_max
    fine = np.linspace(0.0, r_max, 50 * M + 1)
    density = np.ones_like(fine)
    for f in focus:
        density += strength * np.exp(-np.abs(fine - f) / width)
    cdf = integrate.cumulative_trapezoid(density, fine, initial=0.0)
    targets = np.linspace(0.0, cdf[-1], M + 1)
    grid = np.interp(targets, cdf, fine)
    grid[0], grid[-1] = 0.0, r_max
    return grid


def support_radius(u: RadialField, tol: float = 1e-12) -> float:
    """|u| > tol * max|u| 인 가장 바깥 절점 (u = 0 이면 0)"""
    scale = np.max(np.abs(u.values))
    if scale == 0:
        return 0.0
    inside = np.nonzero(np.abs(u.values) > tol * scale)[0]
    return float(u.grid[inside[-1]])


def _derivative_support(u: RadialField) -> float:
    w = np.abs(u.nodal_derivative)
    scale = w.max()
    if scale == 0:
        return 0.0
    return float(u.grid[np.nonzero(w > SUPPORT_TOL * scale)[0][-1]])


def require_compact_support(u: RadialField):
    edge = _derivative_support(u)
    if edge > SUPPORT_FRACTION * u.r_max:
        raise DomainError(
            f"정의역 절단: d_r u 의 지지 반지름 {edge:.4g} 가 {SUPPORT_FRACTION} R_max = "
            f"{SUPPORT_FRACTION * u.r_max:.4g} 를 넘습니다")


# ===== 곱 적분 규칙 =====

def _graded_rule(a: float, b: float, singular_at: str, alpha: float, q: int):
    """
    [a, b] 에서 singular_at('left'/'right') 끝으로 기하 분할한 규칙.
    가장 안쪽 칸은 alpha > 1 이면 거리^{1-alpha} 가중 Gauss-Jacobi.
    """
    h = b - a
    x, w = sp.roots_legendre(q)
    dist, weights = [], []
    for level in range(GRADING_LEVELS):
        hi = h * GRADING_RATIO ** level
        lo = h * GRADING_RATIO ** (level + 1)
        dist.append(lo + (hi - lo) * (1.0 + x) / 2.0)
        weights.append((hi - lo) / 2.0 * w)
    eps = h * GRADING_RATIO ** GRADING_LEVELS
    if alpha > 1.0:
        beta = 1.0 - alpha
        u, wj = sp.roots_jacobi(q, 0.0, beta)
        d_in = eps * (1.0 + u) / 2.0
        dist.append(d_in)
        weights.append((eps / 2.0) ** (1.0 + beta) * wj * d_in ** (-beta))
    else:
        dist.append(eps * (1.0 + x) / 2.0)
        weights.append(eps / 2.0 * w)
    dist = np.concatenate(dist)
    weights = np.concatenate(weights)
    nodes = a + dist if singular_at == 'left' else b - dist
    return nodes, weights


class VelocityOperator:
    """
    v(r_i) = sum_j K_ij w_j.
    row_error 는 q 점과 q/2 점 규칙 행렬 차의 행별 L1 노름이며
    오차 추정은 row_error * max|w| 입니다.
    """

    def __init__(self, spec: KernelSpec, grid: np.ndarray, order: int = GL_ORDER):
        spec.require_kernel()
        grid = np.asarray(grid, dtype=float)
        _check_grid(grid)
        if order < 2 or order % 2:
            raise DomainError(f"구적 차수는 2 이상의 짝수여야 합니다: {order}")
        self.spec = spec
        self.grid = grid
        self.order = order
        self.matrix, self.row_error = self._assemble(order)
        logger.debug("velocity operator %s M=%d q=%d max row error %.3e",
                     spec, grid.size - 1, order, self.row_error.max())

    def _weight(self, r: float, rho: np.ndarray) -> np.ndarray:
        return kernel_values(self.spec, r / rho) * rho ** (1.0 - self.spec.alpha)

    def _row(self, i: int, q: int) -> np.ndarray:
        grid = self.grid
        row = np.zeros(grid.size)
        if i == 0:
            return row
        r = grid[i]
        a, b = grid[:-1], grid[1:]
        h = b - a

        regular = np.ones(a.size, dtype=bool)
        regular[i - 1] = False
        if i < a.size:
            regular[i] = False

        x, w = sp.roots_legendre(q)
        ka = a[regular][:, None]
        kh = h[regular][:, None]
        tau = (1.0 + x[None, :]) / 2.0
        rho = ka + kh * tau
        G = self._weight(r, rho) * (kh / 2.0) * w[None, :]
        idx = np.nonzero(regular)[0]
        np.add.at(row, idx, np.sum(G * (1.0 - tau), axis=1))
        np.add.at(row, idx + 1, np.sum(G * tau, axis=1))

        for k, end in ((i - 1, 'right'), (i, 'left')):
            if k >= a.size:
                continue
            nodes, wts = _graded_rule(a[k], b[k], end, self.spec.alpha, q)
            t = (nodes - a[k]) / h[k]
            Gk = self._weight(r, nodes) * wts
            row[k] += np.sum(Gk * (1.0 - t))
            row[k + 1] += np.sum(Gk * t)
        return row

    def _row_with_error(self, i: int, q: int):
        row = self._row(i, q)
        # q/2 점 행은 오차만 남기고 버림
        return row, float(np.abs(row - self._row(i, q // 2)).sum())

    def _assemble(self, q: int):
        """(q 점 행렬, 행별 오차)"""
        rows = range(self.grid.size)
        threads = int(nonlocal_setting('THREADS'))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                pairs = list(pool.map(lambda i: self._row_with_error(i, q), rows))
        else:
            pairs = [self._row_with_error(i, q) for i in rows]
        matrix = np.array([row for row, _ in pairs])
        return matrix, np.array([error for _, error in pairs])

    def apply(self, w: np.ndarray):
        w = np.asarray(w, dtype=float)
        v = self.matrix @ w
        v[0] = 0.0
        error = float(np.max(self.row_error * np.max(np.abs(w)))) if w.size else 0.0
        return v, error


@lru_cache(maxsize=2)
def _cached_operator(spec: KernelSpec, grid_bytes: bytes, order: int) -> VelocityOperator:
    return VelocityOperator(spec, np.frombuffer(grid_bytes, dtype=float), order)


def velocity_operator(spec: KernelSpec, grid: np.ndarray, order: int = GL_ORDER) -> VelocityOperator:
    """(spec, grid) 별로 캐시된 연산자"""
    return _cached_operator(spec, np.ascontiguousarray(grid, dtype=float).tobytes(), order)


def velocity(u: RadialField, order: int = GL_ORDER) -> VelocityField:
    """T u. alpha = 2 는 국소 극한 v = d_r u."""
    if u.spec.alpha > 2.0:
        u.spec.require_kernel()
    if u.spec.local_limit:
        return VelocityField(u.grid, u.nodal_derivative.copy(), 0.0)
    require_compact_support(u)
    operator = velocity_operator(u.spec, u.grid, order)
    v, error = operator.apply(u.nodal_derivative)
    if not np.all(np.isfinite(v)):
        raise NumericalInstability(f"속도에 유한하지 않은 값이 있습니다 ({u.spec})")
    return VelocityField(u.grid, v, error)


# ===== 가중 범함수 =====

def _origin_rule(breaks: np.ndarray, q: int = 6):
    """
    [0, breaks[-1]] 분할 구적. 첫 칸은 0 쪽으로 기하 분할하고
    남는 [0, eps] 는 호출자가 r^p 모형으로 더합니다.
    """
    x, w = sp.roots_legendre(q)
    a, b = breaks[:-1], breaks[1:]
    nodes = [(a[1:, None] + (b - a)[1:, None] * (1.0 + x) / 2.0).ravel()]
    weights = [((b - a)[1:, None] / 2.0 * w).ravel()]
    first = b[0]
    for level in range(ORIGIN_LEVELS):
        hi, lo = first * 0.5 ** level, first * 0.5 ** (level + 1)
        nodes.append(lo + (hi - lo) * (1.0 + x) / 2.0)
        weights.append((hi - lo) / 2.0 * w)
    return np.concatenate(nodes), np.concatenate(weights), first * 0.5 ** ORIGIN_LEVELS


def _integrate_from_origin(fn, breaks: np.ndarray, power: float) -> float:
    """int_0^B fn(r) dr, fn(r) ~ r^power (power > -1) 근처 0"""
    nodes, weights, eps = _origin_rule(np.asarray(breaks, dtype=float))
    value = float(np.sum(weights * fn(nodes)))
    return value + float(fn(np.array([eps]))[0]) * eps / (power + 1.0)


def weighted_pairing(f: RadialField, delta: float, v: VelocityField = None) -> float:
    """int_0^inf (T f)(r) f'(r) r^{-1-delta} dr"""
    check_theorem_hypotheses(f.spec, delta)
    v = v or velocity(f)

    def integrand(r):
        return v(r) * f.derivative(r) * r ** (-1.0 - delta)
    return _integrate_from_origin(integrand, f.grid, power=1.0 - delta)


def rhs_functional(f: RadialField, delta: float) -> float:
    """int_0^inf (f(r) - f(0))^2 r^{-1-alpha-delta} dr, R_max 밖은 해석적 꼬리"""
    check_theorem_hypotheses(f.spec, delta)
    require_compact_support(f)
    s = f.spec.alpha + delta
    f0 = f.at_origin()

    def integrand(r):
        return (f(r) - f0) ** 2 * r ** (-1.0 - s)
    inner = _integrate_from_origin(integrand, f.grid, power=3.0 - s)
    tail = (f.values[-1] - f0) ** 2 * f.r_max ** (-s) / s
    return max(inner + tail, 0.0)


def blowup_functional(u: RadialField, delta: float, L: float) -> float:
    """
    I = int_0^L (u(0) - u(r)) r^{-1-delta} dr, delta in (0, 1).
    u(0) < max u 이면 OriginNotMaximumWarning 을 내고 값은 그대로 계산합니다.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta 는 (0, 1) 안이어야 합니다: {delta}")
    if not 0.0 < L <= u.r_max:
        raise DomainError(f"L 은 (0, R_max] 안이어야 합니다: L={L}, R_max={u.r_max}")
    u0 = u.at_origin()
    if u0 < np.max(u.values):
        warnings.warn(f"u(0)={u0:.6g} < max u={np.max(u.values):.6g}", OriginNotMaximumWarning, stacklevel=2)
    breaks = np.append(u.grid[u.grid < L], L)

    def integrand(r):
        return (u0 - u(r)) * r ** (-1.0 - delta)
    return _integrate_from_origin(integrand, breaks, power=1.0 - delta)


def positivity_ratio(f: RadialField, delta: float) -> float:
    """weighted_pairing / rhs_functional"""
    rhs = rhs_functional(f, delta)
    if rhs <= 0.0:
        raise DomainError("우변 범함수가 0 이라 비율이 정의되지 않습니다")
    return weighted_pairing(f, delta) / rhs


def mellin_pairing(f: RadialField, delta: float, lambda_max: float = 60.0, n_lambda: int = 601,
                   n_log: int = 6001) -> tuple:
    """
    Parseval 쪽 계산. F(lam) = int_0^inf r^{i lam - c - 1}(f(r) - f(0)) dr, c = (alpha+delta)/2 일 때
    pairing = (1/pi) int_0^inf Re H(lam) |F|^2,  rhs = (1/pi) int_0^inf |F|^2.
    weighted_pairing / rhs_functional 의 독립 교차 검증용입니다.
    """
    check_theorem_hypotheses(f.spec, delta)
    require_compact_support(f)
    c = (f.spec.alpha + delta) / 2.0
    f0 = f.at_origin()
    R = f.r_max
    eps = 1e-6 * R

    s = np.linspace(math.log(eps), math.log(R), n_log)
    r = np.minimum(np.exp(s), R)
    phi = np.exp(-c * s) * (f(r) - f0)
    kappa = (float(f(np.array([eps]))[0]) - f0) / eps ** 2
    edge = f.values[-1] - f0

    lam = np.linspace(0.0, lambda_max, n_lambda)
    F = np.empty(lam.size, dtype=complex)
    for start in range(0, lam.size, 50):
        block = lam[start:start + 50]
        phase = np.exp(1j * np.outer(block, s))
        F[start:start + 50] = integrate.simpson(phase * phi[None, :], x=s, axis=1)
    F += kappa * eps ** (2.0 - c + 1j * lam) / (2.0 - c + 1j * lam)
    F += edge * R ** (1j * lam - c) / (c - 1j * lam)

    h = np.array([((f.spec.alpha + delta) ** 2 / 4.0 + x ** 2) * h1_series(f.spec, delta, x) for x in lam])
    power = np.abs(F) ** 2
    pairing = integrate.simpson(h.real * power, x=lam) / math.pi
    rhs = integrate.simpson(power, x=lam) / math.pi
    return float(pairing), float(rhs)
