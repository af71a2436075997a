# codeswitch/core/distributions.py
"""
Tail probabilities and quantiles for regression inference.

- regularized incomplete beta I_x(a, b): Lentz continued fraction with the
  usual symmetry switch at x = (a+1)/(a+b+2), plus a positive-term power
  series for small x
- log beta: Stirling corrections once an argument reaches 10, so large
  degrees of freedom keep full precision
- Student t survival: P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2), which the
  series evaluates as 1 - P(|T| < t) = 1 - I_{t^2/(t^2+df)}(1/2, df/2) near zero
- F survival: incomplete beta (same parameterization, so t^2 = F(1, df) holds)
- standard normal quantile: rational approximation plus one Halley step
"""
from __future__ import annotations

import math
from typing import Optional

from codeswitch.config import Config
from codeswitch.errors import ConvergenceError

_FPMIN = 1e-300
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# power series used when x <= 1/3 and (a+b) x <= _SERIES_AB_X
_SERIES_AB_X = 30.0
_SERIES_MAX_TERMS = 1000
# 1 - I_y(b, a) is accepted only while it keeps this much mass
_COMPLEMENT_MIN = 1e-2

# Stirling series coefficients of lgamma(x) - ((x - 1/2) ln x - x + ln sqrt(2 pi))
_STIRLING = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0,
             1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0)


def _lgamma_correction(x: float) -> float:
    """Stirling remainder of lgamma, valid for x >= 10."""
    inv = 1.0 / x
    inv2 = inv * inv
    total = 0.0
    for c in reversed(_STIRLING):
        total = total * inv2 + c
    return total * inv


def lnbeta(a: float, b: float) -> float:
    """log B(a, b) without the lgamma cancellation at large arguments."""
    p, q = min(a, b), max(a, b)
    s = p + q
    if p >= 10.0:
        corr = _lgamma_correction(p) + _lgamma_correction(q) - _lgamma_correction(s)
        return (-0.5 * math.log(q) + _LN_SQRT_2PI + corr
                + (p - 0.5) * math.log(p / s) + q * math.log1p(-p / s))
    if q >= 10.0:
        corr = _lgamma_correction(q) - _lgamma_correction(s)
        return math.lgamma(p) + corr + p - p * math.log(s) + (q - 0.5) * math.log1p(-p / s)
    return math.lgamma(p) + math.lgamma(q) - math.lgamma(s)


# --------------------------- incomplete beta ---------------------------

def _betacf(a: float, b: float, x: float, tol: float, max_iter: int) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {max_iter} iterations "
        f"(x={x:.6g}, a={a:.6g}, b={b:.6g})"
    )


def _front(x: float, y: float, a: float, b: float) -> float:
    """x^a y^b / B(a, b), with y = 1 - x supplied by the caller."""
    log_x = math.log1p(-y) if y < 0.5 else math.log(x)
    log_y = math.log1p(-x) if x < 0.5 else math.log(y)
    return math.exp(a * log_x + b * log_y - lnbeta(a, b))


def _beta_series(x: float, y: float, a: float, b: float) -> float:
    """I_x(a, b) = x^a y^b / (a B(a, b)) * sum_n (a+b)_n / (a+1)_n x^n (x well below 1)."""
    term = 1.0
    total = 1.0
    for n in range(_SERIES_MAX_TERMS):
        term *= (a + b + n) * x / (a + 1.0 + n)
        total += term
        if term <= 1e-17 * total:
            return _front(x, y, a, b) * total / a
    raise ConvergenceError(
        f"incomplete beta series did not converge (x={x:.6g}, a={a:.6g}, b={b:.6g})"
    )


def _ibeta(
    x: float,
    y: float,
    a: float,
    b: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> float:
    """I_x(a, b) where the caller supplies y = 1 - x computed without cancellation."""
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    tol = Config.BETA_CF_TOL if tol is None else tol
    max_iter = Config.BETA_CF_MAX_ITER if max_iter is None else max_iter

    if x <= 1.0 / 3.0 and (a + b) * x <= _SERIES_AB_X:
        return _beta_series(x, y, a, b)
    if y <= 1.0 / 3.0 and (a + b) * y <= _SERIES_AB_X:
        rest = 1.0 - _beta_series(y, x, b, a)
        if rest >= _COMPLEMENT_MIN:
            return rest

    front = _front(x, y, a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x, tol, max_iter) / a
    return 1.0 - front * _betacf(b, a, y, tol, max_iter) / b


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"incomplete beta needs a, b > 0 (got a={a}, b={b})")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"incomplete beta needs x in [0, 1], got {x}")
    return _ibeta(x, 1.0 - x, a, b)


# ------------------------------- Student t -------------------------------

def t_survival(t: float, df: float) -> float:
    """P(T > t) for Student's t with `df` degrees of freedom."""
    if not df > 0.0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if math.isnan(t):
        return math.nan
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0

    t2 = t * t
    denom = df + t2
    if math.isinf(denom):
        upper = 0.0
    else:
        upper = 0.5 * _ibeta(df / denom, t2 / denom, 0.5 * df, 0.5)
    upper = min(max(upper, 0.0), 0.5)
    return upper if t > 0 else 1.0 - upper


def two_sided_t_pvalue(t: float, df: float) -> float:
    if math.isnan(t):
        return math.nan
    return min(1.0, 2.0 * t_survival(abs(t), df))


# ---------------------------------- F ----------------------------------

def f_survival(f: float, df1: float, df2: float) -> float:
    """P(F > f) for the F(df1, df2) distribution."""
    if not (df1 > 0.0 and df2 > 0.0):
        raise ValueError(f"degrees of freedom must be positive, got ({df1}, {df2})")
    if math.isnan(f):
        return math.nan
    if f < 0.0:
        raise ValueError(f"F statistic must be non-negative, got {f}")
    if f == 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    denom = df2 + df1 * f
    if math.isinf(denom):
        return 0.0
    p = _ibeta(df2 / denom, df1 * f / denom, 0.5 * df2, 0.5 * df1)
    return min(max(p, 0.0), 1.0)


# ------------------------------- normal -------------------------------

_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _quantile_lower(p: float) -> float:
    """Rational approximation for 0 < p <= 0.5, then one Halley correction."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    e = normal_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"normal quantile needs p in (0, 1), got {p}")
    if p > 0.5:
        # 1 - p is exact here
        return -_quantile_lower(1.0 - p)
    return _quantile_lower(p)
