"""Airy function, Hermite polynomials and Kummer's confluent function."""
from __future__ import annotations

import math
from decimal import Decimal, localcontext

import numpy as np

# Ai(0) and -Ai'(0)
_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_DAI0 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)

SERIES_UPPER = 5.0
SERIES_LOWER = -10.0


def _maclaurin_fg(x: float) -> tuple[float, float]:
    """The two power series with Ai = Ai(0) f - |Ai'(0)| g.

    Summed in 50-digit decimal arithmetic: on the oscillatory side the
    individual terms reach ~1e9 while f and g stay O(1).
    """
    with localcontext() as ctx:
        ctx.prec = 50
        z = Decimal(x)
        z3 = z * z * z
        f_term, g_term = Decimal(1), z
        f_sum, g_sum = f_term, g_term
        eps = Decimal(10) ** -40
        k = 0
        while True:
            k += 1
            f_term = f_term * z3 / ((3 * k - 1) * (3 * k))
            g_term = g_term * z3 / ((3 * k) * (3 * k + 1))
            f_sum += f_term
            g_sum += g_term
            if abs(f_term) + abs(g_term) < eps * (1 + abs(f_sum) + abs(g_sum)) and k > 3:
                break
    return float(f_sum), float(g_sum)


def _u(k: int) -> float:
    # asymptotic coefficients u_k = Gamma(3k+1/2) / (54^k k! Gamma(k+1/2))
    return math.exp(math.lgamma(3 * k + 0.5) - k * math.log(54) - math.lgamma(k + 1) - math.lgamma(k + 0.5))


def _asymptotic_sum(zeta: float, terms):
    total, prev = 0.0, math.inf
    for k, sign in terms:
        t = _u(k) / zeta**k
        if t > prev:
            break
        total += sign * t
        prev = t
        if t < 1e-17:
            break
    return total


def _airy_scalar(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError("airy_ai needs a finite argument")
    if SERIES_LOWER <= x <= SERIES_UPPER:
        f, g = _maclaurin_fg(x)
        return _AI0 * f - _DAI0 * g
    if x > SERIES_UPPER:
        zeta = 2.0 / 3.0 * x**1.5
        s = _asymptotic_sum(zeta, ((k, (-1) ** k) for k in range(60)))
        return math.exp(-zeta) / (2 * math.sqrt(math.pi) * x**0.25) * s
    r = -x
    zeta = 2.0 / 3.0 * r**1.5
    p = _asymptotic_sum(zeta, ((2 * k, (-1) ** k) for k in range(30)))
    q = _asymptotic_sum(zeta, ((2 * k + 1, (-1) ** k) for k in range(30)))
    phase = zeta + math.pi / 4
    return (math.sin(phase) * p - math.cos(phase) * q) / (math.sqrt(math.pi) * r**0.25)


def airy_ai(x):
    """Airy function Ai for real scalars or arrays (absolute error ~1e-13 on [-10, 10])."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return _airy_scalar(float(arr))
    # Ai decays like exp(-2/3 x^1.5); beyond x = 100 it underflows
    out = np.zeros(arr.shape)
    flat = arr.reshape(-1)
    res = out.reshape(-1)
    cache = {}
    for i, v in enumerate(flat):
        if v > 100:
            continue
        if v not in cache:
            cache[v] = _airy_scalar(float(v))
        res[i] = cache[v]
    return out


def airy_zero(k: int = 1, tol: float = 1e-13) -> float:
    """k-th negative zero of Ai, by bisection between asymptotic brackets."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t = 3 * math.pi / 8 * (4 * k - 1)
    guess = -(t ** (2.0 / 3.0))
    lo, hi = guess - 0.3, guess + 0.3
    flo = airy_ai(lo)
    if flo * airy_ai(hi) > 0:
        raise RuntimeError("failed to bracket the Airy zero")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = airy_ai(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hermite_poly(n: int, x):
    """Physicists' Hermite polynomial via H_{k+1} = 2x H_k - 2k H_{k-1}."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2 * x
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h if h.ndim else float(h)


def hermite_function(n: int, x):
    """Orthonormal Hermite function ``H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi))``.

    Uses the normalized recurrence so large n does not overflow.
    """
    x = np.asarray(x, dtype=float)
    psi_prev = np.zeros_like(x)
    psi = np.pi**-0.25 * np.exp(-0.5 * x * x)
    for k in range(n):
        psi_prev, psi = psi, math.sqrt(2.0 / (k + 1)) * x * psi - math.sqrt(k / (k + 1)) * psi_prev
    return psi


def kummer_1f1(a: float, b: float, z, *, max_terms: int = 2000, rtol: float = 1e-16):
    """Confluent hypergeometric 1F1(a; b; z) by its power series.

    For a = -n the series is a polynomial and is summed exactly to degree n.
    """
    if b <= 0 and float(b).is_integer():
        raise ValueError("b must not be a nonpositive integer")
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    terminating = a <= 0 and float(a).is_integer()
    for k in range(max_terms):
        if terminating and k >= -a:
            break
        term = term * (a + k) / (b + k) * z / (k + 1)
        total = total + term
        if not terminating and np.all(np.abs(term) <= rtol * np.abs(total)):
            break
    else:
        if not terminating:
            raise RuntimeError("1F1 series did not converge")
    return total if total.ndim else float(total)
