"""Exact analytics for random dimer placement on a segment of ``n`` sites.

``X_n`` is the number of uncovered sites once no dimer fits. Expectations and
variances are exact rationals. Internally the recurrences run on integers
scaled by ``n!`` (``n! * e_n`` is an integer), so ``n = 10**4`` stays cheap;
each public value is reduced to a :class:`~fractions.Fraction` only once.

MGF coefficients ``f_n(lam) = E[exp(lam * X_n)]`` involve ``cosh(lam/2)`` and
are computed as truncated power series in mpmath at a configurable binary
precision.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath

DEFAULT_PREC = 200
MIN_DIGITS = 6


class PrecisionError(ArithmeticError):
    """Raised when a high-precision series loses too many significant digits."""


@lru_cache(maxsize=4)
def _scaled_expectations(n_max: int) -> tuple[int, ...]:
    # E[n] = n! * e_n and T[m] = m! * (e_0 + ... + e_m); from
    # e_n = 2/(n-1) * sum_{k<=n-2} e_k we get E[n] = 2n * T[n-2].
    E = [0] * (n_max + 1)
    if n_max >= 1:
        E[1] = 1
    T = [0] * (n_max + 1)
    for n in range(n_max + 1):
        if n >= 2:
            E[n] = 2 * n * T[n - 2]
        T[n] = (n * T[n - 1] if n else 0) + E[n]
    return tuple(E)


@lru_cache(maxsize=4)
def _scaled_self_convolution(m_max: int) -> tuple[int, ...]:
    # B[m] = m! * b_m with b_m = sum_k e_k e_{m-k} = [x^m] A(x)^2. Since
    # A^2 = x^2 (1-x)^-4 e^{-4x}, (x^2 - x)(A^2)' = (-4x^2 + 2x - 2) A^2,
    # i.e. (m-2) b_m = (m-3) b_{m-1} + 4 b_{m-2}.
    B = [0] * (m_max + 1)
    if m_max >= 2:
        B[2] = 2  # b_2 = e_1^2 = 1
    for m in range(3, m_max + 1):
        num = (m - 3) * m * B[m - 1] + 4 * m * (m - 1) * B[m - 2]
        q, rem = divmod(num, m - 2)
        assert rem == 0
        B[m] = q
    return tuple(B)


@lru_cache(maxsize=4)
def _scaled_second_moments(n_max: int) -> tuple[int, ...]:
    # M[n] = n! * E[X_n^2]. Conditioning on the first dimer,
    # E[X_n^2] = 2/(n-1) * (sum_{k<=n-2} E[X_k^2] + b_{n-2}).
    B = _scaled_self_convolution(max(n_max - 2, 0))
    M = [0] * (n_max + 1)
    if n_max >= 1:
        M[1] = 1
    U = [0] * (n_max + 1)
    for n in range(n_max + 1):
        if n >= 2:
            M[n] = 2 * n * (U[n - 2] + B[n - 2])
        U[n] = (n * U[n - 1] if n else 0) + M[n]
    return tuple(M)


def expected_monomers(n: int) -> Fraction:
    """``E[X_n]`` from ``e_n = 2/(n-1) * sum_{k<=n-2} e_k``, ``e_0=0, e_1=1``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return Fraction(_scaled_expectations(n)[n], math.factorial(n))


def expected_monomers_sequence(n_max: int) -> list[Fraction]:
    E = _scaled_expectations(n_max)
    out, fact = [], 1
    for n in range(n_max + 1):
        fact = fact * n if n else 1
        out.append(Fraction(E[n], fact))
    return out


def expected_monomers_closed_form(n: int) -> Fraction:
    """``sum_{k=0}^n (n-k) (-2)^k / k!`` evaluated exactly."""
    if n < 0:
        raise ValueError("n must be non-negative")
    # n!/k! built downwards keeps everything integral
    total, ratio = 0, 1
    for k in range(n, -1, -1):
        total += (n - k) * (-2) ** k * ratio
        ratio *= k if k else 1
    return Fraction(total, math.factorial(n))


def density_limit() -> float:
    """Limiting fraction of uncovered sites, ``exp(-2)``."""
    return math.exp(-2.0)


def variance_paper_recurrence(n: int) -> Fraction:
    """``V_n = 2/(n-1) * sum_{k<=n-2} V_k`` with ``V_0 = V_1 = 0``.

    Kept for comparison only: it drops the cross term of the conditional
    decomposition and is identically zero with deterministic seeds, while the
    true variance is not (``Var X_4 = 8/9``).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    V = [Fraction(0)] * (n + 1)
    run = Fraction(0)
    for m in range(n + 1):
        if m >= 2:
            run += V[m - 2]
            V[m] = 2 * run / (m - 1)
    return V[n]


def _variance_corrected_direct(n: int) -> Fraction:
    """Literal O(n^2) recurrence
    ``V_n = 2/(n-1) sum V_k + 1/(n-1) sum (e_k + e_{n-2-k})^2 - e_n^2``."""
    e = expected_monomers_sequence(n)
    V = [Fraction(0)] * (n + 1)
    run = Fraction(0)
    for m in range(2, n + 1):
        run += V[m - 2]
        cross = sum((e[k] + e[m - 2 - k]) ** 2 for k in range(m - 1))
        V[m] = (2 * run + cross) / (m - 1) - e[m] ** 2
    return V[n]


def variance_corrected_recurrence(n: int) -> Fraction:
    """Exact ``Var X_n`` with the k-dependent cross term retained.

    Evaluated through the equivalent second-moment recurrence in O(n)
    big-integer steps; :func:`_variance_corrected_direct` is the literal
    quadratic form and the two agree exactly.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    fact = math.factorial(n)
    M = _scaled_second_moments(n)[n]
    E = _scaled_expectations(n)[n]
    return Fraction(M * fact - E * E, fact * fact)


def variance_slope(n: int = 200) -> Fraction:
    """``Var X_n - Var X_{n-1}``; it settles factorially fast, so its value
    at moderate ``n`` is the per-site variance limit (numerically
    ``4 exp(-4)``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return variance_corrected_recurrence(n) - variance_corrected_recurrence(n - 1)


def variance_sequence(n_max: int) -> list[Fraction]:
    M = _scaled_second_moments(n_max)
    E = _scaled_expectations(n_max)
    out, fact = [], 1
    for n in range(n_max + 1):
        fact = fact * n if n else 1
        out.append(Fraction(M[n] * fact - E[n] * E[n], fact * fact))
    return out


def gf_coefficients(n_max: int) -> list[Fraction]:
    """Coefficients of ``A(x) = x (1-x)^-2 exp(-2x)`` by series product."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    exp_part = [Fraction((-2) ** j, math.factorial(j)) for j in range(n_max + 1)]
    # x/(1-x)^2 = sum i x^i
    return [sum((n - j) * exp_part[j] for j in range(n + 1)) for n in range(n_max + 1)]


def _series_log(a: list) -> list:
    """Log of a power series with ``a[0] != 0``, to the same order.

    Uses ``k l_k = k a_k - sum_{j=1}^{k-1} j l_j a_{k-j}`` on ``a / a[0]``.
    """
    a0 = a[0]
    b = [x / a0 for x in a]
    out = [mpmath.log(a0)] + [mpmath.mpf(0)] * (len(a) - 1)
    for k in range(1, len(a)):
        acc = k * b[k]
        for j in range(1, k):
            acc -= j * out[j] * b[k - j]
        out[k] = acc / k
    return out


def _mgf_series(lam, n_max: int, prec: int) -> list:
    with mpmath.workprec(prec):
        lam = mpmath.mpmathify(lam)
        # f_1 = e^lam forces C1/C2 = (1 + e^lam)/(1 - e^lam) = -coth(lam/2)
        c1 = mpmath.cosh(lam / 2)
        c2 = -mpmath.sinh(lam / 2)
        K = n_max + 2
        # (1-t)e^t and (1+t)e^{-t} have coefficients (1-k)/k! and (-1)^k (1-k)/k!
        y = []
        for k in range(K + 1):
            w = mpmath.mpf(1 - k) / mpmath.factorial(k)
            y.append(w * (c1 + (c2 if k % 2 == 0 else -c2)))
        logs = _series_log(y)
        # t*g = -d/dt ln y  =>  f_n = -(n+2) c_{n+2}
        return [-(n + 2) * logs[n + 2] for n in range(n_max + 1)]


def _digits_agreeing(lo, hi) -> float:
    scale = max(abs(hi), mpmath.mpf(10) ** -300)
    diff = abs(hi - lo)
    if diff == 0:
        return math.inf
    return float(-mpmath.log10(diff / scale))


def mgf_coefficients(lam, n_max: int, prec: int = DEFAULT_PREC,
                     as_mpf: bool = False) -> list:
    """``[f_0(lam), ..., f_{n_max}(lam)]`` via the series logarithm of
    ``y = cosh(lam/2) (1-t) e^t - sinh(lam/2) (1+t) e^{-t}``.

    The series is computed twice, at ``prec`` and ``prec + 64`` bits; if the
    two disagree before the sixth significant digit a :class:`PrecisionError`
    is raised. ``lam`` may be complex (used for PGF inversion).
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if not mpmath.isfinite(mpmath.mpmathify(lam)):
        raise ValueError("lambda must be finite")
    try:
        lo = _mgf_series(lam, n_max, prec)
        hi = _mgf_series(lam, n_max, prec + 64)
    except ZeroDivisionError:
        raise PrecisionError(f"constant term of y({lam}) vanished at {prec} bits") from None
    with mpmath.workprec(prec + 64):
        for n, (a, b) in enumerate(zip(lo, hi)):
            if _digits_agreeing(a, b) < MIN_DIGITS:
                raise PrecisionError(
                    f"f_{n}({lam}) keeps fewer than {MIN_DIGITS} digits at {prec} bits")
    if as_mpf:
        return lo
    return [complex(x) if isinstance(x, mpmath.mpc) else float(x) for x in lo]


ORACLE_CROSSOVER = 20


def distribution_1d(n: int, prec: int | None = None) -> dict[int, Fraction | float]:
    """Law of ``X_n`` as ``{m: P(X_n = m)}``, zero entries omitted.

    Small ``n`` use the exact oracle. Larger ``n`` evaluate the PGF
    ``z -> f_n(log z)`` at the ``n+1`` roots of unity and invert the
    Vandermonde (DFT) system in high precision, returning floats.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= ORACLE_CROSSOVER:
        from .oracle import exact_distribution
        from .graphs import path_graph
        return exact_distribution(path_graph(n))
    if prec is None:
        prec = DEFAULT_PREC + 4 * n
    N = n + 1
    with mpmath.workprec(prec + 64):
        values = []
        for j in range(N):
            lam = mpmath.mpc(0, 2 * mpmath.pi * j / N)
            lo = _mgf_series(lam, n, prec)[n]
            hi = _mgf_series(lam, n, prec + 64)[n]
            # |PGF| <= 1 on the unit circle, so absolute agreement is what counts
            if abs(hi - lo) > 1e-15:
                raise PrecisionError(f"PGF node {j} of X_{n} unstable at {prec} bits")
            values.append(hi)
        floor = 2.0 ** (-(prec // 2))
        probs = {}
        for m in range(N):
            acc = mpmath.mpc(0)
            for j in range(N):
                acc += values[j] * mpmath.expjpi(-2 * mpmath.mpf(j * m) / N)
            p = float(acc.real / N)
            if (n - m) % 2 == 0 and p > floor:
                probs[m] = p
    return probs
