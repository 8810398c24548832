"""Pochhammer products, the weights rho(n) and generalized hypergeometric series.

A family is described by two parameter lists ``alpha`` (numerator) and
``beta`` (denominator).  Its deformation function is

    f(n)^2 = prod_j (beta_j + n - 1) / prod_i (alpha_i + n - 1)

and the series weights are ``rho(n) = n! f(1)^2 ... f(n)^2``, so that

    pFq(alpha, beta; x) = sum_n x^n / rho(n).

Negative integer parameters truncate every sum at ``N`` (the largest
magnitude among the negative entries); in that case absolute values of the
Pochhammer symbols are used throughout.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    IllDefinedFamily,
    InvalidParameters,
    PoleError,
)

TOL = 1e-15
SMALL_TERMS_TO_STOP = 3
DEFAULT_MAX_TERMS = 10_000
BOUNDARY_GAP = 1e-9
LOG_SPACE_FROM = 30

PHASE_RULES = ("one", "i")


def max_terms() -> int:
    """Series term cap; ``HYPERCAT_MAX_TERMS`` overrides the default."""
    raw = os.environ.get("HYPERCAT_MAX_TERMS")
    if raw is None:
        return DEFAULT_MAX_TERMS
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidParameters(f"HYPERCAT_MAX_TERMS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise InvalidParameters("HYPERCAT_MAX_TERMS must be positive")
    return value


def _is_negative_integer(v: float) -> bool:
    return v < 0 and float(v).is_integer()


@dataclass(frozen=True)
class ModelParams:
    """Family descriptor ``(alpha, beta)`` plus the state phase convention.

    ``phase`` is ``"one"`` for plain amplitudes z^n/sqrt(rho(n)) and ``"i"``
    for the i^n factors carried by the SU(2) presets.
    """

    alpha: tuple = ()
    beta: tuple = ()
    phase: str = "one"
    _trunc: int | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if self.phase not in PHASE_RULES:
            raise InvalidParameters(f"unknown phase rule {self.phase!r}")
        negatives = []
        for v in alpha + beta:
            if not math.isfinite(v):
                raise InvalidParameters(f"non-finite parameter {v}")
            if v == 0:
                raise InvalidParameters("parameters must be nonzero")
            if v < 0:
                if not _is_negative_integer(v):
                    raise InvalidParameters(f"negative parameter {v} is not an integer")
                negatives.append(int(-v))
        trunc = max(negatives) if negatives else None
        if trunc is not None and min(negatives) < trunc:
            # a smaller negative entry vanishes (or diverges) inside 0..N
            raise PoleError(
                f"negative parameters {sorted(-m for m in negatives)} put a zero or pole "
                f"of f(n) below the truncation order {trunc}"
            )
        object.__setattr__(self, "_trunc", trunc)

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)

    @property
    def sign_count(self) -> int:
        return sum(1 for v in self.alpha + self.beta if v < 0)

    @property
    def trunc_N(self) -> int | None:
        return self._trunc

    @property
    def truncated(self) -> bool:
        return self._trunc is not None

    @property
    def eta(self) -> float:
        return sum(self.alpha) - sum(self.beta)

    def with_phase(self, phase: str) -> "ModelParams":
        return ModelParams(self.alpha, self.beta, phase)

    def describe(self) -> str:
        a = ",".join(_fmt(v) for v in self.alpha) or "-"
        b = ",".join(_fmt(v) for v in self.beta) or "-"
        return f"p={self.p} q={self.q} alpha={a} beta={b} phase={self.phase}"


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


@dataclass(frozen=True)
class ConvergenceDomain:
    kind: str
    eta: float | None
    radius: float


def convergence_domain(params: ModelParams) -> ConvergenceDomain:
    """Where the series sum_n x^n / rho(n) converges, in terms of |z|."""
    if params.truncated:
        return ConvergenceDomain("whole-plane", None, math.inf)
    if params.p < params.q + 1:
        return ConvergenceDomain("whole-plane", None, math.inf)
    if params.p > params.q + 1:
        return ConvergenceDomain("empty", None, 0.0)
    eta = params.eta
    kind = "unit-disk-with-boundary" if eta < 0 else "unit-disk"
    return ConvergenceDomain(kind, eta, 1.0)


def check_domain(params: ModelParams, abs_arg: float) -> None:
    """Raise unless the series argument of modulus ``abs_arg`` is admissible.

    ``abs_arg`` is the modulus of the series argument (|z|^2 for states).
    """
    dom = convergence_domain(params)
    if dom.kind == "empty":
        raise IllDefinedFamily(
            f"ill-defined family (R=0): p={params.p} > q+1={params.q + 1}"
        )
    if dom.kind == "whole-plane":
        return
    if abs_arg <= 1.0 - BOUNDARY_GAP:
        return
    if dom.kind == "unit-disk-with-boundary" and abs_arg <= 1.0:
        return
    raise DomainError(
        f"argument modulus {abs_arg!r} outside the unit disk (eta={dom.eta})"
    )


# ---------------------------------------------------------------------------
# Pochhammer symbols and weights


def _log_pochhammer(a: float, n: int) -> tuple[int, float]:
    """Sign and log-magnitude of (a)_n."""
    if n == 0:
        return 1, 0.0
    if a <= 0 and float(a).is_integer():
        m = int(-a)
        if n > m:
            return 0, -math.inf
        return (-1) ** n, math.lgamma(m + 1) - math.lgamma(m - n + 1)
    if a > 0:
        return 1, math.lgamma(a + n) - math.lgamma(a)
    negative_factors = min(n, math.ceil(-a))
    return (-1) ** negative_factors, math.lgamma(a + n) - math.lgamma(a)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1), with (a)_0 = 1."""
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if n <= LOG_SPACE_FROM:
        out = 1.0
        for m in range(n):
            out *= a + m
        return out
    sign, logabs = _log_pochhammer(a, n)
    if sign == 0:
        return 0.0
    if logabs > 709.0:
        return sign * math.inf
    return sign * math.exp(logabs)


def _check_n(params: ModelParams, n: int) -> int:
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if params.truncated and n > params.trunc_N:
        raise DomainError(f"n={n} beyond truncation order N={params.trunc_N}")
    return n


def _f2_abs(alpha: Sequence[float], beta: Sequence[float], n: int) -> float:
    num = 1.0
    for b in beta:
        num *= b + n - 1
    den = 1.0
    for a in alpha:
        den *= a + n - 1
    if den == 0:
        raise PoleError(f"f(n) has a pole at n={n}")
    return abs(num / den)


def f_factor(params: ModelParams, n: int) -> float:
    """|f(n)|: the deformation function, magnitudes only for truncated families."""
    n = _check_n(params, n)
    return math.sqrt(_f2_abs(params.alpha, params.beta, n))


def log_rho(params: ModelParams, n: int) -> float:
    """log |rho(n)| evaluated through log-Gamma."""
    n = _check_n(params, n)
    out = math.lgamma(n + 1)
    for b in params.beta:
        sign, lg = _log_pochhammer(b, n)
        if sign == 0:
            raise PoleError(f"rho({n}) vanishes")
        out += lg
    for a in params.alpha:
        sign, lg = _log_pochhammer(a, n)
        if sign == 0:
            raise PoleError(f"rho({n}) diverges")
        out -= lg
    return out


def rho(params: ModelParams, n: int) -> float:
    """rho(n) = n! f(n)!^2 (absolute value for truncated families).

    Up to n = 30 the value is the running product of m f(m)^2, so the
    recursion rho(n) = rho(n-1) n f(n)^2 holds exactly as computed.
    """
    n = _check_n(params, n)
    if n <= LOG_SPACE_FROM:
        out = 1.0
        for m in range(1, n + 1):
            out *= m * _f2_abs(params.alpha, params.beta, m)
        return out
    lr = log_rho(params, n)
    return math.exp(lr) if lr < 709.0 else math.inf


def energy_level(params: ModelParams, omega: float, n: int) -> float:
    """E_n = omega n |f(n)|^2 of the deformed Hamiltonian omega a_f^dag a_f."""
    n = _check_n(params, n)
    if n == 0:
        return 0.0
    return omega * n * _f2_abs(params.alpha, params.beta, n)


def delta_list(a: float, b: int, i: int) -> list[float]:
    """[a/b, (a+1)/b, ..., (a+i-1)/b]."""
    if b < 1 or i < 1:
        raise ValueError("b and i must be positive integers")
    return [(a + m) / b for m in range(i)]


# ---------------------------------------------------------------------------
# Series engine


def _step_ratio(alpha, beta, m: int, absolute: bool) -> float:
    """t_{m+1} / (x t_m) for t_m = x^m / rho(m)."""
    r = 1.0 / (m + 1)
    for a in alpha:
        r *= a + m
    for b in beta:
        r /= b + m
    return abs(r) if absolute else r


def _weight(alpha, beta, n: int, absolute: bool) -> float:
    """1 / rho(n) built from the same ratios the series uses."""
    w = 1.0
    for m in range(n):
        w *= _step_ratio(alpha, beta, m, absolute)
    return w


def sector_terms(
    alpha: Sequence[float],
    beta: Sequence[float],
    x: float,
    k: int = 1,
    j: int = 0,
    *,
    absolute: bool = False,
    n_stop: int | None = None,
    tol: float | None = None,
) -> np.ndarray:
    """Reduced terms r_v = x^(v k) / rho(v k + j), v = 0, 1, ...

    The sector sum sum_v x^(v k + j) / rho(v k + j) equals x^j * sum(r).
    Factoring out x^j keeps small-x limits finite.  With ``n_stop`` the
    sum is finite (all indices v k + j <= n_stop); otherwise terms are
    generated until three consecutive terms fall below ``tol`` times the
    running sum of magnitudes.
    """
    if n_stop is not None and j > n_stop:
        return np.zeros(0)
    r = _weight(alpha, beta, j, absolute)
    terms = [r]
    partial = abs(r)
    small = 0
    n = j
    cap = max_terms()
    tol = TOL if tol is None else tol
    while True:
        if n_stop is not None:
            if n + k > n_stop:
                break
        elif len(terms) >= cap:
            raise ConvergenceError(
                f"series not converged after {cap} terms (x={x!r}, k={k}, j={j})"
            )
        step = 1.0
        for m in range(n, n + k):
            step *= x * _step_ratio(alpha, beta, m, absolute)
        r *= step
        n += k
        terms.append(r)
        partial += abs(r)
        if n_stop is None:
            if abs(r) <= tol * partial:
                small += 1
                if small >= SMALL_TERMS_TO_STOP:
                    break
            else:
                small = 0
    return np.array(terms)


class _Neumaier:
    """Elementwise compensated summation for real arrays."""

    def __init__(self, init: np.ndarray):
        self.s = np.array(init, dtype=float)
        self.c = np.zeros_like(self.s)

    def add(self, v: np.ndarray) -> None:
        t = self.s + v
        big = np.abs(self.s) >= np.abs(v)
        self.c += np.where(big, (self.s - t) + v, (v - t) + self.s)
        self.s = t

    def total(self) -> np.ndarray:
        return self.s + self.c


def sector_sum_array(
    alpha: Sequence[float],
    beta: Sequence[float],
    w,
    k: int = 1,
    j: int = 0,
    *,
    absolute: bool = False,
    n_stop: int | None = None,
    tol: float | None = None,
    on_fail: str = "raise",
) -> np.ndarray:
    """Vectorized reduced sector sum  sum_v w^(v k) / rho(v k + j).

    ``w`` may be real or complex, scalar or array.  Each element stops
    accumulating once it meets the termination rule on its own.  With
    ``on_fail="nan"`` elements that hit the term cap become NaN instead of
    raising.
    """
    w = np.asarray(w)
    tol = TOL if tol is None else tol
    is_complex = np.iscomplexobj(w)
    shape = w.shape
    w = w.ravel()
    if n_stop is not None and j > n_stop:
        return np.zeros(shape, dtype=complex if is_complex else float)
    r0 = _weight(alpha, beta, j, absolute)
    r = np.full(w.shape, r0, dtype=complex if is_complex else float)
    acc_re = _Neumaier(r.real)
    acc_im = _Neumaier(np.zeros(w.shape)) if is_complex else None
    mag = np.abs(r)
    small = np.zeros(w.shape, dtype=int)
    done = np.zeros(w.shape, dtype=bool)
    n = j
    count = 1
    cap = max_terms()
    while True:
        if n_stop is not None:
            if n + k > n_stop:
                break
        else:
            if done.all():
                break
            if count >= cap:
                if on_fail == "nan":
                    break
                raise ConvergenceError(f"series not converged after {cap} terms")
        step = np.ones(w.shape, dtype=r.dtype)
        for m in range(n, n + k):
            step = step * (w * _step_ratio(alpha, beta, m, absolute))
        r = r * step
        n += k
        count += 1
        live = r if n_stop is not None else np.where(done, 0, r)
        acc_re.add(live.real)
        if is_complex:
            acc_im.add(live.imag)
        a = np.abs(live)
        mag += a
        if n_stop is None:
            tiny = a <= tol * mag
            small = np.where(tiny, small + 1, 0)
            done |= small >= SMALL_TERMS_TO_STOP
    out = acc_re.total()
    if is_complex:
        out = out + 1j * acc_im.total()
    if n_stop is None and not done.all():
        out = np.where(done, out, np.nan)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Public series evaluations


def _require_untruncated(params: ModelParams, what: str) -> None:
    if params.truncated:
        raise InvalidParameters(f"{what} needs positive parameters; use the truncated variant")


def pfq(params: ModelParams, x: float) -> float:
    """Generalized hypergeometric series sum_n x^n / rho(n) for real x."""
    _require_untruncated(params, "pfq")
    check_domain(params, abs(x))
    return math.fsum(sector_terms(params.alpha, params.beta, x))


def pfq_complex(params: ModelParams, w):
    """Series at complex argument(s), summed directly inside the domain."""
    _require_untruncated(params, "pfq_complex")
    arr = np.asarray(w, dtype=complex)
    dom = convergence_domain(params)
    if dom.kind == "empty":
        check_domain(params, 0.0)
    if arr.size:
        check_domain(params, float(np.max(np.abs(arr))))
    out = sector_sum_array(params.alpha, params.beta, arr)
    return complex(out) if np.ndim(w) == 0 else out


def pfq_truncated(params: ModelParams, x):
    """Finite sum sum_{n<=N} |(alpha)_n| / |(beta)_n| x^n / n!.

    Equals the signed truncated series evaluated at (-1)^sign_count * x.
    Accepts complex ``x`` (used by overlaps of truncated states).
    """
    if not params.truncated:
        raise InvalidParameters("pfq_truncated needs a family with negative integer parameters")
    out = sector_sum_array(
        params.alpha, params.beta, x, absolute=True, n_stop=params.trunc_N
    )
    if np.ndim(x) == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


def normalization(params: ModelParams, x: float) -> float:
    """N_f(|z|) with x = |z|^2, dispatching on truncation."""
    if params.truncated:
        return pfq_truncated(params, x)
    return pfq(params, x)


def _check_sector(params: ModelParams, k: int, j: int) -> None:
    if int(k) != k or k < 1:
        raise InvalidParameters(f"k must be a positive integer, got {k!r}")
    if int(j) != j or not 0 <= j < k:
        raise InvalidParameters(f"j must lie in 0..{k - 1}, got {j!r}")
    if params.truncated and (params.trunc_N + 1) % k:
        raise InvalidParameters(
            f"k={k} must divide N+1={params.trunc_N + 1} for a truncated family"
        )


def reduced_kitten_norm(params: ModelParams, k: int, j: int, x: float) -> float:
    """kitten_norm(k, j, x) / x^j, finite at x = 0."""
    _check_sector(params, k, j)
    if params.truncated:
        terms = sector_terms(
            params.alpha, params.beta, x, k, j, absolute=True, n_stop=params.trunc_N
        )
    else:
        check_domain(params, abs(x))
        terms = sector_terms(params.alpha, params.beta, x, k, j)
    return math.fsum(terms)


def kitten_norm(params: ModelParams, k: int, j: int, x: float) -> float:
    """Sector normalization sum_v x^(v k + j) / rho(v k + j)."""
    s = reduced_kitten_norm(params, k, j, x)
    return s * x**j if j else s


def kitten_norm_appendix(params: ModelParams, k: int, j: int, x: float) -> float:
    """Sector normalization through a single composed hypergeometric series.

    (alpha)_(nk+j) and (nk+j)! are split into k interleaved Pochhammer
    symbols with step 1/k, turning the sector sum into one series of type
    (p k + 1, (q + 1) k) at argument (x k^(p-q-1))^k.
    """
    _require_untruncated(params, "kitten_norm_appendix")
    _check_sector(params, k, j)
    check_domain(params, abs(x))
    num = [d for a in params.alpha for d in delta_list(a + j, k, k)] + delta_list(1, 1, 1)
    den = [d for b in params.beta for d in delta_list(b + j, k, k)] + delta_list(j + 1, k, k)
    pref = 1.0
    for a in params.alpha:
        pref *= pochhammer(a, j)
    for b in params.beta:
        pref /= pochhammer(b, j)
    pref *= x**j / math.factorial(j)
    arg = (x * float(k) ** (params.p - params.q - 1)) ** k
    return pref * pfq(ModelParams(num, den), arg)
