"""Photon-number statistics of coherent states and k-hypercats.

All ratios are formed from *reduced* sector sums (powers of x factored
out), so the x -> 0 limits come out exactly instead of as 0/0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import hyperfunc as hf
from .errors import ConvergenceError, DomainError, InvalidParameters
from .hyperfunc import ModelParams
from .kittens import KittenSpec
from .states import fmt_float

POISSON_BAND = 1e-12


def classify(q: float) -> str:
    if abs(q) < POISSON_BAND:
        return "poisson"
    return "sub" if q < 0 else "super"


@dataclass(frozen=True)
class StatReport:
    mean_n: float
    std_n: float
    mandel_q: float
    fano: float
    classification: str

    @classmethod
    def from_moments(cls, mean: float, q: float, std: float | None = None) -> "StatReport":
        if std is None:
            std = math.sqrt(max(mean * (q + 1.0), 0.0))
        return cls(mean, std, q, q + 1.0, classify(q))


STAT_CSV_FIELDS = ("family", "k", "j", "x", "mean", "std", "Q", "F", "class")


def stat_csv(rows, target=None) -> str:
    """rows: iterables of (family, k, j, x, StatReport)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STAT_CSV_FIELDS)
    for family, k, j, x, rep in rows:
        w.writerow([
            family, k, j, fmt_float(x), fmt_float(rep.mean_n), fmt_float(rep.std_n),
            fmt_float(rep.mandel_q), fmt_float(rep.fano), rep.classification,
        ])
    text = buf.getvalue()
    if target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# Reduced sector sums


def _prepare(params: ModelParams, k: int, j: int, x: float) -> None:
    hf._check_sector(params, k, j)
    if x < 0:
        raise DomainError("x = |z|^2 must be nonnegative")
    if not params.truncated:
        hf.check_domain(params, x)


def _shift_stop(params: ModelParams, s: int) -> int | None:
    return params.trunc_N - s if params.truncated else None


def _reduced(alpha, beta, x, k, r, *, absolute, n_stop) -> float:
    """sum over m = r, r + k, ... of x^(m - r) / rho_(alpha, beta)(m)."""
    if n_stop is not None and r > n_stop:
        return 0.0
    return math.fsum(hf.sector_terms(alpha, beta, x, k, r, absolute=absolute, n_stop=n_stop))


def _shift_const(params: ModelParams, s: int) -> float:
    """prod (alpha)_s / prod (beta)_s, magnitudes for truncated families."""
    c = 1.0
    for a in params.alpha:
        c *= hf.pochhammer(a, s)
    for b in params.beta:
        c /= hf.pochhammer(b, s)
    return abs(c) if params.truncated else c


def _factorial_moment_parts(params: ModelParams, k: int, j: int, x: float, s: int):
    """<a^dag^s a^s> in the form  c_s x^e R_s / R_0.

    sum_{n = j mod k} n(n-1)..(n-s+1) x^n / rho(n) equals
    x^s c_s F^{(j-s) mod k} of the family (alpha+s, beta+s).
    Returns (c_s, e, R_s, R_0) with e = s + ((j - s) mod k) - j >= 0.
    """
    ab = params.truncated
    R0 = _reduced(params.alpha, params.beta, x, k, j, absolute=ab, n_stop=params.trunc_N)
    r = (j - s) % k
    alpha = tuple(a + s for a in params.alpha)
    beta = tuple(b + s for b in params.beta)
    Rs = _reduced(alpha, beta, x, k, r, absolute=ab, n_stop=_shift_stop(params, s))
    return _shift_const(params, s), s + r - j, Rs, R0


def _mean_and_q(params: ModelParams, k: int, j: int, x: float) -> tuple[float, float]:
    c1, e1, R1, R0 = _factorial_moment_parts(params, k, j, x, 1)
    c2, e2, R2, _ = _factorial_moment_parts(params, k, j, x, 2)
    mean = c1 * x**e1 * R1 / R0
    if R1 == 0.0:
        raise DomainError("Mandel parameter undefined: the state is the vacuum")
    q = (c2 / c1) * x ** (e2 - e1) * R2 / R1 - mean
    return mean, q


def mean_n(params: ModelParams, k: int, j: int, x: float) -> float:
    """<n> = x F^{j-1}/F^j in its shifted-family form (exact at x = 0)."""
    _prepare(params, k, j, x)
    c1, e1, R1, R0 = _factorial_moment_parts(params, k, j, x, 1)
    return c1 * x**e1 * R1 / R0


def _pairwise_variance(params: ModelParams, k: int, j: int, x: float) -> float:
    """sum_(a<b) (n_a - n_b)^2 p_a p_b: the variance without cancellation."""
    terms = hf.sector_terms(params.alpha, params.beta, x, k, j,
                            absolute=params.truncated, n_stop=params.trunc_N)
    p = terms / math.fsum(terms)
    n = j + k * np.arange(terms.size, dtype=float)
    iu = np.triu_indices(terms.size, 1)
    return math.fsum(((n[iu[0]] - n[iu[1]]) ** 2 * p[iu[0]] * p[iu[1]]).tolist())


def _std_from(params, k, j, x, mean, second) -> float:
    """sqrt(<a^dag^2 a^2> + <n> - <n>^2), switching to the pairwise form
    when the difference would lose more than four digits."""
    if x == 0.0:
        return 0.0
    var = second + mean - mean * mean
    if var < 1e-4 * (second + mean):
        var = _pairwise_variance(params, k, j, x)
    return math.sqrt(max(var, 0.0))


def std_n(params: ModelParams, k: int, j: int, x: float) -> float:
    """sigma_n from n^2 = a^dag^2 a^2 + n."""
    _prepare(params, k, j, x)
    c1, e1, R1, R0 = _factorial_moment_parts(params, k, j, x, 1)
    c2, e2, R2, _ = _factorial_moment_parts(params, k, j, x, 2)
    mean = c1 * x**e1 * R1 / R0
    second = c2 * x**e2 * R2 / R0
    return _std_from(params, k, j, x, mean, second)


def mandel(params: ModelParams, k: int, j: int, x: float) -> StatReport:
    """Mandel parameter Q = (<a^dag^2 a^2> - <n>^2) / <n> of a k-hypercat."""
    _prepare(params, k, j, x)
    mean, q = _mean_and_q(params, k, j, x)
    second = mean * (q + mean)
    return StatReport.from_moments(mean, q, _std_from(params, k, j, x, mean, second))


# ---------------------------------------------------------------------------
# Deformed number operator n_f = a_f^dag a_f


def _energy(params: ModelParams, n: np.ndarray) -> np.ndarray:
    """Eigenvalues e(n) = n |f(n)|^2 of n_f."""
    return np.array([m * hf._f2_abs(params.alpha, params.beta, m) if m else 0.0 for m in n])


def mandel_nf(params: ModelParams, k: int, j: int, x: float) -> StatReport:
    """Statistics of n_f for k >= 3.

    <n_f> = x F^{j-1}/F^j and the normally ordered
    Q_f = x (F^{j-2}/F^{j-1} - F^{j-1}/F^j), superscripts mod k.  The
    reported std is the true spread of n_f, which differs from
    sqrt(<n_f>(Q_f + 1)) unless e(n) - e(n-1) = 1.
    """
    if k < 3:
        raise InvalidParameters("mandel_nf needs k >= 3")
    _prepare(params, k, j, x)
    ab, N = params.truncated, params.trunc_N
    a, b = params.alpha, params.beta

    def stop(s):
        return None if N is None else N - s

    R0 = _reduced(a, b, x, k, j, absolute=ab, n_stop=stop(0))
    r1, r2 = (j - 1) % k, (j - 2) % k
    R1 = _reduced(a, b, x, k, r1, absolute=ab, n_stop=stop(1))
    R2 = _reduced(a, b, x, k, r2, absolute=ab, n_stop=stop(2))
    e1, e2 = 1 + r1 - j, 2 + r2 - j
    mean = x**e1 * R1 / R0
    if R1 == 0.0:
        raise DomainError("Mandel parameter undefined: <n_f> vanishes")
    q = x ** (e2 - e1) * R2 / R1 - mean

    terms = hf.sector_terms(a, b, x, k, j, absolute=ab, n_stop=N)
    n = j + k * np.arange(terms.size)
    p = terms / math.fsum(terms)
    e = _energy(params, n)
    centred = e - math.fsum(e * p)
    std = math.sqrt(math.fsum(centred * centred * p))
    return StatReport(mean, std, q, q + 1.0, classify(q))


# ---------------------------------------------------------------------------
# Photon number distribution and brute-force moments


def photon_pdf(spec: KittenSpec, m: int) -> float:
    """|<m|z; k, j>|^2, zero off the sector m = j mod k."""
    params, k, j, x = spec.params, spec.k, spec.j, spec.x
    if m < 0 or int(m) != m:
        raise ValueError("m must be a nonnegative integer")
    if m % k != j:
        return 0.0
    if params.truncated and m > params.trunc_N:
        return 0.0
    R = hf.reduced_kitten_norm(params, k, j, x)
    if m == j:
        return hf._weight(params.alpha, params.beta, j, params.truncated) / R
    if x == 0.0:
        return 0.0
    return math.exp((m - j) * math.log(x) - hf.log_rho(params, m)) / R


def sector_distribution(spec: KittenSpec) -> tuple[np.ndarray, np.ndarray]:
    """(m values, probabilities) over the support of a kitten, series-truncated."""
    params = spec.params
    terms = hf.sector_terms(
        params.alpha, params.beta, spec.x, spec.k, spec.j,
        absolute=params.truncated, n_stop=params.trunc_N, tol=1e-20,
    )
    n = spec.j + spec.k * np.arange(terms.size)
    return n, terms / math.fsum(terms)


def brute_force_moments(spec: KittenSpec, operator: str = "n") -> tuple[float, float]:
    """(mean, variance) of n or n_f from explicit sums over the distribution."""
    n, p = sector_distribution(spec)
    vals = n.astype(float) if operator == "n" else _energy(spec.params, n)
    mean = math.fsum(vals * p)
    var = math.fsum((vals - mean) ** 2 * p)
    return mean, var


def brute_force_report(spec: KittenSpec, operator: str = "n") -> StatReport:
    """StatReport from explicit sums; for n_f the Q is the normally ordered one."""
    n, p = sector_distribution(spec)
    if operator == "n":
        mean, var = brute_force_moments(spec, "n")
        if mean == 0.0:
            raise DomainError("Mandel parameter undefined: the state is the vacuum")
        return StatReport.from_moments(mean, (var - mean) / mean, math.sqrt(var))
    e = _energy(spec.params, n)
    e_prev = _energy(spec.params, np.maximum(n - 1, 0))
    mean = math.fsum(e * p)
    if mean == 0.0:
        raise DomainError("Mandel parameter undefined: <n_f> vanishes")
    normal = math.fsum(e * e_prev * p)
    q = (normal - mean * mean) / mean
    var = math.fsum((e - mean) ** 2 * p)
    return StatReport(mean, math.sqrt(var), q, q + 1.0, classify(q))


# ---------------------------------------------------------------------------
# Critical displacement


def _critical_g(params: ModelParams, k: int, x: float) -> float:
    """x-scaled sign function of d^2 Pi_k / dx^2.

    With A_a = x^a / rho(a) (a < k) and B_b = x^b / rho(b) (b >= k),
    Pi_k'' = 0 exactly where N2 / N1 = 2 x F'/F, N1 = sum (b-a) A_a B_b,
    N2 = sum (b-a)(a+b-1) A_a B_b.  Returns N2/N1 - 2 x F'/F, which is
    positive below the inflection point.
    """
    ab, N = params.truncated, params.trunc_N
    a_idx = np.arange(k)
    A = np.array([hf._weight(params.alpha, params.beta, a, ab) for a in a_idx]) * x**a_idx
    tail = hf.sector_terms(params.alpha, params.beta, x, 1, k, absolute=ab, n_stop=N)
    b = k + np.arange(tail.size)
    diff = b[None, :] - a_idx[:, None]
    n1 = math.fsum((A[:, None] * diff * tail[None, :]).ravel())
    n2 = math.fsum((A[:, None] * diff * (a_idx[:, None] + b[None, :] - 1) * tail[None, :]).ravel())
    full = hf.sector_terms(params.alpha, params.beta, x, absolute=ab, n_stop=N)
    mean = math.fsum(np.arange(full.size) * full) / math.fsum(full)
    return n2 / n1 - 2.0 * mean


def critical_z(params: ModelParams, k: int, xtol: float = 1e-13) -> float:
    """|z_c|: inflection point of the projector symbol Pi_k(x) = sum_{n<k} x^n/rho(n) / F(x)."""
    if int(k) != k or k < 1:
        raise InvalidParameters("k must be a positive integer")
    if params.truncated and k > params.trunc_N:
        raise DomainError("projector covers the whole truncated space; no inflection")
    dom = hf.convergence_domain(params)
    if dom.kind == "empty":
        hf.check_domain(params, 0.0)
    lo = 1e-6
    g_lo = _critical_g(params, k, lo)
    if not g_lo > 0:
        raise DomainError(f"no sign change of the second derivative for k={k}")
    hi = None
    if math.isinf(dom.radius):
        cand = 1.0
        while cand < 1e5:
            try:
                if _critical_g(params, k, cand) < 0:
                    hi = cand
                    break
            except ConvergenceError:
                break
            cand *= 2.0
    else:
        edge = dom.radius**2
        for m in range(1, 30):
            cand = edge * (1.0 - 2.0**-m)
            try:
                if _critical_g(params, k, cand) < 0:
                    hi = cand
                    break
            except ConvergenceError:
                break
    if hi is None:
        raise DomainError(f"no sign change of the second derivative for k={k}")
    x_c = brentq(lambda t: _critical_g(params, k, t), lo, hi, xtol=xtol, rtol=1e-15)
    return math.sqrt(x_c)


def projector_symbol(params: ModelParams, k: int, x: float) -> float:
    """Pi_k(x) = <z| sum_{n<k} |n><n| |z>."""
    ab, N = params.truncated, params.trunc_N
    full = hf.sector_terms(params.alpha, params.beta, x, absolute=ab, n_stop=N)
    return math.fsum(full[:k]) / math.fsum(full)
