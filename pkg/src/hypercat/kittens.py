"""k-hypercats: orthonormalized eigenstates of a_f^k and circle representations."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import hyperfunc as hf
from .errors import DegenerateSectorError, DomainError, InvalidParameters
from .hyperfunc import ModelParams
from .states import CoherentLabel, FockVector, auto_dim, hcs, overlap, phase_factors

DEGENERATE_LAMBDA = 1e-13


def roots_of_unity(k: int) -> np.ndarray:
    """exp(2 pi i m / k) for m = 0..k-1; index with exact integer residues."""
    return np.exp(2j * np.pi * np.arange(k) / k)


def orthogonality_sum(n: int, j: int, k: int) -> complex:
    """sum_l exp(2 pi i (n - j) l / k), evaluated term by term in floating point.

    The integer products (n - j) l are reduced mod k before the exponential.
    """
    l = np.arange(k)
    return complex(np.sum(np.exp(2j * np.pi * (((n - j) * l) % k) / k)))


def fix_gauge(state: FockVector, rel: float = 1e-8) -> FockVector:
    """Rotate the global phase so the first nonzero amplitude is positive real.

    Amplitudes below ``rel`` times the largest one count as zero, so round-off
    in off-sector entries cannot pick the gauge.
    """
    mags = np.abs(state.amp)
    nz = np.nonzero(mags > rel * mags.max())[0] if mags.size else mags
    if nz.size == 0:
        return state
    a = state.amp[nz[0]]
    return FockVector(state.amp * (abs(a) / a))


@dataclass(frozen=True)
class KittenSpec:
    k: int
    j: int
    z: complex
    params: ModelParams

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        hf._check_sector(self.params, self.k, self.j)
        hf.check_domain(self.params, abs(self.z) ** 2)

    @property
    def x(self) -> float:
        return abs(self.z) ** 2


def _sector_terms(params: ModelParams, k: int, j: int, x: float, n_stop: int | None):
    if params.truncated:
        return hf.sector_terms(
            params.alpha, params.beta, x, k, j, absolute=True, n_stop=params.trunc_N
        )
    return hf.sector_terms(params.alpha, params.beta, x, k, j, n_stop=n_stop)


def kitten_fock(spec: KittenSpec, dim: int | None = None) -> FockVector:
    """Sector-restricted series sum_v z^(v k + j) / sqrt(rho(v k + j)) |v k + j>."""
    params, k, j, x = spec.params, spec.k, spec.j, spec.x
    if dim is None:
        dim = max(auto_dim(params, x), j + 1)
    if params.truncated and dim < params.trunc_N + 1:
        raise DomainError(f"dim={dim} cannot hold a truncated kitten of N={params.trunc_N}")
    S = hf.reduced_kitten_norm(params, k, j, x)
    terms = _sector_terms(params, k, j, x, n_stop=dim - 1)
    n = j + k * np.arange(terms.size)
    keep = n < dim
    if not params.truncated and math.fsum(terms[keep]) < S * (1 - 1e-12):
        raise DomainError(f"dim={dim} too small for sector j={j}")
    n, terms = n[keep], terms[keep]
    amp = np.zeros(dim, dtype=complex)
    amp[n] = np.sqrt(terms / S) * np.exp(1j * n * cmath.phase(spec.z)) * phase_factors(params, n)
    return FockVector(amp)


def _dft_combination(params, k, j, z, dim, norm_ratio):
    """(1/k) sqrt(norm_ratio) sum_l exp(-2 pi i j l / k) |z e^(2 pi i l / k)>."""
    roots = roots_of_unity(k)
    acc = np.zeros(dim, dtype=complex)
    for l in range(k):
        v = hcs(CoherentLabel(z * roots[l], params), dim)
        acc += np.conj(roots[(j * l) % k]) * v.amp
    return FockVector(acc * (math.sqrt(norm_ratio) / k))


def kitten_dft(spec: KittenSpec, dim: int | None = None) -> FockVector:
    """Kitten as an equally weighted superposition of k phase-shifted states.

    Refuses sectors whose Gram eigenvalue k F^j / F is below 1e-13.
    """
    params, k, j, x = spec.params, spec.k, spec.j, spec.x
    F = hf.normalization(params, x)
    Fj = hf.kitten_norm(params, k, j, x)
    lam = k * Fj / F
    if lam < DEGENERATE_LAMBDA:
        raise DegenerateSectorError(f"degenerate sector j={j}: lambda={lam!r}")
    if dim is None:
        dim = max(auto_dim(params, x), j + 1)
    return _dft_combination(params, k, j, spec.z, dim, F / Fj)


@dataclass(frozen=True)
class GramData:
    entries: np.ndarray
    eigenvalues: np.ndarray


def gram(params: ModelParams, k: int, z: complex) -> GramData:
    """Overlap matrix of the k rotated states and its DFT spectrum."""
    hf._check_sector(params, k, 0)
    roots = roots_of_unity(k)
    base = CoherentLabel(z, params)
    C = np.array([overlap(base, CoherentLabel(z * roots[l], params)) for l in range(k)])
    idx = (np.arange(k)[None, :] - np.arange(k)[:, None]) % k
    entries = C[idx]
    lam = np.array([np.sum(np.conj(roots[(jj * np.arange(k)) % k]) * C) for jj in range(k)])
    return GramData(entries, lam.real.copy())


def gram_eigenvalues_from_norms(params: ModelParams, k: int, z: complex) -> np.ndarray:
    """lambda_j = k F^j(|z|^2) / F(|z|^2)."""
    x = abs(z) ** 2
    F = hf.normalization(params, x)
    return np.array([k * hf.kitten_norm(params, k, j, x) / F for j in range(k)])


def kitten_overlap(a: KittenSpec, b: KittenSpec) -> complex:
    """<a|b> = delta_(j j') F^j(conj(z) z') / sqrt(F^j(|z|^2) F^j(|z'|^2))."""
    if a.k != b.k or a.params.alpha != b.params.alpha or a.params.beta != b.params.beta:
        raise InvalidParameters("kitten_overlap needs the same family and k")
    if a.j != b.j:
        return 0j
    params, k, j = a.params, a.k, a.j
    w = a.z.conjugate() * b.z
    kw = dict(absolute=params.truncated, n_stop=params.trunc_N)
    R = complex(hf.sector_sum_array(params.alpha, params.beta, complex(w), k, j, **kw))
    Sa = hf.reduced_kitten_norm(params, k, j, a.x)
    Sb = hf.reduced_kitten_norm(params, k, j, b.x)
    phase = cmath.exp(1j * j * (cmath.phase(b.z) - cmath.phase(a.z)))
    return phase * R / math.sqrt(Sa * Sb)


def circle_number_state_continuous(
    params: ModelParams, n: int, r: float, Qpts: int | None = None, dim: int | None = None
) -> FockVector:
    """Trapezoid-rule circle integral of rotated states reproducing |n>.

    Uses Qpts equally spaced angles; the error lives in the sectors
    n + Qpts, n + 2 Qpts, ...  The family's phase convention is divided out.
    """
    if params.truncated and not 0 <= n <= params.trunc_N:
        raise DomainError(f"n={n} outside 0..{params.trunc_N}")
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if r == 0:
        if n > 0:
            raise DomainError("r = 0 represents only |0>")
        return FockVector.basis(0, dim or 1)
    x = r * r
    hf.check_domain(params, x)
    if Qpts is None:
        Qpts = max(64, 8 * (n + 1))
    if dim is None:
        dim = max(auto_dim(params, x), n + 1)
    F = hf.normalization(params, x)
    t_n = math.exp(n * math.log(x) - hf.log_rho(params, n))
    roots = roots_of_unity(Qpts)
    acc = np.zeros(dim, dtype=complex)
    for l in range(Qpts):
        v = hcs(CoherentLabel(r * roots[l], params), dim)
        acc += np.conj(roots[(n * l) % Qpts]) * v.amp
    pref = math.sqrt(F / t_n) / Qpts
    return FockVector(acc * pref * np.conj(phase_factors(params, np.array([n]))[0]))


def circle_number_state_discrete(params: ModelParams, n: int, r: float) -> FockVector:
    """Exact finite circle representation of |n> for a truncated family.

    The (N+1)-point DFT of truncated states on the circle of radius r; no
    degeneracy guard applies because the identity holds for every r > 0.
    """
    if not params.truncated:
        raise InvalidParameters("the discrete circle representation needs a truncated family")
    N = params.trunc_N
    if not 0 <= n <= N:
        raise DomainError(f"n={n} outside 0..{N}")
    if r <= 0:
        raise DomainError("radius must be positive")
    x = r * r
    k = N + 1
    F = hf.normalization(params, x)
    Fn = hf.kitten_norm(params, k, n, x)
    out = _dft_combination(params, k, n, complex(r), k, F / Fn)
    return out * np.conj(phase_factors(params, np.array([n]))[0])
