"""Fock-space representation of hypergeometric coherent states."""

from __future__ import annotations

import cmath
import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import hyperfunc as hf
from .errors import DomainError, InvalidParameters
from .hyperfunc import ModelParams

AMPLITUDE_TAIL = 1e-24
DIM_TAIL = 1e-12

_I_POWERS = np.array([1, 1j, -1, -1j])


class TruncationWarning(UserWarning):
    """Amplitude pushed past the top of a finite Fock space."""


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def fmt_float(v: float) -> str:
    """Round-trip safe number formatting used by every CSV writer."""
    return format(float(v), ".17g")


@dataclass(frozen=True, eq=False)
class FockVector:
    """Complex amplitudes over number states |0>, ..., |dim-1>."""

    amp: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amp, dtype=complex).ravel()
        if arr.size == 0:
            raise ValueError("FockVector needs at least one amplitude")
        arr.setflags(write=False)
        object.__setattr__(self, "amp", arr)

    @property
    def dim(self) -> int:
        return self.amp.size

    @classmethod
    def basis(cls, n: int, dim: int) -> "FockVector":
        amp = np.zeros(dim, dtype=complex)
        amp[n] = 1.0
        return cls(amp)

    def padded(self, dim: int) -> np.ndarray:
        out = np.zeros(max(dim, self.dim), dtype=complex)
        out[: self.dim] = self.amp
        return out

    def inner(self, other: "FockVector") -> complex:
        """<self|other>, conjugate-linear in ``self``, compensated sum."""
        d = min(self.dim, other.dim)
        return _fsum_complex(np.conj(self.amp[:d]) * other.amp[:d])

    def norm(self) -> float:
        return math.sqrt(math.fsum(np.abs(self.amp) ** 2))

    def normalized(self) -> "FockVector":
        return FockVector(self.amp / self.norm())

    def __add__(self, other: "FockVector") -> "FockVector":
        d = max(self.dim, other.dim)
        return FockVector(self.padded(d) + other.padded(d))

    def __sub__(self, other: "FockVector") -> "FockVector":
        d = max(self.dim, other.dim)
        return FockVector(self.padded(d) - other.padded(d))

    def __mul__(self, c: complex) -> "FockVector":
        return FockVector(self.amp * c)

    __rmul__ = __mul__

    def distance(self, other: "FockVector") -> float:
        return (self - other).norm()

    def to_csv(self, target=None, header: dict | None = None) -> str:
        """Write ``n,re_amp,im_amp`` rows; ``header`` goes on a leading # line."""
        buf = io.StringIO()
        if header:
            buf.write("# " + "; ".join(f"{k}={v}" for k, v in header.items()) + "\n")
        buf.write("n,re_amp,im_amp\n")
        for n, a in enumerate(self.amp):
            buf.write(f"{n},{fmt_float(a.real)},{fmt_float(a.imag)}\n")
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> tuple["FockVector", dict]:
        """Inverse of :meth:`to_csv`; ``source`` is a path or the CSV text."""
        if isinstance(source, str) and "\n" in source:
            lines = source.splitlines()
        else:
            with open(source) as fh:
                lines = fh.read().splitlines()
        header = {}
        if lines and lines[0].startswith("#"):
            for item in lines[0][1:].split(";"):
                if "=" in item:
                    key, value = item.split("=", 1)
                    header[key.strip()] = value.strip()
            lines = lines[1:]
        if not lines or lines[0].strip() != "n,re_amp,im_amp":
            raise ValueError("missing n,re_amp,im_amp column header")
        amp = []
        for row in lines[1:]:
            if not row.strip():
                continue
            n, re, im = row.split(",")
            if int(n) != len(amp):
                raise ValueError(f"non-contiguous photon number {n}")
            amp.append(complex(float(re), float(im)))
        return cls(np.array(amp)), header


def phase_factors(params: ModelParams, n: np.ndarray) -> np.ndarray:
    """Per-n unit factors of the family's phase convention."""
    n = np.asarray(n)
    if params.phase == "i":
        return _I_POWERS[n % 4]
    return np.ones(n.shape, dtype=complex)


@dataclass(frozen=True)
class CoherentLabel:
    """A point z of the coherent-state manifold of a family."""

    z: complex
    params: ModelParams

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        hf.check_domain(self.params, abs(self.z) ** 2)

    @property
    def x(self) -> float:
        return abs(self.z) ** 2

    @property
    def r(self) -> float:
        return abs(self.z)

    @property
    def theta(self) -> float:
        return cmath.phase(self.z)


@dataclass(frozen=True)
class Preset:
    name: str
    params: ModelParams
    note: str = ""

    def label(self, z: complex) -> CoherentLabel:
        return CoherentLabel(z, self.params)


def preset(name: str, s: float | None = None, alpha=None, beta=None) -> Preset:
    """Named families.  ``s`` is the spin (Bargmann index) where one applies."""
    key = name.lower().replace("-", "_")

    def need_s() -> float:
        if s is None:
            raise InvalidParameters(f"preset {name!r} needs s")
        return float(s)

    if key == "canonical":
        return Preset("canonical", ModelParams(), "f(n)=1")
    if key in ("gp_su11", "perelomov_su11"):
        return Preset("gp_su11", ModelParams((2 * need_s(),)), "Perelomov SU(1,1)")
    if key == "bg_su11":
        return Preset("bg_su11", ModelParams((), (2 * need_s(),)), "Barut-Girardello SU(1,1)")
    if key in ("sg", "susskind_glogower"):
        return Preset("sg", ModelParams((1.0,)), "Susskind-Glogower")
    if key == "dual_sg":
        return Preset("dual_sg", ModelParams((), (1.0,)), "dual Susskind-Glogower")
    if key == "inverse_bosonic":
        return Preset("inverse_bosonic", ModelParams((1.0, 1.0)), "R=0, ill-defined")
    if key == "dual_inverse_bosonic":
        return Preset("dual_inverse_bosonic", ModelParams((), (1.0, 1.0)))
    if key == "hydrogen":
        return Preset("hydrogen", ModelParams((2.0, 2.0), (3.0,)), "E_n = 1 - 1/(n+1)^2")
    if key == "confluent":
        if alpha is None or beta is None:
            raise InvalidParameters("confluent preset needs alpha and beta")
        return Preset(f"confluent_{alpha:g}_{beta:g}", ModelParams((alpha,), (beta,)))
    if key == "bg_su2":
        two_s = 2 * need_s()
        return Preset("bg_su2", ModelParams((), (-two_s,), phase="i"), "almost BG SU(2)")
    if key == "gp_su2":
        two_s = 2 * need_s()
        return Preset("gp_su2", ModelParams((-two_s,), phase="i"), "Perelomov SU(2)")
    raise InvalidParameters(f"unknown preset {name!r}")


PRESET_NAMES = (
    "canonical", "gp_su11", "bg_su11", "sg", "dual_sg", "inverse_bosonic",
    "dual_inverse_bosonic", "hydrogen", "confluent", "bg_su2", "gp_su2",
)


def dual(params: ModelParams) -> ModelParams:
    """f -> 1/f, i.e. swap (p, alpha) with (q, beta)."""
    return ModelParams(params.beta, params.alpha, params.phase)


# ---------------------------------------------------------------------------
# State construction


def _terms(params: ModelParams, x: float, n_stop: int | None = None, tol: float | None = None):
    if params.truncated:
        n_stop = params.trunc_N if n_stop is None else min(n_stop, params.trunc_N)
        return hf.sector_terms(params.alpha, params.beta, x, absolute=True, n_stop=n_stop)
    return hf.sector_terms(params.alpha, params.beta, x, n_stop=n_stop, tol=tol)


def auto_dim(params: ModelParams, x: float) -> int:
    """Smallest dimension whose discarded tail is below 1e-24 of the norm."""
    if params.truncated:
        return params.trunc_N + 1
    hf.check_domain(params, x)
    terms = _terms(params, x, tol=AMPLITUDE_TAIL * 1e-3)
    total = math.fsum(terms)
    tails = np.cumsum(terms[::-1])[::-1]  # tails[n] = sum_{m >= n}
    beyond = np.append(tails[1:], 0.0)  # sum_{m > n}
    ok = np.nonzero(beyond < AMPLITUDE_TAIL * total)[0]
    return int(ok[0]) + 1


def _amplitudes(params: ModelParams, z: complex, dim: int, norm: float) -> np.ndarray:
    x = abs(z) ** 2
    n_have = dim if not params.truncated else min(dim, params.trunc_N + 1)
    t = _terms(params, x, n_stop=n_have - 1)
    t = t[:n_have]
    n = np.arange(t.size)
    amp = np.zeros(dim, dtype=complex)
    amp[: t.size] = np.sqrt(t / norm) * np.exp(1j * n * cmath.phase(z)) * phase_factors(params, n)
    return amp


def _check_dim(params: ModelParams, x: float, dim: int, norm: float) -> None:
    if params.truncated:
        if dim < params.trunc_N + 1:
            raise DomainError(f"dim={dim} cannot hold a truncated state of N={params.trunc_N}")
        return
    kept = math.fsum(_terms(params, x, n_stop=dim - 1))
    if 1.0 - kept / norm > DIM_TAIL:
        raise DomainError(f"dim={dim} holds only {kept / norm!r} of the norm")


def hcs(label: CoherentLabel, dim: int | None = None) -> FockVector:
    """|z; alpha, beta> in the number basis.

    Amplitudes are z^n phase(n) / sqrt(N rho(n)); ``dim`` defaults to the
    automatic cutoff (N+1 for truncated families).
    """
    params = label.params
    x = label.x
    norm = hf.normalization(params, x)
    if dim is None:
        dim = auto_dim(params, x)
    else:
        _check_dim(params, x, dim, norm)
    return FockVector(_amplitudes(params, label.z, dim, norm))


def overlap(a: CoherentLabel, b: CoherentLabel) -> complex:
    """<a|b> from the closed form F(conj(z_a) z_b) / sqrt(F(|z_a|^2) F(|z_b|^2))."""
    if a.params.alpha != b.params.alpha or a.params.beta != b.params.beta:
        raise InvalidParameters("overlap needs both states from the same family")
    params = a.params
    w = a.z.conjugate() * b.z
    if params.truncated:
        num = complex(hf.pfq_truncated(params, complex(w)))
    else:
        num = hf.pfq_complex(params, w)
    return num / math.sqrt(hf.normalization(params, a.x) * hf.normalization(params, b.x))


# ---------------------------------------------------------------------------
# Deformed ladder operators (magnitudes |f|; phases belong to the states)


def _ladder_coeffs(params: ModelParams, top: int) -> np.ndarray:
    """sqrt(n) |f(n)| for n = 1..top."""
    return np.array(
        [math.sqrt(n * hf._f2_abs(params.alpha, params.beta, n)) for n in range(1, top + 1)]
    )


def annihilate_f(params: ModelParams, state: FockVector) -> FockVector:
    """a_f = a f(n): amp'_n = sqrt(n+1) f(n+1) amp_(n+1); not renormalized."""
    out = np.zeros(state.dim, dtype=complex)
    if state.dim > 1:
        out[:-1] = _ladder_coeffs(params, state.dim - 1) * state.amp[1:]
    return FockVector(out)


def create_f(params: ModelParams, state: FockVector, extend: bool = False) -> FockVector:
    """Adjoint of :func:`annihilate_f`: amp'_(n+1) = sqrt(n+1) conj f(n+1) amp_n.

    Without ``extend`` the output keeps the input dimension and the top
    amplitude is lost (a :class:`TruncationWarning` is emitted if nonzero).
    """
    dim = state.dim + 1 if extend else state.dim
    out = np.zeros(dim, dtype=complex)
    coeffs = _ladder_coeffs(params, dim - 1)
    out[1:] = coeffs * state.amp[: dim - 1]
    if not extend and state.amp[-1] != 0:
        warnings.warn("create_f dropped the top Fock amplitude", TruncationWarning, stacklevel=2)
    return FockVector(out)


def _residual_extended(params: ModelParams, r: float) -> float:
    """||a_f psi - r psi|| for the truncated state at real z = r, in long double."""
    ld = np.longdouble
    N = params.trunc_N
    t = [ld(1)]
    for m in range(N):
        ratio = ld(1) / ld(m + 1)
        for a in params.alpha:
            ratio *= ld(a) + m
        for b in params.beta:
            ratio /= ld(b) + m
        t.append(t[-1] * ld(r) * ld(r) * abs(ratio))
    t = np.array(t, dtype=ld)
    amp = np.sqrt(t / np.sum(t))
    coef = np.array([np.sqrt(ld(n) * ld(_f2_exact(params, n))) for n in range(1, N + 1)], dtype=ld)
    diff = np.append(coef * amp[1:], ld(0)) - ld(r) * amp
    return float(np.sqrt(np.sum(diff * diff)))


def _f2_exact(params: ModelParams, n: int):
    ld = np.longdouble
    num = ld(1)
    for b in params.beta:
        num *= ld(b) + (n - 1)
    den = ld(1)
    for a in params.alpha:
        den *= ld(a) + (n - 1)
    return abs(num / den)


def eigen_residual(label: CoherentLabel, k_power: int = 1) -> tuple[float, float]:
    """||a_f|z> - z|z>|| for a truncated state, and the bound on its square.

    The residual is evaluated in the magnitude gauge (phase rule dropped),
    where a_f and the amplitudes share real factors; the norm is gauge
    invariant.  The vector difference is formed in extended precision:
    its exact value can sit near 1e-16, where double-precision round-off
    in the cancelling components would swamp it.  Returns ``(residual, bound)`` with
    ``bound = |z|^(2(N+1)) / (N!)^(q-p+1)`` for ``residual**2``.
    """
    if k_power != 1:
        raise InvalidParameters("only the first power of a_f has a residual bound")
    params = label.params
    if not params.truncated:
        raise InvalidParameters("eigen_residual applies to truncated families")
    gap = params.q - params.p + 1
    if gap < 0 or (gap == 0 and label.r >= 1.0):
        raise DomainError("bound needs q > p - 1, or q = p - 1 with |z| < 1")
    residual = _residual_extended(params, label.r)
    N = params.trunc_N
    bound = label.x ** (N + 1) / math.factorial(N) ** gap
    return residual, bound


def eigen_residual_closed_form(label: CoherentLabel) -> float:
    """Squared residual |z|^(2(N+1)) / (N_f N! f(N)!^2)."""
    params = label.params
    N = params.trunc_N
    return label.x ** (N + 1) / (hf.normalization(params, label.x) * hf.rho(params, N))


def superpose(coeffs: Iterable[complex], states: Iterable[FockVector]) -> FockVector:
    """sum_i c_i |psi_i>, padded to the largest dimension."""
    states = list(states)
    coeffs = list(coeffs)
    dim = max(s.dim for s in states)
    acc = np.zeros(dim, dtype=complex)
    for c, s in zip(coeffs, states):
        acc += c * s.padded(dim)
    return FockVector(acc)
