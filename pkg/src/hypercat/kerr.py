"""Kerr-medium evolution, fractional revivals and generalized Husimi functions."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from . import hyperfunc as hf
from .errors import DomainError, InvalidParameters
from .hyperfunc import ModelParams
from .kittens import KittenSpec, kitten_fock
from .states import CoherentLabel, FockVector, auto_dim, fmt_float, hcs, phase_factors

WEIGHT_ZERO = 1e-12
SPOT_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class KerrParams:
    """Accumulated phase rate Omega t and anharmonicity exponent kappa.

    ``fraction`` (t / tau, tau = 2 pi / Omega) switches the phases to exact
    modular arithmetic.
    """

    omega_t: float
    kappa: int = 2
    fraction: Fraction | None = None

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise InvalidParameters("kappa must be a positive integer")

    @classmethod
    def at_fraction(cls, num: int, den: int = 1, kappa: int = 2) -> "KerrParams":
        frac = Fraction(num, den)
        return cls(2 * math.pi * float(frac), kappa, frac)

    @classmethod
    def revival_fraction(cls, k: int, kappa: int = 2) -> "KerrParams":
        """t_k = tau / k."""
        return cls.at_fraction(1, k, kappa)

    def phases(self, n: np.ndarray) -> np.ndarray:
        """exp(-i phi_n) with phi_n = Omega t n^kappa."""
        n = np.asarray(n)
        if self.fraction is not None:
            a, b = self.fraction.numerator, self.fraction.denominator
            res = np.array([(a * pow(int(m), self.kappa, b)) % b for m in n.ravel()], dtype=float)
            return np.exp(-2j * np.pi * res / b).reshape(n.shape)
        phi = np.array([math.fmod(self.omega_t * float(int(m) ** self.kappa), 2 * math.pi)
                        for m in n.ravel()])
        return np.exp(-1j * phi).reshape(n.shape)


def kerr_evolve(label: CoherentLabel, kp: KerrParams, dim: int | None = None) -> FockVector:
    """|z, t> = sum_n e^(-i phi_n(t)) c_n |n> with c_n the HCS amplitudes."""
    psi = hcs(label, dim)
    return FockVector(psi.amp * kp.phases(np.arange(psi.dim)))


def _gauss_phase(num: int, k: int) -> complex:
    return complex(np.exp(-2j * np.pi * (num % k) / k))


def kitten_decomposition(label: CoherentLabel, k: int) -> list[complex]:
    """Coefficients c_j = sqrt(F^j/F) exp(-2 pi i j^2 / k) on the k-hypercats at t = tau/k."""
    params, x = label.params, label.x
    hf._check_sector(params, k, 0)
    F = hf.normalization(params, x)
    return [math.sqrt(hf.kitten_norm(params, k, j, x) / F) * _gauss_phase(j * j, k)
            for j in range(k)]


def kitten_superposition(label: CoherentLabel, k: int, dim: int | None = None) -> FockVector:
    """sum_j c_j |z; k, j>, the kitten form of the state at tau / k."""
    if dim is None:
        dim = auto_dim(label.params, label.x)
    out = np.zeros(dim, dtype=complex)
    for j, c in enumerate(kitten_decomposition(label, k)):
        if c == 0:
            continue
        out += c * kitten_fock(KittenSpec(k, j, label.z, label.params), dim).padded(dim)
    return FockVector(out)


@dataclass(frozen=True)
class ComponentLayout:
    m: int
    rotation_offset: float
    case_tag: str

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.m) / self.m + self.rotation_offset


def component_layout(k: int) -> ComponentLayout:
    """Number and placement of the circle components at tau / k (kappa = 2)."""
    if int(k) != k or k < 1:
        raise InvalidParameters("k must be a positive integer")
    if k % 2:
        return ComponentLayout(k, 0.0, "odd")
    if k % 4 == 0:
        return ComponentLayout(k // 2, 0.0, "mult4")
    return ComponentLayout(k // 2, 2 * math.pi / k, "even_not4")


def circle_weights(k: int) -> np.ndarray:
    """w_l = (1/k) sum_j exp(-2 pi i j (j + l) / k), exact residues."""
    w = np.zeros(k, dtype=complex)
    for l in range(k):
        w[l] = sum(_gauss_phase(j * (j + l), k) for j in range(k)) / k
    return w


def circle_superposition_form(label: CoherentLabel, k: int) -> list[complex]:
    """Weights of |z0 e^(2 pi i l / k)> in the state at tau / k."""
    hf.check_domain(label.params, label.x)
    return list(circle_weights(k))


def circle_superposition(label: CoherentLabel, k: int, dim: int | None = None) -> FockVector:
    if dim is None:
        dim = auto_dim(label.params, label.x)
    out = np.zeros(dim, dtype=complex)
    for l, w in enumerate(circle_weights(k)):
        if abs(w) <= WEIGHT_ZERO:
            continue
        zl = label.z * np.exp(2j * np.pi * l / k)
        out += w * hcs(CoherentLabel(zl, label.params), dim).amp
    return FockVector(out)


def predicted_centers(z0: complex, k: int) -> np.ndarray:
    """Component centers z0 e^(2 pi i l / k) for the l with nonzero weight."""
    w = circle_weights(k)
    ls = np.nonzero(np.abs(w) > WEIGHT_ZERO)[0]
    return complex(z0) * np.exp(2j * np.pi * ls / k)


# ---------------------------------------------------------------------------
# Husimi function


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -3.5
    x_max: float = 3.5
    y_min: float = -3.5
    y_max: float = 3.5
    nx: int = 281
    ny: int = 281

    @property
    def window(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.x_min, self.x_max, self.nx), np.linspace(self.y_min, self.y_max, self.ny)

    def points(self) -> np.ndarray:
        """Complex cell centres, shape (nx, ny), indexed [ix, iy]."""
        xs, ys = self.axes()
        return xs[:, None] + 1j * ys[None, :]

    @property
    def step(self) -> float:
        return max((self.x_max - self.x_min) / max(self.nx - 1, 1),
                   (self.y_max - self.y_min) / max(self.ny - 1, 1))


@dataclass
class HusimiGrid:
    window: tuple[float, float, float, float]
    nx: int
    ny: int
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def spec(self) -> GridSpec:
        return GridSpec(*self.window, self.nx, self.ny)

    def to_csv(self, target=None) -> str:
        """Header line, then one row per x index; NaN cells are empty fields."""
        head = {"window": ":".join(fmt_float(v) for v in self.window), "nx": self.nx, "ny": self.ny}
        head.update(self.meta)
        buf = io.StringIO()
        buf.write("# " + "; ".join(f"{k}={v}" for k, v in head.items()) + "\n")
        for row in self.values:
            buf.write(",".join("" if np.isnan(v) else fmt_float(v) for v in row) + "\n")
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "HusimiGrid":
        text = source if "\n" in str(source) else open(source).read()
        lines = text.splitlines()
        head = dict(kv.split("=", 1) for kv in lines[0][2:].split("; "))
        window = tuple(float(v) for v in head.pop("window").split(":"))
        nx, ny = int(head.pop("nx")), int(head.pop("ny"))
        vals = np.array([[float(v) if v else np.nan for v in ln.split(",")] for ln in lines[1:]])
        return cls(window, nx, ny, vals.reshape(nx, ny), head)


def _domain_mask(params: ModelParams, pts: np.ndarray) -> np.ndarray:
    dom = hf.convergence_domain(params)
    if dom.kind == "empty":
        hf.check_domain(params, 0.0)
    x = np.abs(pts) ** 2
    if dom.kind == "whole-plane":
        return np.ones(pts.shape, dtype=bool)
    if dom.kind == "unit-disk-with-boundary":
        return x <= 1.0
    return x <= 1.0 - hf.BOUNDARY_GAP


def _norm_on(params: ModelParams, x: np.ndarray) -> np.ndarray:
    kw = dict(absolute=params.truncated, n_stop=params.trunc_N)
    return hf.sector_sum_array(params.alpha, params.beta, x, on_fail="nan", **kw)


def _fock_overlaps(state: FockVector, params: ModelParams, pts: np.ndarray) -> np.ndarray:
    """<z|psi> for an array of z, by a running recurrence over Fock levels."""
    dim = state.dim
    if params.truncated:
        dim = min(dim, params.trunc_N + 1)
    psi = state.amp[:dim] * np.conj(phase_factors(params, np.arange(dim)))
    zc = np.conj(pts)
    b = np.ones(pts.shape, dtype=complex)
    acc = b * psi[0]
    for n in range(dim - 1):
        b = b * zc * math.sqrt(abs(hf._step_ratio(params.alpha, params.beta, n, True)))
        acc = acc + b * psi[n + 1]
    return acc / np.sqrt(_norm_on(params, np.abs(pts) ** 2))


def husimi(state: FockVector, params: ModelParams, grid: GridSpec | None = None) -> HusimiGrid:
    """Q(z) = |<z|psi>|^2 on a grid; cells outside the domain are NaN."""
    grid = grid or GridSpec()
    pts = grid.points()
    inside = _domain_mask(params, pts)
    vals = np.full(pts.shape, np.nan)
    vals[inside] = np.abs(_fock_overlaps(state, params, pts[inside])) ** 2
    return HusimiGrid(grid.window, grid.nx, grid.ny, vals, {"params": params.describe()})


def husimi_kerr(label: CoherentLabel, k: int, grid: GridSpec | None = None,
                spot_fraction: float = 0.01) -> HusimiGrid:
    """Husimi function of the state at tau/k from the closed-form overlaps.

    Q(z) = |sum_l w_l F(conj(z) z0 w^l)|^2 / (F(|z|^2) F(|z0|^2)).  A
    deterministic subset (every 1/spot_fraction-th inside cell) is
    recomputed through the Fock route; the largest deviation is kept in
    ``meta["spot_check"]`` and a mismatch above 1e-9 raises.
    """
    grid = grid or GridSpec()
    params = label.params
    pts = grid.points()
    inside = _domain_mask(params, pts)
    z = pts[inside]
    F0 = hf.normalization(params, label.x)
    kw = dict(absolute=params.truncated, n_stop=params.trunc_N)
    acc = np.zeros(z.shape, dtype=complex)
    for l, w in enumerate(circle_weights(k)):
        if abs(w) <= WEIGHT_ZERO:
            continue
        zl = label.z * np.exp(2j * np.pi * l / k)
        acc += w * hf.sector_sum_array(params.alpha, params.beta, np.conj(z) * zl,
                                       on_fail="nan", **kw)
    q = np.abs(acc) ** 2 / (_norm_on(params, np.abs(z) ** 2) * F0)
    vals = np.full(pts.shape, np.nan)
    vals[inside] = q

    dev = 0.0
    if spot_fraction > 0 and z.size:
        stride = max(1, int(round(1 / spot_fraction)))
        idx = np.arange(0, z.size, stride)
        state = kerr_evolve(label, KerrParams.revival_fraction(k))
        fock = np.abs(_fock_overlaps(state, params, z[idx])) ** 2
        dev = float(np.nanmax(np.abs(fock - q[idx])))
        if dev > SPOT_CHECK_TOL:
            raise DomainError(f"closed-form Husimi disagrees with the Fock route by {dev!r}")
    meta = {"params": params.describe(), "z0": fmt_float(label.z.real) + "+" + fmt_float(label.z.imag) + "j",
            "t_k": f"1/{k}", "spot_check": fmt_float(dev)}
    return HusimiGrid(grid.window, grid.nx, grid.ny, vals, meta)


def local_maxima(grid: HusimiGrid, rel: float = 0.05) -> list[tuple[int, int, float]]:
    """Strict 8-neighbour maxima above rel * global max, largest first."""
    v = np.where(np.isnan(grid.values), -np.inf, grid.values)
    top = np.max(v)
    pad = np.pad(v, 1, constant_values=-np.inf)
    core = pad[1:-1, 1:-1]
    is_max = np.ones(v.shape, dtype=bool)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            is_max &= core > pad[1 + dx: 1 + dx + v.shape[0], 1 + dy: 1 + dy + v.shape[1]]
    is_max &= core > rel * top
    ix, iy = np.nonzero(is_max)
    found = sorted(zip(ix.tolist(), iy.tolist(), v[ix, iy].tolist()), key=lambda t: -t[2])
    return found


def peak_offsets(grid: HusimiGrid, centers: np.ndarray, rel: float = 0.05) -> np.ndarray | None:
    """Distance, in cell units, from each predicted centre to the nearest of the m largest maxima.

    Returns None when fewer than m maxima exist.
    """
    m = len(centers)
    peaks = local_maxima(grid, rel)[:m]
    if len(peaks) < m:
        return None
    pts = grid.spec.points()
    locs = np.array([pts[i, j] for i, j, _ in peaks])
    step = grid.spec.step
    return np.array([np.min(np.abs(locs - c)) / step for c in centers])


# ---------------------------------------------------------------------------
# Width and distinguishability


def width_sigma(alpha: float, beta: float, tail_tol: float = 1e-12) -> float:
    """sigma of f(x) ∝ 1F1(alpha, beta; x^2)^(-1/2) on the real line."""
    params = ModelParams((alpha,), (beta,))
    if params.truncated:
        raise InvalidParameters("width_sigma needs positive alpha, beta")

    def dens(x):
        return hf.pfq(params, x * x) ** -0.5

    norm = second = 0.0
    lo, hi = 0.0, 4.0
    while True:
        norm += quad(dens, lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        second += quad(lambda x: x * x * dens(x), lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        if dens(hi) * hi < tail_tol * norm and hi * hi * dens(hi) * hi < tail_tol * second:
            break
        lo, hi = hi, 2 * hi
        if hi > 1e4:
            raise DomainError("width normalization integral does not converge")
    return math.sqrt(second / norm)


def max_distinguishable(r: float, sigma: float) -> int:
    """floor(2 pi r / (3 sigma)), at least 1."""
    if r <= 0 or sigma <= 0:
        raise InvalidParameters("r and sigma must be positive")
    return max(1, math.floor(2 * math.pi * r / (3 * sigma)))


# fig6 panel set: rows (alpha, beta) and the revival fractions shown.
FIG6_ROWS = {"a": (1.0, 3.0), "b": (1.0, 1.0), "c": (3.0, 1.0)}
FIG6_K = (1, 15, 8, 6, 5, 4, 3, 2)
FIG6_Z0 = 2.0
# Cells whose components the figure discussion calls distinguishable.
FIG6_DISTINGUISHABLE = {
    ("a", 1), ("b", 1), ("c", 1),
    ("b", 8), ("c", 8),
    ("a", 6), ("b", 6), ("c", 6),
    ("c", 5),
    ("a", 4), ("b", 4), ("c", 4),
    ("a", 3), ("b", 3), ("c", 3),
    ("a", 2), ("b", 2), ("c", 2),
}
