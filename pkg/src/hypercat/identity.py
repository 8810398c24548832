"""Resolution-of-identity checks through the radial moment problem.

A family resolves the identity with weight w(x) on [0, R) when
int_0^R w(x) x^n dx = rho(n) for every n.  Only families whose weight is
known in closed form are registered; the rest are reported as such.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import hyperfunc as hf
from .errors import DomainError, InvalidParameters
from .hyperfunc import ModelParams
from .states import fmt_float, preset

DEFAULT_NODES = 200
DEFAULT_MAX_N = 20
PASS_TOL = 1e-8
NEGATIVE_CONTROL_TOL = 1e-2


@dataclass(frozen=True)
class WeightSpec:
    family: str
    params: ModelParams
    support_R: float
    density: Callable[[np.ndarray], np.ndarray]
    note: str = ""
    expect_valid: bool = True
    # (a, b) when density = smooth * (1 - x)^a * x^b on [0, 1]; selects Gauss-Jacobi
    jacobi: tuple[float, float] | None = None


def _canonical(x):
    return np.exp(-x)


def _perelomov(s: float):
    def w(x):
        return (2 * s - 1) * (1 - x) ** (2 * s - 2)
    return w


def _barut_girardello(s: float):
    nu = 2 * s - 1

    def w(x):
        return 2.0 / math.gamma(2 * s) * x ** (s - 0.5) * special.kv(nu, 2 * np.sqrt(x))
    return w


def _dual_sg(x):
    return 2.0 * special.k0(2 * np.sqrt(x))


def _flat(x):
    return np.ones_like(x)


def weight_for(name: str, s: float | None = None) -> WeightSpec:
    """Registered closed-form weights; raises KeyError when none is known."""
    key = name.lower().replace("-", "_")
    if key == "canonical":
        return WeightSpec("canonical", preset("canonical").params, math.inf, _canonical,
                          "exp(-x), Gamma integral")
    if key in ("gp_su11", "perelomov_su11"):
        if s is None or s <= 0.5:
            raise InvalidParameters("Perelomov SU(1,1) weight needs s > 1/2")
        return WeightSpec(f"gp_su11(s={s:g})", preset("gp_su11", s=s).params, 1.0, _perelomov(s),
                          "(2s-1)(1-x)^(2s-2), Beta integral", jacobi=(2 * s - 2, 0.0))
    if key == "bg_su11":
        if s is None or s <= 0:
            raise InvalidParameters("Barut-Girardello SU(1,1) weight needs s > 0")
        return WeightSpec(f"bg_su11(s={s:g})", preset("bg_su11", s=s).params, math.inf,
                          _barut_girardello(s), "(2/Gamma(2s)) x^(s-1/2) K_(2s-1)(2 sqrt x)")
    if key == "dual_sg":
        return WeightSpec("dual_sg", preset("dual_sg").params, math.inf, _dual_sg,
                          "2 K_0(2 sqrt x)")
    raise KeyError(f"no weight registered for {name!r}")


def negative_control() -> WeightSpec:
    """Flat density on [0, 1] posing as the Susskind-Glogower weight; must fail."""
    return WeightSpec("sg_flat_control", preset("sg").params, 1.0, _flat,
                      "deliberately wrong: moments 1/(n+1) instead of 1", expect_valid=False)


def registered_weights() -> list[WeightSpec]:
    out = [weight_for("canonical")]
    out += [weight_for("gp_su11", s=s) for s in (1.0, 1.5, 2.0, 3.0)]
    out += [weight_for("bg_su11", s=s) for s in (0.75, 1.0, 2.0)]
    out.append(weight_for("dual_sg"))
    return out


UNREGISTERED = ("sg", "dual_inverse_bosonic", "hydrogen")


def quadrature(w: WeightSpec, n: int, nodes: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights (density folded in) for int_0^R . dx.

    [0, 1]: Gauss-Jacobi when the weight declares its endpoint powers
    (non-integer powers would cap Gauss-Legendre at algebraic accuracy),
    Gauss-Legendre otherwise.  [0, inf): x = L (u / (1 - u))^3 with
    L = max(1, n), then Gauss-Legendre in u; the cubic map clusters nodes
    near x = 0 where the Bessel-type densities are log-singular.
    """
    if w.jacobi is not None:
        a, b = w.jacobi
        t, g = special.roots_jacobi(nodes, a, b)
        x = 0.5 * (t + 1)
        smooth = w.density(x) / ((1 - x) ** a * x**b)
        return x, g * 2.0 ** (-a - b - 1) * smooth
    t, g = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (t + 1)
    gw = 0.5 * g
    if w.support_R == 1.0:
        return u, gw * w.density(u)
    L = max(1.0, float(n))
    v = u / (1 - u)
    x = L * v**3
    jac = 3 * L * v**2 / (1 - u) ** 2
    dens = w.density(x)
    return x, gw * jac * np.where(np.isfinite(dens), dens, 0.0)


def moment(w: WeightSpec, n: int, nodes: int = DEFAULT_NODES) -> float:
    x, q = quadrature(w, n, nodes)
    terms = q * x**n
    val = math.fsum(terms[q > 0])
    if not math.isfinite(val):
        raise DomainError(f"moment integral diverges for n={n}")
    return val


def moment_residual(w: WeightSpec, n: int, nodes: int = DEFAULT_NODES,
                    max_n: int = DEFAULT_MAX_N) -> float:
    """|int w x^n - rho(n)| / rho(n)."""
    if int(n) != n or not 0 <= n <= max_n:
        raise InvalidParameters(f"n must lie in 0..{max_n}")
    r = hf.rho(w.params, n)
    return abs(moment(w, n, nodes) - r) / r


def kitten_weight(w: WeightSpec, params: ModelParams, k: int, j: int, x: float) -> float:
    """Sector weight w(x) F^j(x) in the kitten resolution of identity."""
    return float(w.density(np.asarray(x, dtype=float))) * hf.kitten_norm(params, k, j, x)


def closure_diagonal(w: WeightSpec, k: int, m: int, nodes: int = DEFAULT_NODES) -> float:
    """<m| sum_j int w_kj(x) |z;k,j><z;k,j| |m> via the radial integral.

    Only the sector j = m mod k contributes; the integrand is
    w(x) F^j(x) * x^m / (rho(m) F^j(x)).  Nodes where w underflows are
    dropped (their contribution is zero).  Disk families need the series
    at nodes within ~1e-5 of the boundary, which exceeds the default term
    cap, so they are refused.
    """
    if math.isfinite(hf.convergence_domain(w.params).radius):
        raise DomainError("closure_diagonal supports whole-plane families only")
    j = m % k
    x, q = quadrature(w, m, nodes)
    dens = w.density(x)
    total = []
    log_r = hf.log_rho(w.params, m)
    for xi, qi, di in zip(x, q, dens):
        if di < 1e-300 or qi == 0:
            continue
        Fj = hf.kitten_norm(w.params, k, j, float(xi))
        pdf = math.exp(m * math.log(xi) - log_r) / Fj if xi > 0 else float(m == 0)
        total.append(qi / di * kitten_weight(w, w.params, k, j, float(xi)) * pdf)
    return math.fsum(total)


def status_for(w: WeightSpec, residual: float) -> str:
    if w.expect_valid:
        return "pass" if residual < PASS_TOL else "fail"
    return "expected-fail" if residual > NEGATIVE_CONTROL_TOL else "agrees"


def control_fails(rows) -> bool:
    """The harness self-test: the control must miss some moment by more than 1e-2."""
    control = negative_control().family
    return any(f == control and s == "expected-fail" for f, _, _, s in rows)


def identity_report(max_n: int = DEFAULT_MAX_N, nodes: int = DEFAULT_NODES) -> list[tuple]:
    """Rows (family, n, residual, status) for every registered weight and the control."""
    rows = []
    for w in registered_weights() + [negative_control()]:
        for n in range(max_n + 1):
            res = moment_residual(w, n, nodes, max_n)
            rows.append((w.family, n, res, status_for(w, res)))
    for name in UNREGISTERED:
        rows.append((name, None, None, "no weight registered"))
    return rows


def report_csv(rows, target=None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["family", "n", "residual", "status"])
    for fam, n, res, status in rows:
        wr.writerow([fam, "" if n is None else n, "" if res is None else fmt_float(res), status])
    text = buf.getvalue()
    if target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text
