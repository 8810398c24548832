"""Self-verification suites run by ``hypercat verify``.

Each check reports a measured value against a tolerance.  Random draws use
a fixed seed so reports are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import hyperfunc as hf
from . import identity as idn
from . import kerr as kr
from . import kittens as kt
from . import states as st
from . import stats as ss
from .errors import DegenerateSectorError
from .hyperfunc import ModelParams

SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tol: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<48s} measured={self.measured:.3e}  tol={self.tol:.1e}  {self.note}".rstrip()


def _below(name, value, tol, note=""):
    return Check(name, float(value), tol, bool(value < tol), note)


def sample_presets() -> list[ModelParams]:
    """Untruncated families used in sweeps."""
    return [
        st.preset("canonical").params,
        st.preset("gp_su11", s=1.5).params,
        st.preset("bg_su11", s=1).params,
        st.preset("sg").params,
        st.preset("dual_sg").params,
        st.preset("hydrogen").params,
        st.preset("confluent", alpha=1.0, beta=3.0).params,
        st.preset("confluent", alpha=3.0, beta=1.0).params,
    ]


def random_z(rng, params: ModelParams, count: int) -> list[complex]:
    rmax = 0.9 if math.isfinite(hf.convergence_domain(params).radius) else 2.5
    r = rng.uniform(0.5, rmax, count)
    th = rng.uniform(0, 2 * math.pi, count)
    return list(r * np.exp(1j * th))


# ---------------------------------------------------------------------------


def suite_series() -> list[Check]:
    out = []
    can, sg = ModelParams(), st.preset("sg").params
    xs = np.linspace(0.01, 5.0, 60)
    err = max(max(abs(hf.kitten_norm(can, 2, 0, x) / math.cosh(x) - 1),
                  abs(hf.kitten_norm(can, 2, 1, x) / math.sinh(x) - 1)) for x in xs)
    out.append(_below("closed form cosh/sinh sector norms", err, 1e-12))
    err = 0.0
    for k in (1, 2, 3, 5):
        for j in range(k):
            for x in np.linspace(0.01, 0.95, 30):
                err = max(err, abs(hf.kitten_norm(sg, k, j, x) / (x**j / (1 - x**k)) - 1))
    out.append(_below("closed form SG sector norms x^j/(1-x^k)", err, 1e-12))

    rng = np.random.default_rng(SEED)
    err = 0.0
    for _ in range(60):
        p, q = rng.integers(0, 3, 2)
        params = ModelParams(tuple(rng.uniform(0.5, 3, p)), tuple(rng.uniform(0.5, 3, q)))
        k = int(rng.integers(1, 6))
        j = int(rng.integers(0, k))
        x = rng.uniform(0.05, 0.9 if p == q + 1 else 3.0)
        if p > q + 1:
            continue
        a, b = hf.kitten_norm(params, k, j, x), hf.kitten_norm_appendix(params, k, j, x)
        err = max(err, abs(a - b) / abs(a))
    out.append(_below("appendix composed series = sector sum", err, 1e-10))

    err = 0.0
    for m in range(1, 12):
        for n in range(0, m + 1):
            exact = (-1) ** n * math.factorial(m) / math.factorial(m - n)
            err = max(err, abs(hf.pochhammer(-m, n) - exact) / abs(exact))
    out.append(_below("(-m)_n = (-1)^n m!/(m-n)!", err, 1e-14))

    err = 0.0
    for params in sample_presets():
        for n in range(1, 40):
            lhs = hf.rho(params, n)
            rhs = hf.rho(params, n - 1) * n * hf.f_factor(params, n) ** 2
            err = max(err, abs(lhs / rhs - 1))
    out.append(_below("rho(n) = rho(n-1) n f(n)^2", err, 1e-12))
    return out


def suite_states() -> list[Check]:
    out = []
    rng = np.random.default_rng(SEED + 1)
    norm_err = ov_err = 0.0
    for params in sample_presets():
        zs = random_z(rng, params, 3)
        vecs = [st.hcs(st.CoherentLabel(z, params)) for z in zs]
        dim = max(v.dim for v in vecs)
        vecs = [st.hcs(st.CoherentLabel(z, params), dim) for z in zs]
        for v in vecs:
            norm_err = max(norm_err, abs(v.norm() - 1))
        for a in range(3):
            for b in range(3):
                closed = st.overlap(st.CoherentLabel(zs[a], params), st.CoherentLabel(zs[b], params))
                ov_err = max(ov_err, abs(closed - vecs[a].inner(vecs[b])))
    out.append(_below("HCS unit norm", norm_err, 1e-12))
    out.append(_below("closed-form overlap = Fock inner product", ov_err, 1e-12))

    worst_ratio = 0.0
    closed_err = 0.0
    for s in range(1, 7):
        for name in ("bg_su2", "gp_su2"):
            params = st.preset(name, s=s).params
            for z in (0.3, 0.5, 0.9):
                lab = st.CoherentLabel(z, params)
                res, bound = st.eigen_residual(lab)
                if res > 0:
                    worst_ratio = max(worst_ratio, res**2 / bound)
                closed_err = max(closed_err, abs(res**2 - st.eigen_residual_closed_form(lab)))
    out.append(_below("truncated eigen residual^2 / bound", worst_ratio, 1.0))
    out.append(_below("truncated eigen residual^2 vs closed form", closed_err, 1e-12))

    err = 0.0
    for params in sample_presets():
        for z in random_z(rng, params, 2):
            lab = st.CoherentLabel(z, params)
            v = st.hcs(lab)
            big = st.hcs(lab, v.dim + 40)
            a = st.annihilate_f(params, big)
            err = max(err, np.max(np.abs(a.amp[: v.dim] - z * big.amp[: v.dim])))
    out.append(_below("a_f |z> = z |z> (untruncated)", err, 1e-10))
    return out


def suite_kittens() -> list[Check]:
    out = []
    rng = np.random.default_rng(SEED + 2)
    err = 0.0
    for params in sample_presets():
        for k in (2, 3, 5, 8):
            for z in random_z(rng, params, 5):
                for j in range(k):
                    spec = kt.KittenSpec(k, j, z, params)
                    f = kt.kitten_fock(spec)
                    try:
                        d = kt.kitten_dft(spec, f.dim)
                    except DegenerateSectorError:
                        continue
                    err = max(err, kt.fix_gauge(f).distance(kt.fix_gauge(d)))
    out.append(_below("kitten DFT = Fock construction", err, 1e-10))

    tr_err = 0.0
    min_lam = math.inf
    for params in sample_presets():
        for k in (2, 3, 5, 8):
            for z in random_z(rng, params, 2):
                g = kt.gram(params, k, z)
                tr_err = max(tr_err, abs(g.eigenvalues.sum() - k))
                min_lam = min(min_lam, g.eigenvalues.min())
    out.append(_below("Gram trace sum lambda_j = k", tr_err, 1e-12))
    out.append(Check("Gram eigenvalues positive", min_lam, 0.0, bool(min_lam > 0)))

    worst = 0.0
    for s in range(1, 7):
        for name in ("bg_su2", "gp_su2"):
            params = st.preset(name, s=s).params
            for r in (0.2, 1.0, 5.0):
                for n in range(params.trunc_N + 1):
                    v = kt.circle_number_state_discrete(params, n, r)
                    worst = max(worst, abs(1 - abs(v.amp[n])))
    out.append(_below("discrete circle rep fidelity 1-|<n|out>|", worst, 1e-10))

    err = 0.0
    for k in range(1, 65):
        for d in range(-k, 2 * k):
            expect = k if d % k == 0 else 0
            err = max(err, abs(kt.orthogonality_sum(d, 0, k) - expect))
    out.append(_below("DFT orthogonality kernel", err, 1e-12))

    err = 0.0
    for params in sample_presets():
        for k in (2, 3):
            for z in random_z(rng, params, 1):
                for j in range(k):
                    spec = kt.KittenSpec(k, j, z, params)
                    v = kt.kitten_fock(spec)
                    big = kt.kitten_fock(spec, v.dim + 20 * k)
                    w = big
                    for _ in range(k):
                        w = st.annihilate_f(params, w)
                    err = max(err, np.max(np.abs(w.amp[: v.dim] - z**k * big.amp[: v.dim])))
    out.append(_below("a_f^k kitten = z^k kitten", err, 1e-9))
    return out


def suite_stats() -> list[Check]:
    out = []
    rng = np.random.default_rng(SEED + 3)
    err = 0.0
    for _ in range(60):
        params = sample_presets()[int(rng.integers(0, 8))]
        k = int(rng.integers(1, 7))
        j = int(rng.integers(0, k))
        z = random_z(rng, params, 1)[0]
        spec = kt.KittenSpec(k, j, z, params)
        bf = ss.brute_force_report(spec)
        rep = ss.mandel(params, k, j, spec.x)
        err = max(err, abs(rep.mean_n - bf.mean_n), abs(rep.std_n - bf.std_n),
                  abs(rep.mandel_q - bf.mandel_q))
        if k >= 3:
            bf = ss.brute_force_report(spec, "nf")
            rep = ss.mandel_nf(params, k, j, spec.x)
            err = max(err, abs(rep.mean_n - bf.mean_n), abs(rep.std_n - bf.std_n),
                      abs(rep.mandel_q - bf.mandel_q))
    out.append(_below("ratio formulas = brute-force moment sums", err, 1e-9))

    err = 0.0
    for params in sample_presets():
        for k in range(2, 9):
            for j in range(k):
                q = ss.mandel(params, k, j, 0.0).mandel_q
                err = max(err, abs(q - ((k - 1) if j == 0 else -1)))
    out.append(_below("Mandel x->0 limits k-1 / -1", err, 1e-10))

    bad = 0
    for a, b in ((1, 2), (1, 4), (2, 1), (4, 1), (1, 1)):
        params = ModelParams((float(a),), (float(b),))
        for x in np.linspace(0.05, 5, 40):
            c = ss.mandel(params, 1, 0, x).classification
            want = "super" if a < b else "sub" if a > b else "poisson"
            bad += c != want
    out.append(Check("confluent sign pattern (alpha<beta super)", bad, 0.5, bad == 0))

    viol = 0
    for params, xmax in ((ModelParams(), 12.0), (st.preset("gp_su11", s=3).params, 0.98)):
        for j in range(5):
            vals = [ss.photon_pdf(kt.KittenSpec(5, j, math.sqrt(x), params), j)
                    for x in np.linspace(0, xmax, 80)]
            viol += int(np.any(np.diff(vals) > 1e-15))
    out.append(Check("photon_pdf(m=j) decreasing in x", viol, 0.5, viol == 0))

    worst = 0.0
    for nu in (3, 4, 5):
        xs = np.linspace(0.5 * nu * 5, 1.5 * nu * 5, 2001)
        p = [ss.photon_pdf(kt.KittenSpec(5, 0, math.sqrt(x), ModelParams()), nu * 5) for x in xs]
        worst = max(worst, abs(xs[int(np.argmax(p))] / (nu * 5) - 1))
    s = 3.0
    params = st.preset("gp_su11", s=s).params
    xs = np.linspace(0.01, 0.99, 4001)
    p = [ss.photon_pdf(kt.KittenSpec(5, 0, math.sqrt(x), params), 5) for x in xs]
    worst = max(worst, abs(xs[int(np.argmax(p))] / ((5 - 1) / (5 + 2 * s - 2)) - 1))
    out.append(_below("pdf maxima near nu k / (nu k-1)/(nu k+2s-2)", worst, 0.05))

    d_can = abs(ss.mean_n(ModelParams(), 5, 2, 20.0) - ss.mean_n(ModelParams(), 1, 0, 20.0))
    pe = st.preset("gp_su11", s=1).params
    d_pe = abs(ss.mean_n(pe, 5, 2, 0.99) / ss.mean_n(pe, 1, 0, 0.99) - 1)
    out.append(_below("kitten mean -> HCS mean in coherent region", max(d_can, d_pe), 1e-2))
    return out


def suite_kerr(husimi_grid: kr.GridSpec | None = None) -> list[Check]:
    out = []
    rng = np.random.default_rng(SEED + 4)
    err = dbl = 0.0
    for params in sample_presets():
        for z in random_z(rng, params, 2):
            lab = st.CoherentLabel(z, params)
            v = st.hcs(lab)
            for kappa in (1, 2, 3):
                kp = kr.KerrParams(rng.uniform(0, 50), kappa)
                err = max(err, abs(kr.kerr_evolve(lab, kp).norm() - v.norm()))
            half = kr.KerrParams.at_fraction(1, 2)
            twice = st.FockVector(kr.kerr_evolve(lab, half).amp * half.phases(np.arange(v.dim)))
            dbl = max(dbl, twice.distance(v))
    out.append(_below("Kerr evolution preserves the norm", err, 1e-13))
    out.append(_below("two half revivals return the state", dbl, 1e-12))

    three = 0.0
    for a, b in kr.FIG6_ROWS.values():
        lab = st.CoherentLabel(kr.FIG6_Z0, ModelParams((a,), (b,)))
        for k in (2, 3, 4, 5, 6, 8, 15):
            e = kr.kerr_evolve(lab, kr.KerrParams.revival_fraction(k))
            ks = kr.kitten_superposition(lab, k, e.dim)
            cs = kr.circle_superposition(lab, k, e.dim)
            three = max(three, e.distance(ks), e.distance(cs), ks.distance(cs))
    out.append(_below("Kerr state = kitten sum = circle sum", three, 1e-10))

    bad = 0
    for k in range(1, 33):
        nz = np.nonzero(np.abs(kr.circle_weights(k)) > kr.WEIGHT_ZERO)[0]
        lay = kr.component_layout(k)
        angles = np.sort(np.mod(2 * np.pi * nz / k, 2 * np.pi))
        want = np.sort(np.mod(lay.angles(), 2 * np.pi))
        bad += len(nz) != lay.m or not np.allclose(angles, want, atol=1e-12)
    out.append(Check("circle weight pattern = component layout", bad, 0.5, bad == 0))

    grid = husimi_grid or kr.GridSpec()
    top = 0.0
    worst_offset = 0.0
    for row, (a, b) in kr.FIG6_ROWS.items():
        lab = st.CoherentLabel(kr.FIG6_Z0, ModelParams((a,), (b,)))
        for k in kr.FIG6_K:
            g = kr.husimi_kerr(lab, k, grid)
            top = max(top, float(np.nanmax(g.values)))
            if (row, k) in kr.FIG6_DISTINGUISHABLE:
                off = kr.peak_offsets(g, kr.predicted_centers(kr.FIG6_Z0, k))
                worst_offset = max(worst_offset, math.inf if off is None else float(off.max()))
    out.append(_below("Husimi max <= 1", top - 1.0, 1e-12))
    out.append(Check("Husimi peaks within one cell of centres", worst_offset, 1.0,
                     worst_offset <= 1.0, "cells"))
    return out


def suite_identity() -> list[Check]:
    out = []
    rows = idn.identity_report()
    worst = max(r for f, n, r, s in rows if s in ("pass", "fail"))
    out.append(_below("registered weights moment residual (n<=20)", worst, idn.PASS_TOL))
    ctrl = max(r for f, n, r, s in rows if f == idn.negative_control().family)
    out.append(Check("negative control expected-fail", ctrl, idn.NEGATIVE_CONTROL_TOL,
                     idn.control_fails(rows), "expected-fail=pass" if idn.control_fails(rows) else ""))
    w = idn.weight_for("canonical")
    err = max(abs(idn.closure_diagonal(w, 2, m) - 1) for m in range(7))
    out.append(_below("kitten closure <m|1|m> canonical k=2", err, 1e-10))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "series": suite_series,
    "states": suite_states,
    "kittens": suite_kittens,
    "stats": suite_stats,
    "kerr": suite_kerr,
    "identity": suite_identity,
}


def run(suite: str) -> list[Check]:
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for name in names:
        out.extend(SUITES[name]())
    return out
