import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hs

from hypercat import hyperfunc as hf
from hypercat import states as st
from hypercat.errors import DomainError
from hypercat.hyperfunc import ModelParams
from hypercat.states import CoherentLabel, FockVector

CAN = ModelParams()
SG = st.preset("sg").params

UNTRUNCATED = [
    ModelParams(),
    st.preset("gp_su11", s=1.5).params,
    st.preset("bg_su11", s=1).params,
    SG,
    st.preset("dual_sg").params,
    st.preset("hydrogen").params,
    ModelParams((1.0,), (3.0,)),
    ModelParams((3.0,), (1.0,)),
]


def _radius(params):
    return 0.9 if math.isfinite(hf.convergence_domain(params).radius) else 2.5


def test_vacuum_at_origin():
    v = st.hcs(CoherentLabel(0, CAN))
    assert v.amp[0] == 1
    assert np.all(v.amp[1:] == 0)


def test_perelomov_half_is_sg():
    z = 0.6
    v = st.hcs(CoherentLabel(z, st.preset("gp_su11", s=0.5).params))
    n = np.arange(v.dim)
    np.testing.assert_allclose(v.amp.real, math.sqrt(1 - z**2) * z**n, atol=1e-15)


def test_gp_su2_amplitudes():
    s, z = 1, 0.5
    v = st.hcs(CoherentLabel(z, st.preset("gp_su2", s=s).params))
    assert v.dim == 3
    want = np.array([math.sqrt(math.comb(2, n)) * (1j * z) ** n for n in range(3)]) / (1 + z * z) ** s
    np.testing.assert_allclose(v.amp, want, atol=1e-15)


def test_poisson_amplitudes():
    z = 2.0
    v = st.hcs(CoherentLabel(z, CAN))
    n = np.arange(v.dim)
    want = np.exp(-z * z / 2) * z**n / np.sqrt([float(math.factorial(int(k))) for k in n])
    np.testing.assert_allclose(v.amp.real, want, atol=1e-15)


def test_overlap_examples():
    a = CoherentLabel(1.0, CAN)
    assert st.overlap(a, a) == pytest.approx(1)
    assert abs(st.overlap(a, CoherentLabel(1j, CAN))) == pytest.approx(math.exp(-1), rel=1e-14)
    want = math.sqrt(0.75) * math.sqrt(0.9375) / (1 - 0.125)
    assert st.overlap(CoherentLabel(0.5, SG), CoherentLabel(0.25, SG)) == pytest.approx(want, rel=1e-14)


def test_dual_examples():
    assert st.dual(CAN) == CAN
    assert st.dual(SG) == st.preset("dual_sg").params


def test_ladder_examples():
    b1 = FockVector.basis(1, 4)
    assert st.annihilate_f(CAN, b1).distance(FockVector.basis(0, 4)) < 1e-15
    assert st.create_f(CAN, FockVector.basis(0, 4)).distance(b1) < 1e-15
    for n in range(1, 6):
        assert st.annihilate_f(SG, FockVector.basis(n, 8)).distance(FockVector.basis(n - 1, 8)) < 1e-15
        assert st.create_f(SG, FockVector.basis(n, 8)).distance(FockVector.basis(n + 1, 8)) < 1e-15


def test_sg_partial_isometry():
    dim = 10
    for n in range(dim - 1):
        e = FockVector.basis(n, dim)
        assert st.annihilate_f(SG, st.create_f(SG, e)).distance(e) < 1e-15
    assert st.create_f(SG, st.annihilate_f(SG, FockVector.basis(0, dim))).norm() == 0
    for n in range(1, dim):
        e = FockVector.basis(n, dim)
        assert st.create_f(SG, st.annihilate_f(SG, e)).distance(e) < 1e-15


def test_csv_round_trip(tmp_path):
    v = st.hcs(CoherentLabel(0.3 + 0.4j, st.preset("gp_su11", s=2).params))
    path = tmp_path / "s.csv"
    text = v.to_csv(path, header={"z": "0.3+0.4j"})
    w, head = FockVector.from_csv(path)
    assert head["z"] == "0.3+0.4j"
    assert np.array_equal(v.amp, w.amp)
    assert np.array_equal(FockVector.from_csv(text)[0].amp, w.amp)


def test_auto_dim_tail():
    params = CAN
    lab = CoherentLabel(3.0, params)
    d = st.auto_dim(params, lab.x)
    tail = math.fsum(math.exp(n * math.log(lab.x) - math.lgamma(n + 1)) for n in range(d, d + 200))
    assert tail < 1e-24 * math.exp(lab.x)


# --- truncated residual --------------------------------------------------------

def test_residual_bound_example():
    lab = CoherentLabel(0.5, st.preset("bg_su2", s=2).params)
    res, bound = st.eigen_residual(lab)
    assert bound == pytest.approx(0.5**10 / 24**2)
    assert res**2 < bound


def test_residual_zero_at_origin():
    res, _ = st.eigen_residual(CoherentLabel(0.0, st.preset("bg_su2", s=2).params))
    assert res == 0


def test_residual_closed_form_gp():
    lab = CoherentLabel(0.3, st.preset("gp_su2", s=3).params)
    res, _ = st.eigen_residual(lab)
    assert res**2 == pytest.approx(st.eigen_residual_closed_form(lab), abs=1e-12)
    assert res**2 == pytest.approx(st.eigen_residual_closed_form(lab), rel=1e-10)


def test_residual_bound_needs_gap():
    with pytest.raises(DomainError):
        st.eigen_residual(CoherentLabel(1.5, st.preset("gp_su2", s=1).params))


@pytest.mark.parametrize("z", [0.3, 0.5, 0.9, 1.7])
def test_residual_decreases_along_spin_ladder(z):
    res = [st.eigen_residual(CoherentLabel(z, st.preset("bg_su2", s=s).params))[0] for s in range(1, 7)]
    assert all(b < a for a, b in zip(res, res[1:]))


# --- properties ------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(hs.sampled_from(UNTRUNCATED), hs.floats(0.0, 1.0), hs.floats(0, 2 * math.pi))
def test_eigenstate_property(params, u, th):
    z = u * _radius(params) * complex(math.cos(th), math.sin(th))
    lab = CoherentLabel(z, params)
    v = st.hcs(lab)
    big = st.hcs(lab, v.dim + 40)
    a = st.annihilate_f(params, big)
    assert np.max(np.abs(a.amp[: v.dim] - z * big.amp[: v.dim])) < 1e-9
    assert abs(v.norm() - 1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(hs.sampled_from(UNTRUNCATED), hs.floats(0.0, 1.0), hs.floats(0.0, 1.0), hs.floats(0, 2 * math.pi))
def test_overlap_consistency(params, u, v, th):
    r = _radius(params)
    za, zb = u * r, v * r * complex(math.cos(th), math.sin(th))
    la, lb = CoherentLabel(za, params), CoherentLabel(zb, params)
    dim = max(st.hcs(la).dim, st.hcs(lb).dim)
    fock = st.hcs(la, dim).inner(st.hcs(lb, dim))
    assert abs(st.overlap(la, lb) - fock) < 1e-10


@settings(max_examples=30, deadline=None)
@given(hs.sampled_from(UNTRUNCATED[:3] + UNTRUNCATED[6:]), hs.floats(0.05, 1.0))
def test_duality_round_trip(params, u):
    d = st.dual(params)
    z = u * min(_radius(params), _radius(d))
    v = st.hcs(CoherentLabel(z, d))
    n = np.arange(v.dim)
    # f -> 1/f: amplitudes z^n sqrt(f(n)!^2 / n!) / sqrt(N)
    log_t = np.array([k * math.log(z) + 0.5 * (hf.log_rho(params, k) - 2 * math.lgamma(k + 1))
                      for k in n])
    t = np.exp(log_t)
    np.testing.assert_allclose(v.amp.real, t / math.sqrt(np.sum(t**2)), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(hs.integers(1, 6), hs.sampled_from(["bg_su2", "gp_su2"]), hs.floats(0.0, 1.0))
def test_truncated_support(s, name, u):
    params = st.preset(name, s=s).params
    v = st.hcs(CoherentLabel(0.95 * u, params))
    assert v.dim == params.trunc_N + 1
    assert abs(v.norm() - 1) < 1e-12
