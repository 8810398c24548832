import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hs

from hypercat import hyperfunc as hf
from hypercat import kerr as kr
from hypercat import states as st
from hypercat.errors import InvalidParameters
from hypercat.hyperfunc import ModelParams
from hypercat.states import CoherentLabel, FockVector

CAN = ModelParams()
ROWS = [ModelParams((a,), (b,)) for a, b in kr.FIG6_ROWS.values()]


def test_phases_exact_at_rational_times():
    kp = kr.KerrParams.at_fraction(1, 1)
    assert np.all(kp.phases(np.arange(2000)) == 1)
    kp = kr.KerrParams.revival_fraction(5)
    ph = kp.phases(np.arange(0, 1000))
    np.testing.assert_allclose(ph[:995], ph[5:], atol=0)
    np.testing.assert_allclose(ph[:5], np.exp(-2j * np.pi * np.arange(5) ** 2 / 5), atol=1e-15)
    assert kp.fraction == Fraction(1, 5)


def test_kappa_validation():
    with pytest.raises(InvalidParameters):
        kr.KerrParams(1.0, 0)


def test_full_revival_and_parity():
    lab = CoherentLabel(2.0, ROWS[0])
    v = st.hcs(lab)
    assert kr.kerr_evolve(lab, kr.KerrParams.at_fraction(1)).distance(v) < 1e-15
    flipped = st.hcs(CoherentLabel(-2.0, ROWS[0]), v.dim)
    assert kr.kerr_evolve(lab, kr.KerrParams.at_fraction(1, 2)).distance(flipped) < 1e-14


def test_kitten_decomposition_examples():
    lab = CoherentLabel(1.0, CAN)
    assert kr.kitten_decomposition(CoherentLabel(0.7, CAN), 1) == pytest.approx([1])
    c = kr.kitten_decomposition(lab, 2)
    assert abs(c[0]) ** 2 == pytest.approx(math.cosh(1) / math.e, rel=1e-14)
    assert abs(c[1]) ** 2 == pytest.approx(math.sinh(1) / math.e, rel=1e-14)


@pytest.mark.parametrize("k,m,offset", [(15, 15, 0), (8, 4, 0), (6, 3, 2 * math.pi / 6), (3, 3, 0), (2, 1, math.pi)])
def test_component_layout_cases(k, m, offset):
    lay = kr.component_layout(k)
    assert lay.m == m
    assert lay.rotation_offset == pytest.approx(offset)


def test_circle_weight_examples():
    w = kr.circle_weights(2)
    assert abs(w[0]) < 1e-15 and abs(w[1]) == pytest.approx(1)
    np.testing.assert_allclose(np.abs(kr.circle_weights(3)), 1 / math.sqrt(3), rtol=1e-14)
    w8 = np.abs(kr.circle_weights(8))
    assert np.array_equal(np.nonzero(w8 > kr.WEIGHT_ZERO)[0], [0, 2, 4, 6])


def test_k6_rotated_against_k3():
    a3 = np.sort(np.angle(kr.predicted_centers(2.0, 3)) % (2 * math.pi))
    a6 = np.sort(np.angle(kr.predicted_centers(2.0, 6)) % (2 * math.pi))
    d = (a6[:, None] - a3[None, :]) % (2 * math.pi)
    assert np.allclose(np.min(np.minimum(d, 2 * math.pi - d), axis=1), math.pi / 3)


@pytest.mark.parametrize("k", range(1, 33))
def test_weight_pattern_matches_layout(k):
    nz = np.nonzero(np.abs(kr.circle_weights(k)) > kr.WEIGHT_ZERO)[0]
    lay = kr.component_layout(k)
    assert len(nz) == lay.m
    got = np.sort(np.mod(2 * np.pi * nz / k, 2 * np.pi))
    want = np.sort(np.mod(lay.angles(), 2 * np.pi))
    np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("params", ROWS + [CAN, st.preset("gp_su11", s=1).params])
@pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 8, 15])
def test_three_way_identity(params, k):
    z0 = 0.8 if math.isfinite(hf.convergence_domain(params).radius) else 2.0
    lab = CoherentLabel(z0, params)
    e = kr.kerr_evolve(lab, kr.KerrParams.revival_fraction(k))
    ks = kr.kitten_superposition(lab, k, e.dim)
    cs = kr.circle_superposition(lab, k, e.dim)
    assert e.distance(ks) < 1e-10
    assert e.distance(cs) < 1e-10


@settings(max_examples=30, deadline=None)
@given(hs.sampled_from(ROWS), hs.floats(0, 2.5), hs.floats(0, 100), hs.integers(1, 4))
def test_unitarity(params, r, wt, kappa):
    lab = CoherentLabel(r * np.exp(0.3j), params)
    assert abs(kr.kerr_evolve(lab, kr.KerrParams(wt, kappa)).norm() - st.hcs(lab).norm()) < 1e-13


@settings(max_examples=20, deadline=None)
@given(hs.sampled_from(ROWS), hs.floats(0.1, 2.5), hs.floats(0, 6.3))
def test_double_half_revival(params, r, th):
    lab = CoherentLabel(r * complex(math.cos(th), math.sin(th)), params)
    half = kr.KerrParams.at_fraction(1, 2)
    v = kr.kerr_evolve(lab, half)
    twice = FockVector(v.amp * half.phases(np.arange(v.dim)))
    assert twice.distance(st.hcs(lab)) < 1e-12


# --- Husimi ---------------------------------------------------------------------------

def test_husimi_self_overlap_and_vacuum():
    z0 = 2.0
    grid = kr.GridSpec(-2.0, 2.0, -1.0, 1.0, 5, 3)  # cells at x = 2 and x = 0 on y = 0
    g = kr.husimi(st.hcs(CoherentLabel(z0, CAN)), CAN, grid)
    assert g.values[4, 1] == pytest.approx(1.0, abs=1e-14)
    assert g.values[2, 1] == pytest.approx(math.exp(-4), rel=1e-13)


def test_husimi_disk_family_masks_outside():
    params = st.preset("sg").params
    g = kr.husimi(st.hcs(CoherentLabel(0.5, params)), params, kr.GridSpec(-1.5, 1.5, -1.5, 1.5, 7, 7))
    assert np.isnan(g.values[0, 0])
    assert np.isfinite(g.values[3, 3])


def test_husimi_csv_round_trip(tmp_path):
    params = st.preset("sg").params
    g = kr.husimi(st.hcs(CoherentLabel(0.5, params)), params, kr.GridSpec(-1.5, 1.5, -1.5, 1.5, 7, 5))
    path = tmp_path / "h.csv"
    text = g.to_csv(path)
    assert text.splitlines()[0].startswith("# window=")
    back = kr.HusimiGrid.from_csv(path)
    assert back.nx == 7 and back.ny == 5
    np.testing.assert_array_equal(np.isnan(back.values), np.isnan(g.values))
    np.testing.assert_array_equal(back.values[~np.isnan(g.values)], g.values[~np.isnan(g.values)])


@pytest.mark.parametrize("params", ROWS)
@pytest.mark.parametrize("k", [2, 5, 8])
def test_husimi_closed_form_matches_fock(params, k):
    lab = CoherentLabel(2.0, params)
    grid = kr.GridSpec(nx=41, ny=41)
    closed = kr.husimi_kerr(lab, k, grid, spot_fraction=0)
    fock = kr.husimi(kr.kerr_evolve(lab, kr.KerrParams.revival_fraction(k)), params, grid)
    assert np.nanmax(np.abs(closed.values - fock.values)) < 1e-9
    assert np.nanmax(closed.values) <= 1 + 1e-12


def test_husimi_sub_poissonian_k8_peaks():
    lab = CoherentLabel(kr.FIG6_Z0, ModelParams((3.0,), (1.0,)))
    g = kr.husimi_kerr(lab, 8)
    centers = kr.predicted_centers(kr.FIG6_Z0, 8)
    peaks = kr.local_maxima(g)
    assert len(peaks) == 4
    # every predicted centre owns exactly one of the four maxima (nearest in angle)
    pts = g.spec.points()
    ang = np.array([np.angle(pts[i, j]) for i, j, _ in peaks])
    owner = [int(np.argmin(np.abs(np.angle(np.exp(1j * (a - np.angle(centers))))))) for a in ang]
    assert sorted(owner) == [0, 1, 2, 3]
    assert float(np.max(kr.peak_offsets(g, centers))) < 5


# --- widths ---------------------------------------------------------------------------

@pytest.mark.parametrize("a,b,sigma,m", [(1, 1, 1.00, 4), (1, 3, 1.32, 3), (3, 1, 0.75, 5)])
def test_widths(a, b, sigma, m):
    s = kr.width_sigma(a, b)
    assert s == pytest.approx(sigma, abs=0.01)
    assert kr.max_distinguishable(2, s) == m


def test_width_canonical_exact():
    assert kr.width_sigma(2.0, 2.0) == pytest.approx(1.0, abs=1e-10)
