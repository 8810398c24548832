import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hs

from hypercat import identity as idn
from hypercat import states as st
from hypercat.errors import DomainError, InvalidParameters


def test_canonical_gamma_moment():
    assert idn.moment_residual(idn.weight_for("canonical"), 5) < 1e-10
    assert idn.moment(idn.weight_for("canonical"), 5) == pytest.approx(120, rel=1e-10)


def test_perelomov_beta_moment():
    s, n = 2.0, 3
    w = idn.weight_for("gp_su11", s=s)
    want = math.factorial(n) / (2 * s * (2 * s + 1) * (2 * s + 2))
    assert idn.moment(w, n) == pytest.approx(want, rel=1e-10)
    assert idn.moment_residual(w, n) < 1e-10


def test_negative_control_moments():
    w = idn.negative_control()
    assert idn.moment(w, 7) == pytest.approx(1 / 8, rel=1e-12)
    assert idn.moment_residual(w, 7) == pytest.approx(7 / 8, rel=1e-12)
    assert idn.status_for(w, idn.moment_residual(w, 7)) == "expected-fail"
    assert idn.status_for(w, idn.moment_residual(w, 0)) == "agrees"


@pytest.mark.parametrize("w", idn.registered_weights(), ids=lambda w: w.family)
def test_registered_weights_pass(w):
    for n in range(idn.DEFAULT_MAX_N + 1):
        assert idn.moment_residual(w, n) < idn.PASS_TOL


def test_unregistered_families_reported():
    for name in idn.UNREGISTERED:
        with pytest.raises(KeyError):
            idn.weight_for(name)
    rows = idn.identity_report(max_n=2)
    tail = [r for r in rows if r[3] == "no weight registered"]
    assert [r[0] for r in tail] == list(idn.UNREGISTERED)
    assert idn.control_fails(rows)


def test_report_csv():
    text = idn.report_csv(idn.identity_report(max_n=1))
    lines = text.splitlines()
    assert lines[0] == "family,n,residual,status"
    assert lines[-1] == "hydrogen,,,no weight registered"


def test_perelomov_needs_s_above_half():
    with pytest.raises(InvalidParameters):
        idn.weight_for("gp_su11", s=0.5)


def test_moment_order_bounds():
    with pytest.raises(InvalidParameters):
        idn.moment_residual(idn.weight_for("canonical"), 21)


def test_kitten_weight_examples():
    w = idn.weight_for("canonical")
    params = st.preset("canonical").params
    for x in (0.3, 1.0, 4.0):
        assert idn.kitten_weight(w, params, 2, 0, x) == pytest.approx(math.exp(-x) * math.cosh(x), rel=1e-14)
    assert idn.kitten_weight(w, params, 3, 1, 0.0) == 0


@pytest.mark.parametrize("name,s", [("canonical", None), ("bg_su11", 1.0), ("dual_sg", None)])
def test_kitten_closure(name, s):
    w = idn.weight_for(name, s)
    for k in (1, 2, 3):
        for m in range(6):
            assert idn.closure_diagonal(w, k, m) == pytest.approx(1, abs=1e-10)


def test_closure_refuses_disk():
    with pytest.raises(DomainError):
        idn.closure_diagonal(idn.weight_for("gp_su11", s=2.0), 2, 0)


@settings(max_examples=20, deadline=None)
@given(hs.floats(0.55, 4.0), hs.integers(0, 20))
def test_perelomov_weight_any_s(s, n):
    assert idn.moment_residual(idn.weight_for("gp_su11", s=s), n) < 1e-8


@settings(max_examples=20, deadline=None)
@given(hs.sampled_from(idn.registered_weights()), hs.floats(1e-6, 0.999))
def test_weights_nonnegative(w, u):
    x = u if w.support_R == 1.0 else u / (1 - u)
    assert float(w.density(np.asarray(x))) >= 0
