import math

import numpy as np
import pytest

from hypercat import cli
from hypercat.kerr import HusimiGrid
from hypercat.states import FockVector


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_state_poisson_csv(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, _, _ = run(["state", "--preset", "canonical", "--z", "2", "--out", str(path)], capsys)
    assert code == 0
    vec, head = FockVector.from_csv(path)
    n = np.arange(vec.dim)
    want = np.exp(-2) * 2.0**n / np.sqrt([float(math.factorial(int(k))) for k in n])
    np.testing.assert_allclose(vec.amp.real, want, atol=1e-15)
    assert head["family"] == "canonical"


def test_kitten_norm_field(capsys):
    code, out, _ = run(["kitten", "--preset", "canonical", "--k", "2", "--j", "0", "--z", "1"], capsys)
    assert code == 0
    head = dict(item.split("=", 1) for item in out.splitlines()[0][2:].split("; "))
    assert float(head["norm"]) == pytest.approx(math.cosh(1), rel=1e-15)
    vec, _ = FockVector.from_csv(out)
    assert np.all(vec.amp[1::2] == 0)


def test_ill_defined_family(capsys):
    code, _, err = run(["state", "--alpha", "1,1", "--z", "0.1"], capsys)
    assert code == 2
    assert "ill-defined family (R=0)" in err


def test_usage_errors(capsys):
    assert run([], capsys)[0] == 1
    assert run(["state", "--z", "1"], capsys)[0] == 1
    assert run(["state", "--preset", "nope", "--z", "1"], capsys)[0] == 1
    assert run(["kitten", "--preset", "canonical", "--z", "1"], capsys)[0] == 1
    assert run(["state", "--preset", "canonical", "--z", "abc"], capsys)[0] == 1


def test_domain_error_exit(capsys):
    code, _, err = run(["state", "--preset", "sg", "--z", "1.5"], capsys)
    assert code == 2 and err.startswith("error:")


def test_stats_rows(capsys):
    code, out, _ = run(["stats", "--preset", "canonical", "--k", "3", "--x-grid", "0:2:5"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "family,k,j,x,mean,std,Q,F,class"
    assert len(lines) == 1 + 3 * 5
    first = lines[1].split(",")
    assert first[:4] == ["canonical", "3", "0", "0"] and float(first[6]) == pytest.approx(2)


def test_mandel_nf(capsys):
    code, out, _ = run(["mandel", "--alpha", "1", "--beta", "3", "--k", "3", "--j", "1",
                        "--x-grid", "0.5:0.5:1", "--operator", "nf"], capsys)
    assert code == 0 and len(out.splitlines()) == 2


def test_critical(capsys):
    code, out, _ = run(["critical", "--preset", "gp_su11", "--s", "3", "--k", "5"], capsys)
    assert code == 0
    assert float(out.splitlines()[1].split(",")[3]) == pytest.approx(4 / 9, abs=1e-9)


def test_kerr_forms(capsys):
    base = ["kerr", "--alpha", "1", "--beta", "1", "--z", "2"]
    code, out, _ = run(base + ["--k", "8", "--form", "circle"], capsys)
    assert code == 0 and "m=4" in out
    code, out, _ = run(base + ["--fraction", "1/3", "--form", "kittens"], capsys)
    rows = out.splitlines()[2:]
    assert len(rows) == 3
    assert sum(float(r.split(",")[3]) for r in rows) == pytest.approx(1, abs=1e-14)
    code, out, _ = run(base + ["--k", "2"], capsys)
    assert FockVector.from_csv(out)[0].norm() == pytest.approx(1)
    assert run(base + ["--k", "2", "--kappa", "3", "--form", "circle"], capsys)[0] == 1


def test_husimi_routes_agree(capsys):
    base = ["husimi", "--alpha", "3", "--beta", "1", "--z", "2", "--k", "4", "--n", "21"]
    _, a, _ = run(base, capsys)
    _, b, _ = run(base + ["--route", "fock"], capsys)
    ga, gb = HusimiGrid.from_csv(a), HusimiGrid.from_csv(b)
    assert ga.values.shape == (21, 21)
    assert np.max(np.abs(ga.values - gb.values)) < 1e-9


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\npreset = confluent\nalpha = 1\nbeta = 4\nk = 5\nx_grid = 0:1:3\n")
    code, out, _ = run(["stats", "--config", str(cfg), "--j", "2"], capsys)
    assert code == 0 and len(out.splitlines()) == 4
    code, out2, _ = run(["stats", "--config", str(cfg), "--j", "2", "--x-grid", "0:1:2"], capsys)
    assert len(out2.splitlines()) == 3  # command line wins


def test_config_list_keys(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha=2\nalpha=2\nbeta=3\nz=0.5\n")
    code, out, _ = run(["state", "--config", str(cfg)], capsys)
    assert code == 0 and "alpha=2,2" in out.splitlines()[0]


@pytest.mark.parametrize("body,msg", [("k=1\nk=2\n", ":2: key 'k' given twice"),
                                      ("bogus=1\n", ":1: unknown key"),
                                      ("k 3\n", ":1: expected key=value")])
def test_config_diagnostics(tmp_path, capsys, body, msg):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(body)
    code, _, err = run(["stats", "--config", str(cfg)], capsys)
    assert code == 1 and msg in err


def test_figures_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(["figures", "fig1a", "--out", str(tmp_path / d)], capsys)[0] == 0
    a, b = (tmp_path / "a" / "fig1a.csv").read_bytes(), (tmp_path / "b" / "fig1a.csv").read_bytes()
    assert a == b
    text = a.decode()
    assert "k=5" in text.splitlines()[0]
    assert "stated=5" in text
    assert text.splitlines()[2] == "x,P_j0_m0,P_j1_m1,P_j2_m2,P_j3_m3,P_j4_m4"


def test_figure_parameter_blocks(tmp_path, capsys):
    out = tmp_path / "f"
    for fid in ("fig1b", "fig2b", "fig5b"):
        run(["figures", fid, "--out", str(out)], capsys)
    assert "alpha1=2s=6" in (out / "fig1b.csv").read_text()
    assert "stated=4/9" in (out / "fig1b.csv").read_text()
    assert "stated=4/5" in (out / "fig2b.csv").read_text()
    head = (out / "fig5b.csv").read_text().splitlines()[0]
    assert "alpha=1; beta=1; k=5" in head


def test_figure6_panel(tmp_path, capsys):
    code, out, _ = run(["figures", "fig6c", "--out", str(tmp_path), "--n", "31"], capsys)
    assert code == 0
    g = HusimiGrid.from_csv(tmp_path / "fig6c_k8.csv")
    assert g.nx == 31 and g.meta["alpha"] == "3" and g.meta["beta"] == "1"
    assert len(out.splitlines()) == len(cli.kr.FIG6_K)


def test_unknown_figure(capsys):
    assert run(["figures", "fig9"], capsys)[0] == 1


def test_verify_series(capsys):
    code, out, _ = run(["verify", "series"], capsys)
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines()[:-1])


def test_verify_kittens_anchor(capsys):
    code, out, _ = run(["verify", "kittens"], capsys)
    assert code == 0
    assert any("discrete circle rep fidelity" in line and line.startswith("PASS") for line in out.splitlines())


def test_verify_identity_control(capsys):
    code, out, _ = run(["verify", "identity"], capsys)
    assert code == 0
    assert any("negative control" in line and "expected-fail=pass" in line for line in out.splitlines())
