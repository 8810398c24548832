"""Command-line interface: state construction, statistics sweeps, figure data, verification.

Exit codes: 0 ok, 1 usage, 2 domain or parameter error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import hyperfunc as hf
from . import kerr as kr
from . import kittens as kt
from . import states as st
from . import stats as ss
from . import verify as vf
from .errors import HypercatError
from .hyperfunc import ModelParams
from .states import fmt_float

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Argument helpers


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a complex number") from None


def parse_floats(text: str) -> tuple[float, ...]:
    if text is None or text.strip() in ("", "-"):
        return ()
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a comma-separated list") from None


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must be min:max:steps")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid {text!r} must be min:max:steps") from None
    if n < 1:
        raise UsageError("grid needs at least one step")
    return np.linspace(lo, hi, n)


def family_from_args(args) -> tuple[str, ModelParams]:
    if args.preset:
        if args.preset == "confluent":
            a, b = parse_floats(args.alpha), parse_floats(args.beta)
            if len(a) != 1 or len(b) != 1:
                raise UsageError("confluent preset needs --alpha A --beta B")
            pr = st.preset("confluent", alpha=a[0], beta=b[0])
        else:
            pr = st.preset(args.preset, s=args.s)
        params = pr.params
        if args.phase:
            params = params.with_phase(args.phase)
        return pr.name, params
    if args.alpha is None and args.beta is None:
        raise UsageError("choose a family with --preset or --alpha/--beta")
    params = ModelParams(parse_floats(args.alpha), parse_floats(args.beta), args.phase or "one")
    return "custom", params


def default_x_grid(params: ModelParams) -> np.ndarray:
    if math.isfinite(hf.convergence_domain(params).radius):
        return np.linspace(0.0, 0.95, 20)
    return np.linspace(0.0, 5.0, 51)


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser, *, grid=False) -> None:
    p.add_argument("--preset", choices=st.PRESET_NAMES)
    p.add_argument("--s", type=float, help="spin / Bargmann index for SU(1,1), SU(2) presets")
    p.add_argument("--alpha", help="comma-separated numerator parameters")
    p.add_argument("--beta", help="comma-separated denominator parameters")
    p.add_argument("--phase", choices=hf.PHASE_RULES)
    p.add_argument("--k", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--z", type=str)
    p.add_argument("--dim", type=int)
    p.add_argument("--out")
    p.add_argument("--tol", type=float, help="series termination tolerance")
    p.add_argument("--config", help="key=value file; command-line flags win")
    if grid:
        p.add_argument("--x-grid", dest="x_grid", help="min:max:steps")


# ---------------------------------------------------------------------------
# Commands


def cmd_state(args) -> int:
    name, params = family_from_args(args)
    if args.z is None:
        raise UsageError("state needs --z")
    lab = st.CoherentLabel(parse_complex(args.z), params)
    vec = st.hcs(lab, args.dim)
    head = {"family": name, "params": params.describe(), "z": args.z, "dim": vec.dim,
            "norm": fmt_float(hf.normalization(params, lab.x))}
    emit(vec.to_csv(header=head), args.out)
    return EXIT_OK


def cmd_kitten(args) -> int:
    name, params = family_from_args(args)
    if args.z is None or args.k is None or args.j is None:
        raise UsageError("kitten needs --k, --j and --z")
    spec = kt.KittenSpec(args.k, args.j, parse_complex(args.z), params)
    vec = kt.kitten_fock(spec, args.dim) if args.method == "fock" else kt.kitten_dft(spec, args.dim)
    head = {"family": name, "params": params.describe(), "k": args.k, "j": args.j, "z": args.z,
            "method": args.method, "dim": vec.dim,
            "norm": fmt_float(hf.kitten_norm(params, args.k, args.j, spec.x))}
    emit(vec.to_csv(header=head), args.out)
    return EXIT_OK


def _stat_rows(args, operator: str):
    name, params = family_from_args(args)
    k = args.k or 1
    xs = parse_grid(args.x_grid) if args.x_grid else default_x_grid(params)
    js = [args.j] if args.j is not None else list(range(k))
    fn = ss.mandel if operator == "n" else ss.mandel_nf
    rows = []
    for j in js:
        for x in xs:
            rows.append((name, k, j, float(x), fn(params, k, j, float(x))))
    return rows


def cmd_stats(args) -> int:
    emit(ss.stat_csv(_stat_rows(args, "n")), args.out)
    return EXIT_OK


def cmd_mandel(args) -> int:
    emit(ss.stat_csv(_stat_rows(args, args.operator)), args.out)
    return EXIT_OK


def cmd_critical(args) -> int:
    name, params = family_from_args(args)
    ks = [args.k] if args.k else list(range(2, 9))
    buf = io.StringIO()
    buf.write("family,k,z_c,z_c_squared\n")
    for k in ks:
        zc = ss.critical_z(params, k)
        buf.write(f"{name},{k},{fmt_float(zc)},{fmt_float(zc * zc)}\n")
    emit(buf.getvalue(), args.out)
    return EXIT_OK


def _kerr_params(args) -> kr.KerrParams:
    if args.fraction:
        try:
            frac = Fraction(args.fraction)
        except ValueError:
            raise UsageError(f"cannot read fraction {args.fraction!r}") from None
        return kr.KerrParams.at_fraction(frac.numerator, frac.denominator, args.kappa)
    if args.k:
        return kr.KerrParams.revival_fraction(args.k, args.kappa)
    raise UsageError("kerr needs --k (t = tau/k) or --fraction a/b")


def cmd_kerr(args) -> int:
    name, params = family_from_args(args)
    if args.z is None:
        raise UsageError("kerr needs --z")
    lab = st.CoherentLabel(parse_complex(args.z), params)
    kp = _kerr_params(args)
    t_label = str(kp.fraction)
    if args.form == "state":
        vec = kr.kerr_evolve(lab, kp, args.dim)
        head = {"family": name, "params": params.describe(), "z0": args.z, "t_over_tau": t_label,
                "kappa": kp.kappa, "dim": vec.dim}
        emit(vec.to_csv(header=head), args.out)
        return EXIT_OK
    if kp.kappa != 2 or kp.fraction is None or kp.fraction.numerator != 1:
        raise UsageError("kitten and circle forms exist for kappa = 2 at t = tau/k")
    k = kp.fraction.denominator
    buf = io.StringIO()
    buf.write(f"# family={name}; params={params.describe()}; z0={args.z}; t_over_tau=1/{k}\n")
    if args.form == "kittens":
        buf.write("j,re,im,abs2\n")
        for j, c in enumerate(kr.kitten_decomposition(lab, k)):
            buf.write(f"{j},{fmt_float(c.real)},{fmt_float(c.imag)},{fmt_float(abs(c) ** 2)}\n")
    else:
        lay = kr.component_layout(k)
        buf.write(f"# m={lay.m}; rotation_offset={fmt_float(lay.rotation_offset)}; case={lay.case_tag}\n")
        buf.write("l,re,im,abs\n")
        for l, w in enumerate(kr.circle_superposition_form(lab, k)):
            buf.write(f"{l},{fmt_float(w.real)},{fmt_float(w.imag)},{fmt_float(abs(w))}\n")
    emit(buf.getvalue(), args.out)
    return EXIT_OK


def _grid_spec(args) -> kr.GridSpec:
    window = (-3.5, 3.5, -3.5, 3.5)
    if args.window:
        try:
            window = tuple(float(v) for v in args.window.split(":"))
        except ValueError:
            raise UsageError("window must be xmin:xmax:ymin:ymax") from None
        if len(window) != 4:
            raise UsageError("window must be xmin:xmax:ymin:ymax")
    return kr.GridSpec(*window, args.n, args.n)


def cmd_husimi(args) -> int:
    name, params = family_from_args(args)
    if args.z is None or args.k is None:
        raise UsageError("husimi needs --z (initial z0) and --k (t = tau/k)")
    lab = st.CoherentLabel(parse_complex(args.z), params)
    grid = _grid_spec(args)
    if args.route == "closed":
        g = kr.husimi_kerr(lab, args.k, grid)
    else:
        g = kr.husimi(kr.kerr_evolve(lab, kr.KerrParams.revival_fraction(args.k), args.dim), params, grid)
        g.meta.update({"t_k": f"1/{args.k}"})
    g.meta["family"] = name
    emit(g.to_csv(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Figure data


def _curves_csv(meta: list[str], xs: np.ndarray, columns: dict[str, list[float]]) -> str:
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    buf.write(",".join(["x"] + list(columns)) + "\n")
    for i, x in enumerate(xs):
        buf.write(",".join([fmt_float(x)] + [fmt_float(c[i]) for c in columns.values()]) + "\n")
    return buf.getvalue()


def _pdf_curve(params, k, j, m, xs):
    return [ss.photon_pdf(kt.KittenSpec(k, j, math.sqrt(x), params), m) for x in xs]


CANON_X = np.linspace(0.0, 10.0, 201)
PERELOMOV_X = np.linspace(0.0, 0.99, 199)
CONFLUENT_X = np.linspace(0.0, 5.0, 201)


def _fig1(which: str) -> str:
    k = 5
    canonical = which in ("fig1a", "fig1c")
    s = 3.0
    params = ModelParams() if canonical else st.preset("gp_su11", s=s).params
    block = ("family=canonical; p=0; q=0" if canonical
             else "family=gp_su11; p=1; q=0; alpha1=2s=6")
    meta = [f"figure={which}; {block}; k={k}"]
    if which in ("fig1a", "fig1b"):
        xs = CANON_X if canonical else PERELOMOV_X
        cols = {f"P_j{j}_m{j}": _pdf_curve(params, k, j, j, xs) for j in range(k)}
        zc2 = ss.critical_z(params, k) ** 2
        stated = "5" if canonical else "4/9"
        meta.append(f"marker=z_c^2; stated={stated}; computed={fmt_float(zc2)}")
        return _curves_csv(meta, xs, cols)
    xs = np.linspace(0.0, 40.0, 401) if canonical else PERELOMOV_X
    cols = {}
    for nu in range(1, 6):
        m = nu * k
        cols[f"P_j0_m{m}"] = _pdf_curve(params, k, 0, m, xs)
        stated = m if canonical else (m - 1) / (m + 2 * s - 2)
        fine = np.linspace(xs[1], xs[-1], 4001)
        found = fine[int(np.argmax(_pdf_curve(params, k, 0, m, fine)))]
        meta.append(f"marker=x_max(nu={nu}); stated={fmt_float(stated)}; computed={fmt_float(found)}")
    return _curves_csv(meta, xs, cols)


def _fig23(which: str) -> str:
    k = 5
    canonical = which.endswith("a")
    s = 1.0 if which == "fig2b" else 3.0
    params = ModelParams() if canonical else st.preset("gp_su11", s=s).params
    xs = CANON_X if canonical else PERELOMOV_X
    fn = ss.mean_n if which.startswith("fig2") else ss.std_n
    block = ("family=canonical; p=0; q=0" if canonical
             else f"family=gp_su11; p=1; q=0; alpha1=2s={2 * s:g}")
    meta = [f"figure={which}; {block}; k={k}; quantity={'mean' if fn is ss.mean_n else 'std'}"]
    cols = {f"j{j}": [fn(params, k, j, x) for x in xs] for j in range(k)}
    cols["k1"] = [fn(params, 1, 0, x) for x in xs]
    if which.startswith("fig2"):
        stated = "5" if canonical else "4/5"
        zc2 = ss.critical_z(params, k) ** 2
        meta.append(f"marker=z_c^2; stated={stated}; computed={fmt_float(zc2)}")
    return _curves_csv(meta, xs, cols)


def _fig4() -> str:
    meta = ["figure=fig4; family=confluent; p=1; q=1; k=1; quantity=Q"]
    cols = {}
    for a, b in ((1, 2), (1, 4), (2, 1), (4, 1)):
        params = ModelParams((float(a),), (float(b),))
        cols[f"Q_a{a}_b{b}"] = [ss.mandel(params, 1, 0, x).mandel_q for x in CONFLUENT_X]
    return _curves_csv(meta, CONFLUENT_X, cols)


def _fig5(which: str) -> str:
    a, b = {"fig5a": (1, 4), "fig5b": (1, 1), "fig5c": (4, 1)}[which]
    params = ModelParams((float(a),), (float(b),))
    meta = [f"figure={which}; family=confluent; p=1; q=1; alpha={a}; beta={b}; k=5; quantity=Q"]
    cols = {f"Q_j{j}": [ss.mandel(params, 5, j, x).mandel_q for x in CONFLUENT_X] for j in range(5)}
    return _curves_csv(meta, CONFLUENT_X, cols)


def _fig6(which: str, grid: kr.GridSpec) -> dict[str, str]:
    row = which[-1]
    a, b = kr.FIG6_ROWS[row]
    lab = st.CoherentLabel(kr.FIG6_Z0, ModelParams((a,), (b,)))
    out = {}
    for k in kr.FIG6_K:
        g = kr.husimi_kerr(lab, k, grid)
        g.meta.update({"figure": which, "alpha": f"{a:g}", "beta": f"{b:g}",
                       "distinguishable": str((row, k) in kr.FIG6_DISTINGUISHABLE).lower()})
        out[f"{which}_k{k}.csv"] = g.to_csv()
    return out


FIGURE_IDS = ("fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig3a", "fig3b",
              "fig4", "fig5a", "fig5b", "fig5c", "fig6a", "fig6b", "fig6c")


def figure_files(figure_id: str, grid: kr.GridSpec | None = None) -> dict[str, str]:
    """Map file name -> CSV text for one figure id."""
    if figure_id.startswith("fig1"):
        return {f"{figure_id}.csv": _fig1(figure_id)}
    if figure_id.startswith(("fig2", "fig3")):
        return {f"{figure_id}.csv": _fig23(figure_id)}
    if figure_id == "fig4":
        return {"fig4.csv": _fig4()}
    if figure_id.startswith("fig5"):
        return {f"{figure_id}.csv": _fig5(figure_id)}
    if figure_id.startswith("fig6"):
        return _fig6(figure_id, grid or kr.GridSpec())
    raise UsageError(f"unknown figure id {figure_id!r}")


def cmd_figures(args) -> int:
    ids = FIGURE_IDS if args.figure_id == "all" else (args.figure_id,)
    for fid in ids:
        if fid not in FIGURE_IDS:
            raise UsageError(f"unknown figure id {fid!r}; choose from {', '.join(FIGURE_IDS)}")
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    grid = kr.GridSpec(-3.5, 3.5, -3.5, 3.5, args.n, args.n)
    for fid in ids:
        for fname, text in figure_files(fid, grid).items():
            path = os.path.join(outdir, fname)
            with open(path, "w", newline="") as fh:
                fh.write(text)
            print(path)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = vf.run(args.suite)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# ---------------------------------------------------------------------------
# Parser and config files


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypercat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("state", help="hypergeometric coherent state amplitudes")
    _common(p)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("kitten", help="k-hypercat amplitudes")
    _common(p)
    p.add_argument("--method", choices=("fock", "dft"), default="fock")
    p.set_defaults(func=cmd_kitten)

    p = sub.add_parser("stats", help="mean, std and Mandel parameter over an x grid")
    _common(p, grid=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("mandel", help="Mandel parameter of n or n_f over an x grid")
    _common(p, grid=True)
    p.add_argument("--operator", choices=("n", "nf"), default="n")
    p.set_defaults(func=cmd_mandel)

    p = sub.add_parser("critical", help="critical displacement z_c")
    _common(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("kerr", help="Kerr evolution and its revival decompositions")
    _common(p)
    p.add_argument("--fraction", help="t / tau as a/b")
    p.add_argument("--kappa", type=int, default=2)
    p.add_argument("--form", choices=("state", "kittens", "circle"), default="state")
    p.set_defaults(func=cmd_kerr)

    p = sub.add_parser("husimi", help="Husimi grid of the state at tau/k")
    _common(p)
    p.add_argument("--window", help="xmin:xmax:ymin:ymax")
    p.add_argument("--n", type=int, default=281, help="grid points per axis")
    p.add_argument("--route", choices=("closed", "fock"), default="closed")
    p.set_defaults(func=cmd_husimi)

    p = sub.add_parser("figures", help="write figure data files")
    p.add_argument("figure_id", help="fig1a..fig6c or all")
    p.add_argument("--out", help="output directory")
    p.add_argument("--n", type=int, default=281, help="Husimi grid points per axis")
    p.add_argument("--config")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("suite", choices=tuple(vf.SUITES) + ("all",))
    p.set_defaults(func=cmd_verify)
    return parser


LIST_KEYS = ("alpha", "beta")


def read_config(path: str, allowed: set[str]) -> list[str]:
    """Turn a key=value file into argument tokens; alpha/beta may repeat."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    values: dict[str, list[str]] = {}
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, val = (t.strip() for t in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if flag not in allowed or key == "config":
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        if key in values and key not in LIST_KEYS:
            raise UsageError(f"{path}:{no}: key {key!r} given twice")
        values.setdefault(key, []).append(val)
    tokens = []
    for key, vals in values.items():
        tokens += ["--" + key.replace("_", "-"), ",".join(vals)]
    return tokens


def _expand_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" not in argv or not argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file name")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = subparsers.choices.get(rest[0]) if rest else None
    if sp is None:
        raise UsageError("--config follows a subcommand")
    allowed = set(sp._option_string_actions)
    return [rest[0]] + read_config(path, allowed) + rest[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(parser, argv)
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError(parser.format_usage().strip())
        if getattr(args, "tol", None) is not None:
            hf.TOL = args.tol
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypercatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
