"""Command-line front end.

Every subcommand writes ``report.json`` plus CSV tables and SVG figures into
``--out``.  Exit status is 0 on success, 2 when an input violates a stated
precondition and 1 on any other failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import report as rp
from .envelope import disc, envelope_build, envelope_check
from .errors import PreconditionError
from .field import (HomogeneousField, check_structure, field_build_polynomial, field_build_pq,
                    fourier_fn, orient)
from .integral import Kind, fi_eval, fi_residual, first_integral
from .periodic import DEFAULT_GRID, check_grid, constant, grid
from .presets import PRESETS, get_preset
from .resonance import dc_classify, dc_prime_bound, resonance_analyze, small_divisors
from .rh import FreeParams, RHInput, boundary_from_coeffs, rh_compose, rh_residual, rh_solve
from .solve import (HomogeneousRHS, TaylorInput, residual_check, solve_homogeneous,
                    solve_series, taylor_from_function)
from .weak import TestFn, delta_check, dirac_derivative_check, weak_battery

SUBCOMMANDS = ("analyze", "first-integral", "envelope", "resonance", "solve-homogeneous",
               "solve-series", "weak-check", "rh-solve", "render")


# -- field ingestion -------------------------------------------------------------

def _cnum(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]) if len(x) > 1 else 0.0)
    return complex(x)


def field_from_json(desc: dict, n_grid: int) -> HomogeneousField:
    """Build a field from the JSON schema.

    ``{"lambda": [re, im], "p": [[j, re, im], ...], "q": [...]}`` gives the
    polar data by Fourier terms; ``{"A": [...], "B": [...]}`` gives monomial
    coefficients of homogeneous polynomials, entries numbers or [re, im].
    """
    try:
        if "A" in desc or "B" in desc:
            return field_build_polynomial([_cnum(c) for c in desc["A"]],
                                          [_cnum(c) for c in desc["B"]], n_grid)
        lam = _cnum(desc["lambda"])
        p = fourier_fn([(t[0], complex(t[1], t[2] if len(t) > 2 else 0.0)) for t in desc["p"]], n_grid)
        q = fourier_fn([(t[0], complex(t[1], t[2] if len(t) > 2 else 0.0)) for t in desc["q"]], n_grid)
    except (KeyError, IndexError, TypeError, ValueError) as e:
        if isinstance(e, PreconditionError):
            raise
        raise PreconditionError(f"malformed field description: {e}") from e
    return field_build_pq(lam, p, q)


def load_field(args) -> tuple[HomogeneousField, str]:
    if args.field:
        path = Path(args.field)
        if not path.exists():
            raise PreconditionError(f"field file {path} not found")
        try:
            desc = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise PreconditionError(f"field file is not valid JSON: {e}") from e
        return field_from_json(desc, args.grid), str(path)
    return get_preset(args.preset, n_grid=args.grid), args.preset


def _load_json(path: str | None, what: str):
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise PreconditionError(f"{what} file {p} not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise PreconditionError(f"{what} file is not valid JSON: {e}") from e


# -- pipelines -------------------------------------------------------------------------

def run_analyze(L: HomogeneousField, out: Path, tol: float) -> dict:
    rep = check_structure(L)
    res = {"field": {"lambda": L.lam, "n_grid": L.n_grid}, **rep.to_dict()}
    Lo = orient(L)
    res["oriented"] = Lo is not L
    try:
        Z = first_integral(Lo)
        th = grid(256)
        R, TH = np.meshgrid([0.5, 1.0, 2.0], th, indexing="ij")
        fr = fi_residual(Lo, Z, R, TH)
        res["first_integral"] = {"kind": Z.kind.value, "image": Z.image, "residual": fr,
                                 "ok": fr <= tol}
    except PreconditionError as e:
        res["first_integral"] = {"error": str(e)}
    res["resonance"] = resonance_analyze(rep.mu, L.lam, div_free=rep.div_free).to_dict()
    rp.write_csv(out / "rays.csv", ["theta", "order", "sign_change"],
                 [(r.theta, r.order, int(r.sign_change)) for r in rep.rays])
    rp.write_csv(out / "field.csv", ["theta", "p_re", "p_im", "q_re", "q_im", "re_qpbar"],
                 zip(L.p.theta, L.p.samples.real, L.p.samples.imag, L.q.samples.real,
                     L.q.samples.imag, L.re_qpbar.samples.real))
    rp.plot_field(L, rep.rays, out / "field.svg")
    return res


def run_first_integral(L: HomogeneousField, out: Path, tol: float) -> dict:
    Lo = orient(L)
    Z = first_integral(Lo)
    th = Z.phi.theta
    R, TH = np.meshgrid([0.5, 1.0, 2.0], grid(256), indexing="ij")
    fr = fi_residual(Lo, Z, R, TH)
    res = {"kind": Z.kind.value, "mu": Z.mu, "image": Z.image, "sigma": Z.sigma,
           "beta": Z.beta, "annulus": Z.annulus, "residual": fr, "ok": fr <= tol,
           "oriented": Lo is not L}
    z = fi_eval(Z, np.ones_like(th), th)
    rp.write_csv(out / "first_integral.csv",
                 ["theta", "phi_re", "phi_im", "abs_Z_unit_circle", "arg_Z_unit_circle"],
                 zip(th, Z.phi.samples.real, Z.phi.samples.imag, np.abs(z), np.angle(z)))
    rp.plot_first_integral(Z, out / "first_integral.svg")
    return res


def envelope_pipeline(L: HomogeneousField, radius: float = 1.0):
    Lo = orient(L)
    Z = first_integral(Lo)
    D = disc(radius, L.n_grid)
    E = envelope_build(Lo, Z, D)
    return Lo, Z, D, E


def run_envelope(L: HomogeneousField, out: Path, tol: float, radius: float = 1.0) -> dict:
    Lo, Z, D, E = envelope_pipeline(L, radius)
    defect = envelope_check(Lo, Z, D, E)
    th = E.rho.theta
    R_env = E.Lambda.samples.real
    R_dom = D.radius(th)
    z_dom = fi_eval(Z, R_dom, th)
    z_env = fi_eval(Z, R_env, th)
    rp.write_csv(out / "envelope.csv",
                 ["theta", "R_domain", "rho", "R_envelope", "Z_domain_re", "Z_domain_im",
                  "Z_envelope_re", "Z_envelope_im"],
                 zip(th, R_dom, E.rho.samples.real, R_env, z_dom.real, z_dom.imag,
                     z_env.real, z_env.imag))
    rp.plot_envelope(th, R_dom, R_env, z_dom, z_env, out / "envelope.svg")
    return {"kind": Z.kind.value, "domain_radius": radius, "check_defect": defect,
            "ok": defect <= tol, "R_envelope_max": float(R_env.max()),
            "R_envelope_min": float(R_env.min())}


def run_resonance(mu: complex, lam: complex, out: Path, j_max: int, div_free: bool) -> dict:
    rep = resonance_analyze(mu, lam, j_max, div_free)
    res = {"mu": mu, "lambda": lam, **rep.to_dict()}
    js = np.arange(1, j_max + 1)
    d = small_divisors(mu, lam, js)
    if not rep.resonant:
        dc = dc_classify(mu, lam, j_max)
        res["dc"] = dc.to_dict()
        res["dc_prime_bound"] = dc_prime_bound(dc)
        res["certificate_ok"] = bool(np.all(d >= dc.C_estimate ** js))
    rp.write_csv(out / "divisors.csv", ["j", "d_j"], zip(js, d))
    return res


def _rhs_from(args, n: int):
    desc = _load_json(getattr(args, "rhs", None), "right-hand side")
    if desc is None:
        return constant(1.0, n)
    return fourier_fn([(t[0], complex(t[1], t[2] if len(t) > 2 else 0.0)) for t in desc["f0"]], n)


def run_solve_homogeneous(L: HomogeneousField, sigma: complex, f0, out: Path, tol: float) -> dict:
    rhs = HomogeneousRHS(sigma, f0)
    sol = solve_homogeneous(L, rhs)
    f = rhs.as_power()
    rc = residual_check(L, sol, lambda r, t: f(r, t), (0.5, 2.0))
    rp.write_csv(out / "solution.csv", ["theta", "v_re", "v_im"],
                 zip(sol.v.theta, sol.v.samples.real, sol.v.samples.imag))
    return {"sigma": sol.sigma, "nu": sol.nu, "K": sol.K, "ode_residual": sol.ode_residual,
            "denominator": sol.denominator, "residual_check": rc, "ok": rc <= tol}


def _exp_taylor(D: int) -> TaylorInput:
    """f = e^x: entire, so any radius works; R = 1 with M0 = e."""
    return taylor_from_function(lambda k, l: 1.0 if l == 0 else 0.0, D, 1.0, math.e)


def _taylor_from(args) -> TaylorInput:
    desc = _load_json(args.taylor, "Taylor")
    if desc is None:
        return _exp_taylor(args.J)
    rows = [[_cnum(c) for c in row] for row in desc["coeffs"]]
    return TaylorInput(rows, float(desc.get("R", 1.0)), float(desc.get("M0", 1.0)))


def run_solve_series(L: HomogeneousField, T: TaylorInput, J: int, out: Path, tol: float) -> dict:
    rep = check_structure(L)
    dc = None
    if not resonance_analyze(rep.mu, L.lam).resonant:
        dc = dc_classify(rep.mu, L.lam)
    S = solve_series(L, T, J, dc)
    norms = [v.sup() for v in S.vs]
    rp.write_csv(out / "series.csv", ["j", "norm_v", "K_re", "K_im", "denominator"],
                 [(j, norms[j], S.Ks[j].real, S.Ks[j].imag, S.denominators[j])
                  for j in range(J + 1)])
    rp.plot_series(norms, S.C2_estimate, out / "series.svg")
    res = {"J": J, "C2_estimate": S.C2_estimate, "R0": S.R0,
           "resonant_degrees": S.resonant_degrees,
           "dc": None if dc is None else dc.to_dict()}
    if math.isfinite(S.R0) and S.R0 > 0:
        r2 = 0.5 * min(S.R0, T.R_major)
        rc = residual_check(L, S, T, (0.25 * r2, r2))
        res.update(residual_annulus=[0.25 * r2, r2], residual_check=rc)
    return res


def run_weak_check(L: HomogeneousField, sigma: complex | None, out: Path, tol: float,
                   count: int, seed: int) -> dict:
    rep = check_structure(L)
    res: dict = {"div_free": rep.div_free}
    if sigma is not None:
        rhs = HomogeneousRHS(sigma, constant(1.0, L.n_grid))
        sol = solve_homogeneous(L, rhs)
        lowreg = None
        if not complex(sigma).real > L.lam.real - 2:
            lowreg = (sol.v, complex(sigma))
        batt = weak_battery(L, sol, rhs.as_power(), count, seed, lowreg=lowreg)
        rel = [b.relative for b in batt]
        res["battery"] = {"pairing": "regularised" if lowreg else "direct", "count": count,
                          "max_relative_defect": max(rel), "ok": max(rel) <= 1e-4}
        rp.write_csv(out / "battery.csv", ["index", "relative_defect"], enumerate(rel))
    N = round(L.lam.real)
    if rep.div_free and abs(L.lam - N) < 1e-12 and N >= 2 and abs(rep.mu) > 1e-10:
        d = delta_check(L, TestFn())
        res["delta"] = {"value": d.value, "target": d.target, "defect": d.defect,
                        "orders": d.orders, "ok": d.defect <= 1e-3}
        rp.write_csv(out / "delta_ladder.csv", ["nodes", "error"], d.ladder)
        rp.plot_ladder(d.ladder, out / "delta_ladder.svg")
    top = math.floor(L.lam.real - 1 + 1e-12)
    phi = TestFn((0.1, 0.2), 1.0, {(0, 0): 1.0, (1, 1): 0.3})
    rows = []
    for n in range(top + 1):
        for j in range(n + 1):
            dd = dirac_derivative_check(L, j, n - j, phi)
            rows.append((j, n - j, dd.defect))
    res["dirac"] = {"max_defect": max(r[2] for r in rows), "pairs": len(rows),
                    "ok": max(r[2] for r in rows) <= 1e-5}
    rp.write_csv(out / "dirac.csv", ["j", "k", "defect"], rows)
    return res


def rh_input_from(L: HomogeneousField, desc: dict | None, n: int) -> RHInput:
    mu = check_structure(L).mu
    if desc is None:
        return RHInput(constant(1.0, n), boundary_from_coeffs([[1, 0.5, 0], [-1, 0.5, 0]], n),
                       L.lam, mu)
    try:
        Lam = boundary_from_coeffs(desc["Lambda2"], n)
        Phi = boundary_from_coeffs(desc["Phi2"], n)
    except (KeyError, TypeError, ValueError) as e:
        raise PreconditionError(f"malformed boundary data: {e}") from e
    return RHInput(Lam, Phi.real, L.lam, mu)


def run_rh(L: HomogeneousField, inp: RHInput, free: FreeParams, out: Path, tol: float) -> dict:
    sol = rh_solve(inp, free)
    res = {**sol.to_dict(), "boundary_residual": rh_residual(inp, sol)}
    Lo = orient(L)
    Z = first_integral(Lo)
    if Z.kind is Kind.PositiveReMu:
        try:
            # the largest annulus around 0 that Z maps into the unit disc
            th = grid(512)
            rmax = float(np.min(1.0 / np.abs(fi_eval(Z, np.ones_like(th), th))
                                ** (1 / Z.radial_exponent.real)))
            ann = (0.2 * rmax, 0.9 * rmax)
            u = lambda r, t: rh_compose(Lo, Z, sol, r, t)
            res["composed_residual"] = residual_check(Lo, u, 0, ann)
            res["composed_annulus"] = list(ann)
        except PreconditionError as e:
            res["composed_error"] = str(e)
    tau = grid(1024)
    w = sol(np.exp(1j * tau))
    rp.write_csv(out / "rh_boundary.csv", ["tau", "w_re", "w_im", "residual"],
                 zip(tau, w.real, w.imag,
                     (inp.Lambda2(tau) * w).real - inp.Phi2(tau).real))
    rp.plot_rh(sol, inp, out / "rh.svg")
    res["ok"] = res["boundary_residual"] <= tol
    return res


def run_render(L: HomogeneousField, figure: str, out: Path, tol: float) -> dict:
    if figure == "envelope":
        return run_envelope(L, out, tol)
    if figure == "first-integral":
        return run_first_integral(L, out, tol)
    if figure == "field":
        return run_analyze(L, out, tol)
    raise PreconditionError(f"unknown figure {figure!r}")


# -- argument parsing --------------------------------------------------------------------

def _grid(text: str) -> int:
    try:
        return check_grid(int(text))
    except (ValueError, PreconditionError) as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", default="example1",
                     help=f"named field, optionally with parameters ({', '.join(PRESETS)})")
    src.add_argument("--field", help="JSON field specification")
    common.add_argument("--grid", type=_grid, default=DEFAULT_GRID, help="angular grid size")
    common.add_argument("--tol", type=_positive, default=1e-8, help="pass threshold for checks")
    common.add_argument("--out", default="out", help="output directory")

    ap = argparse.ArgumentParser(prog="homfield", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="structure report of a field")
    sub.add_parser("first-integral", parents=[common], help="first integral and its residual")
    p = sub.add_parser("envelope", parents=[common], help="envelope of a disc")
    p.add_argument("--radius", type=float, default=1.0)
    p = sub.add_parser("resonance", parents=[common], help="resonances and the small-divisor condition")
    p.add_argument("--mu", type=complex, help="override mu (default: the field's)")
    p.add_argument("--lam", type=complex, help="override lambda (default: the field's)")
    p.add_argument("--j-max", type=int, default=500)
    p = sub.add_parser("solve-homogeneous", parents=[common], help="solve L u = r^sigma f0")
    p.add_argument("--sigma", type=complex, required=True)
    p.add_argument("--rhs", help='JSON {"f0": [[j, re, im], ...]} (default f0 = 1)')
    p = sub.add_parser("solve-series", parents=[common], help="series solution for analytic f")
    p.add_argument("--taylor", help='JSON {"coeffs": [[c00], [c10, c11], ...], "R": .., "M0": ..}')
    p.add_argument("--J", type=int, default=20)
    p = sub.add_parser("weak-check", parents=[common], help="distributional checks")
    p.add_argument("--sigma", type=complex)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("rh-solve", parents=[common], help="Riemann-Hilbert problem on the disc")
    p.add_argument("--kappa-data", help='JSON {"Lambda2": [[j, re, im], ...], "Phi2": [...]}')
    p.add_argument("--free-params", help='JSON {"beta0": x, "c": [[re, im], ...]}')
    p = sub.add_parser("render", parents=[common], help="figures only")
    p.add_argument("--figure", choices=("envelope", "first-integral", "field"), default="envelope")
    return ap


def dispatch(args) -> dict:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    L, source = load_field(args)
    cmd = args.command
    if cmd == "analyze":
        res = run_analyze(L, out, args.tol)
    elif cmd == "first-integral":
        res = run_first_integral(L, out, args.tol)
    elif cmd == "envelope":
        res = run_envelope(L, out, args.tol, args.radius)
    elif cmd == "resonance":
        rep = check_structure(L)
        mu = rep.mu if args.mu is None else args.mu
        lam = L.lam if args.lam is None else args.lam
        res = run_resonance(mu, lam, out, args.j_max, rep.div_free and args.mu is None)
    elif cmd == "solve-homogeneous":
        res = run_solve_homogeneous(L, args.sigma, _rhs_from(args, L.n_grid), out, args.tol)
    elif cmd == "solve-series":
        res = run_solve_series(L, _taylor_from(args), args.J, out, args.tol)
    elif cmd == "weak-check":
        res = run_weak_check(L, args.sigma, out, args.tol, args.count, args.seed)
    elif cmd == "rh-solve":
        inp = rh_input_from(L, _load_json(args.kappa_data, "boundary data"), L.n_grid)
        desc = _load_json(args.free_params, "free parameter")
        free = FreeParams.from_dict(desc) if desc else FreeParams()
        res = run_rh(L, inp, free, out, args.tol)
    else:
        res = run_render(L, args.figure, out, args.tol)
    payload = {"command": cmd, "source": source, "grid": args.grid, "result": res}
    rp.write_json(out / "report.json", payload)
    return payload


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        dispatch(args)
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - reported as an internal error
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
