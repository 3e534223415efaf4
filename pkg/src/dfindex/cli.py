"""Command-line front-end: analysis, sweeps, sampling, and verification.

Subcommands
    analyze      index bounds for one domain (worm, ball, ellipsoid, or an
                 expression) -> report.json
    sweep        deformation sweep over a t-grid -> sweep.csv
    sample       boundary point sampling -> samples.csv
    verify-levi  automatic differentiation vs the closed-form worm Levi value
    schur-test   randomized property suite for the Schur frame transform
    phi-check    profile-function axiom suite

Exit codes: 0 success, 2 input error, 3 numerical-consistency failure.
A flat key=value config file can seed any option; explicit flags win.
All commands accept --threads (or the DFINDEX_THREADS environment variable);
execution is sequential, so results are identical for every thread count.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, dangelo, domains, exprparse, index, levi

__all__ = ["main", "run_verify_levi", "run_schur_suite", "run_phi_check",
           "worm_levi_closed_form", "EXIT_OK", "EXIT_INPUT", "EXIT_NUMERIC"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

LEVI_VERIFY_TOL = 1e-8
SCHUR_RESIDUAL_TOL = 1e-10
SCHUR_PROJECTION_TOL = 1e-8


class VerificationError(RuntimeError):
    """A verification subcommand found a numerical inconsistency."""


# -- small helpers ---------------------------------------------------------------


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _write_json(payload, path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _stamp(payload, args):
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    payload["threads"] = args.threads
    payload["version"] = __version__
    return payload


def _domain_from_args(args):
    if getattr(args, "expr", None):
        return exprparse.parse_expression(args.expr, n=getattr(args, "dim", None))
    name = getattr(args, "domain", "worm")
    if name == "worm":
        return domains.worm_rho(args.beta, args.t)
    if name == "ball":
        return domains.ball(getattr(args, "dim", None) or 2)
    if name == "ellipsoid":
        coeffs = getattr(args, "coeffs", None)
        if not coeffs:
            raise domains.DomainError("ellipsoid requires --coeffs")
        return domains.ellipsoid(coeffs)
    raise domains.DomainError(f"unknown domain {name!r}")


def _anchor_for(args, domain):
    anchor = getattr(args, "anchor", None)
    if anchor is not None:
        anchor = np.asarray(anchor, dtype=float)
        if anchor.size == domain.n:
            anchor = domains.coords_of_point(anchor)
        return anchor
    if domain.kind == "worm":
        return index.WORM_ANCHOR.copy()
    return np.zeros(2 * domain.n)


# -- analyze ----------------------------------------------------------------------


def _analyze_worm(args):
    if args.t != 0.0:
        domain = domains.worm_rho(args.beta, args.t)
        spc, min_eig = index.spc_check(domain, index.WORM_ANCHOR,
                                       count=args.spc_count, seed=args.seed)
        if not spc:
            raise levi.LeviError(
                f"worm fiber t={args.t} fails the strong pseudoconvexity "
                f"check (min eig {min_eig:.3e})")
        return index._spc_report(args.t, args.beta, args.seed, min_eig,
                                 args.spc_count)
    domain = domains.worm_rho(args.beta, 0.0)
    points = domains.annulus_points(args.beta, args.annulus_count)
    family = index.RhoFamily(domain, index.worm_psi_basis())
    report = index.optimize_rho(domain, family, points, budget=args.budget,
                                seed=args.seed, t=0.0, beta=args.beta)
    truth = {"df": index.GROUND_TRUTH_DF, "s": index.GROUND_TRUTH_S,
             "relation": 1.0 / index.GROUND_TRUTH_DF + 1.0 / index.GROUND_TRUTH_S}
    object.__setattr__(report, "ground_truth", truth)
    return report


def _analyze_generic(args, domain):
    anchor = _anchor_for(args, domain)
    points = domains.boundary_sample(domain, anchor, args.count, seed=args.seed)
    weak = []
    min_eig = math.inf
    for p in points:
        frame = levi.tangent_frame(p.wirt)
        nd = levi.levi_matrix(p.wirt, frame)
        min_eig = min(min_eig, float(nd.eigenvalues[0]) / nd.scale)
        if nd.m > 0:
            weak.append(p)
    samples = index.criterion_samples(domain, weak)
    spc = not samples and min_eig > index.SPC_THRESHOLD
    if spc:
        df_val, s_val = 1.0, 1.0
    else:
        df_val, s_val = index.df_bound(samples), index.s_bound(samples)
    return index.IndexReport(
        df_lower=df_val, s_upper=s_val, null_count=len(samples), spc=spc,
        t=0.0, beta=float("nan"), seed=args.seed,
        tolerances={"spc_threshold": index.SPC_THRESHOLD,
                    "msq_eps": index.MSQ_EPS},
        diagnostics={"min_levi_eigenvalue": min_eig,
                     "boundary_samples": args.count})


def cmd_analyze(args):
    if getattr(args, "expr", None) or args.domain != "worm":
        domain = _domain_from_args(args)
        report = _analyze_generic(args, domain)
        label = args.expr if getattr(args, "expr", None) else args.domain
    else:
        report = _analyze_worm(args)
        label = "worm"
    payload = report.to_dict()
    payload["domain"] = label
    _write_json(_stamp(payload, args), args.output)
    s_text = "inf" if report.s_upper == math.inf else f"{report.s_upper:.6f}"
    print(f"df_lower = {report.df_lower:.6f}  s_upper = {s_text}  "
          f"null_count = {report.null_count}  spc = {report.spc}",
          file=sys.stderr)
    return EXIT_OK


# -- sweep ------------------------------------------------------------------------


def cmd_sweep(args):
    reports = index.deformation_sweep(
        args.beta, args.t, annulus_count=args.annulus_count,
        spc_count=args.spc_count, budget=args.budget, seed=args.seed)
    with open(args.output, "w") as fh:
        fh.write("t,df_lower,s_upper,null_count,spc\n")
        for rep in reports:
            s_text = "inf" if rep.s_upper == math.inf else repr(rep.s_upper)
            fh.write(f"{rep.t},{rep.df_lower!r},{s_text},"
                     f"{rep.null_count},{rep.spc}\n")
    if args.json:
        payload = {"reports": [rep.to_dict() for rep in reports]}
        _write_json(_stamp(payload, args), args.json)
    for rep in reports:
        s_text = "inf" if rep.s_upper == math.inf else f"{rep.s_upper:.4f}"
        print(f"t={rep.t:+.3f}  df_lower={rep.df_lower:.4f}  "
              f"s_upper={s_text}  spc={rep.spc}", file=sys.stderr)
    return EXIT_OK


# -- sample -----------------------------------------------------------------------


def cmd_sample(args):
    domain = _domain_from_args(args)
    anchor = _anchor_for(args, domain)
    points = domains.boundary_sample(domain, anchor, args.count, seed=args.seed)
    domains.samples_to_csv(points, args.output)
    print(f"wrote {len(points)} boundary samples to {args.output}",
          file=sys.stderr)
    return EXIT_OK


# -- verify-levi ------------------------------------------------------------------


def worm_levi_closed_form(phi, z, w, tsq=0.0):
    """Closed-form Levi value of the rescaled worm defining function on the
    tangent vector L = -rho_w d/dz + rho_z d/dw, carrying the e^{2 arg w}
    factor of the local rescaling.

    With g = z - e^{i log|w|^2} the bracket is |i zbar g + phi'|^2
    + |g|^2 (phi + phi'') + |t|^2 |g|^2: on the boundary |g|^2 equals
    1 - phi - |t|^2, which is where the deformation term enters.  The overall
    constant matches this package's Levi normalization.
    """
    u = math.log(abs(w) ** 2)
    g = z - cmath.exp(1j * u)
    first = 1j * z.conjugate() * g + phi.d1(u)
    inner = (abs(first) ** 2
             + abs(g) ** 2 * (phi.value(u) + phi.d2(u) + tsq))
    return math.exp(2.0 * cmath.phase(w)) / abs(w) ** 2 * inner


def run_verify_levi(beta, t, count, seed, w_floor=1e-6):
    """Compare AD Levi values against the closed form on random samples.

    The AD side multiplies Levi_rho(L, L) by e^{2 arg w} (the conformal
    rescaling is criterion-neutral on tangent vectors at the boundary); arg
    uses the principal branch, and only this positive factor is consumed.
    """
    domain = domains.worm_rho(beta, t)
    phi = domain.params["phi"]
    points = domains.boundary_sample(domain, index.WORM_ANCHOR, count,
                                     seed=seed)
    max_rel = 0.0
    used = 0
    for p in points:
        z, w = complex(p.z[0]), complex(p.z[1])
        if abs(w) < w_floor:
            continue  # coordinate singularity of the w-logarithm
        used += 1
        grad = p.wirt.grad
        L = np.array([-grad[1], grad[0]])
        lhs = levi.levi_form(p.wirt, L, L).real * math.exp(2.0 * cmath.phase(w))
        rhs = worm_levi_closed_form(phi, z, w, tsq=abs(t) ** 2)
        rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-10)
        max_rel = max(max_rel, rel)
    return {"beta": beta, "t": t, "count": used, "seed": seed,
            "max_rel_error": float(max_rel), "tolerance": LEVI_VERIFY_TOL,
            "passed": bool(max_rel < LEVI_VERIFY_TOL)}


def cmd_verify_levi(args):
    results = [run_verify_levi(args.beta, t, args.count, args.seed)
               for t in args.t]
    payload = {"results": results}
    _write_json(_stamp(payload, args), args.output)
    if not all(r["passed"] for r in results):
        raise VerificationError(
            "closed-form Levi comparison failed: " + json.dumps(results))
    return EXIT_OK


# -- schur-test -------------------------------------------------------------------


def _random_null_matrix(rng, size, null_dim, cond_limit=1e6):
    """Random PSD Hermitian matrix with an exact null space of the given
    dimension and a well-conditioned trailing block."""
    for _ in range(100):
        G = rng.normal(size=(size - null_dim, size)) \
            + 1j * rng.normal(size=(size - null_dim, size))
        M = G.conj().T @ G
        C = M[null_dim:, null_dim:]
        if np.linalg.cond(C) < cond_limit:
            return M
    raise VerificationError("failed to draw a well-conditioned test matrix")


def run_schur_suite(count=1000, seed=0, min_size=2, max_size=8):
    """Randomized identity and null-containment checks for schur_frame."""
    rng = np.random.default_rng(seed)
    max_resid = 0.0
    max_proj = 0.0
    for _ in range(count):
        size = int(rng.integers(min_size, max_size + 1))
        m = int(rng.integers(1, size))
        M = _random_null_matrix(rng, size, m)
        vals, vecs = levi.jacobi_eigh(M)
        res = levi.schur_frame(M, m)
        max_resid = max(max_resid,
                        res.residual / max(np.linalg.norm(M), 1e-300))
        # null coefficient vectors must lie in the span of the first m
        # transformed frame rows
        kernel = vecs[:, vals < 1e-10 * max(1.0, abs(vals).max())]
        span = res.transformed[:m].T
        q, _ = np.linalg.qr(span)
        for k in range(kernel.shape[1]):
            b = np.conj(kernel[:, k])
            proj = np.linalg.norm(b - q @ (q.conj().T @ b))
            max_proj = max(max_proj, proj)
    return {"count": count, "seed": seed,
            "max_identity_residual": float(max_resid),
            "max_projection_residual": float(max_proj),
            "identity_tolerance": SCHUR_RESIDUAL_TOL,
            "projection_tolerance": SCHUR_PROJECTION_TOL,
            "passed": bool(max_resid < SCHUR_RESIDUAL_TOL
                           and max_proj < SCHUR_PROJECTION_TOL)}


def cmd_schur_test(args):
    result = run_schur_suite(count=args.count, seed=args.seed)
    _write_json(_stamp(dict(result), args), args.output)
    if not result["passed"]:
        raise VerificationError("Schur property suite failed: "
                                + json.dumps(result))
    return EXIT_OK


# -- phi-check --------------------------------------------------------------------


def run_phi_check(beta, grid_points=10000):
    """Axiom suite for the profile function phi."""
    phi = domains.make_phi(beta)
    r, a = phi.r, phi.a
    xs = np.linspace(-a - 1.0, a + 1.0, grid_points)
    vals = np.array([phi.value(x) for x in xs])
    second = np.array([phi.d2(x) for x in xs])
    even_defect = max(abs(phi.value(x) - phi.value(-x)) for x in xs)
    inside = np.abs(xs) <= r
    zero_on_interval = float(np.abs(vals[inside]).max())
    # exp(-1/s) underflows for s below ~1/745, so positivity immediately
    # outside [-r, r] is below double precision; check it at representable
    # distance and require monotone growth outward
    outside = np.abs(xs) >= r + 0.01
    positive_outside = bool(np.all(vals[outside] > 0.0))
    right = vals[xs >= r]
    monotone_outward = bool(np.all(np.diff(right) >= 0.0))
    quad_err = domains.phi_quadrature_check(phi)
    checks = {
        "nonnegative": bool(np.all(vals >= 0.0)),
        "even_defect": float(even_defect),
        "min_second_derivative": float(second.min()),
        "zero_on_interval": zero_on_interval,
        "positive_outside_interval": positive_outside,
        "monotone_outward": monotone_outward,
        "value_at_a": float(phi.value(a)),
        "slope_at_a": float(phi.d1(a)),
        "quadrature_error": float(quad_err),
    }
    passed = (checks["nonnegative"]
              and checks["even_defect"] == 0.0
              and checks["min_second_derivative"] >= -1e-12
              and checks["zero_on_interval"] <= 1e-12
              and checks["positive_outside_interval"]
              and checks["monotone_outward"]
              and abs(checks["value_at_a"] - 1.0) <= 1e-10
              and checks["slope_at_a"] > 0.0
              and checks["quadrature_error"] < 1e-10)
    return {"beta": beta, "r": r, "a": a, "checks": checks, "passed": passed}


def cmd_phi_check(args):
    result = run_phi_check(args.beta)
    _write_json(_stamp(dict(result), args), args.output)
    if not result["passed"]:
        raise VerificationError("phi axiom suite failed: "
                                + json.dumps(result))
    return EXIT_OK


# -- argument plumbing ------------------------------------------------------------


def _default_threads():
    env = os.environ.get("DFINDEX_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=_default_threads(),
                        help="accepted for interface stability; execution is "
                             "sequential and results are thread-count "
                             "independent")
    common.add_argument("--config", default=None,
                        help="flat key=value config file; explicit flags win")

    parser = argparse.ArgumentParser(
        prog="dfindex",
        description="Index bound analyses for pseudoconvex domains")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", parents=[common],
                        help="index bounds for one domain")
    pa.add_argument("--domain", default="worm",
                    choices=["worm", "ball", "ellipsoid"])
    pa.add_argument("--expr", default=None,
                    help="defining function expression in z1..zn")
    pa.add_argument("--dim", type=int, default=None)
    pa.add_argument("--coeffs", type=_parse_floats, default=None)
    pa.add_argument("--anchor", type=_parse_floats, default=None,
                    help="interior anchor, interleaved re/im coordinates")
    pa.add_argument("--beta", type=float, default=3.0 * math.pi / 4.0)
    pa.add_argument("--t", type=float, default=0.0)
    pa.add_argument("--budget", type=int, default=400)
    pa.add_argument("--annulus-count", type=int, default=33)
    pa.add_argument("--spc-count", type=int, default=index.SPC_SAMPLES)
    pa.add_argument("--count", type=int, default=400,
                    help="boundary samples for non-worm domains")
    pa.add_argument("--output", default="report.json")
    pa.set_defaults(func=cmd_analyze)

    pw = sub.add_parser("sweep", parents=[common],
                        help="deformation sweep over a t-grid")
    pw.add_argument("--beta", type=float, default=3.0 * math.pi / 4.0)
    pw.add_argument("--t", type=_parse_floats, default=[0.0, 0.05, 0.1, 0.3])
    pw.add_argument("--budget", type=int, default=400)
    pw.add_argument("--annulus-count", type=int, default=33)
    pw.add_argument("--spc-count", type=int, default=index.SPC_SAMPLES)
    pw.add_argument("--output", default="sweep.csv")
    pw.add_argument("--json", default=None)
    pw.set_defaults(func=cmd_sweep)

    ps = sub.add_parser("sample", parents=[common],
                        help="sample boundary points to CSV")
    ps.add_argument("--domain", default="worm",
                    choices=["worm", "ball", "ellipsoid"])
    ps.add_argument("--expr", default=None)
    ps.add_argument("--dim", type=int, default=None)
    ps.add_argument("--coeffs", type=_parse_floats, default=None)
    ps.add_argument("--anchor", type=_parse_floats, default=None)
    ps.add_argument("--beta", type=float, default=3.0 * math.pi / 4.0)
    ps.add_argument("--t", type=float, default=0.0)
    ps.add_argument("--count", type=int, default=500)
    ps.add_argument("--output", default="samples.csv")
    ps.set_defaults(func=cmd_sample)

    pv = sub.add_parser("verify-levi", parents=[common],
                        help="AD Levi values vs the closed form")
    pv.add_argument("--beta", type=float, default=3.0 * math.pi / 4.0)
    pv.add_argument("--t", type=_parse_floats, default=[0.0, 0.3])
    pv.add_argument("--count", type=int, default=500)
    pv.add_argument("--output", default="-")
    pv.set_defaults(func=cmd_verify_levi)

    pt = sub.add_parser("schur-test", parents=[common],
                        help="randomized Schur transform property suite")
    pt.add_argument("--count", type=int, default=1000)
    pt.add_argument("--output", default="-")
    pt.set_defaults(func=cmd_schur_test)

    pp = sub.add_parser("phi-check", parents=[common],
                        help="profile function axiom suite")
    pp.add_argument("--beta", type=float, default=3.0 * math.pi / 4.0)
    pp.add_argument("--output", default="-")
    pp.set_defaults(func=cmd_phi_check)

    return parser


def _load_config(path):
    tokens = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise exprparse.ParseError(
                    f"config line {lineno} is not key=value: {line!r}", 0)
            key, value = (part.strip() for part in line.split("=", 1))
            tokens += [f"--{key.replace('_', '-')}", value]
    return tokens


def _inject_config(argv):
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise exprparse.ParseError("--config requires a path", 0)
    tokens = _load_config(argv[i + 1])
    # keep the flag so the subparser records it; config tokens go right after
    # the subcommand, so explicit flags (later tokens) override them
    for j, tok in enumerate(argv):
        if not tok.startswith("-"):
            return argv[:j + 1] + tokens + argv[j + 1:]
    return argv + tokens


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _inject_config(argv)
    except (OSError, exprparse.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (dangelo.DAngeloError, levi.LeviError, VerificationError) as exc:
        print(f"numerical consistency failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (exprparse.ParseError, domains.DomainError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
