"""Command-line front end: ``qsd <subcommand> [options]``.

Exit status: 0 when every check passes, 1 when a check fails, 2 on input
errors (bad flags, schema violations, inconsistent dimensions).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .algebra import FROBENIUS_NORM, OPERATOR_NORM, Seminorm, build_full_matrix_algebra, graded_family, triplet_norm
from .derivations import check_star_derivation, inner_derivation
from .errors import DerivationAxiomError, InducedMapUndefinedError, InstanceError, NotSpatialError, QsdError
from .gns import (
    cyclic_rank,
    form_from_functional,
    gns_construct,
    reconstruction_residual,
    verify_form_properties,
    verify_functional_bounds,
)
from .io import canonical_dumps, decode_matrix, decode_vector, encode_matrix, encode_vector, load_instance
from .limits import (
    CutoffFamily,
    SweepReport,
    boson_family,
    boson_probes,
    check_uniform_continuity,
    check_weak_convergence,
    spin_closed_form_sweep,
    spin_family,
    spin_probes,
    sweep_cutoff,
)
from .models import build_boson_model
from .spatiality import (
    commutant_basis,
    commutant_distance,
    construct_implementing_operator,
    solve_implementing_operator_ls,
    verify_spatiality,
)

SPIN_DENSE_MAX = 10
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="inp", metavar="FILE", help="instance JSON file")
    common.add_argument("--out", metavar="FILE", help="machine-readable report (JSON, or CSV for sweeps)")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=["boson", "spin"])
    model.add_argument("--modes", type=int, default=1)
    model.add_argument("--nmax", type=int, default=6)
    model.add_argument("--vector", default="number:0", help="boson cyclic vector, number:M")
    model.add_argument("--lmax", type=int, default=None)
    model.add_argument("--vmax", type=int, default=8)
    model.add_argument("--state", choices=["up", "alternating"], default="up")

    p = argparse.ArgumentParser(prog="qsd", description="Derivations of finite-dimensional *-algebras.")
    p.add_argument("--version", action="version", version=f"qsd {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("check", parents=[common], help="check the *-derivation axioms")
    sub.add_parser("gns", parents=[common], help="GNS construction of the functional")
    sub.add_parser("spatial", parents=[common], help="implementing operator via both solvers")
    b = sub.add_parser("bounds", parents=[common], help="functional and form bounds")
    b.add_argument("--candidate", type=float, default=None, help="candidate constant C")
    b.add_argument("--seminorm", default="operator", help="operator | frobenius | graded:A,B")
    sub.add_parser("sweep", parents=[common, model], help="cutoff sweep of ||H_n xi0|| and increments")
    sub.add_parser("weak", parents=[common, model], help="weak convergence of H_n to the limit")
    u = sub.add_parser("uniform", parents=[common, model], help="uniform continuity of delta_n")
    u.add_argument("--scaling", choices=["inverse", "linear"], default="inverse")
    u.add_argument("--count", type=int, default=10)
    u.add_argument("--bound", type=float, default=None)
    u.add_argument("--p", dest="pnorm", default="operator")
    u.add_argument("--q", dest="qnorm", default="operator")
    sub.add_parser("triplet", parents=[common, model], help="graded norms ||S^a X S^b||")
    return p


def _seminorm(spec: str, triplet=None) -> Seminorm:
    if spec == "operator":
        return OPERATOR_NORM
    if spec == "frobenius":
        return FROBENIUS_NORM
    if spec.startswith("graded:"):
        if triplet is None:
            raise UsageError("graded seminorm needs a triplet in the instance")
        try:
            a, b = (int(v) for v in spec[len("graded:"):].split(","))
        except ValueError:
            raise UsageError(f"bad seminorm {spec!r}") from None
        return Seminorm("graded", (a, b), triplet)
    raise UsageError(f"unknown seminorm {spec!r}")


def _need(inst, attr, flag="--in"):
    if inst is None:
        raise UsageError(f"{flag} instance file required")
    value = getattr(inst, attr)
    if value is None:
        raise InstanceError(f"$.{attr}", "required for this command")
    return value


def _occupation(spec: str) -> int:
    if not spec.startswith("number:"):
        raise UsageError(f"--vector must look like number:M, got {spec!r}")
    return int(spec.split(":", 1)[1])


def _family(args, inst) -> tuple[CutoffFamily | None, list, dict]:
    """(family, probes, description); family None means a closed-form spin sweep."""
    spec = None
    if args.model is not None:
        spec = {
            "model": args.model,
            "modes": args.modes,
            "nmax": args.nmax,
            "vector": args.vector,
            "lmax": args.lmax,
            "vmax": args.vmax,
            "state": args.state,
        }
    elif inst is not None and inst.family is not None:
        spec = dict(inst.family)
    if spec is None:
        raise UsageError("a family is required: --model boson|spin or a 'family' entry in --in")
    kind = spec["model"]
    if kind == "boson":
        modes, nmax = spec.get("modes") or 1, spec.get("nmax") or 6
        lmax = spec.get("lmax")
        lmax = modes * nmax if lmax is None else lmax
        m = build_boson_model(modes, nmax)
        occ = _occupation(spec.get("vector") or "number:0")
        return boson_family(m, lmax, occ), boson_probes(m), {"model": "boson", "modes": modes, "nmax": nmax, "lmax": lmax, "vector": f"number:{occ}"}
    if kind == "spin":
        vmax, state = spec.get("vmax") or 8, spec.get("state") or "up"
        desc = {"model": "spin", "vmax": vmax, "state": state}
        if vmax > SPIN_DENSE_MAX:
            return None, [], desc
        return spin_family(vmax, state, with_limit=True), spin_probes(vmax), desc
    gens = [decode_matrix(g) for g in spec.get("generators") or []]
    if not gens:
        raise InstanceError("$.family.generators", "explicit family needs generators")
    if "cyclic_vector" not in spec:
        raise InstanceError("$.family.cyclic_vector", "explicit family needs a cyclic vector")
    limit = decode_matrix(spec["limit"]) if "limit" in spec else None
    fam = CutoffFamily(tuple(gens), decode_vector(spec["cyclic_vector"]), limit)
    d = fam.dim
    probes = list(build_full_matrix_algebra(d).basis) if d <= 8 else [np.eye(d)]
    return fam, probes, {"model": "explicit", "count": len(gens)}


def _header(args) -> str:
    return f"qsd {args.command} | seed={args.seed} tol={args.tol:g}"


def _emit(args, report: dict, csv: str | None = None):
    if not args.out:
        return
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        if csv is not None and args.out.endswith(".csv"):
            fh.write(csv)
        else:
            fh.write(canonical_dumps(report))


def cmd_check(args, inst) -> int:
    delta = _need(inst, "derivation")
    rep = check_star_derivation(delta, samples=args.samples or 20, tol=args.tol, seed=args.seed)
    print(rep.summary())
    _emit(args, {"command": "check", "seed": args.seed, "report": rep})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_gns(args, inst) -> int:
    f = _need(inst, "functional")
    g = gns_construct(f)
    recon = reconstruction_residual(g, f)
    rank = cyclic_rank(g)
    ok = recon < args.tol and rank == g.hilbert_dim
    print(f"GNS: hilbert_dim={g.hilbert_dim} null_rank={g.null_rank} cyclic_rank={rank}")
    print(f"reconstruction |f(x) - <pi(x)xi,xi>| = {recon:.3e}: {'PASS' if ok else 'FAIL'}")
    _emit(
        args,
        {
            "command": "gns",
            "seed": args.seed,
            "hilbert_dim": g.hilbert_dim,
            "null_rank": g.null_rank,
            "cyclic_rank": rank,
            "reconstruction_residual": recon,
            "cyclic_vector": encode_vector(g.cyclic_vector),
            "gram_eigenvalues": [float(w) for w in g.eigenvalues],
            "passed": ok,
        },
    )
    return EXIT_OK if ok else EXIT_FAIL


def cmd_spatial(args, inst) -> int:
    f = _need(inst, "functional")
    delta = _need(inst, "derivation")
    g = gns_construct(f)
    ls = solve_implementing_operator_ls(delta, g)
    ls_check = verify_spatiality(delta, g, ls.H, args.tol)
    out = {"command": "spatial", "seed": args.seed, "hilbert_dim": g.hilbert_dim, "commutant_dim": ls.commutant_dim}
    out["least_squares"] = {
        "H": encode_matrix(ls.H),
        "eta": encode_vector(ls.eta),
        "gauge": ls.gauge,
        "residuals": ls.residuals | ls_check.residuals,
        "C": ls_check.details["C"],
    }
    print(f"least squares: commutator residual {ls_check.residuals['commutator']:.3e}, C = {ls_check.details['C']:.6g}")
    try:
        riesz = construct_implementing_operator(delta, g, tol=max(args.tol, 1e-9))
    except NotSpatialError as exc:
        print(f"Riesz route: not spatial ({exc})")
        out["riesz"] = {"error": str(exc), "witness": encode_matrix(exc.witness)}
        out["passed"] = False
        _emit(args, out)
        return EXIT_FAIL
    except (DerivationAxiomError, InducedMapUndefinedError) as exc:
        print(f"Riesz route: {exc}")
        out["riesz"] = {"error": str(exc)}
        out["passed"] = False
        _emit(args, out)
        return EXIT_FAIL
    r_check = verify_spatiality(delta, g, riesz.H, args.tol)
    comm = commutant_basis(g)
    gap = commutant_distance(riesz.H - ls.H, comm)
    print(f"Riesz route: commutator residual {r_check.residuals['commutator']:.3e}, C = {r_check.details['C']:.6g}")
    print(f"solvers differ by a commutant element up to {gap:.3e} (commutant dim {comm.shape[1]})")
    ok = ls_check.passed and r_check.passed and gap < max(args.tol, 1e-8)
    out["riesz"] = {
        "H": encode_matrix(riesz.H),
        "eta": encode_vector(riesz.eta),
        "gauge": riesz.gauge,
        "residuals": riesz.residuals | r_check.residuals,
        "C": r_check.details["C"],
    }
    out["commutant_gap"] = gap
    out["passed"] = ok
    if inst.triplet is not None:
        out["riesz"]["graded_norm_minus1"] = riesz.graded_norm(inst.triplet)
    print("PASS" if ok else "FAIL")
    _emit(args, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bounds(args, inst) -> int:
    f = _need(inst, "functional")
    delta = _need(inst, "derivation")
    p = _seminorm(args.seminorm, inst.triplet)
    n = args.samples or 200
    fb = verify_functional_bounds(f, delta, p, args.candidate, samples=n, seed=args.seed, tol=args.tol)
    phi = form_from_functional(f)
    fp = verify_form_properties(phi, delta, p, args.candidate, samples=n, seed=args.seed, tol=args.tol)
    print(fb.summary())
    print(fp.summary())
    out = {"command": "bounds", "seed": args.seed, "functional": fb, "form": fp}
    if inst.triplet is not None:
        fam = {}
        for s in graded_family(inst.triplet):
            fam[s.name] = verify_functional_bounds(f, delta, s, None, samples=n, seed=args.seed).kappa
        out["graded_kappas"] = fam
        print("graded kappas: " + ", ".join(f"{k}={v:.4g}" for k, v in fam.items()))
    ok = fp.invariance_residual < max(args.tol, 1e-12)
    if args.candidate is not None:
        ok = ok and bool(fb.passed) and bool(fp.passed)
    out["passed"] = ok
    _emit(args, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(args, inst) -> int:
    fam, probes, desc = _family(args, inst)
    if fam is None:
        rep = spin_closed_form_sweep(desc["vmax"], desc["state"], tol=args.tol)
    else:
        rep = sweep_cutoff(fam, probes, tol=args.tol)
    print(rep.summary())
    ok = all(rep.hypotheses.values())
    _emit(args, {"command": "sweep", "seed": args.seed, "family": desc, "report": rep}, csv=rep.to_csv())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_weak(args, inst) -> int:
    fam, probes, desc = _family(args, inst)
    if fam is None:
        raise UsageError(f"weak convergence needs the tensor form (vmax <= {SPIN_DENSE_MAX})")
    if desc["model"] == "boson":
        probes = list(build_full_matrix_algebra(fam.dim).basis)
    rep = check_weak_convergence(fam, probes, tol=args.tol)
    print(rep.summary())
    ok = rep.hypothesis_index is not None and rep.conclusion_index is not None
    _emit(args, {"command": "weak", "seed": args.seed, "family": desc, "report": rep})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_uniform(args, inst) -> int:
    triplet = inst.triplet if inst is not None else None
    p, q = _seminorm(args.pnorm, triplet), _seminorm(args.qnorm, triplet)
    if inst is not None and inst.derivation is not None and inst.derivation.is_inner and inst.family is None and args.model is None:
        H = inst.derivation.generator
        alg = inst.derivation.algebra
        factors = [1 / n if args.scaling == "inverse" else n for n in range(1, args.count + 1)]
        deltas = [inner_derivation(H * s, alg) for s in factors]
        desc = {"generator": "instance", "scaling": args.scaling, "count": args.count}
    else:
        fam, _, desc = _family(args, inst)
        if fam is None:
            raise UsageError(f"uniform continuity needs the tensor form (vmax <= {SPIN_DENSE_MAX})")
        alg = build_full_matrix_algebra(fam.dim)
        deltas = [inner_derivation(h, alg) for h in fam.generators]
    rep = check_uniform_continuity(deltas, p, q, args.bound, samples=args.samples or 100, seed=args.seed)
    print(rep.summary())
    _emit(args, {"command": "uniform", "seed": args.seed, "family": desc, "report": rep})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_triplet(args, inst) -> int:
    rows = {}
    ok = True
    slack = 1e-12
    if args.model == "boson":
        fam, _, desc = _family(args, inst)
        t = fam.triplet
        ops = {f"H_{L}": h for L, h in zip(fam.indices, fam.generators)}
        ops["H"] = fam.limit_generator
    else:
        t = _need(inst, "triplet")
        delta = _need(inst, "derivation")
        if not delta.is_inner:
            raise InstanceError("$.derivation", "triplet norms need an inner generator")
        ops = {"generator": delta.generator}
        desc = {"source": "instance"}
    for name, X in ops.items():
        norms = {f"{a},{b}": triplet_norm(X, t, a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
        mono = norms["-1,-1"] <= norms["0,0"] + slack and norms["0,0"] <= norms["1,1"] + slack * max(1.0, norms["1,1"])
        ok = ok and mono
        rows[name] = {"norms": norms, "monotone": mono}
        print(f"{name}: ||S^-1 X S^-1|| = {norms['-1,-1']:.6g}  ||X|| = {norms['0,0']:.6g}  ||S X S|| = {norms['1,1']:.6g}")
    sup_minus = max(r["norms"]["-1,-1"] for r in rows.values())
    print(f"sup ||S^-1 X S^-1|| = {sup_minus:.6g}; monotone: {ok}")
    _emit(args, {"command": "triplet", "seed": args.seed, "source": desc, "rows": rows, "sup_minus1": sup_minus, "passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "check": cmd_check,
    "gns": cmd_gns,
    "spatial": cmd_spatial,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "weak": cmd_weak,
    "uniform": cmd_uniform,
    "triplet": cmd_triplet,
}


def run(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    print(_header(args))
    try:
        inst = load_instance(args.inp) if args.inp else None
        return COMMANDS[args.command](args, inst)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qsd: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QsdError, OSError) as exc:
        print(f"qsd: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run())
