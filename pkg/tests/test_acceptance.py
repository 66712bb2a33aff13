"""Acceptance criteria 1-8, each timed against its runtime budget.

Every criterion prints one line ``criterion N: PASS|FAIL ...``; the lines are
repeated in the pytest terminal summary.
"""
import contextlib
import json
import time
from pathlib import Path

import numpy as np
import pytest

from qsd.algebra import build_full_matrix_algebra, op_norm, triplet_norm
from qsd.cli import run
from qsd.derivations import check_star_derivation, inner_derivation, tabulated_derivation, zero_derivation
from qsd.gns import (
    density_functional,
    gns_construct,
    reconstruction_residual,
    trace_state,
    vector_state,
    verify_functional_bounds,
)
from qsd.io import canonical_dumps, instance_document
from qsd.limits import (
    boson_family,
    boson_probes,
    check_uniform_continuity,
    check_weak_convergence,
    spin_closed_form_sweep,
    spin_family,
    spin_probes,
    sweep_cutoff,
    tau_cauchy_limit,
)
from qsd.models import (
    alternating_pattern,
    boson_cutoff,
    build_boson_model,
    build_spin_model,
    closed_form_eigenvalue,
    product_state,
    up_pattern,
)
from qsd.spatiality import (
    commutant_basis,
    commutant_distance,
    construct_implementing_operator,
    solve_implementing_operator_ls,
    verify_spatiality,
)

from conftest import ACCEPTANCE_LINES, SIGMA3, random_density, random_hermitian, random_unit_vector


@contextlib.contextmanager
def criterion(number, budget, title):
    start = time.perf_counter()
    info = {}
    try:
        yield info
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"criterion {number}: FAIL {title} ({elapsed:.2f}s / {budget}s) {type(exc).__name__}: {exc}"
        ACCEPTANCE_LINES[number] = line.splitlines()[0]
        print(ACCEPTANCE_LINES[number])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    extra = " ".join(f"{k}={v}" for k, v in info.items())
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} ({elapsed:.2f}s / {budget}s) {extra}".rstrip()
    print(ACCEPTANCE_LINES[number])
    assert ok, f"runtime {elapsed:.2f}s exceeds {budget}s"


def test_criterion_1_derivation_axioms():
    with criterion(1, 10, "derivation axiom suite") as info:
        rng = np.random.default_rng(101)
        algebras = {d: build_full_matrix_algebra(d) for d in range(2, 7)}
        worst = 0.0
        for k in range(200):
            d = 2 + k % 5
            rep = check_star_derivation(inner_derivation(random_hermitian(rng, d), algebras[d]), seed=k)
            assert rep.passed, rep.summary()
            worst = max(worst, max(rep.residuals.values()))
        assert worst < 1e-10
        for k in range(50):
            d = 2 + k % 5
            alg = algebras[d]
            images = inner_derivation(random_hermitian(rng, d), alg).basis_images()
            j = int(rng.integers(alg.size))
            images[j] = images[j] + rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            rep = check_star_derivation(tabulated_derivation(alg, images), seed=k)
            assert not rep.passed
            assert rep.witness is not None and rep.witness["at"]
            pair = rep.details["leibniz_worst_pair"]
            assert len(pair) == 2 and all(p in alg.labels for p in pair)
            assert rep.residuals["leibniz"] > 1e-10
        info["max_residual"] = f"{worst:.2e}"


def test_criterion_2_gns_reconstruction():
    with criterion(2, 30, "GNS reconstruction") as info:
        rng = np.random.default_rng(202)
        worst = 0.0
        for k in range(100):
            d = 1 + k % 5
            alg = build_full_matrix_algebra(d)
            if k % 2:
                f = density_functional(alg, random_density(rng, d, rank=int(rng.integers(1, d + 1))))
            else:
                f = vector_state(alg, random_unit_vector(rng, d))
            g = gns_construct(f)
            # direct oracle on every basis element
            for b in alg.basis:
                err = abs(f(b) - np.vdot(g.cyclic_vector, g.pi(b) @ g.cyclic_vector))
                worst = max(worst, err)
            assert reconstruction_residual(g, f) < 1e-10
            if k % 2 == 0:
                assert g.hilbert_dim == d
        assert worst < 1e-10
        assert gns_construct(trace_state(build_full_matrix_algebra(2))).hilbert_dim == 4
        info["max_residual"] = f"{worst:.2e}"


def test_criterion_3_spatiality_round_trip():
    with criterion(3, 60, "spatiality round trip") as info:
        rng = np.random.default_rng(303)
        worst_res, worst_gap = 0.0, 0.0
        for k in range(50):
            d = 2 + k % 3
            alg = build_full_matrix_algebra(d)
            f = vector_state(alg, random_unit_vector(rng, d))
            g = gns_construct(f)
            delta = inner_derivation(random_hermitian(rng, d), alg)
            riesz = construct_implementing_operator(delta, g)
            ls = solve_implementing_operator_ls(delta, g)
            for sol in (riesz, ls):
                rep = verify_spatiality(delta, g, sol.H, tol=1e-8)
                assert rep.passed
                worst_res = max(worst_res, rep.residuals["commutator"])
                bound = verify_functional_bounds(f, delta, candidate_C=rep.details["C"], samples=200, seed=k)
                assert bound.passed and bound.samples == 200 + alg.size
            gap = commutant_distance(riesz.H - ls.H, commutant_basis(g))
            worst_gap = max(worst_gap, gap)
            assert gap < 1e-8
        info["max_residual"] = f"{worst_res:.2e}"
        info["max_commutant_gap"] = f"{worst_gap:.2e}"


def test_criterion_4_boson_exact_values():
    with criterion(4, 5, "boson exact values") as info:
        tol = 1e-12
        rng = np.random.default_rng(404)
        for modes, nmax in ((1, 6), (1, 9), (2, 6)):
            m = build_boson_model(modes, nmax)
            L_range = range(modes * nmax + 1)
            cut = [boson_cutoff(m, L) for L in L_range]
            assert max(np.linalg.norm(h @ m.number_state(0)) for h in cut) == 0
            for M in (1, 2, 3):
                sup = max(np.linalg.norm(h @ m.number_state(M)) for h in cut)
                assert abs(sup - M) < tol
            t = m.triplet()
            for L, h in zip(L_range, cut):
                support = m.numbers <= L
                psi = np.where(support, rng.standard_normal(m.dim) + 1j * rng.standard_normal(m.dim), 0)
                assert np.linalg.norm((h - m.H) @ psi) < tol
                assert triplet_norm(h, t, -1, -1) <= 0.25 + tol
            assert abs(triplet_norm(m.H, t, -1, -1) - 0.25) < tol
        info["checked"] = "modes/nmax (1,6) (1,9) (2,6)"


def test_criterion_5_spin_exact_values():
    with criterion(5, 20, "spin exact values") as info:
        tol = 1e-12
        for V in range(2, 10):
            s = build_spin_model(V)
            psi = product_state(up_pattern(V))
            assert np.linalg.norm(s.apply(up_pattern(V)) - V * psi) < tol
        for V in (2, 10, 999, 12345, 10**5, 10**6 - 1, 10**6):
            assert closed_form_eigenvalue(up_pattern(V)) == V
            eps = V % 2
            assert abs(closed_form_eigenvalue(alternating_pattern(V)) - eps ** 2 / V) < tol
        for V in range(1, 11):
            s = build_spin_model(V)
            assert abs(np.linalg.norm(s.apply(alternating_pattern(V))) - (V % 2) ** 2 / V) < tol
            # every product state is a basis vector; compare the full diagonal with the closed form
            diag = s.H_V.diagonal().real
            bits = (np.arange(2 ** V)[:, None] >> (V - 1 - np.arange(V))[None, :]) & 1
            closed = np.array([closed_form_eigenvalue(1 - 2 * b) for b in bits])
            assert np.max(np.abs(diag - closed)) < tol
            offdiag = s.H_V - s.H_V.multiply(np.eye(2 ** V) != 0)
            assert offdiag.count_nonzero() == 0
        up = sweep_cutoff(spin_family(9, "up"), spin_probes(9))
        alt = sweep_cutoff(spin_family(9, "alternating"), spin_probes(9))
        assert up.diverging and alt.tends_to_zero
        big = spin_closed_form_sweep(10**6, "up")
        assert big.diverging and big.norm_Hn_xi0[-1] == 10**6
        assert spin_closed_form_sweep(10**6, "alternating").tends_to_zero
        info["flags"] = "up diverging, alternating -> 0"


def test_criterion_6_cutoff_pipeline():
    with criterion(6, 10, "cutoff-limit pipeline") as info:
        nmax = 6
        m = build_boson_model(1, nmax)
        fam = boson_family(m, 2 * nmax, 0)
        rep = sweep_cutoff(fam, boson_probes(m))
        assert all(rep.hypotheses.values()), rep.hypotheses
        assert rep.sup == 0
        alg = build_full_matrix_algebra(m.dim)
        lim = tau_cauchy_limit([inner_derivation(h, alg) for h in fam.generators])
        assert check_star_derivation(lim).passed
        g = gns_construct(vector_state(alg, m.number_state(0)))
        H = solve_implementing_operator_ls(lim, g).H
        spatial = verify_spatiality(lim, g, H, tol=1e-8)
        assert spatial.passed
        weak = check_weak_convergence(fam, list(alg.basis))
        beyond = [k for k, L in enumerate(fam.indices) if L >= nmax]
        assert all(weak.hypothesis_gaps[k] == 0 and weak.conclusion_gaps[k] == 0 for k in beyond)
        spin = sweep_cutoff(spin_family(9, "up"), spin_probes(9))
        assert not spin.hypotheses["(iii) sup bounded"]
        info["spatial_residual"] = f"{spatial.residuals['commutator']:.2e}"
        info["spin_up"] = "fails (iii)"


def test_criterion_7_uniform_continuity():
    with criterion(7, 5, "uniform continuity") as info:
        alg = build_full_matrix_algebra(3)
        H = random_hermitian(np.random.default_rng(707), 3)
        rep = check_uniform_continuity([inner_derivation(H / n, alg) for n in range(1, 21)])
        assert rep.uniform and abs(rep.sup_kappa - rep.kappas[0]) < 1e-10
        m2 = build_full_matrix_algebra(2)
        bad = check_uniform_continuity([inner_derivation(n * SIGMA3, m2) for n in range(1, 21)])
        assert not bad.uniform and not bad.passed
        info["sup_kappa"] = f"{rep.sup_kappa:.6g}"


INSTANCES = Path(__file__).resolve().parent.parent / "instances"

# the example commands documented in README.md, with --out added where absent
CLI_EXAMPLES = [
    "check --in {zero} --out {out}.json",
    "gns --in {s3} --out {out}.json",
    "spatial --in {s3} --out {out}.json",
    "bounds --in {s3} --candidate 1 --seminorm operator --out {out}.json",
    "uniform --in {s3} --scaling inverse --count 10 --out {out}.json",
    "triplet --in {s3} --out {out}.json",
    "sweep --model boson --modes 1 --nmax 12 --vector number:0 --lmax 12 --out {out}.csv",
    "sweep --model spin --vmax 9 --state up --out {out}.json",
    "sweep --model spin --vmax 100000 --state alternating --out {out}.json",
    "weak --model boson --nmax 6 --lmax 12 --out {out}.json",
    "triplet --model boson --nmax 6 --out {out}.json",
]


def test_criterion_8_cli_determinism(tmp_path, capsys):
    with criterion(8, 120, "CLI determinism") as info:
        zero, s3 = INSTANCES / "zero_derivation.json", INSTANCES / "sigma3.json"
        # the shipped zero-derivation instance is regenerated here to guard against drift
        m2 = build_full_matrix_algebra(2)
        assert json.loads(zero.read_text()) == json.loads(
            canonical_dumps(instance_document(m2, derivation=zero_derivation(m2), full_matrix=True))
        )
        for k, template in enumerate(CLI_EXAMPLES):
            outputs, codes = [], []
            for rep in range(2):
                out = str(tmp_path / f"run{k}_{rep}")
                argv = template.format(zero=zero, s3=s3, out=out).split()
                codes.append(run(argv))
                path = next(a for a in argv if a.startswith(out))
                with open(path, "rb") as fh:
                    outputs.append(fh.read())
            assert codes[0] == codes[1] and codes[0] in (0, 1)
            assert outputs[0] == outputs[1], f"non-deterministic output for {template}"
            assert outputs[0]
        capsys.readouterr()
        info["commands"] = len(CLI_EXAMPLES)
