import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsd.algebra import build_full_matrix_algebra
from qsd.derivations import check_star_derivation, inner_derivation, zero_derivation
from qsd.errors import MissingLimitError, NotConvergedError
from qsd.limits import (
    CSV_COLUMNS,
    CutoffFamily,
    boson_family,
    boson_probes,
    cauchy_at_tolerance,
    cauchy_profile,
    check_uniform_continuity,
    check_weak_convergence,
    is_diverging,
    limit_exists_on,
    settle_index,
    spin_closed_form_sweep,
    spin_family,
    spin_probes,
    sweep_cutoff,
    tau_cauchy_limit,
    tends_to_zero,
)
from qsd.models import build_boson_model

from conftest import SIGMA3, random_hermitian, unit

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_boson_sweep_vacuum():
    m = build_boson_model(1, 6)
    rep = sweep_cutoff(boson_family(m, 6, 0), boson_probes(m))
    assert rep.norm_Hn_xi0 == [0.0] * 7
    assert rep.sup == 0 and not rep.diverging


def test_boson_sweep_phi3():
    m = build_boson_model(1, 6)
    rep = sweep_cutoff(boson_family(m, 6, 3), boson_probes(m))
    assert rep.norm_Hn_xi0 == [0.0, 0.0, 0.0, 3.0, 3.0, 3.0, 3.0]
    assert rep.sup == 3 and rep.nondecreasing


def test_spin_up_sweep_diverges():
    rep = sweep_cutoff(spin_family(6, "up"), spin_probes(6))
    np.testing.assert_allclose(rep.norm_Hn_xi0, np.arange(1, 7), atol=1e-12)
    assert rep.diverging and not rep.hypotheses["(iii) sup bounded"]


def test_spin_alternating_sweep_tends_to_zero():
    rep = sweep_cutoff(spin_family(8, "alternating"), spin_probes(8))
    expected = [(V % 2) / V for V in range(1, 9)]
    np.testing.assert_allclose(rep.norm_Hn_xi0, expected, atol=1e-12)
    assert rep.tends_to_zero and not rep.diverging


def test_closed_form_sweep_matches_dense():
    dense = sweep_cutoff(spin_family(7, "up"), spin_probes(7))
    closed = spin_closed_form_sweep(7, "up")
    np.testing.assert_allclose(closed.norm_Hn_xi0, dense.norm_Hn_xi0, atol=1e-12)
    assert closed.diverging == dense.diverging


def test_csv_layout():
    m = build_boson_model(1, 3)
    text = sweep_cutoff(boson_family(m, 3, 0), boson_probes(m)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "# qsd-report-v1"
    assert lines[1] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2 + 4
    assert lines[-1].split(",")[2] == ""


def test_weak_convergence_boson_matrix_units():
    m = build_boson_model(1, 7)
    fam = boson_family(m, 7, 0)
    units = [unit(8, k, 0) for k in range(8)]
    rep = check_weak_convergence(fam, units)
    assert all(g == 0 for g in rep.hypothesis_gaps)
    assert rep.hypothesis_index == 0
    assert rep.conclusion_index == 7
    assert rep.conclusion_gaps[-1] == 0
    # gaps vanish on pairs supported at number <= L
    for L, HL in enumerate(fam.generators):
        for j in range(L + 1):
            for k in range(L + 1):
                assert abs(np.vdot(units[k][:, 0], (HL - m.H) @ units[j][:, 0])) == 0


def test_weak_convergence_spin_alternating():
    fam = spin_family(8, "alternating", with_limit=True)
    rep = check_weak_convergence(fam, [np.eye(2 ** 8)])
    expected = [(V % 2) / V for V in range(1, 9)]
    np.testing.assert_allclose(rep.hypothesis_gaps, expected, atol=1e-12)
    odd = rep.hypothesis_gaps[::2]
    assert all(a > b for a, b in zip(odd, odd[1:]))


def test_weak_convergence_constant_family():
    H = np.diag([1.0, 2.0, 3.0])
    fam = CutoffFamily((H, H, H), np.ones(3) / np.sqrt(3), limit_generator=H)
    rep = check_weak_convergence(fam, [np.eye(3), unit(3, 1, 0)])
    assert rep.hypothesis_gaps == [0.0] * 3 and rep.conclusion_gaps == [0.0] * 3


def test_weak_convergence_needs_limit():
    with pytest.raises(MissingLimitError):
        check_weak_convergence(spin_family(3), [np.eye(8)])


def test_uniform_scaled_generator():
    alg = build_full_matrix_algebra(3)
    H = random_hermitian(np.random.default_rng(3), 3)
    rep = check_uniform_continuity([inner_derivation(H / n, alg) for n in range(1, 11)])
    k1 = rep.kappas[0]
    for n, k in enumerate(rep.kappas, start=1):
        assert k == pytest.approx(k1 / n, rel=1e-10)
    assert rep.uniform and abs(rep.sup_kappa - k1) < 1e-10


def test_uniform_rejects_growth(m2):
    rep = check_uniform_continuity([inner_derivation(n * SIGMA3, m2) for n in range(1, 11)], bound=100.0)
    assert not rep.uniform and not rep.passed
    x = unit(2, 0, 1)
    ratios = [np.linalg.norm(inner_derivation(n * SIGMA3, m2)(x), 2) for n in range(1, 11)]
    np.testing.assert_allclose(ratios, 2 * np.arange(1, 11))


def test_uniform_zero(m2):
    rep = check_uniform_continuity([zero_derivation(m2)] * 4)
    assert rep.kappas == [0.0] * 4 and rep.uniform


def test_tau_limit_geometric(m2):
    deltas = [inner_derivation((1 - 2.0 ** -n) * SIGMA3, m2) for n in range(1, 41)]
    lim = tau_cauchy_limit(deltas, tol=1e-8)
    target = inner_derivation(SIGMA3, m2)
    for b in m2.basis:
        assert np.linalg.norm(lim(b) - target(b)) < 1e-8
    assert check_star_derivation(lim).passed


def test_tau_limit_constant(m2):
    deltas = [inner_derivation(SIGMA3, m2)] * 5
    assert cauchy_profile(deltas) == [0.0] * 4
    lim = tau_cauchy_limit(deltas)
    for b in m2.basis:
        np.testing.assert_allclose(lim(b), deltas[0](b), atol=0)


def test_tau_limit_alternating_sign(m2):
    deltas = [inner_derivation((-1) ** n * SIGMA3, m2) for n in range(1, 12)]
    prof = cauchy_profile(deltas)
    np.testing.assert_allclose(prof, 4.0)
    with pytest.raises(NotConvergedError) as exc:
        tau_cauchy_limit(deltas)
    assert exc.value.increments == pytest.approx(prof)


def test_sequence_rules():
    assert is_diverging(range(1, 10))
    assert not is_diverging([1, 2, 3, 3.5, 3.75, 3.875])
    assert not is_diverging([3, 3, 3, 3])
    assert is_diverging([1, 2, float("inf")])
    assert tends_to_zero([1 / n for n in range(1, 20)])
    assert tends_to_zero([1, 0, 1 / 3, 0, 1 / 5, 0, 1 / 7, 0])
    assert not tends_to_zero([1, 1, 1, 1, 1])
    assert settle_index([5, 4, 0, 0], 1e-10) == 2
    assert settle_index([0, 1], 1e-10) is None
    assert cauchy_at_tolerance([1, 1, 1, 0], 1e-10)
    assert not cauchy_at_tolerance([0, 0, 0, 1], 1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.01, 5), st.integers(3, 40))
def test_linear_growth_diverges(a, b, n):
    assert is_diverging([a + b * k for k in range(n)])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.integers(4, 60))
def test_harmonic_decay_tends_to_zero(c, n):
    vals = [c / k for k in range(1, n + 1)]
    assert tends_to_zero(vals) and not is_diverging(vals)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 4))
def test_limit_on_spanning_set_extends(seed, d):
    r = np.random.default_rng(seed)
    alg = build_full_matrix_algebra(d)
    H = random_hermitian(r, d)
    deltas = [inner_derivation((1 - 2.0 ** -n) * H, alg) for n in range(1, 50)]
    assert all(limit_exists_on(deltas, list(alg.basis), 1e-8))
    samples = [alg.random_element(r) for _ in range(5)]
    assert all(limit_exists_on(deltas, samples, 1e-8))


def test_prop_pipeline_chain():
    # bounded sweep + Cauchy increments -> the limit is a derivation and spatial
    from qsd.gns import gns_construct, vector_state
    from qsd.spatiality import solve_implementing_operator_ls, verify_spatiality

    m = build_boson_model(1, 5)
    fam = boson_family(m, 12, 0)
    rep = sweep_cutoff(fam, boson_probes(m))
    assert rep.hypotheses["(i) cauchy"] and rep.sup == 0
    alg = build_full_matrix_algebra(m.dim)
    deltas = [inner_derivation(h, alg) for h in fam.generators]
    lim = tau_cauchy_limit(deltas)
    assert check_star_derivation(lim).passed
    g = gns_construct(vector_state(alg, m.number_state(0)))
    H = solve_implementing_operator_ls(lim, g).H
    assert verify_spatiality(lim, g, H, tol=1e-8).passed


def test_weak_chain_eventual():
    # where hypothesis gaps vanish, conclusion gaps vanish by the end of the sweep
    m = build_boson_model(1, 5)
    for occ in range(3):
        rep = check_weak_convergence(boson_family(m, 8, occ), boson_probes(m))
        if rep.hypothesis_index is not None:
            assert rep.conclusion_index is not None
