import numpy as np
import pytest
import scipy.linalg as la

import dtclab as d
from dtclab.errors import SizeCapError

import oracles
from conftest import scenario_setup


def _ladder_states(basis, L):
    """Orthonormalized (S+)^n |down...down>, n = 0..L."""
    _, S_plus, _, _ = d.spin_operators(basis)
    down = np.zeros(basis.dim, complex)
    down[basis.index_of([0, 1] * L)] = 1.0
    states, cur = [], down
    for _ in range(L + 1):
        states.append(cur / np.linalg.norm(cur))
        cur = S_plus.apply(cur)
    return states


@pytest.mark.parametrize("L", [1, 2, 3])
def test_loss_gain_dark_states_are_the_spin_ladder(L):
    _, basis, H, jumps, _ = scenario_setup("loss_gain", L)
    report = d.find_dark_states(H, jumps)
    assert len(report.states) == L + 1
    ladder = _ladder_states(basis, L)
    # each dark state lies in the ladder span (and vice versa, counts match)
    P = np.column_stack(ladder)
    for s in report.states:
        proj = P @ (P.conj().T @ s.vector)
        assert np.linalg.norm(proj - s.vector) < 1e-8
        assert s.jump_residual <= 1e-8 and s.h_residual <= 1e-8


def test_loss_gain_dark_energies_ladder_spacing():
    _, _, H, jumps, _ = scenario_setup("loss_gain", 2)
    energies = d.find_dark_states(H, jumps).energies()
    e0 = energies[0]
    assert energies == pytest.approx([e0, e0 + 2.0, e0 + 4.0], abs=1e-10)


@pytest.mark.parametrize("L", [2, 3])
def test_inhom_dark_states_are_polarized(L):
    _, basis, H, jumps, _ = scenario_setup("inhom_field", L)
    report = d.find_dark_states(H, jumps)
    assert len(report.states) == 2
    all_down = basis.index_of([0, 1] * L)
    all_up = basis.index_of([1, 0] * L)
    found = {int(np.argmax(np.abs(s.vector))) for s in report.states}
    assert found == {all_down, all_up}
    for s in report.states:
        assert abs(np.abs(s.vector).max() - 1.0) < 1e-10


def test_closed_system_every_eigenstate_dark():
    _, basis, H, _, _ = scenario_setup("closed", 2)
    report = d.find_dark_states(H, [])
    assert len(report.states) == basis.dim
    assert report.kernel_dim == basis.dim and report.kernel_invariant


def test_dark_state_dim_cap():
    _, _, H, jumps, _ = scenario_setup("loss_gain", 5)
    with pytest.raises(SizeCapError):
        d.find_dark_states(H, jumps)


def test_kernel_reported_when_hopping_leaks():
    _, _, H, jumps, _ = scenario_setup("loss_gain", 2)
    report = d.find_dark_states(H, jumps)
    assert report.kernel_dim == 4          # singly occupied configurations
    assert not report.kernel_invariant     # hopping creates doublon/hole pairs
    assert report.invariance_residual > 1e-6
    assert report.method == "eigenvector_filter"


def test_kernel_restriction_path():
    """A dephasing-only model keeps its kernel H-invariant."""
    basis = d.build_basis(1)
    p = d.HubbardParams(L=1, U=[1.0], eps=[0.5], B=[2.0])
    H = d.build_hamiltonian(p, basis)
    n_up, _, _ = d.number_ops(basis, 1)
    report = d.find_dark_states(H, [0.5 * n_up])  # kernel = {no up fermion}
    assert report.method == "kernel_restriction"
    assert report.kernel_invariant
    assert len(report.states) == 2  # vacuum and lone down fermion


@pytest.mark.parametrize("tag,expected", [
    ("closed", True),
    ("loss", True),
    ("loss_gain", True),
    ("inhom_field", False),
    ("thermo_breaker", False),
])
def test_raising_operator_certificates(tag, expected):
    _, basis, H, jumps, _ = scenario_setup(tag, 2)
    _, S_plus, _, _ = d.spin_operators(basis)
    cert = d.verify_dynamical_symmetry(H, jumps, S_plus)
    assert cert.passed is expected
    if expected:
        assert cert.omega == pytest.approx(2.0, abs=1e-10)
        assert cert.residual_h <= cert.tol and cert.residual_l <= cert.tol
    elif tag == "inhom_field":
        assert cert.residual_h > cert.tol      # ladder relation broken
    else:
        assert cert.residual_l > cert.tol      # dephaser does not commute


def test_zero_operator_rejected():
    _, basis, H, jumps, _ = scenario_setup("loss", 2)
    with pytest.raises(ValueError):
        d.verify_dynamical_symmetry(H, jumps, d.SparseOperator.from_matrix(np.zeros((16, 16))))


def test_mixed_coherence_ladder_single_site():
    _, basis, H, jumps, liouv = scenario_setup("loss_gain", 1)
    _, S_plus, _, _ = d.spin_operators(basis)
    rho_down = np.zeros((4, 4), complex)
    rho_down[2, 2] = 1.0
    ladder = d.mixed_coherences(liouv, S_plus, rho_down, n_max=1, m_max=1)
    by_nm = {(c.n, c.m): c for c in ladder}
    assert set(by_nm) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    c10 = by_nm[(1, 0)]
    # the raised coherence is |up><down| with eigenvalue -iB
    expected = np.zeros((4, 4), complex)
    expected[1, 2] = 1.0
    phase = c10.state[1, 2]
    assert np.abs(c10.state - phase * expected).max() < 1e-12
    assert c10.predicted_lambda == pytest.approx(-2j, abs=1e-10)
    # oracle: eigenvalue of the dense superoperator closest to -2i
    M = oracles.dense_liouvillian_matrix(H.dense(), [j.dense() for j in jumps])
    evals = np.linalg.eigvals(M)
    assert np.min(np.abs(evals - c10.predicted_lambda)) < 1e-10
    for c in ladder:
        assert c.residual <= 1e-8
        if c.n == c.m:
            assert c.predicted_lambda == 0


def test_mixed_coherences_require_stationary_input():
    _, basis, _, _, liouv = scenario_setup("loss_gain", 1)
    _, S_plus, _, _ = d.spin_operators(basis)
    rho_bad = np.eye(4, dtype=complex) / 4.0
    rho_bad[0, 1] = rho_bad[1, 0] = 0.3
    with pytest.raises(ValueError):
        d.mixed_coherences(liouv, S_plus, rho_bad, 1, 1)


@pytest.mark.parametrize("tag", ["loss", "loss_gain"])
def test_dark_coherences_are_exact_eigenstates(tag):
    _, basis, H, jumps, liouv = scenario_setup(tag, 2)
    report = d.find_dark_states(H, jumps)
    states = report.states
    for a in states[:4]:
        for b in states[:4]:
            coh = np.outer(a.vector, b.vector.conj())
            resid = liouv.apply(coh) + 1j * (a.energy - b.energy) * coh
            assert np.linalg.norm(resid) <= 1e-8


def test_loss_only_frequencies_match_dark_differences():
    _, _, H, jumps, liouv = scenario_setup("loss", 2)
    report = d.classify(d.eigensystem(liouv, compute_vectors=False))
    energies = d.find_dark_states(H, jumps).energies()
    diffs = sorted({abs(a - b) for a in energies for b in energies if abs(a - b) > 1e-8})
    merged = d.liouville.dedupe_frequencies(diffs, tol=1e-8)
    assert len(report.frequencies) == len(merged)
    assert np.abs(np.array(report.frequencies) - np.array(merged)).max() < 1e-8


def test_ghz_effective_two_level_structure():
    spec, _, _, _, _ = scenario_setup("inhom_field", 2)
    ghz = d.ghz_effective(spec.params)
    btot = float(np.sum(spec.params.B))
    assert ghz.frequency == pytest.approx(btot)
    h = ghz.h_eff.dense()
    elem = ghz.ghz_plus.conj() @ h @ ghz.ghz_minus
    assert elem == pytest.approx(btot / 2.0, abs=1e-12)
    # Rabi flop: GHZ+ evolves to GHZ- at t = pi / Btot
    U = la.expm(-1j * h * (np.pi / btot))
    final = U @ ghz.ghz_plus
    overlap = abs(ghz.ghz_minus.conj() @ final)
    assert overlap == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("L", [2, 3])
def test_ghz_coherence_eigenstate_of_full_generator(L):
    spec, basis, _, _, liouv = scenario_setup("inhom_field", L)
    ghz = d.ghz_effective(spec.params)
    up = (ghz.ghz_plus + ghz.ghz_minus) / np.sqrt(2.0)
    down = (ghz.ghz_plus - ghz.ghz_minus) / np.sqrt(2.0)
    coh = np.outer(up, down.conj())
    out = liouv.apply(coh)
    lam = np.vdot(coh, out) / np.vdot(coh, coh)
    assert abs(abs(lam.imag) - ghz.frequency) < 1e-10
    assert abs(lam.real) < 1e-10
    assert np.linalg.norm(out - lam * coh) < 1e-8


def test_ghz_frequency_matches_spectrum():
    spec, _, _, _, liouv = scenario_setup("inhom_field", 2)
    report = d.classify(d.eigensystem(liouv, compute_vectors=False))
    ghz = d.ghz_effective(spec.params)
    assert report.frequencies == pytest.approx([ghz.frequency], abs=1e-8)


def test_report_serialization():
    _, _, H, jumps, _ = scenario_setup("loss_gain", 2)
    import json

    report = d.find_dark_states(H, jumps)
    doc = d.symmetry.darkstate_report_to_dict(report)
    json.dumps(doc)
    assert doc["count"] == 3
    cert = d.verify_dynamical_symmetry(H, jumps, d.spin_operators(d.build_basis(2))[1])
    json.dumps(d.symmetry.certificate_to_dict(cert))
