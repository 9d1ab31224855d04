import numpy as np
import pytest

from dtclab import qspace
from dtclab.errors import DimensionError, SiteIndexError, SizeCapError

import oracles


@pytest.mark.parametrize("L,dim", [(1, 4), (3, 64), (4, 256)])
def test_basis_dimensions(L, dim):
    basis = qspace.build_basis(L)
    assert basis.dim == dim == 4**basis.sites


@pytest.mark.parametrize("L", [0, 7, -2])
def test_basis_size_cap(L):
    with pytest.raises(SizeCapError) as exc:
        qspace.build_basis(L)
    assert "6" in str(exc.value)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_enumeration_round_trip(L):
    basis = qspace.build_basis(L)
    for i in range(basis.dim):
        assert basis.index_of(basis.occupations(i)) == i


def test_labels_single_site():
    basis = qspace.build_basis(1)
    assert [basis.label(i) for i in range(4)] == [".", "u", "d", "2"]


def test_annihilator_single_mode_action():
    basis = qspace.build_basis(1)
    c_up = qspace.annihilator(basis, 1, "up").dense()
    vac, up = np.zeros(4, complex), np.zeros(4, complex)
    vac[0], up[1] = 1.0, 1.0
    assert np.allclose(c_up @ up, vac)
    assert np.allclose(c_up @ vac, 0.0)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_matches_dense_jordan_wigner_oracle(L):
    basis = qspace.build_basis(L)
    for site in range(1, L + 1):
        for spin, off in (("up", 0), ("down", 1)):
            ours = qspace.annihilator(basis, site, spin).dense()
            ref = oracles.dense_annihilator(L, 2 * (site - 1) + off)
            assert np.abs(ours - ref).max() < 1e-14


@pytest.mark.parametrize("L", [1, 2, 3])
def test_canonical_anticommutation_relations(L):
    basis = qspace.build_basis(L)
    modes = [(s, sp) for s in range(1, L + 1) for sp in ("up", "down")]
    ops = {m: qspace.annihilator(basis, *m) for m in modes}
    eye = np.eye(basis.dim)
    for a in modes:
        for b in modes:
            acc = qspace.anticommutator(ops[a], ops[b]).dense()
            assert np.abs(acc).max() < 1e-14
            acdag = qspace.anticommutator(ops[a], ops[b].adjoint()).dense()
            expected = eye if a == b else 0.0 * eye
            assert np.abs(acdag - expected).max() < 1e-14


def test_specific_l2_anticommutators():
    basis = qspace.build_basis(2)
    c1u = qspace.annihilator(basis, 1, "up")
    c2d = qspace.annihilator(basis, 2, "down")
    assert np.abs(qspace.anticommutator(c1u, c2d).dense()).max() == 0.0
    acc = qspace.anticommutator(c1u, c1u.adjoint()).dense()
    assert np.abs(acc - np.eye(16)).max() < 1e-14


def test_number_ops_single_site():
    basis = qspace.build_basis(1)
    n_up, n_down, n = qspace.number_ops(basis, 1)
    full = np.zeros(4, complex)
    full[3] = 1.0
    assert np.allclose(n_up.dense() @ full, full)
    assert sorted(np.diag(n.dense()).real.tolist()) == [0.0, 1.0, 1.0, 2.0]


def test_number_trace_by_enumeration():
    basis = qspace.build_basis(2)
    _, _, n1 = qspace.number_ops(basis, 1)
    expected = sum(
        basis.occupations(i)[0] + basis.occupations(i)[1] for i in range(basis.dim)
    )
    assert expected == 16
    assert abs(n1.trace() - expected) < 1e-14


def test_site_and_spin_validation():
    basis = qspace.build_basis(2)
    with pytest.raises(SiteIndexError):
        qspace.annihilator(basis, 3, "up")
    with pytest.raises(SiteIndexError):
        qspace.number_ops(basis, 0)
    with pytest.raises(ValueError):
        qspace.annihilator(basis, 1, "sideways")


def _random_sparse(rng, dim, density=0.2):
    mask = rng.random((dim, dim)) < density
    m = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) * mask
    return qspace.SparseOperator.from_matrix(m)


def test_algebra_trivia():
    eye4 = qspace.identity(4)
    assert qspace.frobenius_inner(eye4, eye4) == pytest.approx(4.0)
    rng = np.random.default_rng(1)
    a = _random_sparse(rng, 8)
    assert qspace.commutator(a, a).norm() == 0.0
    assert a.adjoint().adjoint().allclose(a)


def test_algebra_against_dense_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b, c = (_random_sparse(rng, 16) for _ in range(3))
        ad, bd, cd = a.dense(), b.dense(), c.dense()
        assert np.allclose(((a @ b) @ c).dense(), (ad @ bd) @ cd, atol=1e-12)
        assert np.allclose((a @ (b + c)).dense(), ad @ (bd + cd), atol=1e-12)
        assert np.allclose((a @ b - b @ a).dense(),
                           qspace.commutator(a, b).dense(), atol=1e-12)
        assert qspace.frobenius_inner(a, b) == pytest.approx(
            np.trace(ad.conj().T @ bd), abs=1e-11
        )
        s = complex(rng.normal(), rng.normal())
        assert np.allclose((s * a).dense(), s * ad, atol=1e-12)


def test_dimension_mismatch():
    a = qspace.identity(4)
    b = qspace.identity(16)
    for op in (lambda: a + b, lambda: a @ b, lambda: qspace.frobenius_inner(a, b)):
        with pytest.raises(DimensionError):
            op()


def test_drop_tolerance():
    m = np.array([[1.0, 1e-16], [0.0, 1.0]])
    op = qspace.SparseOperator.from_matrix(m)
    assert op.nnz == 2
