"""Fock space and fermionic operator algebra for spin-1/2 chains.

The Hilbert space of an ``L``-site chain of spin-1/2 fermions is spanned by
occupation states of ``2L`` fermionic modes, ordered site-major with the
spin-up mode before the spin-down mode on each site:

    mode 0 = (site 1, up), mode 1 = (site 1, down), mode 2 = (site 2, up), ...

Basis state ``i`` (``0 <= i < 4**L``) occupies mode ``m`` iff bit ``m`` of
``i`` is set, so for ``L = 1`` the states in order are
``|0>, |up>, |down>, |updown>``.  Creation/annihilation operators carry the
Jordan-Wigner sign ``(-1)**(number of occupied modes below m)``, which makes
the canonical anticommutation relations exact.

Operators are stored as scipy CSR matrices wrapped in :class:`SparseOperator`;
entries with magnitude below ``DROP_TOL`` are discarded after every algebraic
operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, SiteIndexError, SizeCapError

MAX_SITES = 6
DROP_TOL = 1e-14

_SITE_CHARS = {0: ".", 1: "u", 2: "d", 3: "2"}


@dataclass(frozen=True)
class FockBasis:
    """Enumerated occupation basis for an ``L``-site spin-1/2 chain."""

    sites: int
    dim: int

    def occupations(self, index: int) -> tuple[int, ...]:
        """Occupation bits of basis state ``index``, mode-major (2L bits)."""
        if not 0 <= index < self.dim:
            raise IndexError(f"basis index {index} outside [0, {self.dim})")
        return tuple((index >> m) & 1 for m in range(2 * self.sites))

    def index_of(self, occupations) -> int:
        """Inverse of :meth:`occupations`."""
        if len(occupations) != 2 * self.sites:
            raise ValueError(f"expected {2 * self.sites} occupation bits")
        return sum(int(b) << m for m, b in enumerate(occupations))

    def label(self, index: int) -> str:
        """Human-readable per-site label, e.g. ``'u d . 2'``."""
        occ = self.occupations(index)
        return " ".join(
            _SITE_CHARS[occ[2 * j] + 2 * occ[2 * j + 1]] for j in range(self.sites)
        )

    def mode(self, site: int, spin: str) -> int:
        """Flat mode index of ``(site, spin)`` with 1-based ``site``."""
        if not 1 <= site <= self.sites:
            raise SiteIndexError(f"site {site} outside [1, {self.sites}]")
        if spin not in ("up", "down"):
            raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")
        return 2 * (site - 1) + (0 if spin == "up" else 1)


def build_basis(L: int) -> FockBasis:
    """Construct the Fock basis for an ``L``-site chain (``1 <= L <= 6``)."""
    if not 1 <= L <= MAX_SITES:
        raise SizeCapError(
            f"chain length L={L} unsupported; the hard cap is 1 <= L <= {MAX_SITES} "
            f"(4**{MAX_SITES} = {4**MAX_SITES} states)"
        )
    return FockBasis(sites=L, dim=4**L)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Complex sparse operator on a Fock space.

    Immutable after construction; all algebra returns new instances with the
    drop tolerance applied.
    """

    dim: int
    matrix: sp.csr_matrix

    @staticmethod
    def from_matrix(matrix, dim: int | None = None) -> "SparseOperator":
        m = sp.csr_matrix(matrix, dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        if dim is not None and m.shape[0] != dim:
            raise DimensionError(f"matrix dim {m.shape[0]} != expected {dim}")
        return SparseOperator(dim=m.shape[0], matrix=_drop_small(m))

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        _check_dims(self, other)
        return SparseOperator(self.dim, _drop_small(self.matrix + other.matrix))

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        _check_dims(self, other)
        return SparseOperator(self.dim, _drop_small(self.matrix - other.matrix))

    def __mul__(self, scalar) -> "SparseOperator":
        return SparseOperator(self.dim, _drop_small(self.matrix * complex(scalar)))

    __rmul__ = __mul__

    def __neg__(self) -> "SparseOperator":
        return self * (-1.0)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        _check_dims(self, other)
        return SparseOperator(self.dim, _drop_small(self.matrix @ other.matrix))

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.dim, self.matrix.conj().T.tocsr())

    # -- conversions and queries -------------------------------------------

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.sqrt(np.sum(np.abs(self.matrix.data) ** 2)))

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def is_zero(self) -> bool:
        return self.nnz == 0

    def allclose(self, other: "SparseOperator", tol: float = 1e-12) -> bool:
        _check_dims(self, other)
        diff = self.matrix - other.matrix
        return diff.nnz == 0 or float(np.abs(diff.data).max()) <= tol


def _check_dims(a: SparseOperator, b: SparseOperator) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"operator dims differ: {a.dim} vs {b.dim}")


def _drop_small(m: sp.csr_matrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.complex128)
    if m.nnz:
        m.data[np.abs(m.data) < DROP_TOL] = 0.0
        m.eliminate_zeros()
    m.sort_indices()
    return m


def identity(dim: int) -> SparseOperator:
    return SparseOperator(dim, sp.identity(dim, dtype=np.complex128, format="csr"))


def zero(dim: int) -> SparseOperator:
    return SparseOperator(dim, sp.csr_matrix((dim, dim), dtype=np.complex128))


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    """``[a, b] = a b - b a``."""
    return a @ b - b @ a


def anticommutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    """``{a, b} = a b + b a``."""
    return a @ b + b @ a


def frobenius_inner(a: SparseOperator, b: SparseOperator) -> complex:
    """Hilbert-Schmidt product ``Tr(a^dag b)``."""
    _check_dims(a, b)
    return complex((a.matrix.conj().multiply(b.matrix)).sum())


def diagonal_operator(diag: np.ndarray) -> SparseOperator:
    d = np.asarray(diag, dtype=np.complex128)
    return SparseOperator(d.size, _drop_small(sp.diags(d).tocsr()))


# -- mode operators ---------------------------------------------------------

@lru_cache(maxsize=None)
def _mode_annihilator(L: int, mode: int) -> sp.csr_matrix:
    dim = 4**L
    states = np.arange(dim, dtype=np.int64)
    occupied = states[(states >> mode) & 1 == 1]
    below = occupied & ((1 << mode) - 1)
    signs = 1.0 - 2.0 * (np.bitwise_count(below).astype(np.float64) % 2)
    rows = occupied ^ (1 << mode)
    m = sp.csr_matrix(
        (signs.astype(np.complex128), (rows, occupied)), shape=(dim, dim)
    )
    m.sort_indices()
    return m


def annihilator(basis: FockBasis, site: int, spin: str) -> SparseOperator:
    """Jordan-Wigner annihilation operator ``c_{site,spin}`` (1-based site)."""
    mode = basis.mode(site, spin)
    return SparseOperator(basis.dim, _mode_annihilator(basis.sites, mode).copy())


def creator(basis: FockBasis, site: int, spin: str) -> SparseOperator:
    """``c^dag_{site,spin}``."""
    return annihilator(basis, site, spin).adjoint()


def number_ops(basis: FockBasis, site: int) -> tuple[SparseOperator, SparseOperator, SparseOperator]:
    """``(n_up, n_down, n)`` for ``site``; all diagonal in the occupation basis."""
    states = np.arange(basis.dim, dtype=np.int64)
    up = ((states >> basis.mode(site, "up")) & 1).astype(np.complex128)
    down = ((states >> basis.mode(site, "down")) & 1).astype(np.complex128)
    n_up = diagonal_operator(up)
    n_down = diagonal_operator(down)
    return n_up, n_down, diagonal_operator(up + down)
