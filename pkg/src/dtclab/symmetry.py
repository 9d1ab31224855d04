"""Dark states, strong dynamical symmetries and persistent coherences.

A *dark state* is a Hamiltonian eigenstate annihilated by every jump
operator; coherences between dark states oscillate forever at their energy
difference.  A *strong dynamical symmetry* is an operator ``A`` with
``[H, A] = omega A`` that commutes with every jump operator and its adjoint;
given a steady state it generates ladders of persistently oscillating mixed
coherences ``A^n rho_ss (A^dag)^m``.

Dark states are located by a two-stage procedure: the joint null space of the
stacked jump operators is computed by SVD, and when the Hamiltonian preserves
that subspace its restriction is diagonalized directly.  When it does not
(the usual case for kinetic Hamiltonians, where hopping connects the null
space to lossy configurations), dark states are instead collected by
filtering all Hamiltonian eigenvectors on their jump residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import SizeCapError
from .liouville import Liouvillian
from .model import HubbardParams
from .qspace import SparseOperator, commutator, frobenius_inner

DARKSTATE_DIM_CAP = 256
KERNEL_SV_TOL = 1e-10          # relative singular-value cutoff for the null space
KERNEL_INVARIANCE_TOL = 1e-10  # relative tolerance on ||(1-P) H P||
DEFAULT_TOL = 1e-8


@dataclass
class DarkState:
    """One dark eigenstate with its residual certificates."""

    energy: float
    vector: np.ndarray
    jump_residual: float     # max_mu || L_mu |phi> ||
    h_residual: float        # || H |phi> - E |phi> ||


@dataclass
class DarkStateReport:
    """Result of a dark-state search."""

    states: list[DarkState]
    kernel_dim: int
    kernel_invariant: bool
    invariance_residual: float
    method: str               # "kernel_restriction" or "eigenvector_filter"

    def energies(self) -> np.ndarray:
        return np.asarray([s.energy for s in self.states])


def find_dark_states(
    H: SparseOperator, jumps: list[SparseOperator], tol: float = DEFAULT_TOL
) -> DarkStateReport:
    """Find joint eigenstates of ``H`` annihilated by every jump operator.

    Returns all Hamiltonian eigenstates when the jump list is empty (a closed
    system is entirely decoherence-free).
    """
    dim = H.dim
    if dim > DARKSTATE_DIM_CAP:
        raise SizeCapError(
            f"dark-state search capped at Fock dim {DARKSTATE_DIM_CAP}, got {dim}"
        )
    Hd = H.dense()

    if not jumps:
        energies, vecs = la.eigh(Hd)
        states = [
            DarkState(
                energy=float(e),
                vector=vecs[:, i],
                jump_residual=0.0,
                h_residual=float(np.linalg.norm(Hd @ vecs[:, i] - e * vecs[:, i])),
            )
            for i, e in enumerate(energies)
        ]
        return DarkStateReport(
            states=states,
            kernel_dim=dim,
            kernel_invariant=True,
            invariance_residual=0.0,
            method="kernel_restriction",
        )

    stacked = np.vstack([L.dense() for L in jumps])
    _, s, vh = la.svd(stacked, full_matrices=True)
    s_max = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > KERNEL_SV_TOL * max(s_max, 1e-300)))
    kernel = vh[rank:].conj().T            # (dim, d), orthonormal columns
    d = kernel.shape[1]
    if d == 0:
        return DarkStateReport(
            states=[], kernel_dim=0, kernel_invariant=True,
            invariance_residual=0.0, method="kernel_restriction",
        )

    HK = Hd @ kernel
    H_restricted = kernel.conj().T @ HK
    leak = HK - kernel @ H_restricted
    h_norm = max(float(np.linalg.norm(Hd)), 1e-300)
    invariance_residual = float(np.linalg.norm(leak)) / h_norm
    kernel_invariant = invariance_residual <= KERNEL_INVARIANCE_TOL

    if kernel_invariant:
        energies, vecs = la.eigh(H_restricted)
        candidates = [(float(e), kernel @ vecs[:, i]) for i, e in enumerate(energies)]
        method = "kernel_restriction"
    else:
        # Hopping generically connects the null space to dissipative states,
        # so dark states are H-eigenvectors that happen to lie inside it.
        energies, vecs = la.eigh(Hd)
        candidates = [(float(e), vecs[:, i]) for i, e in enumerate(energies)]
        method = "eigenvector_filter"

    jump_dense = [L.dense() for L in jumps]
    states = []
    for e, phi in candidates:
        jr = max(float(np.linalg.norm(Ld @ phi)) for Ld in jump_dense)
        if jr <= tol:
            hr = float(np.linalg.norm(Hd @ phi - e * phi))
            states.append(
                DarkState(energy=e, vector=phi, jump_residual=jr, h_residual=hr)
            )
    states.sort(key=lambda s: s.energy)
    return DarkStateReport(
        states=states,
        kernel_dim=d,
        kernel_invariant=kernel_invariant,
        invariance_residual=invariance_residual,
        method=method,
    )


@dataclass
class SymmetryCertificate:
    """Residual certificate for a candidate strong dynamical symmetry."""

    omega: float
    residual_h: float        # ||[H,A] - omega A|| / ||A||
    residual_l: float        # worst ||[L,A]||, ||[L^dag,A]|| over jumps, / ||A||
    passed: bool
    tol: float


def verify_dynamical_symmetry(
    H: SparseOperator,
    jumps: list[SparseOperator],
    A: SparseOperator,
    tol: float = DEFAULT_TOL,
) -> SymmetryCertificate:
    """Check ``[H,A] = omega A`` and ``[L_mu, A] = [L_mu^dag, A] = 0``.

    ``omega`` is the Hilbert-Schmidt least-squares fit
    ``Re <A, [H,A]> / <A, A>``.
    """
    a_norm = A.norm()
    if a_norm == 0.0:
        raise ValueError("candidate symmetry operator is zero")
    comm_h = commutator(H, A)
    omega = float(frobenius_inner(A, comm_h).real) / a_norm**2
    residual_h = (comm_h - omega * A).norm() / a_norm
    residual_l = 0.0
    for L_op in jumps:
        residual_l = max(
            residual_l,
            commutator(L_op, A).norm() / a_norm,
            commutator(L_op.adjoint(), A).norm() / a_norm,
        )
    passed = residual_h <= tol and residual_l <= tol
    return SymmetryCertificate(
        omega=omega,
        residual_h=residual_h,
        residual_l=residual_l,
        passed=passed,
        tol=tol,
    )


@dataclass
class MixedCoherence:
    """One ladder state ``A^n rho_ss (A^dag)^m`` with its eigenvalue check."""

    n: int
    m: int
    state: np.ndarray            # Frobenius-normalized
    predicted_lambda: complex    # -i (n - m) omega
    residual: float              # || L[state] - predicted_lambda * state ||


def mixed_coherences(
    liouv: Liouvillian,
    A: SparseOperator,
    rho_ss: np.ndarray,
    n_max: int,
    m_max: int,
    tol: float = DEFAULT_TOL,
) -> list[MixedCoherence]:
    """Build the coherence ladder of a strong dynamical symmetry over a NESS.

    ``rho_ss`` must satisfy ``L[rho_ss] = 0`` within ``tol``.  States are
    ``A^n rho_ss (A^dag)^m`` (the ladder raises with ``A`` on the left), with
    predicted purely imaginary eigenvalues ``-i (n - m) omega``; vanishing
    products are skipped and every returned state carries the residual of a
    direct application of the generator.
    """
    rho_ss = np.asarray(rho_ss, dtype=np.complex128)
    ss_norm = max(float(np.linalg.norm(rho_ss)), 1e-300)
    ss_residual = float(np.linalg.norm(liouv.apply(rho_ss))) / ss_norm
    if ss_residual > tol:
        raise ValueError(
            f"rho_ss is not stationary: ||L[rho_ss]||/||rho_ss|| = {ss_residual:.3e} > {tol}"
        )
    omega = verify_dynamical_symmetry(liouv.H, liouv.jumps, A).omega
    Ad = A.dense()
    Adag = Ad.conj().T

    left_powers = [rho_ss]
    for _ in range(n_max):
        left_powers.append(Ad @ left_powers[-1])

    out: list[MixedCoherence] = []
    for n in range(n_max + 1):
        state_nm = left_powers[n]
        for m in range(m_max + 1):
            if m > 0:
                state_nm = state_nm @ Adag
            norm = float(np.linalg.norm(state_nm))
            if norm < 1e-12:
                continue
            state = state_nm / norm
            lam = -1j * (n - m) * omega
            residual = float(np.linalg.norm(liouv.apply(state) - lam * state))
            out.append(
                MixedCoherence(
                    n=n, m=m, state=state, predicted_lambda=lam, residual=residual
                )
            )
    return out


@dataclass
class GhzEffective:
    """Effective two-level description of the inhomogeneous-field dark sector."""

    h_eff: SparseOperator
    ghz_plus: np.ndarray
    ghz_minus: np.ndarray
    frequency: float          # sum of the per-site fields

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.frequency


def ghz_effective(params: HubbardParams) -> GhzEffective:
    """Effective Hamiltonian on span{all-up, all-down} for inhomogeneous fields.

    ``H_eff = (Btot/2) (|up..up><up..up| - |down..down><down..down|)`` with
    ``Btot = sum_j B_j``; it drives Rabi oscillations between the two GHZ
    combinations at angular frequency ``Btot``.
    """
    L = params.L
    dim = 4**L
    all_up = sum(1 << (2 * j) for j in range(L))
    all_down = sum(1 << (2 * j + 1) for j in range(L))
    btot = float(np.sum(params.B))
    h = sp.csr_matrix(
        ([0.5 * btot, -0.5 * btot], ([all_up, all_down], [all_up, all_down])),
        shape=(dim, dim),
        dtype=np.complex128,
    )
    up_vec = np.zeros(dim, dtype=np.complex128)
    up_vec[all_up] = 1.0
    down_vec = np.zeros(dim, dtype=np.complex128)
    down_vec[all_down] = 1.0
    return GhzEffective(
        h_eff=SparseOperator(dim, h),
        ghz_plus=(up_vec + down_vec) / np.sqrt(2.0),
        ghz_minus=(up_vec - down_vec) / np.sqrt(2.0),
        frequency=btot,
    )


# -- export -------------------------------------------------------------------

def darkstate_report_to_dict(report: DarkStateReport) -> dict:
    return {
        "count": len(report.states),
        "energies": [s.energy for s in report.states],
        "jump_residuals": [s.jump_residual for s in report.states],
        "h_residuals": [s.h_residual for s in report.states],
        "kernel_dim": report.kernel_dim,
        "kernel_invariant": report.kernel_invariant,
        "invariance_residual": report.invariance_residual,
        "method": report.method,
    }


def certificate_to_dict(cert: SymmetryCertificate) -> dict:
    return {
        "omega": cert.omega,
        "residual_h": cert.residual_h,
        "residual_l": cert.residual_l,
        "passed": cert.passed,
        "tol": cert.tol,
    }
