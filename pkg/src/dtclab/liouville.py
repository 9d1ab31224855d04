"""Lindblad superoperator, its eigensystem and spectrum diagnostics.

The generator acts on density matrices as

    L[rho] = -i [H, rho] + sum_mu (2 L_mu rho L_mu^dag
                                   - L_mu^dag L_mu rho - rho L_mu^dag L_mu)

(note the factor-2 convention on the sandwich term).  The superoperator
matrix uses column-stacking vectorization, ``vec(A rho B) = (B^T kron A)
vec(rho)``, and is materialized only for Fock dimensions ``N <= 64``; the
matrix-free applicator works at any supported size.

Spectrum classification splits eigenvalues into stationary, oscillatory
(purely imaginary) and decaying parts, computes the spectral gap, and runs a
continued-fraction commensurability analysis on the oscillation frequencies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import DimensionError, SizeCapError
from .qspace import SparseOperator

MATERIALIZE_CAP = 64          # largest Fock dim with a dense superoperator
CLUSTER_TOL = 1e-8            # relative eigenvalue clustering threshold
BIORTHO_TOL = 1e-8

DEFAULT_TOL_RE = 1e-9
DEFAULT_TOL_ZERO = 1e-10
DEFAULT_FREQ_TOL = 1e-6

DEFAULT_MAX_DEN = 1000
DEFAULT_REL_TOL = 1e-8
DEFAULT_T_EXP = 1000.0


class Liouvillian:
    """Lindblad generator for a Hamiltonian and a set of jump operators.

    Immutable after construction; the dense matrix is cached lazily.  The
    applicator is safe for concurrent readers.
    """

    def __init__(self, H: SparseOperator, jumps: list[SparseOperator]):
        for L_op in jumps:
            if L_op.dim != H.dim:
                raise DimensionError(
                    f"jump operator dim {L_op.dim} != Hamiltonian dim {H.dim}"
                )
        self.H = H
        self.jumps = list(jumps)
        self.dim = H.dim
        self._Hm = H.matrix
        self._HmT = self._Hm.T.tocsr()
        self._Lm = [L_op.matrix for L_op in self.jumps]
        self._Lconj = [m.conj().tocsr() for m in self._Lm]
        self._LmH = [m.conj().T.tocsr() for m in self._Lm]
        self._LmT = [m.T.tocsr() for m in self._Lm]
        K = sp.csr_matrix((self.dim, self.dim), dtype=np.complex128)
        for m in self._Lm:
            K = K + m.conj().T @ m
        self._K = K.tocsr()
        # Drift part of the generator: -i[H,rho] - {K,rho} = A rho + rho A^dag
        # with the non-Hermitian A = -iH - K.
        A = (-1j * self._Hm - self._K).tocsr()
        self._A = A
        self._Aconj = A.conj().tocsr()
        self._AH = A.conj().T.tocsr()
        self._AT = A.T.tocsr()
        # Monomial jumps (at most one entry per row and column, which covers
        # pair loss/gain and dephasers) admit a gather/scatter sandwich:
        # (L rho L^dag)[r_i, r_j] = v_i conj(v_j) rho[c_i, c_j].
        self._mono = []
        self._generic = []
        for k, m in enumerate(self._Lm):
            coo = m.tocoo()
            if (
                np.unique(coo.row).size == coo.nnz
                and np.unique(coo.col).size == coo.nnz
            ):
                w = 2.0 * coo.data[:, None] * coo.data.conj()[None, :]
                self._mono.append((np.ix_(coo.row, coo.row),
                                   np.ix_(coo.col, coo.col), w))
            else:
                self._generic.append(k)
        self._matrix = None

    # -- matrix-free action --------------------------------------------------
    #
    # Right multiplications are evaluated as left products on the transposed
    # state ((rho A)^T = A^T rho^T) and gathered in a separate accumulator, so
    # every sparse-dense product runs on C-contiguous operands.  Monomial
    # sandwich terms bypass sparse algebra entirely.

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evaluate ``L[rho]`` for an ``N x N`` density matrix."""
        rho = np.ascontiguousarray(rho, dtype=np.complex128)
        rho_t = np.ascontiguousarray(rho.T)
        out = self._A @ rho
        out_t = self._Aconj @ rho_t
        for out_ix, in_ix, w in self._mono:
            out[out_ix] += w * rho[in_ix]
        for k in self._generic:
            x_t = np.ascontiguousarray((self._Lm[k] @ rho).T)
            out_t += 2.0 * (self._Lconj[k] @ x_t)
        out += out_t.T
        return out

    def apply_adjoint(self, sigma: np.ndarray) -> np.ndarray:
        """Evaluate the Heisenberg-picture generator ``L^dag[sigma]``."""
        sigma = np.ascontiguousarray(sigma, dtype=np.complex128)
        sigma_t = np.ascontiguousarray(sigma.T)
        out = self._AH @ sigma
        out_t = self._AT @ sigma_t
        for out_ix, in_ix, w in self._mono:
            out[in_ix] += w.conj() * sigma[out_ix]
        for k in self._generic:
            x_t = np.ascontiguousarray((self._LmH[k] @ sigma).T)
            out_t += 2.0 * (self._LmT[k] @ x_t)
        out += out_t.T
        return out

    # -- materialization -------------------------------------------------------

    def matrix(self) -> np.ndarray:
        """Dense ``N^2 x N^2`` superoperator (column-stacking convention)."""
        if self.dim > MATERIALIZE_CAP:
            raise SizeCapError(
                f"refusing to materialize a {self.dim**2} x {self.dim**2} "
                f"superoperator (Fock dim {self.dim} > {MATERIALIZE_CAP}); "
                "use the matrix-free applicator and the dynamics/probes pipeline"
            )
        if self._matrix is None:
            eye = sp.identity(self.dim, dtype=np.complex128, format="csr")
            sup = -1j * (sp.kron(eye, self._Hm) - sp.kron(self._HmT, eye))
            for Lm, Lc, LHm in zip(self._Lm, self._Lconj, self._LmH):
                LdL = LHm @ Lm
                sup = sup + 2.0 * sp.kron(Lc, Lm)
                sup = sup - sp.kron(eye, LdL) - sp.kron(LdL.T, eye)
            self._matrix = np.asarray(sup.todense(), dtype=np.complex128)
        return self._matrix


def build_liouvillian(H: SparseOperator, jumps: list[SparseOperator]) -> Liouvillian:
    return Liouvillian(H, jumps)


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stacking ``vec``."""
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(v: np.ndarray) -> np.ndarray:
    n = math.isqrt(v.size)
    return np.asarray(v).reshape((n, n), order="F")


@dataclass
class Eigensystem:
    """Biorthonormalized eigensystem of a Liouvillian.

    ``rights[k]`` and ``lefts[k]`` are ``N x N`` matrices with
    ``Tr(lefts[k]^dag rights[k']) = delta_{kk'}``; ``lefts``/``rights`` are
    ``None`` when the eigensystem was computed eigenvalues-only.
    """

    lambdas: np.ndarray
    rights: np.ndarray | None
    lefts: np.ndarray | None

    @property
    def scale(self) -> float:
        s = float(np.max(np.abs(self.lambdas))) if self.lambdas.size else 0.0
        return max(s, 1e-300)


def eigensystem(liouv: Liouvillian, compute_vectors: bool = True) -> Eigensystem:
    """Dense eigendecomposition of the materialized superoperator.

    With ``compute_vectors`` the left/right eigenvectors are paired by
    eigenvalue and biorthonormalized (degenerate clusters via a Gram solve).
    """
    M = liouv.matrix()
    if not compute_vectors:
        lambdas = la.eigvals(M, check_finite=False)
        return Eigensystem(lambdas=lambdas, rights=None, lefts=None)
    lambdas, vl, vr = la.eig(M, left=True, right=True, check_finite=False)
    scale = max(float(np.max(np.abs(lambdas))), 1e-300)
    order = np.lexsort((lambdas.imag, lambdas.real))
    lambdas, vl, vr = lambdas[order], vl[:, order], vr[:, order]

    for cluster in _eigenvalue_clusters(lambdas, CLUSTER_TOL * scale):
        idx = np.asarray(cluster)
        G = vl[:, idx].conj().T @ vr[:, idx]
        try:
            vlh_new = la.solve(G, vl[:, idx].conj().T)
        except la.LinAlgError:
            warnings.warn(
                "singular Gram matrix in a degenerate eigenvalue cluster; "
                "using least-squares biorthonormalization",
                RuntimeWarning,
            )
            vlh_new = la.lstsq(G, vl[:, idx].conj().T)[0]
        vl[:, idx] = vlh_new.conj().T

    rights = np.stack([unvectorize(vr[:, k]) for k in range(vr.shape[1])])
    lefts = np.stack([unvectorize(vl[:, k]) for k in range(vl.shape[1])])
    return Eigensystem(lambdas=lambdas, rights=rights, lefts=lefts)


def _eigenvalue_clusters(lambdas: np.ndarray, tol: float) -> list[list[int]]:
    """Partition eigenvalue indices into clusters of pairwise-linked values.

    Two eigenvalues are linked when they lie within ``tol`` of each other;
    clusters are the connected components (union-find over an imag-sorted
    sliding window, so only candidate pairs are examined).
    """
    k = lambdas.size
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = np.argsort(lambdas.imag, kind="stable")
    start = 0
    for pos in range(k):
        i = int(order[pos])
        while lambdas.imag[i] - lambdas.imag[int(order[start])] > tol:
            start += 1
        for p in range(start, pos):
            j = int(order[p])
            if abs(lambdas[i] - lambdas[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


@dataclass
class CommensurabilityVerdict:
    """Outcome of the rational-fit analysis of an oscillation frequency set."""

    commensurable: bool
    base_frequency: float | None
    integer_multipliers: list[int] | None
    fundamental_period: float | None
    effectively_incommensurable: bool
    dense_flag: bool
    t_exp: float


def commensurability(
    freqs,
    max_den: int = DEFAULT_MAX_DEN,
    rel_tol: float = DEFAULT_REL_TOL,
    t_exp: float = DEFAULT_T_EXP,
) -> CommensurabilityVerdict:
    """Decide whether ``freqs`` are integer multiples of a common base.

    Each ratio ``w_k / w_min`` is approximated by a continued-fraction
    rational with denominator at most ``max_den``; the set is commensurable
    when every ratio is matched to relative accuracy ``rel_tol``.  The fitted
    base is refined by least squares over the accepted integer multipliers.
    """
    w = np.abs(np.asarray(list(freqs), dtype=np.float64))
    if w.size == 0:
        raise ValueError("commensurability requires a nonempty frequency set")
    if np.any(w == 0.0):
        raise ValueError("frequencies must be nonzero; drop the stationary part first")
    w = np.sort(w)
    gaps = np.diff(w)
    dense_flag = bool(gaps.size and np.min(gaps) < 2.0 * math.pi / t_exp)

    w_min = w[0]
    fractions = []
    commensurable = True
    for wk in w:
        ratio = wk / w_min
        frac = Fraction(ratio).limit_denominator(max_den)
        if abs(ratio - float(frac)) > rel_tol * ratio:
            commensurable = False
            break
        fractions.append(frac)

    if not commensurable:
        return CommensurabilityVerdict(
            commensurable=False,
            base_frequency=None,
            integer_multipliers=None,
            fundamental_period=None,
            effectively_incommensurable=True,
            dense_flag=dense_flag,
            t_exp=t_exp,
        )

    q_lcm = math.lcm(*(f.denominator for f in fractions))
    mults = [f.numerator * (q_lcm // f.denominator) for f in fractions]
    g = math.gcd(*mults)
    mults = [m // g for m in mults]
    n_arr = np.asarray(mults, dtype=np.float64)
    base = float(np.dot(n_arr, w) / np.dot(n_arr, n_arr))
    period = 2.0 * math.pi / base
    return CommensurabilityVerdict(
        commensurable=True,
        base_frequency=base,
        integer_multipliers=mults,
        fundamental_period=period,
        effectively_incommensurable=bool(period > t_exp),
        dense_flag=dense_flag,
        t_exp=t_exp,
    )


@dataclass
class SpectrumReport:
    """Classification of a Liouvillian spectrum for time-crystal diagnostics."""

    stationary: list[int]
    oscillatory: list[int]
    decaying: list[int]
    gap: float                      # +inf sentinel when nothing decays
    gap_infinite: bool
    frequencies: list[float]        # deduplicated positive oscillation freqs
    commensurability: CommensurabilityVerdict | None
    scale: float
    tol_re: float
    tol_zero: float
    lambdas: np.ndarray = field(repr=False)


def classify(
    es: Eigensystem,
    tol_re: float = DEFAULT_TOL_RE,
    tol_zero: float = DEFAULT_TOL_ZERO,
    freq_tol: float = DEFAULT_FREQ_TOL,
    max_den: int = DEFAULT_MAX_DEN,
    rel_tol: float = DEFAULT_REL_TOL,
    t_exp: float = DEFAULT_T_EXP,
) -> SpectrumReport:
    """Split eigenvalues into stationary / oscillatory / decaying classes.

    Tolerances are relative to the spectral scale ``max_k |lambda_k|``.  The
    gap is the smallest decay rate among decaying eigenvalues (+inf when the
    decaying class is empty, e.g. closed systems).
    """
    lam = es.lambdas
    scale = es.scale
    stationary, oscillatory, decaying = [], [], []
    for k, lk in enumerate(lam):
        if abs(lk) <= tol_zero * scale:
            stationary.append(k)
        elif abs(lk.real) <= tol_re * scale and abs(lk.imag) > tol_zero * scale:
            oscillatory.append(k)
        else:
            decaying.append(k)

    if decaying:
        gap = float(np.min(np.abs(lam.real[decaying])))
        gap_infinite = False
    else:
        gap = math.inf
        gap_infinite = True

    freqs = dedupe_frequencies(np.abs(lam.imag[oscillatory]), freq_tol)
    verdict = None
    if freqs:
        verdict = commensurability(
            freqs, max_den=max_den, rel_tol=rel_tol, t_exp=t_exp
        )
    return SpectrumReport(
        stationary=stationary,
        oscillatory=oscillatory,
        decaying=decaying,
        gap=gap,
        gap_infinite=gap_infinite,
        frequencies=freqs,
        commensurability=verdict,
        scale=scale,
        tol_re=tol_re,
        tol_zero=tol_zero,
        lambdas=lam,
    )


def dedupe_frequencies(values, tol: float = DEFAULT_FREQ_TOL) -> list[float]:
    """Merge near-degenerate positive frequencies into cluster means."""
    vals = np.sort(np.asarray(values, dtype=np.float64))
    out: list[float] = []
    cluster: list[float] = []
    for v in vals:
        if cluster and v - cluster[-1] > tol:
            out.append(float(np.mean(cluster)))
            cluster = []
        cluster.append(float(v))
    if cluster:
        out.append(float(np.mean(cluster)))
    return out


# -- export -------------------------------------------------------------------

def spectrum_rows(report: SpectrumReport) -> list[tuple[float, float, str]]:
    """CSV rows ``(re, im, class)`` for every eigenvalue."""
    cls = {}
    for k in report.stationary:
        cls[k] = "stationary"
    for k in report.oscillatory:
        cls[k] = "oscillatory"
    for k in report.decaying:
        cls[k] = "decaying"
    return [
        (float(l.real), float(l.imag), cls[k]) for k, l in enumerate(report.lambdas)
    ]


def verdict_to_dict(v: CommensurabilityVerdict | None) -> dict | None:
    if v is None:
        return None
    return {
        "commensurable": v.commensurable,
        "base_frequency": v.base_frequency,
        "integer_multipliers": v.integer_multipliers,
        "fundamental_period": v.fundamental_period,
        "effectively_incommensurable": v.effectively_incommensurable,
        "dense_flag": v.dense_flag,
        "t_exp": v.t_exp,
    }


def report_to_dict(report: SpectrumReport) -> dict:
    """JSON-ready mirror of :class:`SpectrumReport` (counts, not eigenvectors)."""
    return {
        "n_eigenvalues": int(report.lambdas.size),
        "n_stationary": len(report.stationary),
        "n_oscillatory": len(report.oscillatory),
        "n_decaying": len(report.decaying),
        "gap": None if report.gap_infinite else report.gap,
        "gap_infinite": report.gap_infinite,
        "oscillatory_frequencies": report.frequencies,
        "commensurability": verdict_to_dict(report.commensurability),
        "scale": report.scale,
        "tol_re": report.tol_re,
        "tol_zero": report.tol_zero,
    }
