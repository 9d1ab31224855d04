"""Time evolution: deterministic master equation and stochastic trajectories.

``evolve_master`` integrates ``d rho / dt = L[rho]`` matrix-free with an
adaptive embedded Runge-Kutta pair; since the generator is trace-free the
trace is preserved to roundoff by construction.

``evolve_trajectories`` unravels the same master equation into quantum-jump
trajectories.  With the factor-2 dissipator convention used throughout, the
effective jump channels are ``sqrt(2) L_mu`` and the non-Hermitian drift is
``H - i sum_mu L_mu^dag L_mu``, so averaging ``|psi><psi|`` over trajectories
reproduces the master equation.  Waiting times follow the norm-decay law: the
squared norm of the unnormalized state is compared against a uniform
threshold, and the crossing (= jump time) is located by deterministic fine
sub-steps no longer than ``FINE_DT``.  Each trajectory owns an independent
counter-based RNG stream keyed by ``(seed, trajectory index)``, so results do
not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.integrate import DOP853, solve_ivp

from .errors import DimensionError, IntegrationError, SizeCapError
from .liouville import Liouvillian
from .probes import TimeSeries
from .qspace import SparseOperator

RANDOM_STATE_DIM_CAP = 256
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11
FINE_DT = 1e-3
MASTER_STORAGE_CAP_BYTES = 2_000_000_000


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid on ``[t0, t1]``."""

    t0: float
    t1: float
    n_samples: int

    def __post_init__(self):
        if not (self.t1 > self.t0 >= 0.0):
            raise ValueError(f"need t1 > t0 >= 0, got [{self.t0}, {self.t1}]")
        if self.n_samples < 2:
            raise ValueError("need at least 2 samples")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n_samples)

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.n_samples - 1)


@dataclass
class DensityTrajectory:
    """Sampled density-matrix evolution."""

    grid: TimeGrid
    states: np.ndarray          # (n_samples, N, N), Hermitian


@dataclass
class TrajectoryEnsemble:
    """Ensemble of stochastic pure-state trajectories."""

    grid: TimeGrid
    M: int
    pure_states: np.ndarray     # (M, n_samples, N), normalized at samples
    rng_seed: int


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one trajectory."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(seed), int(index)]))
    )


def random_pure_state(
    H: SparseOperator, seed: int, haar: bool = False
) -> np.ndarray:
    """Random state with i.i.d. uniform coefficients in the eigenbasis of ``H``.

    ``|phi> ~ sum_n u_n |phi_n>`` with ``u_n`` uniform on [0, 1) drawn from a
    counter-based generator, ``|phi_n>`` the eigenvectors of ``H`` in
    ascending-energy order.  Above the dimension cap the eigenbasis is not
    computed; pass ``haar=True`` to fall back to a Haar-random state instead.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    if H.dim > RANDOM_STATE_DIM_CAP:
        if not haar:
            raise SizeCapError(
                f"eigenbasis construction capped at dim {RANDOM_STATE_DIM_CAP} "
                f"(got {H.dim}); pass haar=True for a Haar-random fallback"
            )
        z = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
        return z / np.linalg.norm(z)
    _, vecs = la.eigh(H.dense())
    u = rng.random(H.dim)
    psi = vecs @ u.astype(np.complex128)
    return psi / np.linalg.norm(psi)


def evolve_master(
    liouv: Liouvillian,
    rho0: np.ndarray,
    grid: TimeGrid,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    method: str = "DOP853",
) -> DensityTrajectory:
    """Integrate the master equation and sample it on ``grid``.

    Uses an adaptive embedded Runge-Kutta pair on the matrix-free applicator;
    sampled states are re-Hermitized.  ``rho0`` must be Hermitian with unit
    trace.
    """
    rho0 = _check_density(liouv, rho0)
    n = liouv.dim
    need = grid.n_samples * n * n * 16
    if need > MASTER_STORAGE_CAP_BYTES:
        raise SizeCapError(
            f"storing {grid.n_samples} states of dim {n} needs ~{need / 1e9:.1f} GB; "
            "use evolve_observables to stream probe values instead"
        )

    def rhs(_t, y):
        return liouv.apply(y.reshape(n, n)).reshape(-1)

    sol = solve_ivp(
        rhs,
        (grid.t0, grid.t1),
        rho0.reshape(-1),
        method=method,
        t_eval=grid.times,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")
    states = np.ascontiguousarray(sol.y.T).reshape(grid.n_samples, n, n)
    states = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    return DensityTrajectory(grid=grid, states=states)


def _check_density(liouv: Liouvillian, rho0) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=np.complex128)
    n = liouv.dim
    if rho0.shape != (n, n):
        raise DimensionError(f"rho0 shape {rho0.shape} != ({n}, {n})")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-10:
        raise ValueError("rho0 must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-8:
        raise ValueError(f"rho0 must have unit trace, got {np.trace(rho0)}")
    return rho0


def evolve_observables(
    liouv: Liouvillian,
    rho0: np.ndarray,
    grid: TimeGrid,
    observables: list[SparseOperator],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> list[TimeSeries]:
    """Integrate the master equation, streaming out expectation values only.

    Memory stays ``O(N^2)`` regardless of the sample count, so this is the
    path for long, densely sampled runs where storing every density matrix is
    impossible.  Expectations of Hermitian observables are evaluated on the
    dense-output interpolant; the real part is taken, which is identical to
    Hermitizing the state first.  Note the Loschmidt echo is the expectation
    of the (Hermitian) initial density matrix itself.
    """
    rho0 = _check_density(liouv, rho0)
    n = liouv.dim
    for op in observables:
        if op.dim != n:
            raise DimensionError(f"observable dim {op.dim} != {n}")
    extractors = []
    for op in observables:
        coo = op.matrix.tocoo()
        flat = coo.col.astype(np.int64) * n + coo.row.astype(np.int64)
        extractors.append((flat, coo.data))

    def rhs(_t, y):
        return liouv.apply(y.reshape(n, n)).reshape(-1)

    times = grid.times
    out = np.empty((len(observables), grid.n_samples), dtype=np.float64)
    y0 = rho0.reshape(-1)
    for j, (flat, data) in enumerate(extractors):
        out[j, 0] = np.dot(y0[flat], data).real

    stepper = DOP853(rhs, grid.t0, y0, t_bound=grid.t1, rtol=rtol, atol=atol)
    k = 1
    while k < grid.n_samples:
        if stepper.status == "finished":
            raise IntegrationError("integrator finished before the final sample")
        stepper.step()
        if stepper.status == "failed":
            raise IntegrationError("master-equation integration failed mid-run")
        dense = stepper.dense_output()
        while k < grid.n_samples and times[k] <= stepper.t + 1e-12 * max(1.0, stepper.t):
            y = dense(times[k])
            for j, (flat, data) in enumerate(extractors):
                out[j, k] = np.dot(y[flat], data).real
            k += 1
    return [TimeSeries(times=times, values=out[j]) for j in range(len(observables))]


def evolve_trajectories(
    H: SparseOperator,
    jumps: list[SparseOperator],
    psi0: np.ndarray,
    grid: TimeGrid,
    M: int,
    seed: int,
) -> TrajectoryEnsemble:
    """Run ``M`` quantum-jump trajectories of the same initial pure state."""
    psi0 = np.asarray(psi0, dtype=np.complex128)
    n = H.dim
    if psi0.shape != (n,):
        raise DimensionError(f"psi0 shape {psi0.shape} != ({n},)")
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"psi0 must be normalized, got norm {nrm}")
    psi0 = psi0 / nrm
    if M < 1:
        raise ValueError("need at least one trajectory")
    for L_op in jumps:
        if L_op.dim != n:
            raise DimensionError("jump operator dimension mismatch")

    drift = -1j * H.dense()
    for L_op in jumps:
        Ld = L_op.dense()
        drift -= Ld.conj().T @ Ld
    prop_sample = la.expm(drift * grid.dt)
    n_fine = max(1, int(np.ceil(grid.dt / FINE_DT)))
    prop_fine = la.expm(drift * (grid.dt / n_fine))
    channels = [np.sqrt(2.0) * L_op.dense() for L_op in jumps]

    out = np.empty((M, grid.n_samples, n), dtype=np.complex128)
    for m in range(M):
        rng = trajectory_rng(seed, m)
        out[m] = _run_trajectory(
            psi0, prop_sample, prop_fine, n_fine, channels, grid.n_samples, rng
        )
    return TrajectoryEnsemble(grid=grid, M=M, pure_states=out, rng_seed=int(seed))


def _run_trajectory(psi0, prop_sample, prop_fine, n_fine, channels, n_samples, rng):
    """March one trajectory across the sample grid.

    The state is kept unnormalized between jumps; when its squared norm
    crosses the current uniform threshold inside a sample interval, that
    interval is re-walked in fine sub-steps to locate the jump.
    """
    psi = psi0.copy()
    samples = np.empty((n_samples, psi.size), dtype=np.complex128)
    samples[0] = psi
    if not channels:
        for k in range(1, n_samples):
            psi = prop_sample @ psi
            samples[k] = psi / np.linalg.norm(psi)
        return samples

    threshold = rng.random()
    for k in range(1, n_samples):
        trial = prop_sample @ psi
        if np.vdot(trial, trial).real > threshold:
            psi = trial
        else:
            for _ in range(n_fine):
                psi = prop_fine @ psi
                if np.vdot(psi, psi).real <= threshold:
                    psi = _apply_jump(psi, channels, rng)
                    threshold = rng.random()
        samples[k] = psi / np.linalg.norm(psi)
    return samples


def _apply_jump(psi, channels, rng):
    weights = np.array([np.linalg.norm(C @ psi) ** 2 for C in channels])
    total = weights.sum()
    if total <= 0.0:
        # No channel can fire (state in the joint kernel); the norm cannot
        # decay further, so treat as a no-op and let the drift carry on.
        return psi
    pick = int(np.searchsorted(np.cumsum(weights) / total, rng.random()))
    pick = min(pick, len(channels) - 1)
    post = channels[pick] @ psi
    return post / np.linalg.norm(post)


def ensemble_average(
    ens: TrajectoryEnsemble, observable: SparseOperator
) -> TimeSeries:
    """Per-sample mean and standard error of ``<psi|O|psi>`` over trajectories.

    The standard error is NaN for a single trajectory.
    """
    if observable.dim != ens.pure_states.shape[-1]:
        raise DimensionError(
            f"observable dim {observable.dim} != state dim {ens.pure_states.shape[-1]}"
        )
    Od = observable.dense()
    vals = np.einsum(
        "mki,mki->mk", ens.pure_states.conj(), ens.pure_states @ Od.T
    ).real
    mean = vals.mean(axis=0)
    if ens.M > 1:
        stderr = vals.std(axis=0, ddof=1) / np.sqrt(ens.M)
    else:
        stderr = np.full(ens.grid.n_samples, np.nan)
    return TimeSeries(times=ens.grid.times, values=mean, stderr=stderr)


def expectation_series(traj: DensityTrajectory, observable: SparseOperator) -> TimeSeries:
    """``Tr(O rho(t))`` sampled along a density trajectory."""
    if observable.dim != traj.states.shape[-1]:
        raise DimensionError("observable dimension mismatch")
    coo = observable.matrix.tocoo()
    vals = traj.states[:, coo.col, coo.row] @ coo.data
    if np.abs(vals.imag).max(initial=0.0) < 1e-10:
        vals = vals.real
    return TimeSeries(times=traj.grid.times, values=vals)
