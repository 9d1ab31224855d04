import functools

import numpy as np
import pytest

import dtclab as d

CANONICAL_SEED = 7


@functools.lru_cache(maxsize=None)
def scenario_setup(tag, L, seed=CANONICAL_SEED):
    """Build (spec, basis, H, jumps, liouvillian) once per configuration."""
    spec = d.ScenarioSpec.create(tag, L, disorder_seed=seed)
    basis = d.build_basis(L)
    H, jumps = d.build_scenario_operators(spec, basis)
    return spec, basis, H, jumps, d.build_liouvillian(H, jumps)


@pytest.fixture(scope="session")
def setup():
    return scenario_setup


@pytest.fixture(scope="session")
def l3_eigvals():
    """Memoized eigenvalues of the 4096 x 4096 L=3 superoperators."""
    cache = {}

    def get(tag):
        if tag not in cache:
            _, _, _, _, liouv = scenario_setup(tag, 3)
            cache[tag] = d.eigensystem(liouv, compute_vectors=False).lambdas
        return cache[tag]

    return get


@pytest.fixture(scope="session")
def lossgain_l1_m2000():
    """Shared heavy Monte Carlo run: L=1 loss_gain, M=2000 trajectories.

    Returns (ensemble mean series, deterministic series) for <S^x_1>.
    """
    spec, basis, H, jumps, liouv = scenario_setup("loss_gain", 1, seed=3)
    psi0 = d.random_pure_state(H, 11)
    grid = d.TimeGrid(0.0, 100.0, 1024)
    ens = d.evolve_trajectories(H, jumps, psi0, grid, M=2000, seed=17)
    sx = d.transverse_spin_op(basis, 1)
    mc = d.ensemble_average(ens, sx)
    traj = d.evolve_master(liouv, np.outer(psi0, psi0.conj()), grid)
    exact = d.expectation_series(traj, sx)
    return mc, exact
