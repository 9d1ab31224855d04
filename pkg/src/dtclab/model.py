"""Disordered Hubbard chain, spin observables and scenario dissipators.

The Hamiltonian (hopping amplitude fixed to 1, open boundaries) is

    H = - sum_{i<L, s} (c^dag_{i,s} c_{i+1,s} + h.c.)
        + sum_j U_j n_{j,up} n_{j,down} + eps_j n_j
        + (B_j / 2) (n_{j,up} - n_{j,down})

with per-site interactions ``U_j``, potentials ``eps_j`` and magnetic fields
``B_j``.  Disorder realizations draw ``U_j, eps_j`` i.i.d. uniform on [0, 3]
from a counter-based (Philox) generator keyed by the disorder seed, consuming
``U_1..U_L`` then ``eps_1..eps_L`` and, for the inhomogeneous-field scenario
only, ``B_1..B_L`` uniform on ``[B0 - delta, B0 + delta]``.

Five scenarios select the dissipator set acting on the chain:

==============  ========================================================
tag             jump operators
==============  ========================================================
closed          none
loss            pair loss  ``gamma_j c_{j,down} c_{j,up}`` on every site
loss_gain       loss plus pair gain ``Gamma_j c^dag_{j,up} c^dag_{j,down}``
inhom_field     loss + gain, with a non-constant field profile ``B_j``
thermo_breaker  loss + gain plus the site-1 dephaser ``mu * n_{1,up}``
==============  ========================================================

Rates enter as amplitudes multiplying the jump operator, so the effective
dissipation rate of a channel scales with the rate squared.

Note: the symmetry-breaking dephaser couples to the *spin-up* occupation of
site 1.  The total site occupation ``n_1`` commutes with the spin-raising
operator exactly ``[n_1, S+] = 0`` and with every ladder coherence, so a
total-density dephaser would leave the oscillating coherences untouched; the
spin-resolved density is the minimal local choice that actually removes them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .qspace import (
    FockBasis,
    SparseOperator,
    annihilator,
    creator,
    diagonal_operator,
    number_ops,
)

SCENARIO_TAGS = ("closed", "loss", "loss_gain", "inhom_field", "thermo_breaker")

DISORDER_LOW, DISORDER_HIGH = 0.0, 3.0
DEFAULT_B0 = 2.0
DEFAULT_FIELD_DELTA = 0.1
DEFAULT_LOSS_RATE = 1.0
DEFAULT_GAIN_RATE = 1.0
DEFAULT_DEPHASE_MU = 0.5


def disorder_rng(seed: int) -> np.random.Generator:
    """Counter-based generator used for all disorder draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True, eq=False)
class HubbardParams:
    """Chain parameters; all vectors have length ``L``, hopping is 1."""

    L: int
    U: np.ndarray
    eps: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        for name in ("U", "eps", "B"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.shape != (self.L,):
                raise ConfigError(f"{name} must have length L={self.L}, got shape {v.shape}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_seed(
        cls,
        L: int,
        disorder_seed: int,
        B0: float = DEFAULT_B0,
        field_delta: float | None = None,
    ) -> "HubbardParams":
        """Draw a disorder realization; ``field_delta`` triggers an inhomogeneous B."""
        rng = disorder_rng(disorder_seed)
        U = rng.uniform(DISORDER_LOW, DISORDER_HIGH, size=L)
        eps = rng.uniform(DISORDER_LOW, DISORDER_HIGH, size=L)
        if field_delta is None:
            B = np.full(L, float(B0))
        else:
            B = rng.uniform(B0 - field_delta, B0 + field_delta, size=L)
        return cls(L=L, U=U, eps=eps, B=B)

    @property
    def uniform_field(self) -> bool:
        return bool(np.ptp(self.B) == 0.0)


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """A fully specified open-system scenario."""

    tag: str
    params: HubbardParams
    disorder_seed: int
    loss: np.ndarray | None = None       # per-site loss amplitudes gamma_j
    gain: np.ndarray | None = None       # per-site gain amplitudes Gamma_j
    dephase_mu: float | None = None      # site-1 spin-up dephasing amplitude
    raw_config: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.tag not in SCENARIO_TAGS:
            raise ConfigError(f"unknown scenario tag {self.tag!r}; expected one of {SCENARIO_TAGS}")
        L = self.params.L
        for name in ("loss", "gain"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=np.float64)
                if v.shape != (L,):
                    raise ConfigError(f"{name} rates must have length L={L}")
                if np.any(v <= 0):
                    raise ConfigError(f"{name} rates must be strictly positive")
                object.__setattr__(self, name, v)
        want_loss = self.tag in ("loss", "loss_gain", "inhom_field", "thermo_breaker")
        want_gain = self.tag in ("loss_gain", "inhom_field", "thermo_breaker")
        want_mu = self.tag == "thermo_breaker"
        if (self.loss is not None) != want_loss or (self.gain is not None) != want_gain:
            raise ConfigError(f"dissipator set inconsistent with scenario {self.tag!r}")
        if (self.dephase_mu is not None) != want_mu:
            raise ConfigError(f"dephaser only allowed for thermo_breaker, got tag {self.tag!r}")
        if want_mu and self.dephase_mu <= 0:
            raise ConfigError("dephasing amplitude mu must be strictly positive")
        if self.tag == "inhom_field":
            if self.params.uniform_field:
                raise ConfigError("inhom_field scenario requires a non-constant field profile")
        elif not self.params.uniform_field:
            raise ConfigError(f"scenario {self.tag!r} requires a uniform field")

    @classmethod
    def create(
        cls,
        tag: str,
        L: int,
        disorder_seed: int,
        B0: float = DEFAULT_B0,
        delta: float = DEFAULT_FIELD_DELTA,
        gamma=DEFAULT_LOSS_RATE,
        Gamma=DEFAULT_GAIN_RATE,
        mu: float = DEFAULT_DEPHASE_MU,
    ) -> "ScenarioSpec":
        """Build a scenario from its tag and the documented defaults."""
        if tag not in SCENARIO_TAGS:
            raise ConfigError(f"unknown scenario tag {tag!r}; expected one of {SCENARIO_TAGS}")
        params = HubbardParams.from_seed(
            L, disorder_seed, B0=B0, field_delta=delta if tag == "inhom_field" else None
        )
        loss = np.broadcast_to(np.asarray(gamma, dtype=np.float64), (L,)).copy()
        gain = np.broadcast_to(np.asarray(Gamma, dtype=np.float64), (L,)).copy()
        kwargs = {}
        if tag in ("loss", "loss_gain", "inhom_field", "thermo_breaker"):
            kwargs["loss"] = loss
        if tag in ("loss_gain", "inhom_field", "thermo_breaker"):
            kwargs["gain"] = gain
        if tag == "thermo_breaker":
            kwargs["dephase_mu"] = float(mu)
        raw = {
            "tag": tag, "L": L, "disorder_seed": int(disorder_seed), "B0": float(B0),
            "delta": float(delta), "gamma": np.asarray(gamma).tolist(),
            "Gamma": np.asarray(Gamma).tolist(), "mu": float(mu),
        }
        return cls(tag=tag, params=params, disorder_seed=int(disorder_seed),
                   raw_config=raw, **kwargs)


_SCENARIO_KEYS = {"tag", "L", "disorder_seed", "B0", "delta", "gamma", "Gamma", "mu"}


def scenario_from_dict(cfg: dict) -> ScenarioSpec:
    """Build a scenario from a JSON-style dict; unknown keys are rejected."""
    if not isinstance(cfg, dict):
        raise ConfigError("scenario config must be a JSON object")
    unknown = set(cfg) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}; allowed: {sorted(_SCENARIO_KEYS)}")
    for key in ("tag", "L"):
        if key not in cfg:
            raise ConfigError(f"scenario config missing required key {key!r}")
    try:
        return ScenarioSpec.create(
            tag=cfg["tag"],
            L=int(cfg["L"]),
            disorder_seed=int(cfg.get("disorder_seed", 7)),
            B0=float(cfg.get("B0", DEFAULT_B0)),
            delta=float(cfg.get("delta", DEFAULT_FIELD_DELTA)),
            gamma=cfg.get("gamma", DEFAULT_LOSS_RATE),
            Gamma=cfg.get("Gamma", DEFAULT_GAIN_RATE),
            mu=float(cfg.get("mu", DEFAULT_DEPHASE_MU)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid scenario config: {exc}") from exc


def scenario_from_json(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


# -- operators ---------------------------------------------------------------

def build_hamiltonian(p: HubbardParams, basis: FockBasis) -> SparseOperator:
    """Assemble the disordered Hubbard Hamiltonian on ``basis``."""
    if basis.sites != p.L:
        raise ConfigError(f"basis has {basis.sites} sites but params have L={p.L}")
    states = np.arange(basis.dim, dtype=np.int64)
    diag = np.zeros(basis.dim, dtype=np.float64)
    for j in range(1, p.L + 1):
        up = ((states >> basis.mode(j, "up")) & 1).astype(np.float64)
        down = ((states >> basis.mode(j, "down")) & 1).astype(np.float64)
        diag += p.U[j - 1] * up * down
        diag += p.eps[j - 1] * (up + down)
        diag += 0.5 * p.B[j - 1] * (up - down)
    H = diagonal_operator(diag)
    for i in range(1, p.L):
        for spin in ("up", "down"):
            hop = creator(basis, i, spin) @ annihilator(basis, i + 1, spin)
            H = H - hop - hop.adjoint()
    return H


def spin_operators(basis: FockBasis):
    """``(S_z, S_plus, S_minus, [S_x per site])`` for the chain."""
    L = basis.sites
    states = np.arange(basis.dim, dtype=np.int64)
    sz = np.zeros(basis.dim, dtype=np.float64)
    for j in range(1, L + 1):
        up = ((states >> basis.mode(j, "up")) & 1).astype(np.float64)
        down = ((states >> basis.mode(j, "down")) & 1).astype(np.float64)
        sz += up - down
    S_z = diagonal_operator(sz)
    flips = [
        creator(basis, j, "up") @ annihilator(basis, j, "down") for j in range(1, L + 1)
    ]
    S_plus = flips[0]
    for f in flips[1:]:
        S_plus = S_plus + f
    S_minus = S_plus.adjoint()
    S_x_site = [0.5 * (f + f.adjoint()) for f in flips]
    return S_z, S_plus, S_minus, S_x_site


def transverse_spin_op(basis: FockBasis, site: int) -> SparseOperator:
    """``S^x_site = (c^dag_up c_down + c^dag_down c_up) / 2`` (1-based site)."""
    f = creator(basis, site, "up") @ annihilator(basis, site, "down")
    return 0.5 * (f + f.adjoint())


def pair_loss_op(basis: FockBasis, site: int) -> SparseOperator:
    """Unnormalized pair annihilation ``eta^-_site = c_down c_up``."""
    return annihilator(basis, site, "down") @ annihilator(basis, site, "up")


def build_jump_operators(spec: ScenarioSpec, basis: FockBasis) -> list[SparseOperator]:
    """Jump operators in deterministic order: losses, gains, then dephaser."""
    if basis.sites != spec.params.L:
        raise ConfigError(f"basis has {basis.sites} sites but scenario has L={spec.params.L}")
    jumps: list[SparseOperator] = []
    if spec.loss is not None:
        for j in range(1, spec.params.L + 1):
            jumps.append(float(spec.loss[j - 1]) * pair_loss_op(basis, j))
    if spec.gain is not None:
        for j in range(1, spec.params.L + 1):
            jumps.append(float(spec.gain[j - 1]) * pair_loss_op(basis, j).adjoint())
    if spec.dephase_mu is not None:
        n_up_1, _, _ = number_ops(basis, 1)
        jumps.append(float(spec.dephase_mu) * n_up_1)
    return jumps


def build_scenario_operators(spec: ScenarioSpec, basis: FockBasis):
    """Convenience: ``(H, jumps)`` for a scenario."""
    return build_hamiltonian(spec.params, basis), build_jump_operators(spec, basis)
