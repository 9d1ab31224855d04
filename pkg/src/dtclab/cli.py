"""Scenario-driven command line front end.

Subcommands map one-to-one onto the analysis pipelines:

* ``spectrum``      -- materialize the Liouvillian (L <= 3), classify its
  eigenvalues, export the spectrum CSV and the report JSON.
* ``evolve``        -- random initial state, master-equation evolution,
  transverse-spin and echo series, late-time DFTs and peak lists (L <= 4).
* ``trajectories``  -- quantum-jump unraveling of the same initial state,
  per-trajectory transverse-spin series and the ensemble mean (L <= 4).
* ``darkstates``    -- dark-state search report (L <= 4).
* ``symmetry``      -- strong-dynamical-symmetry certificate for S+.

All commands read a JSON config (see ``RunConfig``; unknown keys are
rejected), write into an output directory, and embed the config hash, package
version and seeds in every output file.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DtcLabError, IntegrationError, SizeCapError
from .dynamics import (
    TimeGrid,
    ensemble_average,
    evolve_observables,
    evolve_trajectories,
    random_pure_state,
)
from .liouville import (
    build_liouvillian,
    classify,
    eigensystem,
    report_to_dict,
    spectrum_rows,
)
from .model import (
    ScenarioSpec,
    build_scenario_operators,
    scenario_from_dict,
    spin_operators,
    transverse_spin_op,
)
from .probes import dft_blackman, find_peaks
from .qspace import SparseOperator, build_basis
from .symmetry import (
    certificate_to_dict,
    darkstate_report_to_dict,
    find_dark_states,
    verify_dynamical_symmetry,
)

SPECTRUM_MAX_L = 3
EVOLVE_MAX_L = 4

_GRID_DEFAULTS = {
    "closed": (0.0, 100.0, 4096),
    "loss": (0.0, 100.0, 4096),
    "loss_gain": (0.0, 100.0, 4096),
    "thermo_breaker": (0.0, 100.0, 4096),
    "inhom_field": (0.0, 1000.0, 16384),
}
_DFT_START_DEFAULTS = {
    "closed": 50.0,
    "loss": 50.0,
    "loss_gain": 50.0,
    "thermo_breaker": 50.0,
    "inhom_field": 950.0,
}

_TOP_KEYS = {
    "scenario", "grid", "state_seed", "trajectory_seed", "n_trajectories",
    "probe_site", "dft_t_start", "peak_threshold", "commensurability", "out_dir",
}
_GRID_KEYS = {"t0", "t1", "n_samples"}
_COMM_KEYS = {"max_den", "rel_tol", "t_exp"}


@dataclass
class RunConfig:
    """Resolved run configuration (defaults filled in, hashable)."""

    scenario: ScenarioSpec
    grid: TimeGrid
    state_seed: int
    trajectory_seed: int
    n_trajectories: int
    probe_site: int
    dft_t_start: float
    peak_threshold: float
    max_den: int
    rel_tol: float
    t_exp: float
    out_dir: Path
    resolved: dict

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.resolved, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _require_keys(d: dict, allowed: set, what: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {what} keys: {sorted(unknown)}; allowed: {sorted(allowed)}")


def load_config(path, out_override=None, seed_override=None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(raw, _TOP_KEYS, "config")
    if "scenario" not in raw:
        raise ConfigError("config missing required 'scenario' section")

    scen_cfg = dict(raw["scenario"])
    if seed_override is not None:
        scen_cfg["disorder_seed"] = int(seed_override)
    scenario = scenario_from_dict(scen_cfg)
    tag, L = scenario.tag, scenario.params.L

    grid_cfg = raw.get("grid", {})
    if not isinstance(grid_cfg, dict):
        raise ConfigError("'grid' must be an object with t0/t1/n_samples")
    _require_keys(grid_cfg, _GRID_KEYS, "grid")
    g0, g1, gn = _GRID_DEFAULTS[tag]
    try:
        grid = TimeGrid(
            t0=float(grid_cfg.get("t0", g0)),
            t1=float(grid_cfg.get("t1", g1)),
            n_samples=int(grid_cfg.get("n_samples", gn)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc

    comm_cfg = raw.get("commensurability", {})
    if not isinstance(comm_cfg, dict):
        raise ConfigError("'commensurability' must be an object")
    _require_keys(comm_cfg, _COMM_KEYS, "commensurability")

    probe_site = int(raw.get("probe_site", min(2, L)))
    if not 1 <= probe_site <= L:
        raise ConfigError(f"probe_site {probe_site} outside [1, {L}]")
    dft_t_start = float(raw.get("dft_t_start", _DFT_START_DEFAULTS[tag]))
    peak_threshold = float(raw.get("peak_threshold", 0.1))
    if not 0.0 < peak_threshold < 1.0:
        raise ConfigError("peak_threshold must be in (0, 1)")
    n_traj = int(raw.get("n_trajectories", 3))
    if n_traj < 1:
        raise ConfigError("n_trajectories must be >= 1")

    out_dir = Path(out_override) if out_override else Path(raw.get("out_dir", "dtclab_out"))

    resolved = {
        "scenario": scenario.raw_config,
        "grid": {"t0": grid.t0, "t1": grid.t1, "n_samples": grid.n_samples},
        "state_seed": int(raw.get("state_seed", 11)),
        "trajectory_seed": int(raw.get("trajectory_seed", 13)),
        "n_trajectories": n_traj,
        "probe_site": probe_site,
        "dft_t_start": dft_t_start,
        "peak_threshold": peak_threshold,
        "commensurability": {
            "max_den": int(comm_cfg.get("max_den", 1000)),
            "rel_tol": float(comm_cfg.get("rel_tol", 1e-8)),
            "t_exp": float(comm_cfg.get("t_exp", 1000.0)),
        },
    }
    return RunConfig(
        scenario=scenario,
        grid=grid,
        state_seed=resolved["state_seed"],
        trajectory_seed=resolved["trajectory_seed"],
        n_trajectories=n_traj,
        probe_site=probe_site,
        dft_t_start=dft_t_start,
        peak_threshold=peak_threshold,
        max_den=resolved["commensurability"]["max_den"],
        rel_tol=resolved["commensurability"]["rel_tol"],
        t_exp=resolved["commensurability"]["t_exp"],
        out_dir=out_dir,
        resolved=resolved,
    )


# -- output helpers -----------------------------------------------------------

def _meta_lines(cfg: RunConfig) -> list[str]:
    s = cfg.resolved
    return [
        f"config_hash={cfg.config_hash}",
        f"version={__version__}",
        (
            f"seeds disorder={cfg.scenario.disorder_seed} "
            f"state={s['state_seed']} trajectories={s['trajectory_seed']}"
        ),
    ]


def write_csv(path: Path, cfg: RunConfig, colnames: list[str], columns) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in _meta_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write(",".join(colnames) + "\n")
        arr = np.column_stack(columns)
        for row in arr:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    return repr(float(v))


def write_json(path: Path, cfg: RunConfig, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    s = cfg.resolved
    doc = {
        "meta": {
            "config_hash": cfg.config_hash,
            "version": __version__,
            "seeds": {
                "disorder": cfg.scenario.disorder_seed,
                "state": s["state_seed"],
                "trajectories": s["trajectory_seed"],
            },
        },
        **payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- commands -------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, quiet: bool = False) -> list[Path]:
    L = cfg.scenario.params.L
    if L > SPECTRUM_MAX_L:
        raise SizeCapError(
            f"spectrum command supports L <= {SPECTRUM_MAX_L} "
            f"(dense {4**L * 4**L} x {4**L * 4**L} superoperator); got L={L}"
        )
    basis = build_basis(L)
    H, jumps = build_scenario_operators(cfg.scenario, basis)
    liouv = build_liouvillian(H, jumps)
    es = eigensystem(liouv, compute_vectors=False)
    report = classify(
        es, max_den=cfg.max_den, rel_tol=cfg.rel_tol, t_exp=cfg.t_exp
    )
    rows = spectrum_rows(report)
    csv_path = cfg.out_dir / "spectrum.csv"
    write_csv(
        csv_path, cfg, ["re", "im", "class"],
        [[r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows]],
    )
    json_path = cfg.out_dir / "spectrum_report.json"
    write_json(json_path, cfg, {"report": report_to_dict(report)})
    if not quiet:
        freqs = ", ".join(f"{f:.6g}" for f in report.frequencies)
        print(f"spectrum: {len(report.oscillatory)} oscillatory eigenvalues [{freqs}]")
    return [csv_path, json_path]


def _evolved_state(cfg: RunConfig):
    basis = build_basis(cfg.scenario.params.L)
    H, jumps = build_scenario_operators(cfg.scenario, basis)
    liouv = build_liouvillian(H, jumps)
    psi0 = random_pure_state(H, cfg.state_seed)
    rho0 = np.outer(psi0, psi0.conj())
    return basis, H, jumps, liouv, psi0, rho0


def cmd_evolve(cfg: RunConfig, quiet: bool = False) -> list[Path]:
    L = cfg.scenario.params.L
    if L > EVOLVE_MAX_L:
        raise SizeCapError(f"evolve command supports L <= {EVOLVE_MAX_L}, got L={L}")
    basis, _, _, liouv, _, rho0 = _evolved_state(cfg)
    if not quiet:
        print(f"evolve: integrating to t={cfg.grid.t1} ({cfg.grid.n_samples} samples)")
    sx_op = transverse_spin_op(basis, cfg.probe_site)
    echo_op = SparseOperator.from_matrix(rho0)
    sx, echo = evolve_observables(liouv, rho0, cfg.grid, [sx_op, echo_op])
    out = []
    for name, series in (("transverse_spin", sx), ("echo", echo)):
        csv_path = cfg.out_dir / f"{name}.csv"
        write_csv(csv_path, cfg, ["time", "value"], [series.times, series.values])
        spec = dft_blackman(series, cfg.dft_t_start)
        dft_path = cfg.out_dir / f"{name}_dft.csv"
        write_csv(dft_path, cfg, ["omega", "magnitude"], [spec.frequencies, spec.magnitudes])
        peaks = find_peaks(spec, cfg.peak_threshold)
        peaks_path = cfg.out_dir / f"{name}_peaks.json"
        write_json(
            peaks_path, cfg,
            {
                "peaks": [{"omega": o, "magnitude": h} for o, h in peaks],
                "bin_width": spec.bin_width,
                "t_start": spec.t_start,
            },
        )
        out += [csv_path, dft_path, peaks_path]
        if not quiet:
            print(f"{name}: {len(peaks)} peaks at " +
                  ", ".join(f"{o:.4g}" for o, _ in peaks))
    return out


def cmd_trajectories(cfg: RunConfig, quiet: bool = False) -> list[Path]:
    L = cfg.scenario.params.L
    if L > EVOLVE_MAX_L:
        raise SizeCapError(f"trajectories command supports L <= {EVOLVE_MAX_L}, got L={L}")
    basis, H, jumps, _, psi0, _ = _evolved_state(cfg)
    if not quiet:
        print(f"trajectories: running M={cfg.n_trajectories}")
    ens = evolve_trajectories(
        H, jumps, psi0, cfg.grid, cfg.n_trajectories, cfg.trajectory_seed
    )
    _, _, _, sx_site = spin_operators(basis)
    op = sx_site[cfg.probe_site - 1]
    od = op.dense()
    per_traj = np.einsum(
        "mki,mki->mk", ens.pure_states.conj(), ens.pure_states @ od.T
    ).real
    mean_series = ensemble_average(ens, op)
    cols = [mean_series.times] + [per_traj[m] for m in range(ens.M)]
    names = ["time"] + [f"traj_{m}" for m in range(ens.M)]
    csv_path = cfg.out_dir / "trajectories.csv"
    write_csv(csv_path, cfg, names, cols)
    mean_path = cfg.out_dir / "trajectories_mean.csv"
    write_csv(
        mean_path, cfg, ["time", "mean", "stderr"],
        [mean_series.times, mean_series.values, mean_series.stderr],
    )
    meta_path = cfg.out_dir / "trajectories_meta.json"
    write_json(
        meta_path, cfg,
        {
            "M": ens.M,
            "trajectory_seed": ens.rng_seed,
            "probe_site": cfg.probe_site,
            "scenario_hash": cfg.config_hash,
        },
    )
    return [csv_path, mean_path, meta_path]


def cmd_darkstates(cfg: RunConfig, quiet: bool = False) -> list[Path]:
    L = cfg.scenario.params.L
    if L > EVOLVE_MAX_L:
        raise SizeCapError(f"darkstates command supports L <= {EVOLVE_MAX_L}, got L={L}")
    basis = build_basis(L)
    H, jumps = build_scenario_operators(cfg.scenario, basis)
    report = find_dark_states(H, jumps)
    path = cfg.out_dir / "darkstates.json"
    write_json(path, cfg, {"darkstates": darkstate_report_to_dict(report)})
    if not quiet:
        print(f"darkstates: found {len(report.states)} (method: {report.method})")
    return [path]


def cmd_symmetry(cfg: RunConfig, quiet: bool = False) -> list[Path]:
    basis = build_basis(cfg.scenario.params.L)
    H, jumps = build_scenario_operators(cfg.scenario, basis)
    _, s_plus, _, _ = spin_operators(basis)
    cert = verify_dynamical_symmetry(H, jumps, s_plus)
    path = cfg.out_dir / "symmetry.json"
    write_json(
        path, cfg,
        {"operator": "S_plus", "certificate": certificate_to_dict(cert)},
    )
    if not quiet:
        verdict = "passes" if cert.passed else "fails"
        print(f"symmetry: S+ certificate {verdict} (omega={cert.omega:.6g})")
    return [path]


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "trajectories": cmd_trajectories,
    "darkstates": cmd_darkstates,
    "symmetry": cmd_symmetry,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtclab",
        description="Liouvillian spectra and time-crystal diagnostics for dissipative Hubbard chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed-override", type=int, default=None,
                       help="override the disorder seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, out_override=args.out,
                          seed_override=args.seed_override)
        paths = _COMMANDS[args.command](cfg, quiet=args.quiet)
    except (ConfigError, SizeCapError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, DtcLabError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        for p in paths:
            print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
