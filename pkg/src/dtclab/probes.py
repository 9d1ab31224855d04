"""Non-stationarity probes and their windowed discrete Fourier transforms.

Two probes detect persistent oscillations: the transverse spin on a chosen
site, ``Tr(S^x_k rho(t))``, and the Loschmidt echo ``Tr(rho(0)^dag rho(t))``
measuring fidelity with the initial state.  Their late-time spectra are
computed with a mean-subtracted, Blackman-windowed one-sided DFT on an
angular-frequency axis, directly comparable with Liouvillian eigenvalue
imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .qspace import build_basis
from .model import transverse_spin_op

MIN_DFT_SAMPLES = 16
BLACKMAN_TAG = "blackman"
RECTANGULAR_TAG = "rectangular"


@dataclass
class TimeSeries:
    """Samples on a uniform time grid (optionally with standard errors)."""

    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values)
        if t.ndim != 1 or t.size < 2 or v.shape[0] != t.size:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        diffs = np.diff(t)
        span = max(abs(t[0]), abs(t[-1]), 1.0)
        if np.max(np.abs(diffs - diffs.mean())) > 1e-12 * span:
            raise ValueError("time grid must be uniform")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return float((self.times[-1] - self.times[0]) / (self.times.size - 1))


@dataclass
class DftSpectrum:
    """One-sided magnitude spectrum on an angular-frequency axis."""

    frequencies: np.ndarray     # angular frequencies (rad / time unit)
    magnitudes: np.ndarray
    window: str
    t_start: float

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


def transverse_spin_series(traj, site: int) -> TimeSeries:
    """``Tr(S^x_site rho(t))`` along a density trajectory (1-based site)."""
    n = traj.states.shape[-1]
    L = max(1, round(np.log2(n) / 2))
    if 4**L != n:
        raise DimensionError(f"state dimension {n} is not 4**L")
    op = transverse_spin_op(build_basis(L), site)
    coo = op.matrix.tocoo()
    vals = traj.states[:, coo.col, coo.row] @ coo.data
    return TimeSeries(times=traj.grid.times, values=vals.real)


def loschmidt_echo_series(rho0: np.ndarray, traj) -> TimeSeries:
    """Fidelity ``Tr(rho0^dag rho(t))`` with the initial state."""
    rho0 = np.asarray(rho0, dtype=np.complex128)
    if rho0.shape != traj.states.shape[1:]:
        raise DimensionError(
            f"rho0 shape {rho0.shape} incompatible with states {traj.states.shape[1:]}"
        )
    vals = np.einsum("ij,kij->k", rho0.conj(), traj.states)
    return TimeSeries(times=traj.grid.times, values=vals.real)


def dft_blackman(
    series: TimeSeries, t_start: float, window: str = BLACKMAN_TAG
) -> DftSpectrum:
    """Mean-subtracted windowed DFT of the samples at ``t >= t_start``.

    The Blackman window is the classic ``0.42 - 0.5 cos + 0.08 cos`` variant;
    ``window="rectangular"`` disables windowing (used by the Parseval check).
    """
    mask = series.times >= t_start
    n = int(mask.sum())
    if n < MIN_DFT_SAMPLES:
        raise ValueError(
            f"need at least {MIN_DFT_SAMPLES} samples after t_start={t_start}, got {n}"
        )
    values = np.asarray(series.values)
    if np.iscomplexobj(values):
        if np.abs(values.imag).max(initial=0.0) > 1e-8:
            raise ValueError("probe series must be real")
        values = values.real
    y = values[mask] - values[mask].mean()
    if window == BLACKMAN_TAG:
        w = np.blackman(n)
    elif window == RECTANGULAR_TAG:
        w = np.ones(n)
    else:
        raise ValueError(f"unknown window {window!r}")
    mags = np.abs(np.fft.rfft(y * w))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, d=series.dt)
    return DftSpectrum(
        frequencies=freqs, magnitudes=mags, window=window, t_start=float(t_start)
    )


def find_peaks(spec: DftSpectrum, rel_threshold: float) -> list[tuple[float, float]]:
    """Local spectral maxima above ``rel_threshold * max``, sub-bin refined.

    Peak positions are refined with a parabolic fit through the three bins
    around each maximum; returned as ``(omega, magnitude)`` sorted by omega.
    """
    if not 0.0 < rel_threshold < 1.0:
        raise ValueError("rel_threshold must be in (0, 1)")
    m = spec.magnitudes
    if m.size < 3:
        return []
    floor = rel_threshold * m.max()
    peaks = []
    for i in range(1, m.size - 1):
        if m[i] >= m[i - 1] and m[i] > m[i + 1] and m[i] >= floor:
            denom = m[i - 1] - 2.0 * m[i] + m[i + 1]
            if denom != 0.0:
                delta = 0.5 * (m[i - 1] - m[i + 1]) / denom
            else:
                delta = 0.0
            delta = float(np.clip(delta, -0.5, 0.5))
            omega = spec.frequencies[i] + delta * spec.bin_width
            height = m[i] - 0.25 * (m[i - 1] - m[i + 1]) * delta
            peaks.append((float(omega), float(height)))
    return peaks
