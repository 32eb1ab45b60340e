"""Multiband test-signal synthesis on the Nyquist grid.

The wideband signal is a sum of sinc pulses, each modulated to a subband
center frequency, plus unit-variance white Gaussian noise.  Sampling at
the Nyquist rate f_N over the sensing interval tau yields N = tau*f_N
samples whose unitary DFT is sparse: energy concentrates in the few
occupied subbands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ScenarioConfig, realize


@dataclass(frozen=True)
class NyquistSignal:
    """A realized wideband signal over one sensing interval.

    samples   -- length-N real time series x
    spectrum  -- unitary DFT of the samples
    occupied  -- 1-based indices of subchannels containing active subbands
    """

    samples: np.ndarray
    spectrum: np.ndarray
    occupied: frozenset[int]

    def __post_init__(self):
        if self.samples.shape != self.spectrum.shape:
            raise ValueError("samples and spectrum must have equal length")


def unitary_dft(x: np.ndarray) -> np.ndarray:
    """Unitary (1/sqrt(N)-scaled) DFT, so Parseval holds exactly."""
    x = np.asarray(x)
    if x.size < 1:
        raise ValueError("empty input")
    return np.fft.fft(x, norm="ortho")


def inverse_dft(X: np.ndarray) -> np.ndarray:
    """Inverse of :func:`unitary_dft`."""
    X = np.asarray(X)
    if X.size < 1:
        raise ValueError("empty input")
    return np.fft.ifft(X, norm="ortho")


def noiseless_samples(config: ScenarioConfig) -> np.ndarray:
    """Deterministic (noise-free) part of the signal at the Nyquist
    instants n/f_N."""
    if config.subbands is None:
        raise ConfigError("scenario has no materialized subbands; call realize()")
    n = np.arange(config.num_samples)
    t = n / config.nyquist_rate_hz
    x = np.zeros(config.num_samples)
    for sb in config.subbands:
        shifted = t - sb.time_offset_s
        x += (np.sqrt(sb.power * sb.bandwidth_hz)
              * np.sinc(sb.bandwidth_hz * shifted)
              * np.cos(2 * np.pi * sb.center_freq_hz * shifted))
    return x


def synthesize(config: ScenarioConfig) -> NyquistSignal:
    """Generate one signal realization: pulse sum plus unit-variance
    white Gaussian background noise, with its unitary spectrum and the
    ground-truth subchannel occupancy."""
    if config.subbands is None:
        config = realize(config)
    rng = np.random.default_rng(config.noise_seed)
    x = noiseless_samples(config) + rng.standard_normal(config.num_samples)
    return NyquistSignal(samples=x, spectrum=unitary_dft(x),
                         occupied=ground_truth_occupancy(config))


def ground_truth_occupancy(config: ScenarioConfig) -> frozenset[int]:
    """Subchannel j (1-based) is occupied iff its frequency interval
    [(j-1)W/J, jW/J) intersects an active subband."""
    if config.subbands is None:
        raise ConfigError("scenario has no materialized subbands; call realize()")
    width = config.subchannel_bandwidth_hz
    occupied = set()
    for sb in config.subbands:
        if sb.power <= 0:
            continue
        lo = sb.center_freq_hz - sb.bandwidth_hz / 2
        hi = sb.center_freq_hz + sb.bandwidth_hz / 2
        # Tiny relative tolerance so a subband edge exactly on a
        # subchannel boundary does not spill over from rounding.
        first = int(np.floor(lo / width + 1e-9)) + 1
        last = int(np.ceil(hi / width - 1e-9))
        occupied.update(range(max(first, 1),
                              min(last, config.num_subchannels) + 1))
    return frozenset(occupied)
