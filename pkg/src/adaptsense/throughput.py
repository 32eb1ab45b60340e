"""Opportunistic-throughput evaluation.

Aggregate Shannon rate over the truly idle subchannels, weighted by the
fraction of the frame left for transmission.  The adaptive system frees
the unused tail of the sensing interval (it stops after l* of L mini
slots), so its time factor (T - (tau/L) l*) / T dominates the fixed
baseline factor (T - tau) / T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

# Thermal noise floor in dBm/Hz.
DEFAULT_NOISE_DENSITY_DBM_HZ = -174.0


@dataclass(frozen=True)
class LinkModel:
    """Secondary-link budget shared by all subchannels."""

    transmit_power_dbm: float
    distance_km: float
    noise_density_dbm_hz: float = DEFAULT_NOISE_DENSITY_DBM_HZ

    @property
    def transmit_power_w(self) -> float:
        return 10.0 ** ((self.transmit_power_dbm - 30.0) / 10.0)

    @property
    def noise_density_w_hz(self) -> float:
        return 10.0 ** ((self.noise_density_dbm_hz - 30.0) / 10.0)

    @property
    def channel_gain(self) -> float:
        """|H|^2, identical on every subchannel (flat block fading)."""
        return 10.0 ** (-path_loss_db(self.distance_km) / 10.0)


def path_loss_db(distance_km: float) -> float:
    """Urban micro path loss: 127 + 30*log10(D) with D in km."""
    if distance_km <= 0:
        raise ValueError("distance must be positive")
    return 127.0 + 30.0 * np.log10(distance_km)


def _idle_sum(occupied, link: LinkModel, config: ScenarioConfig,
              false_alarm_rate: float) -> float:
    """Sum over truly idle subchannels of (1 - P_f) B log2(1 + SNR_j)."""
    bw = config.subchannel_bandwidth_hz
    snr = (link.transmit_power_w * link.channel_gain
           / (link.noise_density_w_hz * bw))
    idle = config.num_subchannels - len(set(occupied))
    return idle * (1.0 - false_alarm_rate) * bw * np.log2(1.0 + snr)


def adaptive_throughput(terminated_slot: int, occupied, link: LinkModel,
                        config: ScenarioConfig,
                        false_alarm_rate: float = 0.01) -> float:
    """Throughput in bits/s when sensing stopped after ``terminated_slot``
    of the L mini slots."""
    if not 1 <= terminated_slot <= config.mini_slots:
        raise ValueError("terminated slot out of range")
    tau = config.sensing_interval_s
    used = tau / config.mini_slots * terminated_slot
    factor = (config.frame_length_s - used) / config.frame_length_s
    return factor * _idle_sum(occupied, link, config, false_alarm_rate)


def baseline_throughput(occupied, link: LinkModel, config: ScenarioConfig,
                        false_alarm_rate: float = 0.01) -> float:
    """Throughput of the non-adaptive system that always spends the whole
    sensing interval tau."""
    factor = ((config.frame_length_s - config.sensing_interval_s)
              / config.frame_length_s)
    return factor * _idle_sum(occupied, link, config, false_alarm_rate)
