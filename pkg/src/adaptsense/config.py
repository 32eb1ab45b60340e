"""Scenario configuration: constants of one sensing scenario plus loading
from TOML preset files.

A scenario either carries an explicit list of subbands or a
``RandomSubbands`` recipe from which concrete subbands are drawn per
trial seed (see :func:`realize`).
"""

from __future__ import annotations

import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


@dataclass(frozen=True)
class SubbandSpec:
    """One active subband: a sinc pulse of bandwidth ``bandwidth_hz``
    modulated to ``center_freq_hz``, received with linear power
    ``power`` (relative to the unit-variance background noise)."""

    center_freq_hz: float
    bandwidth_hz: float
    power: float
    time_offset_s: float = 0.0

    @staticmethod
    def from_snr_db(center_freq_hz, bandwidth_hz, snr_db, time_offset_s=0.0):
        return SubbandSpec(center_freq_hz, bandwidth_hz,
                           10.0 ** (snr_db / 10.0), time_offset_s)


@dataclass(frozen=True)
class RandomSubbands:
    """Recipe for drawing non-overlapping random subbands per trial."""

    count: int = 8
    bandwidth_hz: tuple[float, float] = (156.25e3, 468.75e3)
    snr_db: tuple[int, int] = (7, 27)


@dataclass(frozen=True)
class ScenarioConfig:
    total_bandwidth_hz: float
    num_subchannels: int
    frame_length_s: float
    sensing_interval_s: float
    mini_slots: int
    nyquist_rate_hz: float
    subnyquist_rate_hz: float
    smnr_db: float = 50.0
    test_fraction: float = 0.1
    # Halting band half-width as a multiple of the expected testing-noise
    # level 2*delta^2 (dimensionless).
    accuracy: float = 0.2
    # Scale on the per-slot default data-fit threshold of the l1 solver.
    recovery_threshold: float = 1.0
    noise_seed: int = 0
    matrix_seed: int = 1
    signal_seed: int = 2
    subbands: tuple[SubbandSpec, ...] | None = None
    random_subbands: RandomSubbands | None = None

    def __post_init__(self):
        self.validate()

    # Derived sizes -----------------------------------------------------

    @property
    def num_samples(self) -> int:
        """N: Nyquist samples per sensing interval."""
        return round(self.sensing_interval_s * self.nyquist_rate_hz)

    @property
    def num_measurements(self) -> int:
        """M_L: compressed samples per sensing interval."""
        return round(self.sensing_interval_s * self.subnyquist_rate_hz)

    @property
    def block_size(self) -> int:
        """Measurements added per mini time slot."""
        return self.num_measurements // self.mini_slots

    @property
    def bins_per_subchannel(self) -> int:
        return self.num_samples // self.num_subchannels

    @property
    def subchannel_bandwidth_hz(self) -> float:
        return self.total_bandwidth_hz / self.num_subchannels

    # Validation --------------------------------------------------------

    def validate(self):
        W, fn, fs = self.total_bandwidth_hz, self.nyquist_rate_hz, self.subnyquist_rate_hz
        if W <= 0:
            raise ConfigError("total bandwidth must be positive")
        if fn < 2 * W:
            raise ConfigError(f"nyquist rate {fn} below 2W={2 * W}")
        if fs >= 2 * W:
            raise ConfigError("sub-Nyquist rate must be below 2W")
        n_exact = self.sensing_interval_s * self.nyquist_rate_hz
        m_exact = self.sensing_interval_s * self.subnyquist_rate_hz
        if not math.isclose(n_exact, round(n_exact), abs_tol=1e-6):
            raise ConfigError(f"tau*f_N = {n_exact} is not an integer")
        if not math.isclose(m_exact, round(m_exact), abs_tol=1e-6):
            raise ConfigError(f"tau*f_S = {m_exact} is not an integer")
        if self.num_measurements >= self.num_samples:
            raise ConfigError("M_L must be smaller than N")
        if self.num_measurements <= 0:
            raise ConfigError("M_L must be positive")
        if not self.sensing_interval_s < self.frame_length_s:
            raise ConfigError("sensing interval must be shorter than the frame")
        if self.mini_slots < 1:
            raise ConfigError("need at least one mini time slot")
        if self.num_measurements % self.mini_slots != 0:
            raise ConfigError("mini slot count must divide M_L")
        if self.num_samples % self.num_subchannels != 0:
            raise ConfigError("subchannel count must divide N")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if round(self.test_fraction * self.block_size) < 1:
            raise ConfigError("test_fraction leaves no testing rows per slot")
        if self.accuracy <= 0:
            raise ConfigError("accuracy must be positive")
        if self.recovery_threshold < 0:
            raise ConfigError("recovery_threshold must be nonnegative")
        if self.subbands is not None:
            self._validate_subbands(self.subbands)

    def _validate_subbands(self, subbands):
        W = self.total_bandwidth_hz
        for sb in subbands:
            if sb.bandwidth_hz <= 0:
                raise ConfigError("subband bandwidth must be positive")
            if sb.power < 0:
                raise ConfigError("subband power must be nonnegative")
            lo = sb.center_freq_hz - sb.bandwidth_hz / 2
            hi = sb.center_freq_hz + sb.bandwidth_hz / 2
            if lo < 0 or hi > W:
                raise ConfigError(
                    f"subband [{lo:.4g}, {hi:.4g}] extends outside [0, {W:.4g}]")
        spans = sorted((sb.center_freq_hz - sb.bandwidth_hz / 2,
                        sb.center_freq_hz + sb.bandwidth_hz / 2)
                       for sb in subbands)
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo < hi:
                raise ConfigError("subbands overlap in frequency")


def draw_subbands(recipe: RandomSubbands, config: ScenarioConfig,
                  rng: np.random.Generator) -> tuple[SubbandSpec, ...]:
    """Draw ``recipe.count`` pairwise non-overlapping subbands inside
    [0, W] by rejection, with integer per-subband SNRs in dB and a
    common random time offset in [tau/8, tau/4].

    The offset is kept away from the start of the observation window so
    the pulse main lobes fall inside it; a pulse truncated at the window
    edge smears energy across the whole band and is not the sparse
    scenario this model targets.
    """
    W = config.total_bandwidth_hz
    tau = config.sensing_interval_s
    alpha = rng.uniform(tau / 8, tau / 4)
    placed = []
    attempts = 0
    while len(placed) < recipe.count:
        if attempts > 10_000:
            raise ConfigError("could not place non-overlapping subbands")
        attempts += 1
        bw = rng.uniform(*recipe.bandwidth_hz)
        fc = rng.uniform(bw / 2, W - bw / 2)
        if all(abs(fc - fc2) > (bw + bw2) / 2 for fc2, bw2 in placed):
            placed.append((fc, bw))
    snr_lo, snr_hi = recipe.snr_db
    snrs = rng.integers(snr_lo, snr_hi + 1, size=recipe.count)
    return tuple(SubbandSpec.from_snr_db(fc, bw, int(s), alpha)
                 for (fc, bw), s in zip(placed, snrs))


def realize(config: ScenarioConfig, trial: int = 0) -> ScenarioConfig:
    """Materialize a trial-specific scenario: offset every seed by
    ``trial`` and draw concrete subbands if the config only carries a
    random-subband recipe."""
    cfg = replace(config,
                  noise_seed=config.noise_seed + trial,
                  matrix_seed=config.matrix_seed + trial,
                  signal_seed=config.signal_seed + trial)
    if cfg.subbands is None:
        if cfg.random_subbands is None:
            cfg = replace(cfg, subbands=())
        else:
            rng = np.random.default_rng(cfg.signal_seed)
            cfg = replace(cfg, subbands=draw_subbands(cfg.random_subbands, cfg, rng))
    return cfg


# TOML loading ----------------------------------------------------------


def _scenario_from_dict(doc: dict) -> ScenarioConfig:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc.get('schema_version')!r}")
    sc = doc.get("scenario")
    if not isinstance(sc, dict):
        raise ConfigError("missing [scenario] table")
    kwargs = dict(sc)
    subbands = None
    if "subband" in doc:
        rows = []
        for row in doc["subband"]:
            if "snr_db" in row:
                rows.append(SubbandSpec.from_snr_db(
                    row["center_freq_hz"], row["bandwidth_hz"], row["snr_db"],
                    row.get("time_offset_s", 0.0)))
            else:
                rows.append(SubbandSpec(
                    row["center_freq_hz"], row["bandwidth_hz"], row["power"],
                    row.get("time_offset_s", 0.0)))
        subbands = tuple(rows)
    recipe = None
    if "random_subbands" in doc:
        r = doc["random_subbands"]
        recipe = RandomSubbands(
            count=r.get("count", 8),
            bandwidth_hz=tuple(r.get("bandwidth_hz", RandomSubbands.bandwidth_hz)),
            snr_db=tuple(r.get("snr_db", RandomSubbands.snr_db)))
    if subbands is not None and recipe is not None:
        raise ConfigError("specify either [[subband]] or [random_subbands], not both")
    try:
        return ScenarioConfig(subbands=subbands, random_subbands=recipe, **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    """Load a scenario from a TOML file (schema_version 1)."""
    with open(path, "rb") as fh:
        return _scenario_from_dict(tomllib.load(fh))


def load_preset(name: str) -> ScenarioConfig:
    """Load a packaged preset scenario, e.g. ``desk`` or ``full``."""
    ref = resources.files("adaptsense.presets").joinpath(f"{name}.toml")
    try:
        data = ref.read_bytes()
    except FileNotFoundError:
        raise ConfigError(f"unknown preset {name!r}") from None
    return _scenario_from_dict(tomllib.loads(data.decode()))
