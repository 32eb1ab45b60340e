import numpy as np
import pytest

from adaptsense.config import ScenarioConfig, SubbandSpec


@pytest.fixture(scope="session")
def toy_config():
    """Desk-like geometry shrunk to N=400, M=100, L=10 for fast tests."""
    return ScenarioConfig(
        total_bandwidth_hz=31.25e6,
        num_subchannels=40,
        frame_length_s=12.8e-6,
        sensing_interval_s=6.4e-6,
        mini_slots=10,
        nyquist_rate_hz=62.5e6,
        subnyquist_rate_hz=15.625e6,
        smnr_db=50.0,
        test_fraction=0.1,
        noise_seed=11,
        matrix_seed=22,
        signal_seed=33,
        subbands=(
            SubbandSpec.from_snr_db(6.0e6, 1.5e6, 20, time_offset_s=1.6e-6),
            SubbandSpec.from_snr_db(14.0e6, 2.0e6, 15, time_offset_s=1.6e-6),
            SubbandSpec.from_snr_db(24.0e6, 1.0e6, 25, time_offset_s=1.6e-6),
        ))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
