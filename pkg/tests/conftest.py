import numpy as np
import pytest

from semcoex.channel import trial_channels
from semcoex.model import ChannelSet, SystemConfig
from semcoex.semrate import SemanticRateModel, default_model


@pytest.fixture(scope="session")
def model() -> SemanticRateModel:
    return default_model()


@pytest.fixture
def cfg() -> SystemConfig:
    return SystemConfig()


def random_channels(rng: np.random.Generator, n_t: int, n_bit: int, n_sem: int) -> ChannelSet:
    H = (rng.normal(size=(n_t, n_bit + n_sem)) + 1j * rng.normal(size=(n_t, n_bit + n_sem))) / np.sqrt(2)
    return ChannelSet.from_matrix(H, n_bit)


def default_trial(cfg: SystemConfig, trial: int) -> ChannelSet:
    return trial_channels(cfg, trial)
