import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semcoex.model import (
    Beamformer,
    ChannelSet,
    ConfigError,
    SolveReport,
    SolverOptions,
    SystemConfig,
    default_config,
    dumps,
    loads,
    validate_config,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_default_config_is_valid():
    cfg = validate_config(default_config())
    assert (cfg.n_t, cfg.n_bit, cfg.n_sem, cfg.frame_len) == (16, 5, 3, 32768)
    assert (cfg.filters, cfg.image_size, cfg.k_min, cfg.k_max) == (128, 128, 2, 6)
    assert np.all(cfg.beta == 1.0) and np.all(cfg.noise == 1.0)


def test_zero_power_rejected():
    with pytest.raises(ConfigError, match="p_total must be positive"):
        validate_config(SystemConfig(p_total=0.0))


def test_depth_one_exceeds_frame():
    # M_1 = 128 * (128 / 4)**2 = 131072 > 32768
    with pytest.raises(ConfigError, match="131072"):
        validate_config(SystemConfig(k_min=1))


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"n_t": 0}, "n_t"),
        ({"n_sem": 0, "sigma2_sem": ()}, "n_sem"),
        ({"sigma2_bit": (1.0, 1.0, 0.0, 1.0, 1.0)}, "noise powers"),
        ({"qos": (1.0, -1.0, 1.0, 1.0, 1.0)}, "qos"),
        ({"k_min": 4, "k_max": 3}, "k_min"),
        ({"sigma2_bit": (1.0,)}, "noise power lists"),
    ],
)
def test_invariant_violations_are_named(changes, message):
    with pytest.raises(ConfigError, match=message):
        validate_config(SystemConfig(**changes))


def test_first_violation_reported():
    with pytest.raises(ConfigError, match="n_t"):
        validate_config(SystemConfig(n_t=0, p_total=-1.0))


def test_snr_sets_common_noise():
    cfg = SystemConfig().with_snr_db(10.0)
    assert np.allclose(cfg.noise, 0.1)
    assert SystemConfig.from_dict({"snr_db": -10.0}).noise[0] == pytest.approx(10.0)


def test_unknown_config_field():
    with pytest.raises(ConfigError, match="unknown"):
        SystemConfig.from_dict({"antennas": 4})


def test_config_roundtrip():
    cfg = SystemConfig(n_bit=2, qos=(0.5, 1.5), sigma2_bit=(0.3, 0.7), seed=9)
    assert SystemConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


complex_mats = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.lists(st.lists(st.tuples(finite, finite), min_size=n, max_size=n), min_size=0, max_size=3),
        st.lists(st.lists(st.tuples(finite, finite), min_size=n, max_size=n), min_size=1, max_size=3),
    )
)


def _to_matrix(cols, n):
    if not cols:
        return np.zeros((n, 0), complex)
    return np.array([[re + 1j * im for re, im in c] for c in cols]).T


@given(complex_mats)
@settings(max_examples=50, deadline=None)
def test_channel_and_beamformer_roundtrip_bit_exact(pair):
    bit, sem = pair
    n = len(sem[0])
    H = ChannelSet(_to_matrix(bit, n), _to_matrix(sem, n))
    assert loads(ChannelSet, dumps(H)) == H
    V = Beamformer(_to_matrix(bit, n), _to_matrix(sem, n))
    assert loads(Beamformer, dumps(V)) == V


def test_report_roundtrip():
    rng = np.random.default_rng(3)
    V = Beamformer(rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)), rng.normal(size=(4, 1)) + 0j)
    r = SolveReport(V, 3, 1.2345678901234567, rng.normal(size=5), rng.normal(size=2), rng.normal(size=2),
                    (3, 41), 0.01, True, True, "mmfp", (0.1, 0.2), {"status": "converged"})
    assert loads(SolveReport, dumps(r)) == r


def test_options_roundtrip():
    o = SolverOptions(xi=1e-7, damping=False)
    assert SolverOptions.from_dict(json.loads(json.dumps(o.to_dict()))) == o


def test_domain_types_are_immutable():
    H = ChannelSet(np.ones((2, 1)), np.ones((2, 1)))
    with pytest.raises(ValueError):
        H.h_bit[0, 0] = 2.0
    with pytest.raises(AttributeError):
        H.h_bit = None


def test_empty_bit_population():
    H = ChannelSet(np.zeros((3, 0)), np.ones((3, 2)))
    assert (H.n_t, H.n_bit, H.n_sem) == (3, 0, 2)
    assert loads(ChannelSet, dumps(H)) == H
