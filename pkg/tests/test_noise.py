import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flagpcm.noise import (
    NoiseParams,
    SpamRates,
    apply_dephasing,
    apply_spam_flip,
    apply_two_qubit_noise,
    dephase_batch,
    depolarize_pair_batch,
    noiseless,
    paper_default_params,
    resolve_noise,
    spam_flip_batch,
)
from flagpcm.sim import QUBIT_INDEX, StateVector


def test_calibrated_defaults():
    p = paper_default_params("pcm")
    assert p.p2 == pytest.approx(0.004)
    assert p.p1 == pytest.approx(1e-4)
    assert p.p_z_idle == pytest.approx(0.035)
    s = p.spam[QUBIT_INDEX["s"]]
    assert (s.p_bright_err, s.p_dark_err) == pytest.approx((0.012, 0.014))
    g = paper_default_params("gme").spam[QUBIT_INDEX["s"]]
    assert (g.p_bright_err, g.p_dark_err) == pytest.approx((0.004, 0.029))


def test_contrast_is_configurable():
    assert paper_default_params("pcm", contrast=0.78).p_z_idle == pytest.approx(0.11)
    with pytest.raises(ValueError):
        paper_default_params("other")


@pytest.mark.parametrize(
    "kwargs",
    [{"p2": -0.1}, {"p1": 1.5}, {"p_z_idle": 0.6}, {"gate_error_model": "amplitude"}, {"sigma_phi": -1.0}],
)
def test_invalid_parameters_raise(kwargs):
    with pytest.raises(ValueError):
        NoiseParams(**kwargs)


def test_spam_range_checked():
    with pytest.raises(ValueError):
        SpamRates(p_dark_err=1.2)


def test_dict_round_trip_and_resolve(tmp_path):
    p = paper_default_params("gme").with_(z_offsets=(0.1, 0, 0, 0, 0, -0.2))
    path = tmp_path / "noise.json"
    path.write_text(json.dumps(p.to_dict()))
    assert resolve_noise(str(path)) == p
    assert resolve_noise("none").is_noiseless
    assert resolve_noise("paper-defaults", "gme") == paper_default_params("gme")
    with pytest.raises(ValueError):
        NoiseParams.from_dict({"p3": 0.1})


def test_noiseless_flags():
    assert noiseless().is_noiseless
    assert not paper_default_params().is_noiseless
    assert NoiseParams(gate_error_model="zz_overrotation", sigma_phi=0.0).is_noiseless


def test_single_state_channels_fire_at_rate():
    rng = np.random.default_rng(1)
    st0 = StateVector.zeros(2)
    changed = sum(apply_two_qubit_noise(st0, (0, 1), 0.3, rng) is not st0 for _ in range(4000))
    assert changed / 4000 == pytest.approx(0.3, abs=0.03)
    with pytest.raises(ValueError):
        apply_dephasing(st0, 0, 0.7, rng)
    flips = sum(apply_spam_flip(1, 0, SpamRates(p_dark_err=0.2), rng) == -1 for _ in range(4000))
    assert flips / 4000 == pytest.approx(0.2, abs=0.03)


def test_batched_dephasing_rate():
    rng = np.random.default_rng(2)
    plus = np.tile(np.array([1, 1], dtype=complex) / np.sqrt(2), (20000, 1))
    dephase_batch(plus, 1, 0, 0.1, rng)
    flipped = np.mean(np.abs(plus[:, 1] + 1 / np.sqrt(2)) < 1e-12)
    assert flipped == pytest.approx(0.1, abs=0.01)


def test_batched_spam_is_asymmetric():
    rng = np.random.default_rng(4)
    out = np.ones((1, 20000), dtype=int).repeat(2, axis=0).T.copy()
    out[:, 1] = -1
    rates = SpamRates(p_dark_err=0.05, p_bright_err=0.2)
    spam_flip_batch(out, 0, rates, rng)
    spam_flip_batch(out, 1, rates, rng)
    assert np.mean(out[:, 0] == -1) == pytest.approx(0.05, abs=0.01)
    assert np.mean(out[:, 1] == 1) == pytest.approx(0.2, abs=0.015)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 1))
def test_depolarizing_batch_preserves_norm(seed, p):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(50, 8)) + 1j * rng.normal(size=(50, 8))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    depolarize_pair_batch(v, 3, (0, 2), p, rng)
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
