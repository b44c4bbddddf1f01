import json
from collections import Counter

import numpy as np
import pytest

from flagpcm.circuits import ExperimentConfig, ShotTallies, build_circuit, exact_tallies
from flagpcm.pauli import PauliString
from flagpcm.sim import S, StateVector, expectation_pauli
from flagpcm.witness import (
    WitnessError,
    certify_gme,
    default_shots,
    generator_set,
    report_from_values,
    witness_settings,
    witness_value,
)


def ideal_tallies(n, mode="ideal"):
    gset = generator_set(n)
    return gset, {b: exact_tallies(build_circuit(ExperimentConfig(f"gme{n}", gate_mode=mode, bases=b)))
                  for b in witness_settings(gset)}


@pytest.mark.parametrize("n", [4, 6])
def test_generators_commute_and_fix_one_state(n):
    gset = generator_set(n)
    assert gset.mutually_commute()
    support = sorted({q for g in gset.generators for q in g.support()})
    proj = np.eye(2 ** len(support))
    for g in gset.generators:
        proj = proj @ (np.eye(len(proj)) + g.restricted(support).matrix()[np.ix_(*[_rows(support)] * 2)] * g.sign) / 2
    assert np.trace(proj).real == pytest.approx(1.0)


def _rows(support):
    # indices of basis states that are |0> off the support
    return [sum(((k >> j) & 1) << q for j, q in enumerate(support)) for k in range(2 ** len(support))]


def test_bounds_and_labels():
    assert generator_set(4).bound == pytest.approx(0.75)
    assert generator_set(6).bound == pytest.approx(5 / 6)
    assert generator_set(4).labels()[3] == "±Z_d1 Z_d2 Z_d3 Z_d4"
    with pytest.raises(WitnessError):
        generator_set(5)


def test_settings_and_shot_budget():
    g4, g6 = generator_set(4), generator_set(6)
    assert witness_settings(g4) == [("X",) * 5 + ("Z",), ("Z",) * 4 + ("X", "Z")]
    assert len(witness_settings(g6)) == 6
    assert [default_shots(g6, b) for b in witness_settings(g6)] == [500, 500, 500, 500, 1000, 1000]
    assert default_shots(g4, witness_settings(g4)[0]) == 990


@pytest.mark.parametrize("mode", ["ideal", "hardware"])
def test_ideal_witness_values(mode):
    g4, t4 = ideal_tallies(4, mode)
    for m in (1, -1):
        r = witness_value(t4, g4, condition=(S, m))
        assert r.value == pytest.approx(-0.25, abs=1e-9)
        assert all(g.value == pytest.approx(1.0, abs=1e-9) for g in r.generators)
        assert r.stderr == 0 and r.certified
    g6, t6 = ideal_tallies(6, mode)
    r = witness_value(t6, g6)
    assert r.value == pytest.approx(-1 / 6, abs=1e-9)


def test_gme4_branches_differ_in_data_parity():
    g4, t4 = ideal_tallies(4)
    z_setting = t4[witness_settings(g4)[1]]
    for m in (1, -1):
        assert z_setting.filter(S, m).mean_product([0, 1, 2, 3]) == pytest.approx(m, abs=1e-9)


def test_missing_setting_raises():
    g6, t6 = ideal_tallies(6)
    t6.pop(next(iter(t6)))
    with pytest.raises(WitnessError):
        witness_value(t6, g6)


def test_report_math_and_serialization():
    g6 = generator_set(6)
    r = report_from_values(g6, [0.9] * 6, [0.01] * 6, [100] * 6, k_sigma=3)
    assert r.value == pytest.approx(5 / 6 - 0.9)
    assert r.stderr == pytest.approx(np.sqrt(6) * 0.01 / 6)
    assert r.certified
    assert not certify_gme(report_from_values(g6, [0.84] * 6, [0.05] * 6), 3)
    d = json.loads(r.to_json())
    assert d["certified"] and len(d["generators"]) == 6
    assert r.to_csv().splitlines()[0] == "generator,expectation,stderr,shots"
    with pytest.raises(WitnessError):
        report_from_values(g6, [1.0] * 5)


def test_sampled_witness_stderr():
    g6 = generator_set(6)
    rng = np.random.default_rng(9)
    rows = {}
    for b in witness_settings(g6):
        keys = [tuple(int(x) for x in rng.choice([-1, 1], size=6)) for _ in range(200)]
        rows[b] = ShotTallies(Counter(keys), b)
    r = witness_value(rows, g6)
    for g in r.generators:
        assert g.shots >= 200  # settings covering the same generator are pooled
        assert g.stderr == pytest.approx(np.sqrt((1 - g.value**2) / g.shots))


def _random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def _stabilizer_like_qubit(rng):
    base = [np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2),
            np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2)]
    return base[rng.integers(6)]


@pytest.mark.parametrize("n", [4, 6])
def test_product_states_never_violate_witness(n):
    gset = generator_set(n)
    rng = np.random.default_rng(2024 + n)
    worst = np.inf
    for k in range(1000):
        pick = _stabilizer_like_qubit if k % 2 else _random_qubit
        state = StateVector.product([pick(rng) for _ in range(6)])
        values = [expectation_pauli(state, g) for g in gset.generators]
        worst = min(worst, report_from_values(gset, values).value)
    assert worst >= -1e-12
