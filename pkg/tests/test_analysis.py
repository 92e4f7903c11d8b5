import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_bs, random_network, random_state
from lossynet import (
    InputSpec,
    ModeRegistry,
    absorption_probability,
    build_network,
    conservation_residual,
    detection_probability,
    evolve,
    joint_distribution,
    make_input,
    new_lossy_bs,
    oracle_evolve_dense,
    pair_absorption_scan,
    single_photon,
    vacuum,
)
from lossynet.analysis import any_absorption_probability
from lossynet.errors import BasisTooLargeError, ModeError
from lossynet.fock import max_abs_difference
from lossynet.scenarios import build, scenario_interferometer, scenario_single_bs

HALF = 1 / math.sqrt(2)


def single_bs(t, r, l, phi):
    net, state = build(scenario_single_bs(t, r, l), {"phi": phi})
    return net, joint_distribution(evolve(net, state), net)


def interferometer(phi, theta3=0.0, theta4=None, photons=1, coeffs=None):
    theta4 = theta3 if theta4 is None else theta4
    cfg = scenario_interferometer(coeffs=coeffs, photons=photons)
    return build(cfg, {"phi": phi, "theta3": theta3, "theta4": theta4})


def interferometer_dist(*args, **kwargs):
    net, state = interferometer(*args, **kwargs)
    return joint_distribution(evolve(net, state), net)


def test_single_bs_perfect_absorption():
    _, dist = single_bs(0.5, 0.5, HALF, math.pi)
    assert detection_probability(dist, "1") == pytest.approx(0, abs=1e-12)
    assert detection_probability(dist, "2") == pytest.approx(0, abs=1e-12)
    assert absorption_probability(dist, "bs") == pytest.approx(1, abs=1e-12)


def test_single_bs_transparency():
    _, dist = single_bs(0.5, 0.5, HALF, 0.0)
    assert detection_probability(dist, "1") == pytest.approx(0.5, abs=1e-12)
    assert detection_probability(dist, "2") == pytest.approx(0.5, abs=1e-12)
    assert absorption_probability(dist, "bs") == pytest.approx(0, abs=1e-12)


def test_interferometer_quarter_phase():
    dist = interferometer_dist(math.pi / 4, math.pi / 4)
    for m in "1234":
        assert detection_probability(dist, m) == pytest.approx(1 / 16, abs=1e-12)
    assert absorption_probability(dist, "a") == pytest.approx(1 / 4, abs=1e-12)
    assert absorption_probability(dist, "b") == pytest.approx(1 / 4, abs=1e-12)
    assert absorption_probability(dist, "c") == pytest.approx(1 / 8, abs=1e-12)
    assert absorption_probability(dist, "d") == pytest.approx(1 / 8, abs=1e-12)


@pytest.mark.parametrize("psi, p_j, a_c", [(0.0, 1 / 8, 0.0), (math.pi, 0.0, 1 / 4)])
def test_interferometer_extremes(psi, p_j, a_c):
    dist = interferometer_dist(psi - 0.2, 0.2)
    for m in "1234":
        assert detection_probability(dist, m) == pytest.approx(p_j, abs=1e-12)
    assert absorption_probability(dist, "c") == pytest.approx(a_c, abs=1e-12)
    assert absorption_probability(dist, "d") == pytest.approx(a_c, abs=1e-12)


def test_lossless_identity_network():
    reg = ModeRegistry(["1", "2"])
    net = build_network([(new_lossy_bs(1, 0, 0, "id"), ("1", "2"))], reg)
    dist = joint_distribution(evolve(net, single_photon(reg["1"], reg)), net)
    assert detection_probability(dist, "1") == 1.0
    assert absorption_probability(dist, "id") == 0.0


def test_detection_probability_rejects_non_detector():
    reg = ModeRegistry(["1", "2"])
    net = build_network([(new_lossy_bs(0.5, 0.5, HALF, "a"), ("1", "2"))], reg,
                        detector_modes=["1"])
    dist = joint_distribution(evolve(net, single_photon(reg["1"], reg)), net)
    with pytest.raises(ModeError):
        detection_probability(dist, "2")
    with pytest.raises(ModeError):
        detection_probability(dist, "env:a:1")


def test_unknown_element():
    _, dist = single_bs(0.5, 0.5, HALF, 0.0)
    with pytest.raises(KeyError):
        absorption_probability(dist, "zz")


def test_vacuum_residual():
    net, _ = interferometer(0.0)
    dist = joint_distribution(evolve(net, vacuum(net.registry)), net)
    assert len(dist.entries) == 1
    assert conservation_residual(dist) == 0.0
    assert dist.pattern_name(next(iter(dist.entries))) == "none"


def _noon_bs_patterns(phase):
    reg = ModeRegistry(["1", "2"])
    net = build_network([(new_lossy_bs(0.5, 0.5, HALF, "a"), ("1", "2"))], reg)
    s = make_input(InputSpec("noon", ("1", "2"), phase, 2), reg)
    dist = joint_distribution(evolve(net, s), net)
    assert conservation_residual(dist) < 1e-12
    return {dist.pattern_name(o): p for o, p in dist.entries.items()}


def test_two_photon_patterns_are_not_collapsed():
    names = _noon_bs_patterns(1.0)
    assert "Aa=2" in names
    assert any("D1=1" in n and "Aa=1" in n for n in names)


def test_two_photon_single_absorption_cancels_in_phase():
    names = _noon_bs_patterns(0.0)
    assert not any("Aa=1" in n for n in names)
    assert names["Aa=2"] == pytest.approx(0.5, abs=1e-12)
    assert names["D1=1;D2=1"] == pytest.approx(0.25, abs=1e-12)


def test_first_layer_absorption_is_phase_independent_for_unequal_phases():
    for phi, th3, th4 in [(0.1, 0.7, 2.9), (2.0, -1.0, 0.4), (5.5, 3.0, 3.1)]:
        dist = interferometer_dist(phi, th3, th4)
        assert absorption_probability(dist, "a") == pytest.approx(0.25, abs=1e-11)
        assert absorption_probability(dist, "b") == pytest.approx(0.25, abs=1e-11)
        assert conservation_residual(dist) < 1e-11


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_first_layer_absorption_equals_half_loss(seed):
    rng = np.random.default_rng(seed)
    coeffs = {k: (e.t, e.r, e.l) for k, e in
              ((k, random_bs(rng, k, kind="general")) for k in "abcd")}
    phi, th3, th4 = rng.uniform(0, 2 * math.pi, size=3)
    dist = interferometer_dist(phi, th3, th4, coeffs=coeffs)
    assert absorption_probability(dist, "a") == pytest.approx(coeffs["a"][2] ** 2 / 2, abs=1e-11)
    assert absorption_probability(dist, "b") == pytest.approx(coeffs["b"][2] ** 2 / 2, abs=1e-11)


def test_functional_forms_interferometer():
    theta = 0.9
    for phi in np.linspace(0, 2 * math.pi, 100, endpoint=False):
        dist = interferometer_dist(phi, theta)
        cos = math.cos(phi + theta)
        for m in "1234":
            assert abs(detection_probability(dist, m) - (1 + cos) / 16) < 1e-9
        assert abs(absorption_probability(dist, "c") - (1 - cos) / 8) < 1e-9


def test_functional_form_single_bs(rng):
    for _ in range(50):
        bs = random_bs(rng, "bs", kind="general")
        for phi in np.linspace(0, 2 * math.pi, 7):
            _, dist = single_bs(bs.t, bs.r, bs.l, phi)
            expected = bs.l**2 - 2 * bs.r * bs.t * math.cos(phi)
            assert abs(absorption_probability(dist, "bs") - expected) < 1e-9


def test_pair_scan_first_layer_is_constant():
    grid = [(phi, th) for phi in np.linspace(0, 2 * math.pi, 16) for th in np.linspace(0, 2, 4)]
    res = pair_absorption_scan(lambda phi, th: interferometer(phi, th), ("a", "b"), grid)
    assert res.spread < 1e-11
    assert res.max == pytest.approx(0.5, abs=1e-11)


def test_pair_scan_second_layer_spans_half():
    grid = [(phi, 0.0) for phi in np.linspace(0, 2 * math.pi, 65)]
    res = pair_absorption_scan(lambda phi, th: interferometer(phi, th), ("c", "d"), grid)
    assert res.min == pytest.approx(0.0, abs=1e-12)
    assert res.max == pytest.approx(0.5, abs=1e-12)
    assert res.spread == pytest.approx(0.5, abs=1e-12)


def test_pair_scan_noon_is_constant():
    grid = np.linspace(0, 2 * math.pi, 16)
    res = pair_absorption_scan(lambda phi: interferometer(phi, photons=2), ("a", "b"), grid)
    assert res.spread < 1e-10
    # Each arm holds two photons that pass their first element with prob 1/2 each.
    assert res.max == pytest.approx(1 - 0.25, abs=1e-12)


def test_any_absorption_counts_joint_events_once():
    net, state = interferometer(0.3, photons=2)
    dist = joint_distribution(evolve(net, state), net)
    total = any_absorption_probability(dist, ("a", "b"))
    assert total < absorption_probability(dist, "a") + absorption_probability(dist, "b") + 1e-12


def test_oracle_single_photon_interferometer():
    net, state = interferometer(0.8, 0.3, 1.2)
    assert max_abs_difference(evolve(net, state), oracle_evolve_dense(net, state)) < 1e-12


def test_oracle_two_photon_single_bs():
    reg = ModeRegistry(["1", "2"])
    net = build_network([(new_lossy_bs(0.5, 0.5, HALF, "a"), ("1", "2"))], reg)
    s = make_input(InputSpec("noon", ("1", "2"), 0.4, 2), reg)
    assert max_abs_difference(evolve(net, s), oracle_evolve_dense(net, s)) < 1e-12


def test_oracle_identity_network():
    reg = ModeRegistry(["1", "2"])
    net = build_network([(new_lossy_bs(1, 0, 0, "id"), ("1", "2"))], reg)
    s = make_input(InputSpec("custom", ("1", "2"), amplitudes=(0.6, 0.8j)), reg)
    assert oracle_evolve_dense(net, s) == s


def test_oracle_basis_limit():
    net, state = interferometer(0.0, photons=2)
    with pytest.raises(BasisTooLargeError):
        oracle_evolve_dense(net, state, limit=10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_oracle_matches_sparse(seed, photons):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    s = random_state(rng, net.registry, photons)
    assert max_abs_difference(evolve(net, s), oracle_evolve_dense(net, s)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_completeness(seed, photons):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    dist = joint_distribution(evolve(net, random_state(rng, net.registry, photons)), net)
    assert conservation_residual(dist) < 1e-10
    assert all(0 <= p <= 1 + 1e-12 for p in dist.entries.values())
