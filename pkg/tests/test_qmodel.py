from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dicert import tables
from dicert.qmodel import (
    SIGMA_X,
    SIGMA_Z,
    BehaviorTable,
    BinaryObservable,
    CorrelatorSet,
    TwoQubitState,
    apply_white_noise,
    behavior,
    bell_state_phi_plus,
    bell_value,
    classical_bound,
    correlators,
    hwp_observable,
    ideal_correlators,
    make_bell,
    maximally_mixed_state,
    normalize_angle,
    relative_bell_value,
    tsirelson_bound,
)

angles = st.floats(-720, 720, allow_nan=False)


def test_hwp_axes():
    assert np.allclose(hwp_observable(0).operator, SIGMA_Z)
    assert np.allclose(hwp_observable(22.5).operator, SIGMA_X)
    op = hwp_observable(82.84).operator
    phi = math.radians(4 * 82.84)
    assert np.allclose(op, math.cos(phi) * SIGMA_Z + math.sin(phi) * SIGMA_X)
    assert op[0, 0].real == pytest.approx(0.8776, abs=1e-4)
    assert op[0, 1].real == pytest.approx(-0.4791, abs=5e-4)


@given(angles)
def test_hwp_is_observable_and_periodic(theta):
    op = hwp_observable(theta).operator
    assert np.allclose(op @ op, np.eye(2))
    assert np.allclose(op, hwp_observable(theta + 90).operator, atol=1e-9)


def test_normalize_angle_rejects_nonfinite():
    assert normalize_angle(190) == pytest.approx(-170)
    with pytest.raises(ValueError):
        normalize_angle(float("nan"))


def test_phi_plus():
    rho = bell_state_phi_plus().density
    assert np.trace(rho).real == pytest.approx(1)
    assert np.linalg.matrix_rank(rho) == 1
    for sigma in (SIGMA_Z, SIGMA_X):
        assert np.trace(rho @ np.kron(sigma, sigma)).real == pytest.approx(1)


def test_state_validation():
    with pytest.raises(ValueError):
        TwoQubitState(np.eye(4))
    with pytest.raises(ValueError):
        TwoQubitState(np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(ValueError):
        BinaryObservable(np.diag([1, 2]))


def test_behavior_basics():
    z = BinaryObservable(SIGMA_Z)
    b = behavior(bell_state_phi_plus(), [z], [z])
    assert np.allclose(b.probs[(0, 0)], [[0.5, 0], [0, 0.5]])
    mixed = behavior(maximally_mixed_state(), [hwp_observable(10), z], [hwp_observable(33)])
    for p in mixed.probs.values():
        assert np.allclose(p, 0.25)


def test_uniform_marginals_at_reference_angles():
    alice, bob = tables.angles_for("IDelta", 0.5)
    b = behavior(bell_state_phi_plus(), [hwp_observable(t) for t in alice], [hwp_observable(t) for t in bob])
    assert np.allclose(b.probs[(0, 0)], 0.25, atol=2e-3)


def test_correlators():
    assert correlators(BehaviorTable({(0, 0): np.full((2, 2), 0.25)}))[(0, 0)] == 0
    assert correlators(BehaviorTable({(0, 0): [[0.5, 0], [0, 0.5]]}))[(0, 0)] == 1


@given(angles, angles)
def test_correlator_matches_cosine(ta, tb):
    c = ideal_correlators([ta], [tb])[(0, 0)]
    assert c == pytest.approx(math.cos(math.radians(4 * ta - 4 * tb)), abs=1e-9)


def test_make_bell_coefficients():
    assert make_bell("JGamma", math.pi / 12).coeffs == pytest.approx({(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1})
    assert make_bell("IDelta", math.pi / 6).coeffs[(1, 1)] == pytest.approx(-2)
    mod = make_bell("ModCHSH")
    assert mod.coeffs == {(0, 1): 1, (0, 2): 1, (1, 0): 1, (1, 1): 1, (1, 2): -1}
    for bad in (("IDelta", 0.0), ("IDelta", 1.0), ("JGamma", -0.1), ("Nope", 0.1), ("IDelta", None)):
        with pytest.raises(ValueError):
            make_bell(*bad)


def test_bell_values_at_reference_angles():
    e = make_bell("IDelta", 0.5)
    assert bell_value(ideal_correlators(*tables.angles_for("IDelta", 0.5)), e) == pytest.approx(5.218, abs=5e-4)
    j = make_bell("JGamma", 0.0)
    assert bell_value(ideal_correlators(*tables.angles_for("JGamma", 0.0)), j) == pytest.approx(5.19, abs=0.01)
    assert bell_value(CorrelatorSet({k: 0.0 for k in e.coeffs}), e) == 0


def test_bell_value_with_errors_and_missing():
    e = make_bell("JGamma", math.pi / 12)
    c = CorrelatorSet({k: 0.5 for k in e.coeffs}, {k: 0.1 for k in e.coeffs})
    value, err = bell_value(c, e)
    assert value == pytest.approx(1.0)
    assert err == pytest.approx(0.2)
    with pytest.raises(KeyError):
        bell_value(CorrelatorSet({(0, 0): 0.1}), e)


def test_bounds():
    assert tsirelson_bound(make_bell("IDelta", 0.52)) == pytest.approx(5.2, abs=0.005)
    assert tsirelson_bound(make_bell("JGamma", 0.0)) == pytest.approx(5.19, abs=0.01)
    assert tsirelson_bound(make_bell("ModCHSH")) == pytest.approx(1 + 2 * math.sqrt(2))
    assert classical_bound(make_bell("IDelta", 0.5)) == pytest.approx(5.022, abs=5e-4)
    assert classical_bound(make_bell("JGamma", math.pi / 12)) == pytest.approx(2)
    assert classical_bound(make_bell("ModCHSH")) == pytest.approx(3)


def _brute_force_classical(e):
    # independent oracle: enumerate local deterministic response tables
    nx, ny = e.n_settings
    best = -math.inf
    for la in range(2**nx):
        for lb in range(2**ny):
            a = [1 - 2 * ((la >> x) & 1) for x in range(nx)]
            b = [1 - 2 * ((lb >> y) & 1) for y in range(ny)]
            best = max(best, sum(c * a[x] * b[y] for (x, y), c in e.coeffs.items()))
    return best


@pytest.mark.parametrize("family,param", [("IDelta", 0.3), ("IDelta", 0.52), ("JGamma", 0.1), ("ModCHSH", None)])
def test_classical_bound_oracle(family, param):
    e = make_bell(family, param)
    assert classical_bound(e) == pytest.approx(_brute_force_classical(e))
    assert classical_bound(e) < tsirelson_bound(e)


def test_white_noise():
    e = make_bell("IDelta", 0.5)
    c = ideal_correlators(*tables.angles_for("IDelta", 0.5))
    assert apply_white_noise(c, 1).values == c.values
    assert all(v == 0 for v in apply_white_noise(c, 0).values.values())
    assert bell_value(apply_white_noise(c, 0.994), e) == pytest.approx(0.994 * bell_value(c, e))
    with pytest.raises(ValueError):
        apply_white_noise(c, 1.2)


def test_relative_value():
    e = make_bell("IDelta", 0.52)
    assert relative_bell_value(tsirelson_bound(e), e) == pytest.approx(1)
    assert relative_bell_value(5.179, e) == pytest.approx(0.996, abs=1e-3)
    assert relative_bell_value(2.811, make_bell("JGamma", math.pi / 12)) == pytest.approx(0.994, abs=5e-4)


@settings(max_examples=50)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_json_round_trip(values):
    c = CorrelatorSet(dict(zip([(0, 0), (0, 1), (1, 0), (1, 1)], values)))
    assert CorrelatorSet.from_json(c.to_json()).values == c.values
    b = behavior(bell_state_phi_plus(), [hwp_observable(10)], [hwp_observable(-5)])
    assert np.allclose(BehaviorTable.from_json(b.to_json()).probs[(0, 0)], b.probs[(0, 0)])
