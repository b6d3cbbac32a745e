from __future__ import annotations

import math

import numpy as np
import pytest

from dicert.certify import (
    BASIS_KINDS,
    CertificationResult,
    CertificationTask,
    ConstraintSet,
    bell_geq,
    bff_basis,
    bff_node_program,
    build_guessing_program,
    correlators_ineq,
    finite_stat_adjust,
    gauss_radau,
    max_bell_value,
    min_entropy,
    moment_bound,
    norm_bound,
    rate_report,
    von_neumann_entropy,
)
from dicert.ncalg import Monomial, proj_a, proj_b, zop
from dicert.qmodel import make_bell, tsirelson_bound
from dicert.sdp import solve


def test_radau_two_nodes():
    q = gauss_radau(2)
    assert q.nodes == pytest.approx([1 / 3, 1.0], abs=1e-15)
    assert q.weights == pytest.approx([0.75, 0.25], abs=1e-15)


@pytest.mark.parametrize("m", range(2, 13))
def test_radau_exactness(m):
    q = gauss_radau(m)
    assert q.nodes[-1] == 1.0
    assert q.weights.sum() == pytest.approx(1.0, abs=1e-14)
    for k in range(2 * m - 1):
        assert float(q.weights @ q.nodes**k) == pytest.approx(1 / (k + 1), abs=1e-12)
    assert np.all(np.diff(q.nodes) > 0) and q.nodes[0] > 0


def test_radau_validation():
    for bad in (1, 0, 2.5, 100):
        with pytest.raises(ValueError):
            gauss_radau(bad)


def test_constraint_validation():
    with pytest.raises(ValueError):
        ConstraintSet("bell")
    with pytest.raises(ValueError):
        correlators_ineq({(0, 0): 1.0})
    with pytest.raises(ValueError):
        ConstraintSet("other")
    with pytest.raises(ValueError):
        CertificationTask(ConstraintSet("none"), method="shannon")


def test_finite_stat_adjust():
    assert finite_stat_adjust(5.179, 0.006, 0) == 5.179
    assert finite_stat_adjust(5.179, 0.006, 1) == pytest.approx(5.173)
    assert finite_stat_adjust(5.366, 0.007, 1) == pytest.approx(5.359)
    with pytest.raises(ValueError):
        finite_stat_adjust(5.0, -1.0)


def test_rate_report():
    assert rate_report(1.88, 675)["bits"] == pytest.approx(1269.0)
    assert rate_report({"minentropy": 1.50}, 675)["minentropy"] == pytest.approx(1012.5)
    res = CertificationResult(entropy_bits=1.59, method="vonneumann", certified=True)
    assert rate_report(res, 2000)["vonneumann"] == pytest.approx(3180)
    with pytest.raises(ValueError):
        rate_report(1.0, 0)


@pytest.mark.parametrize("family,param", [("IDelta", 0.52), ("IDelta", 0.3), ("JGamma", 0.0),
                                          ("JGamma", math.pi / 12), ("ModCHSH", None)])
def test_npa_matches_closed_form(family, param):
    e = make_bell(family, param)
    assert max_bell_value(e) == pytest.approx(tsirelson_bound(e), abs=1e-5)


def test_guessing_program_without_constraints():
    task = CertificationTask(ConstraintSet("none"))
    problem, _ = build_guessing_program(task)
    sol = solve(problem)
    assert -sol.primal_objective == pytest.approx(1.0, abs=1e-6)
    assert min_entropy(task).entropy_bits == pytest.approx(0.0, abs=1e-6)


def test_min_entropy_reference_points():
    # "5.71" carries only two decimals; the relative value 0.991 pins it more tightly
    delta04 = 0.991 * tsirelson_bound(make_bell("IDelta", 0.4))
    for family, param, value, ref in [("IDelta", 0.52, 5.179, 1.50), ("JGamma", 0.0, 5.174, 1.43),
                                      ("JGamma", math.pi / 12, 2.811, 0.98), ("IDelta", 0.4, delta04, 1.06)]:
        res = min_entropy(CertificationTask(bell_geq(make_bell(family, param), value)))
        assert res.certified
        assert res.entropy_bits == pytest.approx(ref, abs=0.02)


def test_min_entropy_self_test_point():
    e = make_bell("IDelta", 0.52)
    res = min_entropy(CertificationTask(bell_geq(e, tsirelson_bound(e))))
    assert res.entropy_bits == pytest.approx(2.0, abs=1e-3)


def test_min_entropy_monotone_in_bell_value():
    e = make_bell("JGamma", math.pi / 24)
    values = [min_entropy(CertificationTask(bell_geq(e, v))).entropy_bits for v in (3.6, 3.8, 3.95)]
    assert values == sorted(values)


def test_basis_kinds():
    sizes = {k: len(bff_basis(2, [0], kind=k)) for k in BASIS_KINDS}
    # standard: 13 NPA words + 4 pairs x 5 adversary words
    assert sizes["standard"] == 13 + 20
    assert sizes["products"] == 13 + 4 * 2 * 9
    assert sizes["extended"] > sizes["standard"]
    basis = bff_basis(2, [0, 1], kind="products")
    assert Monomial((proj_a(1), proj_b(1), zop(1, 1, 1, dagger=True))) in basis
    with pytest.raises(ValueError):
        bff_basis(2, [0], kind="nope")


def test_norm_and_moment_bounds():
    assert norm_bound(0.5) == pytest.approx(3.0)
    assert norm_bound(0.1) == pytest.approx(15.0)
    assert norm_bound(0.9) == pytest.approx(15.0)
    q = gauss_radau(6)
    assert moment_bound(q, [0]) == pytest.approx(norm_bound(q.nodes[0]) ** 2)


def test_von_neumann_without_constraints_is_zero():
    res = von_neumann_entropy(CertificationTask(ConstraintSet("none"), method="vonneumann", nodes=3,
                                                basis="standard"))
    assert res.certified
    assert res.entropy_bits == 0.0
    assert res.raw_bits <= 1e-6


@pytest.mark.parametrize("node", [0, 4])
def test_node_value_at_self_test_point(node):
    # at the quantum bound the devices are a phi+ pair and the adversary is
    # uncorrelated; the node infimum is then over scalars z per outcome pair,
    # sum_ab p z^2 (1-t) + 2 p z + t z^2 with p = 1/4, minimized at -1/(1+3t)
    e = make_bell("IDelta", 0.52)
    q = gauss_radau(6)
    task = CertificationTask(bell_geq(e, tsirelson_bound(e) - 1e-4), method="vonneumann", nodes=6)
    problem, const = bff_node_program(task, q, node)
    sol = solve(problem)
    t = float(q.nodes[node])
    analytic = -1 / (1 + 3 * t)
    value = sol.primal_objective + const
    assert value <= analytic + 1e-4
    assert value >= analytic - 0.01


def test_von_neumann_bounded_by_two_bits_and_above_min_entropy_order():
    e = make_bell("IDelta", 0.52)
    task = CertificationTask(bell_geq(e, 5.19), method="vonneumann", nodes=3, basis="standard")
    res = von_neumann_entropy(task)
    assert 0 <= res.entropy_bits <= 2
    assert len(res.node_values) == 2
    assert res.entropy_bits == pytest.approx(sum(res.node_contributions))
