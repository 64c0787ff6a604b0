import json
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ncqm.core import Grid2D, ThetaTensor
from ncqm.perturbation import (IDENTITIES, IDENTITY_NAMES, PerturbationSetup, first_order_shift,
                               first_order_shift_on_grid, gauss_hermite_integral, ladder_matrices, closed_form_delta_e,
                               small_gamma_slope, verify_integral_identities)
from ncqm.special import hermite_poly
from ncqm.spectra import QuantumNumbers

SQPI = math.sqrt(math.pi)


def setup(n1=0, n2=0, omega=1.0, theta=0.0, alpha_c=0.0, gamma=0.0):
    return PerturbationSetup(QuantumNumbers(n1, n2), omega, ThetaTensor(theta), alpha_c, gamma)


# -- quadrature -------------------------------------------------------------

def test_quadrature_orthogonality_value():
    q = gauss_hermite_integral(lambda x: hermite_poly(2, x) ** 2, 4, degree=4)
    assert q.exact and float(q) == pytest.approx(8 * SQPI, rel=1e-14)


@pytest.mark.parametrize("n", range(6))
def test_odd_moment_vanishes(n):
    q = gauss_hermite_integral(lambda x: x**3 * hermite_poly(n, x) ** 2, n + 3, degree=2 * n + 3)
    assert abs(q.value) <= 1e-10 * math.factorial(n) * 2**n


def test_fourth_moment_first_level():
    q = gauss_hermite_integral(lambda x: x**4 * hermite_poly(1, x) ** 2, 4, degree=6)
    assert q.value == pytest.approx(7.5 * SQPI, rel=1e-13)


def test_quadrature_exactness_flag():
    f = lambda x: x**10  # noqa: E731
    assert not gauss_hermite_integral(f, 3, degree=10).exact
    assert gauss_hermite_integral(f, 6, degree=10).exact
    assert not gauss_hermite_integral(np.cos, 20).exact
    with pytest.raises(ValueError):
        gauss_hermite_integral(f, 0)


# -- integral identities -------------------------------------------------------

@pytest.fixture(scope="module")
def report():
    return verify_integral_identities(10)


@pytest.mark.parametrize("name", ["H n orthogonality", "x_Hn_Hm", "x2_Hn_Hm", "x3_Hn2", "x3_Hn_Hn-1", "x4_Hn2"])
def test_true_identities_pass(report, name):
    assert report.identity_passed(name)
    assert report.for_identity(name)


@pytest.mark.parametrize("name", ["d2", "d4"])
def test_derivative_identities_fail_beyond_ground_level(report, name):
    rows = report.for_identity(name)
    assert rows[0].n == 0 and rows[0].passed
    bad = {c.n for c in report.mismatches(name)}
    assert 1 in bad and 2 in bad


def test_d2_erratum_values(report):
    n0, n1 = report.for_identity("d2")[:2]
    assert n0.closed_form == pytest.approx(-0.5 * SQPI) and n0.oracle == pytest.approx(-0.5 * SQPI)
    assert n1.closed_form == pytest.approx(SQPI) and n1.oracle == pytest.approx(-3 * SQPI)
    assert n1.difference == pytest.approx(4 * SQPI)


def test_x_moment_entry(report):
    (row,) = [c for c in report.for_identity("x_Hn_Hm") if (c.n, c.m) == (1, 2)]
    assert row.oracle == pytest.approx(4 * SQPI, rel=1e-13) and row.passed


def _sympy_derivative_integral(n, order):
    x = sympy.symbols("x")
    f = sympy.exp(-x**2 / 2) * sympy.hermite(n, x)
    return float(sympy.integrate(f * sympy.diff(f, x, order), (x, -sympy.oo, sympy.oo)))


@pytest.mark.parametrize("n", range(4))
def test_derivative_oracles_against_symbolic_integration(n):
    d2 = IDENTITIES["d2"].oracle(n, n)
    d4 = IDENTITIES["d4"].oracle(n, n)
    assert d2 == pytest.approx(_sympy_derivative_integral(n, 2), rel=1e-12)
    assert d4 == pytest.approx(_sympy_derivative_integral(n, 4), rel=1e-12)
    # corrected closed forms
    norm = SQPI * 2**n * math.factorial(n)
    assert d2 == pytest.approx(-(n + 0.5) * norm, rel=1e-12)
    assert d4 == pytest.approx(0.75 * (2 * n * n + 2 * n + 1) * norm, rel=1e-12)


def test_identity_sweep_reaches_twenty_without_overflow():
    rep = verify_integral_identities(20)
    assert all(math.isfinite(c.oracle) for c in rep.checks)
    assert all(rep.identity_passed(n) for n in IDENTITY_NAMES if n not in ("d2", "d4"))


def test_report_json(report):
    data = json.loads(json.dumps(report.to_json()))
    assert set(data["summary"]) == set(IDENTITY_NAMES)
    assert data["summary"]["d2"]["mismatched_n"] == list(range(1, 11))
    assert {"closed_form", "oracle", "difference", "relative_difference"} <= set(data["checks"][0])


def test_sweep_bounds():
    with pytest.raises(ValueError):
        verify_integral_identities(21)


# -- first-order shift ----------------------------------------------------------

def test_ladder_matrices():
    x, p = ladder_matrices(6, 1.0)
    assert x[1, 0] == pytest.approx(1 / math.sqrt(2))
    comm = x @ p - p @ x
    np.testing.assert_allclose(np.diag(comm)[:-1], 1j, atol=1e-14)


def test_commutative_ground_state_shift():
    assert first_order_shift(setup(gamma=0.01)).shift == pytest.approx(0.015, abs=1e-8)
    assert float(first_order_shift(setup(gamma=1.0))) == pytest.approx(1.5, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(n1=st.integers(0, 4), n2=st.integers(0, 4), omega=st.floats(0.3, 3), theta=st.floats(-1, 1),
       alpha_c=st.floats(-1, 1))
def test_cubic_term_vanishes(n1, n2, omega, theta, alpha_c):
    res = first_order_shift(setup(n1, n2, omega, theta, alpha_c, 0.0))
    assert abs(res.cubic) <= 1e-10 and abs(res.shift) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(n1=st.integers(0, 3), n2=st.integers(0, 3), theta=st.floats(-1, 1), gamma=st.floats(0, 0.5))
def test_shift_is_linear_in_gamma(n1, n2, theta, gamma):
    one = first_order_shift(setup(n1, n2, 1.0, theta, 0.0, gamma)).shift
    two = first_order_shift(setup(n1, n2, 1.0, theta, 0.0, 2 * gamma)).shift
    assert two == pytest.approx(2 * one, abs=1e-10)


@pytest.mark.parametrize("n1, n2", [(0, 0), (3, 3), (2, 0)])
def test_basis_convergence(n1, n2):
    res = first_order_shift(setup(n1, n2, 1.0, 0.4, 0.0, 0.1))
    assert res.converged
    bigger = first_order_shift(setup(n1, n2, 1.0, 0.4, 0.0, 0.1), basis_size=14).shift
    assert abs(bigger - res.shift) <= 1e-8


def test_basis_too_small():
    with pytest.raises(ValueError):
        first_order_shift(setup(3, 0), basis_size=7)


def test_setup_invariants():
    with pytest.raises(ValueError):
        setup(omega=0.0)
    with pytest.raises(ValueError):
        setup(gamma=-0.1)


def test_grid_expectation_matches_basis():
    g = Grid2D(40, 40, 6.5, 6.5)
    for q in [(0, 0), (1, 0), (1, 1)]:
        s = setup(*q, theta=0.3, alpha_c=0.1, gamma=0.01)
        assert first_order_shift_on_grid(s, g) == pytest.approx(first_order_shift(s).shift, abs=1e-8)
    s = setup(theta=0.3, gamma=0.01)
    assert first_order_shift_on_grid(s, g, "numeric") == pytest.approx(first_order_shift(s).shift, abs=1e-8)


# -- closed form as printed ---------------------------------------------------

def test_closed_form_commutative_ground_state():
    assert closed_form_delta_e(setup(gamma=0.01)) == pytest.approx(0.015, abs=1e-15)


@pytest.mark.parametrize("q", [(0, 0), (1, 0), (1, 1)])
def test_closed_form_agrees_at_zero_theta(q):
    s = setup(*q, gamma=0.01)
    assert closed_form_delta_e(s) == pytest.approx(first_order_shift(s).shift, abs=1e-8)


def test_closed_form_departs_from_oracle_for_excited_states():
    # at theta = 0.3 the ground state still agrees while excited states do not
    s0 = setup(0, 0, theta=0.3, gamma=0.01)
    assert closed_form_delta_e(s0) == pytest.approx(first_order_shift(s0).shift, abs=1e-12)
    for q in [(1, 0), (1, 1)]:
        s = setup(*q, theta=0.3, gamma=0.01)
        assert abs(closed_form_delta_e(s) - first_order_shift(s).shift) > 1e-3


def test_closed_form_frequency_scaling():
    # the oracle gives 1.5 gamma / omega^2; the printed form 1.5 gamma / omega^1.5
    s = setup(omega=2.0, gamma=0.01)
    assert first_order_shift(s).shift == pytest.approx(0.015 / 4, abs=1e-12)
    assert closed_form_delta_e(s) == pytest.approx(0.015 / 2**1.5, abs=1e-12)


def test_small_gamma_slope_matches_oracle():
    g = Grid2D(40, 40, 6.5, 6.5)
    unit = first_order_shift(setup(theta=0.3, gamma=1.0)).shift
    slope = small_gamma_slope(1.0, ThetaTensor(0.3), g)["slope"]
    assert abs(slope - unit) / unit <= 1e-4
