import json

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ncqm.polynomial import PolynomialPotential, PseudoDiffOperator

coeff = st.floats(-3, 3, allow_nan=False).filter(lambda c: abs(c) > 1e-3)
monomials = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coeff, min_size=1, max_size=4)


def test_named_accessors():
    V = PolynomialPotential.linear(0.3, -0.2) + PolynomialPotential.anharmonic(1.5, 0.1, 0.02)
    assert V.alpha == pytest.approx(0.3) and V.beta == pytest.approx(-0.2)
    assert V.omega_x == pytest.approx(1.5) and V.omega_y == pytest.approx(1.5)
    assert V.alpha_c == pytest.approx(0.1) and V.gamma == pytest.approx(0.02)
    assert V.degree == 4 and V.is_real


def test_harmonic_with_mass():
    V = PolynomialPotential.harmonic(2.0, 3.0, mass=0.5)
    assert V.coefficients == {(2, 0): 1.0, (0, 2): 2.25}
    # accessors read frequencies at unit mass
    assert V.omega_x == pytest.approx(np.sqrt(2.0)) and V.omega_y == pytest.approx(np.sqrt(4.5))


def test_evaluation_and_derivative():
    V = PolynomialPotential({(2, 1): 2.0, (0, 1): -1.0})
    assert V(1.5, 2.0) == pytest.approx(2 * 1.5**2 * 2 - 2)
    dV = V.derivative(1, 0)
    assert dV.equals(PolynomialPotential({(1, 1): 4.0}))
    assert V.derivative(0, 2).equals(PolynomialPotential())


def test_rejects_bad_monomials():
    with pytest.raises(ValueError):
        PolynomialPotential({(-1, 0): 1.0})
    with pytest.raises(ValueError):
        PolynomialPotential({(1, 0): float("inf")})


@settings(max_examples=40, deadline=None)
@given(f=monomials, g=monomials)
def test_product_matches_sympy(f, g):
    x, y = sympy.symbols("x y")
    to_sym = lambda d: sum(sympy.nsimplify(c) * x**a * y**b for (a, b), c in d.items())  # noqa: E731
    prod = PolynomialPotential(f) * PolynomialPotential(g)
    expected = sympy.Poly(sympy.expand(to_sym(f) * to_sym(g)), x, y)
    for (a, b), c in expected.terms():
        assert prod.coefficients.get((a, b), 0) == pytest.approx(float(c), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(f=monomials)
def test_json_round_trip(f):
    V = PolynomialPotential(f)
    again = PolynomialPotential.from_json(json.loads(json.dumps(V.to_json())))
    assert again == V


def test_json_shortcuts():
    V = PolynomialPotential.from_json({"linear": {"alpha": 1.0, "beta": 2.0}, "harmonic": {"wx": 2.0},
                                       "anharmonic": {"alpha_c": 0.1, "gamma": 0.2}})
    assert V.alpha == 1.0 and V.beta == 2.0 and V.omega_y == pytest.approx(2.0) and V.gamma == pytest.approx(0.2)


@pytest.mark.parametrize("data", [{"quadratic": {}}, {"linear": {"alpha": 1, "delta": 2}},
                                  {"monomials": [{"ax": 1, "ay": 0, "re": 1.0, "extra": 0}]}])
def test_json_is_strict(data):
    with pytest.raises(ValueError):
        PolynomialPotential.from_json(data)


# -- pseudo-differential operators ------------------------------------------

def _apply_symbolic(op: PseudoDiffOperator, f, x, y):
    return sum(c * x**a * y**b * sympy.diff(f, x, m, y, n) for (a, b, m, n), c in op.terms.items())


def test_composition_against_sympy():
    x, y = sympy.symbols("x y")
    f = sympy.exp(-x**2 + x * y) * (1 + y**3)
    A = PseudoDiffOperator({(2, 0, 0, 1): 1.5, (0, 1, 1, 0): -2j})
    B = PseudoDiffOperator({(1, 1, 2, 0): 0.5, (0, 0, 0, 1): 1j})
    lhs = _apply_symbolic(A @ B, f, x, y)
    rhs = _apply_symbolic(A, _apply_symbolic(B, f, x, y), x, y)
    assert sympy.simplify(sympy.expand(lhs - rhs)) == 0


def test_adjoint_and_hermiticity():
    # x d/dx is not symmetric; its symmetrization is
    xd = PseudoDiffOperator({(1, 0, 1, 0): 1.0})
    assert not xd.is_formally_hermitian()
    p = PseudoDiffOperator.derivative(1, 0, -1j)
    assert p.is_formally_hermitian()
    sym = (PseudoDiffOperator.multiplication(PolynomialPotential.monomial(1, 0)) @ p)
    sym = (sym + sym.adjoint()) * 0.5
    assert sym.is_formally_hermitian()
    assert sym.adjoint().adjoint().equals(sym, 1e-15)
