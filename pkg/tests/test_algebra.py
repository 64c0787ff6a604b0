import json
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ncqm.algebra import (BoostContext, GeneratorKind, boost_commutator_sign, boost_derivative_check,
                          build_generator, casimir_invariants, check_exotic_algebra, commutator, moyal_star,
                          random_test_states)
from ncqm.core import Grid2D, PhysParams, ThetaTensor, UnsupportedBoundaryError
from ncqm.polynomial import PolynomialPotential

RELATIONS = {"[p1,p2]", "[K1,p1]", "[K1,p2]", "[K2,p1]", "[K2,p2]", "[L,p1]", "[L,p2]", "[K1,K2]",
             "[p1,H]", "[p2,H]", "[L,H]", "[x1,p1]", "[x1,p2]", "[x2,p1]", "[x2,p2]"}


@pytest.fixture(scope="module")
def grid():
    return Grid2D(48, 48, 8.0, 8.0)


def test_commutative_limit_passes(grid):
    report = check_exotic_algebra(grid, PhysParams(), ThetaTensor(0.0))
    assert {r.name for r in report.relations} == RELATIONS
    assert report.all_passed
    assert report["[K1,K2]"].residual <= 1e-8
    assert report.boost_commutator_magnitude <= 1e-8


def test_exotic_boost_commutator(grid):
    report = check_exotic_algebra(grid, PhysParams(m=2.0), ThetaTensor(0.5))
    assert report.all_passed
    assert report.boost_commutator_magnitude == pytest.approx(2.0, abs=1e-6)
    assert report.boost_commutator_sign == -1


def test_flipped_convention_changes_sign(grid):
    report = check_exotic_algebra(grid, PhysParams(m=2.0), ThetaTensor(0.5), convention="flipped")
    assert report.all_passed and report.boost_commutator_sign == +1
    assert boost_commutator_sign("literal") == -boost_commutator_sign("flipped")


@pytest.mark.parametrize("name, rhs", [("[p1,p2]", None), ("[x1,p1]", 1j)])
def test_basic_commutators_per_state(grid, name, rhs):
    P = [build_generator(k, grid) for k in (GeneratorKind.P1, GeneratorKind.P2)]
    X1 = build_generator(GeneratorKind.X1, grid, theta=ThetaTensor(0.3))
    A, B = (P[0], P[1]) if name == "[p1,p2]" else (X1, P[0])
    for psi in random_test_states(grid):
        _, (act,) = commutator(A, B, [psi])
        expected = psi * (rhs or 0.0)
        assert np.max(np.abs((act - expected).amplitudes)) <= 1e-8 * np.max(np.abs(psi.amplitudes))


def test_position_commutator_sign(grid):
    t = 0.4
    X1 = build_generator(GeneratorKind.X1, grid, theta=ThetaTensor(t))
    X2 = build_generator(GeneratorKind.X2, grid, theta=ThetaTensor(t))
    for psi in random_test_states(grid, 3):
        _, (act,) = commutator(X1, X2, [psi])
        assert np.max(np.abs((act - psi * (-1j * t)).amplitudes)) <= 1e-8 * np.max(np.abs(psi.amplitudes))


def test_angular_momentum_relation(grid):
    report = check_exotic_algebra(grid, PhysParams(hbar=0.7), ThetaTensor(0.25), tol=1e-6)
    assert report["[L,p1]"].passed and report["[L,p2]"].passed


def test_generators_are_hermitian(grid):
    ctx = BoostContext(t=0.3, v=(1.0, 0.0))
    for kind in GeneratorKind:
        G = build_generator(kind, grid, PhysParams(m=1.5), ThetaTensor(0.5), ctx)
        assert G.hermitian


def test_generators_need_periodic_grid():
    with pytest.raises(UnsupportedBoundaryError):
        build_generator(GeneratorKind.P1, Grid2D(16, 16, 1.0, 1.0, "dirichlet"))


def test_boost_law(grid):
    out = boost_derivative_check(grid, PhysParams(m=1.0), ThetaTensor(0.5), BoostContext(v=(1.0, 0.0)))
    assert out["max"] <= 1e-8
    out = boost_derivative_check(grid, PhysParams(m=2.0), ThetaTensor(0.5), BoostContext(v=(0.3, -0.7)))
    assert out["p2"] <= 1e-8  # -(i/hbar)[v.K, p2] = m v2 = -1.4
    assert boost_derivative_check(grid, ctx=BoostContext(v=(0.0, 0.0)))["max"] == 0.0


def test_casimirs(grid):
    I1, I2, report = casimir_invariants(grid, PhysParams(m=1.3), ThetaTensor(0.5))
    assert report.all_passed
    assert report["I1 psi"].residual <= 1e-8
    assert report["[I2,p1]"].residual <= 1e-6 and report["[I2,K1]"].residual <= 1e-6


def test_commutator_antisymmetry(grid):
    A = build_generator(GeneratorKind.L, grid, theta=ThetaTensor(0.5))
    B = build_generator(GeneratorKind.K1, grid, theta=ThetaTensor(0.5))
    states = random_test_states(grid, 2)
    _, ab = commutator(A, B, states)
    _, ba = commutator(B, A, states)
    for u, v in zip(ab, ba):
        np.testing.assert_array_equal(u.amplitudes, -v.amplitudes)


def test_jacobi_identity(grid):
    t = ThetaTensor(0.5)
    X1, X2, P1 = (build_generator(k, grid, theta=t) for k in (GeneratorKind.X1, GeneratorKind.X2, GeneratorKind.P1))

    def c(A, B, psi):
        return A @ (B @ psi) - B @ (A @ psi)

    for psi in random_test_states(grid, 3):
        # [A,[B,C]] + [B,[C,A]] + [C,[A,B]] acting on psi
        def nested(A, B, C):
            return A @ c(B, C, psi) - c(B, C, A @ psi)
        total = nested(X1, X2, P1) + nested(X2, P1, X1) + nested(P1, X1, X2)
        assert np.max(np.abs(total.amplitudes)) <= 1e-8 * np.max(np.abs(psi.amplitudes))


@pytest.mark.parametrize("theta", [0.1, 0.2, 0.4])
def test_boost_commutator_scales_with_theta(grid, theta):
    report = check_exotic_algebra(grid, PhysParams(), ThetaTensor(theta))
    assert report["[K1,K2]"].passed
    assert report.boost_commutator_magnitude == pytest.approx(theta, rel=1e-8)


def test_report_json(grid):
    data = json.loads(json.dumps(check_exotic_algebra(grid, theta=ThetaTensor(0.2)).to_json()))
    assert data["all_passed"] and len(data["relations"]) == len(RELATIONS)
    assert set(data["relations"][0]) == {"name", "residual", "tolerance", "passed", "note"}


def test_rejects_nonpositive_tolerance(grid):
    with pytest.raises(ValueError):
        check_exotic_algebra(grid, tol=0.0)


# -- Moyal product -----------------------------------------------------------

def brute_force_star(f: PolynomialPotential, g: PolynomialPotential, theta: float, order: int = 8):
    """exp((i theta / 2)(dx (x) dy - dy (x) dx)) on f(x1,y1) g(x2,y2), then x1=x2, y1=y2."""
    x1, y1, x2, y2, x, y = sympy.symbols("x1 y1 x2 y2 x y")
    F = sum(sympy.nsimplify(c) * x1**a * y1**b for (a, b), c in f.coefficients.items())
    G = sum(sympy.nsimplify(c) * x2**a * y2**b for (a, b), c in g.coefficients.items())
    t = sympy.nsimplify(theta)
    term, total = F * G, 0
    for n in range(order + 1):
        total += term / sympy.factorial(n)
        term = sympy.I * t / 2 * (sympy.diff(term, x1, y2) - sympy.diff(term, y1, x2))
    expr = sympy.expand(total.subs({x1: x, x2: x, y1: y, y2: y}))
    poly = sympy.Poly(expr, x, y)
    return {m: complex(c) for m, c in poly.terms()}


def _coeff_equal(p: PolynomialPotential, brute: dict, tol=1e-12):
    keys = set(p.coefficients) | set(brute)
    return all(abs(p.coefficients.get(k, 0) - brute.get(k, 0)) <= tol for k in keys)


def test_star_commutator_of_coordinates():
    t = ThetaTensor(0.5)
    x, y = PolynomialPotential.monomial(1, 0), PolynomialPotential.monomial(0, 1)
    comm = moyal_star(x, y, t) - moyal_star(y, x, t)
    assert comm.coefficients == {(0, 0): 0.5j}


def test_star_x2_y2_against_brute_force():
    t = 0.7
    f, g = PolynomialPotential.monomial(2, 0), PolynomialPotential.monomial(0, 2)
    result = moyal_star(f, g, ThetaTensor(t))
    assert _coeff_equal(result, brute_force_star(f, g, t))
    # x^2 * y^2 + i theta (2xy) - theta^2/2
    assert result.coefficients == pytest.approx({(2, 2): 1.0, (1, 1): 2j * t, (0, 0): -t**2 / 2})


poly4 = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)).filter(lambda k: sum(k) <= 4),
                        st.integers(-3, 3).filter(bool), min_size=1, max_size=3)


@settings(max_examples=25, deadline=None)
@given(f=poly4, g=poly4, theta=st.sampled_from([0.25, -0.5, 1.0]))
def test_star_matches_brute_force(f, g, theta):
    F, G = PolynomialPotential(f), PolynomialPotential(g)
    assert _coeff_equal(moyal_star(F, G, ThetaTensor(theta)), brute_force_star(F, G, theta), 1e-9)


def test_commutative_limit_for_all_monomials():
    mons = [(a, b) for a in range(5) for b in range(5) if a + b <= 4]
    for a, b in mons:
        for c, d in mons:
            f, g = PolynomialPotential.monomial(a, b), PolynomialPotential.monomial(c, d)
            assert moyal_star(f, g, ThetaTensor(0.0)) == f * g


@settings(max_examples=25, deadline=None)
@given(f=poly4, g=poly4, h=poly4)
def test_star_is_associative(f, g, h):
    t = ThetaTensor(0.6)
    F, G, H = PolynomialPotential(f), PolynomialPotential(g), PolynomialPotential(h)
    left = moyal_star(moyal_star(F, G, t), H, t)
    right = moyal_star(F, moyal_star(G, H, t), t)
    assert left.equals(right, 1e-8 * max(1.0, max(abs(c) for c in left.coefficients.values())))


def test_truncation_flag():
    t = ThetaTensor(0.5)
    f = PolynomialPotential.monomial(2, 0)
    g = PolynomialPotential.monomial(0, 2)
    assert not moyal_star(f, g, t).truncated
    short = moyal_star(f, g, t, max_order=1)
    assert short.truncated
    assert (0, 0) not in short.coefficients
    assert not moyal_star(f, g, ThetaTensor(0.0), max_order=0).truncated
    with pytest.raises(ValueError):
        moyal_star(f, g, t, max_order=-1)
