"""Bopp-shifted polynomial potentials and noncommutative Hamiltonians."""
from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .core import (
    Grid2D,
    HermiticityError,
    OperatorMatrix,
    PhysParams,
    ThetaTensor,
    UnsupportedBoundaryError,
    derivative_matrix,
    effective_theta,
    monomial_values,
)
from .polynomial import PolynomialPotential, PseudoDiffOperator


def nc_coordinates(theta: ThetaTensor, convention: str = "literal"):
    """Shifted coordinates ``x - (i/2) t d_y`` and ``y + (i/2) t d_x``."""
    t = effective_theta(theta, convention)
    xh = PseudoDiffOperator({(1, 0, 0, 0): 1.0, (0, 0, 0, 1): -0.5j * t})
    yh = PseudoDiffOperator({(0, 1, 0, 0): 1.0, (0, 0, 1, 0): 0.5j * t})
    return xh, yh


def _arrangements(a: int, b: int):
    n = a + b
    for xs in itertools.combinations(range(n), a):
        word = ["y"] * n
        for i in xs:
            word[i] = "x"
        yield word


def weyl_monomial(a: int, b: int, xh: PseudoDiffOperator, yh: PseudoDiffOperator) -> PseudoDiffOperator:
    """Average of all orderings of ``a`` copies of xh and ``b`` copies of yh."""
    if a + b == 0:
        return PseudoDiffOperator.identity()
    words = list(_arrangements(a, b))
    total = PseudoDiffOperator()
    for word in words:
        ops = [xh if w == "x" else yh for w in word]
        total = total + reduce(lambda p, q: p @ q, ops)
    return total * (1.0 / len(words))


def bopp_shift(V: PolynomialPotential, theta: ThetaTensor, convention: str = "literal") -> PseudoDiffOperator:
    """Replace x, y in ``V`` by the noncommutative coordinates.

    Monomials mixing x and y are Weyl ordered; for theta = 0 the result is
    the multiplication operator by ``V``.
    """
    xh, yh = nc_coordinates(theta, convention)
    out = PseudoDiffOperator()
    for (a, b), c in V.coefficients.items():
        out = out + weyl_monomial(a, b, xh, yh) * c
    return out


def discretize(op: PseudoDiffOperator, grid: Grid2D) -> sp.csr_matrix:
    """Normal-ordered discretization: multiplication after differentiation."""
    mat = sp.csr_matrix((grid.size, grid.size), dtype=complex)
    for (a, b, m, n), c in op.terms.items():
        mult = sp.diags(monomial_values(grid, a, b))
        mat = mat + c * (mult @ derivative_matrix(grid, m, n))
    return mat.tocsr()


def discretize_hermitian(op: PseudoDiffOperator, grid: Grid2D) -> OperatorMatrix:
    """Hermitian discretization of a formally self-adjoint operator.

    The normal-ordered matrix and its adjoint both discretize ``op``; their
    mean is hermitian by construction.  A symbolic check runs first so that
    a non-self-adjoint ordering is reported rather than hidden.
    """
    if not op.is_formally_hermitian():
        raise HermiticityError("operator is not formally self-adjoint (ordering error)")
    mat = discretize(op, grid)
    mat = 0.5 * (mat + mat.conj().T)
    if not np.any(mat.data.imag):
        mat = mat.real
    return OperatorMatrix(mat.tocsr(), hermitian=True, grid=grid)


def kinetic_operator(phys: PhysParams) -> PseudoDiffOperator:
    c = -(phys.hbar**2) / (2 * phys.m)
    return PseudoDiffOperator({(0, 0, 2, 0): c, (0, 0, 0, 2): c})


def nc_hamiltonian_operator(V: PolynomialPotential, phys: PhysParams, theta: ThetaTensor,
                            convention: str = "literal") -> PseudoDiffOperator:
    return kinetic_operator(phys) + bopp_shift(V, theta, convention)


def build_nc_hamiltonian(V: PolynomialPotential, grid: Grid2D, phys: PhysParams = PhysParams(),
                         theta: ThetaTensor = ThetaTensor(), convention: str = "literal") -> OperatorMatrix:
    if not V.is_real:
        raise ValueError("the potential must have real coefficients")
    return discretize_hermitian(nc_hamiltonian_operator(V, phys, theta, convention), grid)


def build_linear_hamiltonian(alpha: float, beta: float, grid: Grid2D, phys: PhysParams = PhysParams(),
                             theta: ThetaTensor = ThetaTensor(), convention: str = "literal") -> OperatorMatrix:
    """``-hbar^2/2m lap + alpha x + beta y`` plus the first-order Bopp terms, in a box."""
    if alpha == 0 and beta == 0:
        raise ValueError("alpha and beta cannot both vanish")
    if grid.periodic:
        raise UnsupportedBoundaryError("a linear potential needs a Dirichlet box")
    return build_nc_hamiltonian(PolynomialPotential.linear(alpha, beta), grid, phys, theta, convention)


def build_anharmonic_hamiltonian(omega: float, alpha_c: float, gamma: float, grid: Grid2D,
                                 phys: PhysParams = PhysParams(), theta: ThetaTensor = ThetaTensor(),
                                 convention: str = "literal") -> OperatorMatrix:
    if gamma < 0:
        raise ValueError("gamma < 0 leaves the spectrum unbounded below")
    if omega <= 0:
        raise ValueError("omega must be positive")
    V = PolynomialPotential.anharmonic(omega, alpha_c, gamma, mass=phys.m)
    return build_nc_hamiltonian(V, grid, phys, theta, convention)
