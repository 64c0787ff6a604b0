"""First-order energy shifts of the noncommutative anharmonic oscillator.

The reference value is a matrix element in a truncated product Hermite
basis built from ladder operators.  The closed forms quoted for the
anharmonic oscillator, and the Hermite integrals behind them, are
reproduced verbatim and checked against Gauss-Hermite quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as H

from .core import Grid2D, PhysParams, ThetaTensor, effective_theta
from .hamiltonian import build_anharmonic_hamiltonian, build_nc_hamiltonian
from .polynomial import PolynomialPotential
from .spectra import QuantumNumbers, StiffnessBeta, nc_ho_wavefunction, solve_eigen
from .dynamics import expectation

DEFAULT_BASIS = 12
CONVERGENCE_TOL = 1e-8


@dataclass(frozen=True)
class PerturbationSetup:
    q: QuantumNumbers
    omega: float
    theta: ThetaTensor = ThetaTensor()
    alpha_c: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    @property
    def beta(self) -> float:
        return StiffnessBeta.from_params(self.omega, self.theta).beta


@dataclass(frozen=True)
class ShiftResult:
    shift: float
    cubic: float
    quartic: float
    basis_size: int
    converged: bool

    def __float__(self):
        return self.shift


def ladder_matrices(size: int, scale: float):
    """Truncated x and p for the Gaussian ``exp(-scale x^2 / 2)`` (hbar = 1)."""
    a = np.diag(np.sqrt(np.arange(1, size)), 1)
    x = (a + a.T) / math.sqrt(2 * scale)
    p = 1j * math.sqrt(scale / 2) * (a.T - a)
    return x, p


def _shift_in_basis(setup: PerturbationSetup, size: int, convention: str):
    s = setup.omega**2 / math.sqrt(setup.beta)
    x, p = ladder_matrices(size, s)
    eye = np.eye(size)
    t = effective_theta(setup.theta, convention)
    # x - (i/2) t d_y = x + (t/2) p_y ;  y + (i/2) t d_x = y - (t/2) p_x
    xh = np.kron(x, eye) + 0.5 * t * np.kron(eye, p)
    yh = np.kron(eye, x) - 0.5 * t * np.kron(p, eye)
    idx = setup.q.n1 * size + setup.q.n2
    e = np.zeros(size * size)
    e[idx] = 1.0

    def diag(op, power):
        v = e.astype(complex)
        for _ in range(power):
            v = op @ v
        return np.vdot(e, v)

    cubic = setup.alpha_c * (diag(xh, 3) + diag(yh, 3))
    quartic = setup.gamma * (diag(xh, 4) + diag(yh, 4))
    return cubic.real, quartic.real


def first_order_shift(setup: PerturbationSetup, basis_size: int = DEFAULT_BASIS,
                      convention: str = "literal") -> ShiftResult:
    """``<Psi0| alpha_c (x^3 + y^3) + gamma (x^4 + y^4) |Psi0>`` with shifted coordinates."""
    need = max(setup.q.n1, setup.q.n2) + 5
    if basis_size < need:
        raise ValueError(f"basis_size must be at least {need}")
    cubic, quartic = _shift_in_basis(setup, basis_size, convention)
    c2, q2 = _shift_in_basis(setup, basis_size + 2, convention)
    converged = abs((c2 + q2) - (cubic + quartic)) <= CONVERGENCE_TOL
    return ShiftResult(float(cubic + quartic), float(cubic), float(quartic), basis_size, bool(converged))


def first_order_shift_on_grid(setup: PerturbationSetup, grid: Grid2D, state: str = "closed_form",
                              convention: str = "literal") -> float:
    """Same expectation value evaluated with the grid operators.

    ``state="closed_form"`` uses the product Hermite-Gauss state;
    ``state="numeric"`` uses the dense-solver ground state of the harmonic
    Hamiltonian (only meaningful for q = (0, 0)).
    """
    theta = setup.theta
    if state == "closed_form":
        psi = nc_ho_wavefunction(setup.q, setup.omega, theta, grid)
    elif state == "numeric":
        H0 = build_nc_hamiltonian(PolynomialPotential.harmonic(setup.omega), grid, PhysParams(), theta, convention)
        psi = solve_eigen(H0, 1, "dense").eigenvectors[0]
    else:
        raise ValueError(f"unknown state {state!r}")
    pert = PolynomialPotential({(3, 0): setup.alpha_c, (0, 3): setup.alpha_c,
                                (4, 0): setup.gamma, (0, 4): setup.gamma})
    from .hamiltonian import discretize_hermitian, bopp_shift
    dH = discretize_hermitian(bopp_shift(pert, theta, convention), grid)
    return expectation(dH, psi).real


def closed_form_delta_e(setup: PerturbationSetup) -> float:
    """Closed-form first-order shift exactly as printed (no cubic contribution)."""
    n1, n2 = setup.q.n1, setup.q.n2
    w, th, b = setup.omega, setup.theta.theta, setup.beta
    term1 = 3 * b / (2 * w**3.5) * (n1**2 + n2**2 + n1 + n2 + 1)
    term2 = 1.5 * th**2 * ((n1 + 0.5) * (n2 - 0.5) + (n1 - 0.5) * (n2 + 0.5))
    term3 = 3 * th**4 * w**4 / (32 * b) * (3 * (n2**2 + n1**2) - 7 * (n2 + n1) + 1)
    return setup.gamma * (term1 - term2 + term3)


def small_gamma_slope(omega: float, theta: ThetaTensor, grid: Grid2D, gamma: float = 1e-3,
                      convention: str = "literal") -> dict:
    """dE0/dgamma at gamma = 0 from three dense ground-state energies.

    With ``d(g) = (E(g) - E(0)) / g = s + c g + O(g^2)`` the estimate
    ``2 d(gamma) - d(2 gamma)`` removes the linear term.
    """
    def e0(g):
        Hm = build_anharmonic_hamiltonian(omega, 0.0, g, grid, PhysParams(), theta, convention)
        return solve_eigen(Hm, 1, "dense").eigenvalues[0]

    base, one, two = e0(0.0), e0(gamma), e0(2 * gamma)
    d1 = (one - base) / gamma
    d2 = (two - base) / (2 * gamma)
    return {"E0": base, "E_gamma": one, "E_2gamma": two, "d1": d1, "d2": d2, "slope": 2 * d1 - d2}


# ---------------------------------------------------------------------------
# Hermite integral identities

@dataclass(frozen=True)
class QuadratureValue:
    value: float
    npoints: int
    exact: bool

    def __float__(self):
        return self.value


def gauss_hermite_integral(integrand, npoints: int, degree: int | None = None) -> QuadratureValue:
    """``int exp(-x^2) integrand(x) dx`` by ``npoints``-node Gauss-Hermite quadrature.

    ``degree`` is the polynomial degree of ``integrand``; the rule is exact
    when ``2*npoints - 1 >= degree``.  Unknown degree means no guarantee.
    """
    if npoints < 1:
        raise ValueError("npoints must be positive")
    nodes, weights = H.hermgauss(npoints)
    value = float(np.sum(weights * integrand(nodes)))
    exact = degree is not None and 2 * npoints - 1 >= degree
    return QuadratureValue(value, npoints, exact)


def _log_norm(n: int) -> float:
    # log of int exp(-x^2) H_n^2 = log(2^n n! sqrt(pi))
    return n * math.log(2) + math.lgamma(n + 1) + 0.5 * math.log(math.pi)


def _normalized_hermite(n: int, x):
    """H_n(x) / sqrt(2^n n! sqrt(pi)) without overflow."""
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.full_like(x, math.pi**-0.25)
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
    return cur


def _pair_integral(n: int, m: int, power: int) -> float:
    """int x^power exp(-x^2) H_n H_m dx, by quadrature, rescaled in log space."""
    npts = (n + m + power) // 2 + 2
    val = gauss_hermite_integral(lambda x: x**power * _normalized_hermite(n, x) * _normalized_hermite(m, x),
                                 npts, n + m + power)
    return float(val) * math.exp(0.5 * (_log_norm(n) + _log_norm(m)))


def _derivative_integral(n: int, order: int) -> float:
    """int exp(-x^2/2) H_n d^order/dx^order [exp(-x^2/2) H_n] dx.

    ``d/dx [exp(-x^2/2) Q] = exp(-x^2/2) (Q' - x Q)`` is applied ``order``
    times to the Hermite series of H_n, then integrated by quadrature.
    """
    q = H.Hermite.basis(n)
    xpoly = H.Hermite([0.0, 0.5])
    for _ in range(order):
        q = q.deriv() - xpoly * q
    scale = math.exp(-0.5 * _log_norm(n))
    npts = n + order // 2 + 2
    val = gauss_hermite_integral(lambda x: _normalized_hermite(n, x) * q(x) * scale, npts, 2 * n + order)
    return float(val) * math.exp(_log_norm(n))


def _delta(a, b):
    return 1.0 if a == b else 0.0


@dataclass(frozen=True)
class IntegralIdentity:
    """A closed-form Hermite integral paired with its quadrature oracle."""

    identifier: str
    closed_form: object
    oracle: object


def _closed_forms():
    sp = math.sqrt(math.pi)
    f = math.factorial
    table = {
        "H n orthogonality": (lambda n, m: _delta(n, m) * 2**n * f(n) * sp, lambda n, m: _pair_integral(n, m, 0)),
        "x_Hn_Hm": (lambda n, m: sp * 2**n * f(n) * (0.5 * _delta(n - 1, m) + (n + 1) * _delta(n + 1, m)),
                    lambda n, m: _pair_integral(n, m, 1)),
        "x2_Hn_Hm": (lambda n, m: sp * 2**n * f(n) * ((n + 0.5) * _delta(n, m) + (n + 2) * (n + 1) * _delta(n + 2, m)
                                                     + 0.25 * _delta(n - 2, m)),
                     lambda n, m: _pair_integral(n, m, 2)),
        "x3_Hn2": (lambda n, m: 0.0, lambda n, m: _pair_integral(n, n, 3)),
        "x3_Hn_Hn-1": (lambda n, m: 3 * sp * 2.0 ** (n - 2) * n**2 * f(n - 1), lambda n, m: _pair_integral(n, n - 1, 3)),
        "x4_Hn2": (lambda n, m: 3 * sp * 2.0 ** (n - 2) * (2 * n**2 + 2 * n + 1) * f(n),
                   lambda n, m: _pair_integral(n, n, 4)),
        "d2": (lambda n, m: sp * 2**n * (n - 0.5) * f(n), lambda n, m: _derivative_integral(n, 2)),
        "d4": (lambda n, m: 1.5 * sp * 2**n * (3 * n**2 - 7 * n + 0.5) * f(n), lambda n, m: _derivative_integral(n, 4)),
    }
    return {name: IntegralIdentity(name, *forms) for name, forms in table.items()}


PAIR_IDENTITIES = ("H n orthogonality", "x_Hn_Hm", "x2_Hn_Hm")
IDENTITIES = _closed_forms()
IDENTITY_NAMES = tuple(IDENTITIES)


@dataclass
class IdentityCheck:
    identity: str
    n: int
    m: int
    closed_form: float
    oracle: float
    difference: float
    relative_difference: float
    passed: bool


@dataclass
class ErrataReport:
    max_n: int
    rtol: float
    checks: list = field(default_factory=list)

    def for_identity(self, name: str) -> list:
        return [c for c in self.checks if c.identity == name]

    def identity_passed(self, name: str) -> bool:
        return all(c.passed for c in self.for_identity(name))

    def mismatches(self, name: str | None = None) -> list:
        return [c for c in self.checks if not c.passed and (name is None or c.identity == name)]

    def to_json(self) -> dict:
        summary = {}
        for name in IDENTITY_NAMES:
            rows = self.for_identity(name)
            summary[name] = {
                "checked": len(rows),
                "passed": all(c.passed for c in rows),
                "mismatched_n": sorted({c.n for c in rows if not c.passed}),
            }
        return {
            "max_n": self.max_n,
            "rtol": self.rtol,
            "summary": summary,
            "checks": [c.__dict__ for c in self.checks],
        }


def verify_integral_identities(max_n: int = 10, rtol: float = 1e-9) -> ErrataReport:
    """Compare every closed-form Hermite integral with quadrature for n <= max_n.

    Disagreements are recorded in the report; they do not raise.
    """
    if not 0 <= max_n <= 20:
        raise ValueError("max_n must lie in [0, 20]")
    report = ErrataReport(max_n, rtol)
    for name, ident in IDENTITIES.items():
        closed, oracle = ident.closed_form, ident.oracle
        for n in range(max_n + 1):
            if name in PAIR_IDENTITIES:
                ms = [m for m in range(n - 2, n + 3) if m >= 0]
            elif name == "x3_Hn_Hn-1":
                if n == 0:
                    continue
                ms = [n - 1]
            else:
                ms = [n]
            for m in ms:
                pv, ov = float(closed(n, m)), float(oracle(n, m))
                scale = max(math.exp(0.5 * (_log_norm(n) + _log_norm(m))), 1.0)
                diff = pv - ov
                rel = abs(diff) / scale
                report.checks.append(IdentityCheck(name, n, m, pv, ov, diff, rel, rel <= rtol))
    return report
