"""Eigensolvers and closed-form reference solutions.

``solve_eigen`` offers a dense hermitian solver and a Lanczos solver with
full reorthogonalization and locking.  The remaining functions are the
analytic references: the noncommutative oscillator energies and states and
the Airy profile of the linear potential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import ConvergenceError, Grid2D, HermiticityError, OperatorMatrix, ThetaTensor, WaveFunction
from .special import airy_ai, hermite_poly

DENSE_MAX_DIM = 4096


@dataclass(frozen=True)
class QuantumNumbers:
    n1: int
    n2: int

    def __post_init__(self):
        for v in (self.n1, self.n2):
            if int(v) != v or v < 0:
                raise ValueError("quantum numbers must be nonnegative integers")

    @property
    def n(self) -> float:
        return 0.5 * (self.n1 + self.n2)


@dataclass(frozen=True)
class StiffnessBeta:
    beta: float

    @classmethod
    def from_params(cls, omega: float, theta: ThetaTensor) -> "StiffnessBeta":
        return cls(omega**2 * (1 + theta.theta**2 * omega**2 / 4))


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: list
    residuals: np.ndarray
    method: str = "dense"
    converged: bool = True
    iterations: int = 0
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "converged": self.converged,
            "iterations": self.iterations,
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "metadata": self.metadata,
        }

    def eigenvector_csv_rows(self, index: int):
        """Rows (x, y, Re psi, Im psi) of one eigenvector."""
        psi = self.eigenvectors[index]
        X, Y = psi.grid.mesh()
        a = psi.amplitudes
        return list(zip(X.reshape(-1), Y.reshape(-1), a.real, a.imag))


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[i]) / vec[i]) if vec[i] != 0 else vec


def _dense(H: OperatorMatrix, k: int):
    mat = H.to_dense()
    if H.is_real:
        mat = mat.real
    vals, vecs = sla.eigh(mat, subset_by_index=[0, k - 1])
    return vals, vecs


def _lanczos_run(apply, dim, locked, rng, tol, max_iter, want):
    """One Lanczos pass in the complement of ``locked``; returns Ritz pairs."""
    def project(w):
        if locked.shape[1]:
            for _ in range(2):
                w = w - locked @ (locked.conj().T @ w)
        return w

    v = project(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    v /= np.linalg.norm(v)
    V = np.zeros((dim, min(max_iter, dim) + 1), dtype=complex)
    V[:, 0] = v
    alphas, betas = [], []
    ritz, S = np.array([]), None
    converged = False
    m = 0
    for j in range(min(max_iter, dim - locked.shape[1])):
        w = apply(V[:, j])
        a = np.vdot(V[:, j], w).real
        w = w - a * V[:, j]
        if j:
            w = w - betas[-1] * V[:, j - 1]
        for _ in range(2):  # full reorthogonalization
            w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        w = project(w)
        b = np.linalg.norm(w)
        alphas.append(a)
        m = j + 1
        done = b < 1e-14 * max(1.0, abs(a))
        if m >= want and (m % 5 == 0 or done or m == max_iter):
            ritz, S = sla.eigh_tridiagonal(np.array(alphas), np.array(betas))
            scale = max(1.0, np.max(np.abs(ritz)))
            est = b * np.abs(S[-1, :want])
            if done or np.all(est <= tol * scale):
                converged = True
                break
        if done:
            break
        betas.append(b)
        V[:, j + 1] = w / b
    if S is None or len(ritz) != m:
        ritz, S = sla.eigh_tridiagonal(np.array(alphas), np.array(betas[: m - 1]))
    vecs = V[:, :m] @ S[:, :want]
    return ritz[:want], vecs, converged, m


def _lanczos(H: OperatorMatrix, k: int, tol: float, max_iter: int, seed: int):
    dim = H.dim
    rng = np.random.default_rng(seed)
    apply = H.apply
    locked_vals, locked = [], np.zeros((dim, 0), dtype=complex)
    total_iter = 0
    converged = True
    verified = False
    while not verified:
        want = max(1, k - len(locked_vals)) if len(locked_vals) < k else 1
        vals, vecs, ok, it = _lanczos_run(apply, dim, locked, rng, tol, max_iter, want)
        total_iter += it
        converged = converged and ok
        if not ok and len(vals) == 0:
            break
        if len(locked_vals) < k:
            locked_vals.extend(vals)
            locked = np.hstack([locked, vecs])
        else:
            # a copy of a degenerate level can hide from a single start vector;
            # keep searching the complement until nothing lower than the
            # current k-th value turns up
            if vals[0] < max(locked_vals) - tol * max(1.0, abs(vals[0])):
                locked_vals.append(vals[0])
                locked = np.hstack([locked, vecs[:, :1]])
                order = np.argsort(locked_vals)[:k]
                locked_vals = [locked_vals[i] for i in order]
                locked = locked[:, order]
            else:
                verified = True
        if not ok:
            break
        if len(locked_vals) >= dim:
            break
    order = np.argsort(locked_vals)[:k]
    return np.array(locked_vals)[order], locked[:, order], converged, total_iter


def solve_eigen(H: OperatorMatrix, k: int, method: str | None = None, *, grid: Grid2D | None = None,
                tol: float = 1e-10, max_iter: int = 2000, seed: int = 0,
                raise_on_failure: bool = False) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of a hermitian operator.

    ``method`` is ``"dense"`` or ``"lanczos"``; by default dense is used up
    to dimension 4096.  A Lanczos run that does not converge within
    ``max_iter`` steps returns its best Ritz pairs with ``converged=False``.
    """
    if not H.hermitian:
        raise HermiticityError("solve_eigen requires a hermitian operator")
    if not 1 <= k <= H.dim:
        raise ValueError(f"k must be in [1, {H.dim}]")
    grid = grid or H.grid
    if grid is None:
        raise ValueError("a grid is needed to return eigenvectors as wavefunctions")
    if method is None:
        method = "dense" if H.dim <= DENSE_MAX_DIM else "lanczos"
    if method == "dense":
        vals, vecs = _dense(H, k)
        converged, iters = True, 0
    elif method == "lanczos":
        vals, vecs, converged, iters = _lanczos(H, k, tol, max_iter, seed)
        if raise_on_failure and not converged:
            raise ConvergenceError(f"Lanczos did not converge in {iters} iterations")
    else:
        raise ValueError(f"unknown method {method!r}")
    vecs = np.asarray(vecs, dtype=complex)
    residuals = np.array([np.linalg.norm(H.apply(vecs[:, i]) - vals[i] * vecs[:, i]) for i in range(len(vals))])
    scale = 1.0 / math.sqrt(grid.hx * grid.hy)
    wfs = [WaveFunction(grid, _fix_phase(vecs[:, i] / np.linalg.norm(vecs[:, i])) * scale) for i in range(len(vals))]
    return SpectrumResult(np.asarray(vals, dtype=float), wfs, residuals, method, converged, iters,
                          {"dim": H.dim, "k": k})


# ---------------------------------------------------------------------------
# harmonic oscillator references (hbar = m = 1)

def nc_ho_energy(q: QuantumNumbers, omega: float, theta: ThetaTensor) -> float:
    """Closed-form level ``(1 + theta^2 omega^2/4)^(1/2) omega (n1 + n2 + 1)``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return math.sqrt(1 + theta.theta**2 * omega**2 / 4) * omega * (q.n1 + q.n2 + 1)


def nc_oscillator_levels(omega: float, theta: ThetaTensor, count: int) -> np.ndarray:
    """Full spectrum of the isotropic oscillator with the Bopp-shifted potential.

    In circular quanta ``n+, n-`` the Hamiltonian is
    ``Omega (n+ + n- + 1) + (theta omega^2 / 2)(n+ - n-)`` with
    ``Omega = omega sqrt(1 + theta^2 omega^2 / 4)``; the angular momentum is
    ``n+ - n-``.
    """
    big = omega * math.sqrt(1 + theta.theta**2 * omega**2 / 4)
    split = theta.theta * omega**2 / 2
    nmax = count + 2
    levels = [big * (a + b + 1) + split * (a - b) for a in range(nmax) for b in range(nmax)]
    return np.sort(levels)[:count]


def nc_ho_wavefunction(q: QuantumNumbers, omega: float, theta: ThetaTensor, grid: Grid2D) -> WaveFunction:
    """Product Hermite-Gauss state with the stiffness-rescaled width, unit norm on the grid."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    beta = StiffnessBeta.from_params(omega, theta).beta
    X, Y = grid.mesh()
    s = omega / beta**0.25
    field = (np.exp(-(omega**2) * (X**2 + Y**2) / (2 * math.sqrt(beta)))
             * hermite_poly(q.n1, s * X) * hermite_poly(q.n2, s * Y))
    return WaveFunction(grid, field).normalized()


# ---------------------------------------------------------------------------
# linear potential references

def linear_profile(z, E: float, alpha: float, beta: float, scaled: bool = True):
    """Airy profile as a function of ``z = alpha x + beta y``.

    ``scaled=True`` gives ``Ai((E - z) / (alpha^2 + beta^2)^(1/3))``, which
    solves ``(alpha^2 + beta^2) psi'' + (z - E) psi = 0``.  ``scaled=False``
    gives the unscaled ``Ai(z - E)``.
    """
    z = np.asarray(z, dtype=float)
    if scaled:
        c = (alpha**2 + beta**2) ** (1.0 / 3.0)
        return airy_ai((E - z) / c)
    return airy_ai(z - E)


def linear_solution(alpha: float, beta: float, E: float, grid: Grid2D, scaled: bool = True) -> WaveFunction:
    if alpha == 0 and beta == 0:
        raise ValueError("alpha and beta cannot both vanish")
    X, Y = grid.mesh()
    return WaveFunction(grid, linear_profile(alpha * X + beta * Y, E, alpha, beta, scaled))


def airy_ode_residual(alpha: float, beta: float, E: float, z, scaled: bool = True, h: float | None = None):
    """``(alpha^2 + beta^2) psi'' + (z - E) psi`` by a 5-point stencil in z.

    The default step is ``1e-2`` times the Airy length ``(alpha^2 + beta^2)^(1/3)``.
    """
    z = np.asarray(z, dtype=float)
    if h is None:
        h = 1e-2 * ((alpha**2 + beta**2) ** (1.0 / 3.0) if scaled else 1.0)
    f = lambda s: linear_profile(s, E, alpha, beta, scaled)  # noqa: E731
    d2 = (-f(z + 2 * h) + 16 * f(z + h) - 30 * f(z) + 16 * f(z - h) - f(z - 2 * h)) / (12 * h * h)
    return (alpha**2 + beta**2) * d2 + (z - E) * f(z)


def linear_theta_comparison(alpha: float, beta: float, grid: Grid2D, theta: ThetaTensor, k: int = 3,
                            convention: str = "literal") -> dict:
    """Lowest ``k`` states of the linear problem at ``theta`` against ``theta = 0``.

    The noncommutative terms only shift the momentum, so the moduli agree
    and every level moves by ``-theta^2 (alpha^2 + beta^2) / 8``.
    """
    from .hamiltonian import build_linear_hamiltonian

    ref = solve_eigen(build_linear_hamiltonian(alpha, beta, grid, theta=ThetaTensor(0.0)), k, "dense")
    nc = solve_eigen(build_linear_hamiltonian(alpha, beta, grid, theta=theta, convention=convention), k, "dense")
    expected = -theta.theta**2 * (alpha**2 + beta**2) / 8
    shifts = nc.eigenvalues - ref.eigenvalues
    moduli = [float(np.max(np.abs(np.abs(a.amplitudes) - np.abs(b.amplitudes))))
              for a, b in zip(nc.eigenvectors, ref.eigenvectors)]
    return {
        "eigenvalues_theta": nc.eigenvalues,
        "eigenvalues_zero": ref.eigenvalues,
        "shifts": shifts,
        "expected_shift": expected,
        "max_shift_error": float(np.max(np.abs(shifts - expected))),
        "moduli_difference": moduli,
        "max_moduli_difference": max(moduli),
    }
