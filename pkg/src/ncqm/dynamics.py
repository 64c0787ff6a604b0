"""Crank-Nicolson evolution and Ehrenfest-theorem residuals."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .algebra import BoostContext, GeneratorKind, generator_symbol
from .core import (
    ConvergenceError,
    HermiticityError,
    OperatorMatrix,
    PhysParams,
    ShapeError,
    ThetaTensor,
    WaveFunction,
    effective_theta,
)
from .hamiltonian import discretize
from .polynomial import PolynomialPotential

TRACE_COLUMNS = ("t", "x1", "x2", "p1", "p2", "energy", "norm")
ITERATIVE_MAXITER = 500


def expectation(obs: OperatorMatrix, psi: WaveFunction) -> complex:
    """``<psi|obs|psi>`` with the grid measure; ``obs`` may also be a bare matrix."""
    if not isinstance(obs, OperatorMatrix):
        obs = OperatorMatrix(obs)
    if obs.dim != psi.grid.size:
        raise ShapeError("observable and wavefunction dimensions differ")
    g = psi.grid
    return complex(np.vdot(psi.amplitudes, obs.apply(psi.amplitudes)) * g.hx * g.hy)


@dataclass
class EvolutionTrace:
    times: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    x1_canonical: np.ndarray
    x2_canonical: np.ndarray
    states: list | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    def energy_drift(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1e-300))

    def rows(self):
        cols = (self.times, self.x1, self.x2, self.p1, self.p2, self.energy, self.norm)
        return [tuple(float(c[i]) for c in cols) for i in range(len(self.times))]

    def to_json(self) -> dict:
        return {
            "metadata": self.metadata,
            "columns": list(TRACE_COLUMNS) + ["x1_canonical", "x2_canonical"],
            "norm_drift": self.norm_drift(),
            "energy_drift": self.energy_drift(),
            "final": dict(zip(TRACE_COLUMNS, self.rows()[-1])),
        }


def potential_hash(V: PolynomialPotential) -> str:
    blob = json.dumps(V.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def observables(grid, phys: PhysParams, theta: ThetaTensor, convention: str = "literal") -> dict:
    """Sparse matrices for x1, x2 (noncommutative), p1, p2 and the canonical x, y."""
    ctx = BoostContext()
    out = {}
    for name, kind in (("x1", GeneratorKind.X1), ("x2", GeneratorKind.X2),
                       ("p1", GeneratorKind.P1), ("p2", GeneratorKind.P2)):
        out[name] = discretize(generator_symbol(kind, phys, theta, ctx, convention), grid)
    X, Y = grid.mesh()
    out["x1_canonical"] = sp.diags(X.reshape(-1).astype(complex))
    out["x2_canonical"] = sp.diags(Y.reshape(-1).astype(complex))
    return out


class _CrankNicolson:
    def __init__(self, H: OperatorMatrix, dt: float, hbar: float, solver: str, tol: float, maxiter: int):
        mat = H.storage if not H.lazy else None
        if mat is None:
            raise ValueError("Crank-Nicolson needs an assembled Hamiltonian")
        mat = sp.csc_matrix(mat, dtype=complex)
        ident = sp.identity(H.dim, dtype=complex, format="csc")
        c = 0.5j * dt / hbar
        self.lhs = (ident + c * mat).tocsc()
        self.rhs = (ident - c * mat).tocsr()
        self.solver = solver
        self.tol = tol
        self.maxiter = maxiter
        if solver == "lu":
            self._lu = spla.splu(self.lhs)
        elif solver != "gmres":
            raise ValueError(f"unknown solver {solver!r}")

    def step(self, psi: np.ndarray, index: int) -> np.ndarray:
        b = self.rhs @ psi
        if self.solver == "lu":
            return self._lu.solve(b)
        out, info = spla.gmres(self.lhs, b, x0=psi, rtol=self.tol, atol=0.0,
                               restart=50, maxiter=self.maxiter)
        if info != 0:
            raise ConvergenceError(f"linear solve failed to converge at step {index}")
        return out


def evolve(H: OperatorMatrix, psi0: WaveFunction, dt: float, steps: int, *,
           theta: ThetaTensor = ThetaTensor(), phys: PhysParams = PhysParams(), convention: str = "literal",
           solver: str = "lu", tol: float = 1e-10, maxiter: int = ITERATIVE_MAXITER,
           store_states: bool = False) -> EvolutionTrace:
    """Crank-Nicolson stepping ``(1 + iH dt/2hbar) psi' = (1 - iH dt/2hbar) psi``.

    ``dt`` may be negative (backward evolution).  ``solver="lu"`` factors the
    left-hand matrix once; ``solver="gmres"`` solves each step iteratively to
    relative tolerance ``tol`` within ``maxiter`` restart cycles.
    ``theta`` and ``convention`` only define the recorded position
    observables; the dynamics is fully set by ``H``.
    """
    if not H.hermitian:
        raise HermiticityError("evolve requires a hermitian Hamiltonian")
    if dt == 0 or not np.isfinite(dt):
        raise ValueError("dt must be finite and nonzero")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    grid = psi0.grid
    if grid.size != H.dim:
        raise ShapeError("Hamiltonian and initial state dimensions differ")
    obs = observables(grid, phys, theta, convention)
    cn = _CrankNicolson(H, dt, phys.hbar, solver, tol, maxiter)
    w = grid.hx * grid.hy
    names = ("x1", "x2", "p1", "p2", "x1_canonical", "x2_canonical")
    rec = {k: np.empty(steps + 1) for k in names + ("energy", "norm")}
    states = [] if store_states else None
    psi = psi0.amplitudes.copy()
    hmat = H.storage
    for n in range(steps + 1):
        if n:
            psi = cn.step(psi, n)
        nrm2 = np.vdot(psi, psi).real * w
        rec["norm"][n] = np.sqrt(nrm2)
        for k in names:
            rec[k][n] = (np.vdot(psi, obs[k] @ psi) * w).real / nrm2
        rec["energy"][n] = (np.vdot(psi, hmat @ psi) * w).real / nrm2
        if store_states:
            states.append(psi.copy())
    times = dt * np.arange(steps + 1)
    meta = {"theta": theta.theta, "dt": dt, "steps": steps, "grid": grid.to_dict(),
            "hbar": phys.hbar, "m": phys.m, "convention": convention, "solver": solver}
    return EvolutionTrace(times, rec["x1"], rec["x2"], rec["p1"], rec["p2"], rec["energy"], rec["norm"],
                          rec["x1_canonical"], rec["x2_canonical"],
                          [WaveFunction(grid, s) for s in states] if store_states else None, meta)


@dataclass
class EhrenfestResidual:
    """Residuals of the first-order noncommutative Ehrenfest equations.

    ``r_x[k]`` compares d<x_k>/dt of the canonical coordinate with
    ``<p_k>/m - theta_kl <dV/dx_l> / 2hbar``.  ``r_p[k]`` uses the momentum
    correction ``-theta_jl <p_l d^2V/dx_k dx_j> / 2hbar`` that follows from
    the first-order shifted potential; ``r_p_printed[k]`` uses the form
    ``+theta_jl <p_l d^2V/dx_l dx_j> / 2hbar`` summed over j and l.  ``r_x_nc``
    repeats the position check with the shifted coordinate x-hat.
    """

    times: np.ndarray
    r_x: np.ndarray
    r_p: np.ndarray
    r_p_printed: np.ndarray
    r_x_nc: np.ndarray
    stencil_order: int = 2

    @property
    def max_x(self) -> float:
        return float(np.max(np.abs(self.r_x)))

    @property
    def max_p(self) -> float:
        return float(np.max(np.abs(self.r_p)))

    @property
    def max_residual(self) -> float:
        return max(self.max_x, self.max_p)

    def to_json(self) -> dict:
        return {
            "stencil_order": self.stencil_order,
            "max_r_x": [float(np.max(np.abs(r))) for r in self.r_x],
            "max_r_p": [float(np.max(np.abs(r))) for r in self.r_p],
            "max_r_p_printed": [float(np.max(np.abs(r))) for r in self.r_p_printed],
            "max_r_x_nc": [float(np.max(np.abs(r))) for r in self.r_x_nc],
            "max_residual": self.max_residual,
        }


def ehrenfest_residuals(trace: EvolutionTrace, V: PolynomialPotential, theta: ThetaTensor = ThetaTensor(),
                        phys: PhysParams = PhysParams(), convention: str = "literal") -> EhrenfestResidual:
    """Centred-difference residuals at interior samples (endpoints excluded)."""
    n = len(trace.times)
    if n < 3:
        raise ValueError("need at least three time samples")
    if trace.states is None:
        raise ValueError("trace must be recorded with store_states=True")
    dts = np.diff(trace.times)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=0):
        raise ValueError("time samples must be uniform")
    dt = dts[0]
    grid = trace.states[0].grid
    X, Y = grid.mesh()
    w = grid.hx * grid.hy
    th = np.array([[0.0, 1.0], [-1.0, 0.0]]) * effective_theta(theta, convention)
    hb, m = phys.hbar, phys.m
    dV = [V.derivative(1, 0)(X, Y).reshape(-1), V.derivative(0, 1)(X, Y).reshape(-1)]
    d2V = [[V.derivative(2, 0)(X, Y).reshape(-1), V.derivative(1, 1)(X, Y).reshape(-1)],
           [V.derivative(1, 1)(X, Y).reshape(-1), V.derivative(0, 2)(X, Y).reshape(-1)]]
    obs = observables(grid, phys, theta, convention)
    P = [obs["p1"], obs["p2"]]

    idx = np.arange(1, n - 1)

    def ddt(arr):
        return (arr[2:] - arr[:-2]) / (2 * dt)

    x_can = [trace.x1_canonical, trace.x2_canonical]
    x_nc = [trace.x1, trace.x2]
    p = [trace.p1, trace.p2]
    r_x = np.zeros((2, len(idx)))
    r_x_nc = np.zeros((2, len(idx)))
    r_p = np.zeros((2, len(idx)))
    r_p_printed = np.zeros((2, len(idx)))
    for col, i in enumerate(idx):
        psi = trace.states[i].amplitudes
        nrm2 = np.vdot(psi, psi).real * w
        mean = lambda f: (np.vdot(psi, f * psi) * w).real / nrm2  # noqa: E731
        p_psi = [P[0] @ psi, P[1] @ psi]
        # symmetrized <(f p + p f)/2> = Re <psi| f p psi>
        fp = lambda f, l: (np.vdot(psi, f * p_psi[l]) * w).real / nrm2  # noqa: E731
        grad = [mean(dV[0]), mean(dV[1])]
        printed = sum(th[j, l] * fp(d2V[l][j], l) for j in range(2) for l in range(2)) / (2 * hb)
        for k in range(2):
            x_rhs = p[k][i] / m - sum(th[k, l] * grad[l] for l in range(2)) / (2 * hb)
            r_x[k, col] = x_rhs
            r_x_nc[k, col] = x_rhs
            p_rhs = -grad[k] - sum(th[j, l] * fp(d2V[k][j], l) for j in range(2) for l in range(2)) / (2 * hb)
            r_p[k, col] = p_rhs
            r_p_printed[k, col] = -grad[k] + printed
    for k in range(2):
        r_x[k] = ddt(x_can[k]) - r_x[k]
        r_x_nc[k] = ddt(x_nc[k]) - r_x_nc[k]
        r_p[k] = ddt(p[k]) - r_p[k]
        r_p_printed[k] = ddt(p[k]) - r_p_printed[k]
    return EhrenfestResidual(trace.times[idx], r_x, r_p, r_p_printed, r_x_nc)


def gaussian_packet(grid, center=(0.0, 0.0), momentum=(0.0, 0.0), width: float = 1.0,
                    hbar: float = 1.0) -> WaveFunction:
    """Normalized Gaussian ``exp(-|r - c|^2 / 2 w^2 + i k.r / hbar)``."""
    X, Y = grid.mesh()
    u, v = X - center[0], Y - center[1]
    field = np.exp(-(u * u + v * v) / (2 * width**2) + 1j * (momentum[0] * u + momentum[1] * v) / hbar)
    return WaveFunction(grid, field).normalized()
