"""Exotic Galilei generators on a grid and checks of their commutators."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    Grid2D,
    OperatorMatrix,
    PhysParams,
    ShapeError,
    ThetaTensor,
    UnsupportedBoundaryError,
    WaveFunction,
    effective_theta,
)
from .hamiltonian import discretize, nc_coordinates
from .polynomial import PolynomialPotential, PseudoDiffOperator


class GeneratorKind(str, enum.Enum):
    X1 = "x1"
    X2 = "x2"
    P1 = "p1"
    P2 = "p2"
    K1 = "K1"
    K2 = "K2"
    L = "L"
    H = "H"


@dataclass(frozen=True)
class BoostContext:
    t: float = 0.0
    v: tuple = (1.0, 0.0)

    def __post_init__(self):
        v = tuple(float(c) for c in self.v)
        if len(v) != 2 or not all(np.isfinite(v)) or not np.isfinite(self.t):
            raise ValueError("boost context needs a finite time and a 2-vector velocity")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))


def generator_symbol(kind: GeneratorKind, phys: PhysParams, theta: ThetaTensor,
                     ctx: BoostContext = BoostContext(), convention: str = "literal") -> PseudoDiffOperator:
    """Differential-operator form of a generator, with ``p_j = -i hbar d_j``."""
    kind = GeneratorKind(kind)
    hb, m = phys.hbar, phys.m
    x1, x2 = nc_coordinates(theta, convention)
    p1 = PseudoDiffOperator.derivative(1, 0, -1j * hb)
    p2 = PseudoDiffOperator.derivative(0, 1, -1j * hb)
    table = {
        GeneratorKind.X1: lambda: x1,
        GeneratorKind.X2: lambda: x2,
        GeneratorKind.P1: lambda: p1,
        GeneratorKind.P2: lambda: p2,
        GeneratorKind.K1: lambda: x1 * m - p1 * ctx.t,
        GeneratorKind.K2: lambda: x2 * m - p2 * ctx.t,
        GeneratorKind.L: lambda: x1 @ p2 - x2 @ p1,
        GeneratorKind.H: lambda: (p1 @ p1 + p2 @ p2) * (1 / (2 * m)),
    }
    return table[kind]()


def build_generator(kind: GeneratorKind, grid: Grid2D, phys: PhysParams = PhysParams(),
                    theta: ThetaTensor = ThetaTensor(), ctx: BoostContext = BoostContext(),
                    convention: str = "literal") -> OperatorMatrix:
    if not grid.periodic:
        raise UnsupportedBoundaryError("generators are built on periodic grids")
    op = generator_symbol(kind, phys, theta, ctx, convention)
    return OperatorMatrix(discretize(op, grid), hermitian=True, grid=grid)


def commutator(A: OperatorMatrix, B: OperatorMatrix, testset=()):
    """Return ``AB - BA`` together with its action on each test state."""
    if A.dim != B.dim:
        raise ShapeError(f"dimension mismatch {A.dim} vs {B.dim}")
    actions = []
    for psi in testset:
        actions.append(A @ (B @ psi) - B @ (A @ psi))
    return (A @ B) - (B @ A), actions


def random_test_states(grid: Grid2D, n: int = 5, seed: int = 0, width: float = 0.8):
    """Gaussians times random quadratic polynomials, centred within lx/8, ly/8."""
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh()
    states = []
    for _ in range(n):
        cx = rng.uniform(-grid.lx / 8, grid.lx / 8)
        cy = rng.uniform(-grid.ly / 8, grid.ly / 8)
        c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        u, w = X - cx, Y - cy
        poly = c[0] + c[1] * u + c[2] * w + 0.5 * (c[3] * u * u + c[4] * u * w + c[5] * w * w)
        field = poly * np.exp(-(u * u + w * w) / (2 * width**2))
        states.append(WaveFunction(grid, field).normalized())
    return states


def _rel_residual(res: WaveFunction, psi: WaveFunction) -> float:
    return float(np.max(np.abs(res.amplitudes)) / np.max(np.abs(psi.amplitudes)))


@dataclass
class RelationResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class AlgebraReport:
    relations: list = field(default_factory=list)
    boost_commutator_sign: int = -1
    boost_commutator_magnitude: float = 0.0

    def add(self, name, residual, tol, note=""):
        residual = float(residual)
        self.relations.append(RelationResult(name, residual, tol, residual <= tol, note))

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.relations)

    def __getitem__(self, name) -> RelationResult:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "boost_commutator_sign": self.boost_commutator_sign,
            "boost_commutator_magnitude": self.boost_commutator_magnitude,
            "relations": [asdict(r) for r in self.relations],
        }


def _max_residual(A, B, states, expected):
    """max over states of |([A,B] - expected) psi|_inf / |psi|_inf."""
    _, actions = commutator(A, B, states)
    return max(_rel_residual(act - expected(psi), psi) for act, psi in zip(actions, states))


def boost_commutator_sign(convention: str = "literal") -> int:
    """Sign s in ``[K1, K2] = s * i m^2 theta`` for the chosen convention."""
    return -1 if convention == "literal" else 1


def check_exotic_algebra(grid: Grid2D, phys: PhysParams = PhysParams(), theta: ThetaTensor = ThetaTensor(),
                         ctx: BoostContext = BoostContext(), tol: float = 1e-6, *, n_states: int = 5,
                         seed: int = 0, convention: str = "literal") -> AlgebraReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    G = {k: build_generator(k, grid, phys, theta, ctx, convention) for k in GeneratorKind}
    states = random_test_states(grid, n_states, seed)
    hb, m = phys.hbar, phys.m
    zero = lambda psi: psi * 0.0  # noqa: E731
    P = [G[GeneratorKind.P1], G[GeneratorKind.P2]]
    K = [G[GeneratorKind.K1], G[GeneratorKind.K2]]
    X = [G[GeneratorKind.X1], G[GeneratorKind.X2]]
    L, H = G[GeneratorKind.L], G[GeneratorKind.H]
    report = AlgebraReport(boost_commutator_sign=boost_commutator_sign(convention))

    report.add("[p1,p2]", _max_residual(P[0], P[1], states, zero), tol)
    for i in range(2):
        for j in range(2):
            delta = 1.0 if i == j else 0.0
            report.add(f"[K{i+1},p{j+1}]",
                       _max_residual(K[i], P[j], states, lambda psi, d=delta: psi * (1j * hb * m * d)), tol)
    report.add("[L,p1]", _max_residual(L, P[0], states, lambda psi: (P[1] @ psi) * (1j * hb)), tol)
    report.add("[L,p2]", _max_residual(L, P[1], states, lambda psi: (P[0] @ psi) * (-1j * hb)), tol)
    c = report.boost_commutator_sign * 1j * m**2 * theta.theta
    report.add("[K1,K2]", _max_residual(K[0], K[1], states, lambda psi: psi * c), tol,
               note=f"expected {report.boost_commutator_sign:+d} i m^2 theta")
    for j in range(2):
        report.add(f"[p{j+1},H]", _max_residual(P[j], H, states, zero), tol)
    report.add("[L,H]", _max_residual(L, H, states, zero), tol)
    for i in range(2):
        for j in range(2):
            delta = 1.0 if i == j else 0.0
            report.add(f"[x{i+1},p{j+1}]",
                       _max_residual(X[i], P[j], states, lambda psi, d=delta: psi * (1j * hb * d)), tol)
    _, acts = commutator(K[0], K[1], states[:1])
    psi = states[0]
    num = np.vdot(psi.amplitudes, acts[0].amplitudes) / np.vdot(psi.amplitudes, psi.amplitudes)
    report.boost_commutator_magnitude = float(abs(num))
    return report


def boost_derivative_check(grid: Grid2D, phys: PhysParams = PhysParams(), theta: ThetaTensor = ThetaTensor(),
                           ctx: BoostContext = BoostContext(), *, n_states: int = 5, seed: int = 0,
                           convention: str = "literal") -> dict:
    """Infinitesimal boost law ``(-i/hbar)[v.K, p_j] = m v_j``, per component."""
    K1 = build_generator(GeneratorKind.K1, grid, phys, theta, ctx, convention)
    K2 = build_generator(GeneratorKind.K2, grid, phys, theta, ctx, convention)
    vK = K1 * ctx.v[0] + K2 * ctx.v[1]
    states = random_test_states(grid, n_states, seed)
    out = {}
    for j, kind in enumerate((GeneratorKind.P1, GeneratorKind.P2)):
        P = build_generator(kind, grid, phys, theta, ctx, convention)
        _, acts = commutator(vK, P, states)
        mv = phys.m * ctx.v[j]
        out[f"p{j+1}"] = max(_rel_residual(act * (-1j / phys.hbar) - psi * mv, psi)
                             for act, psi in zip(acts, states))
    out["max"] = max(out["p1"], out["p2"])
    return out


def casimir_invariants(grid: Grid2D, phys: PhysParams = PhysParams(), theta: ThetaTensor = ThetaTensor(),
                       ctx: BoostContext = BoostContext(), tol: float = 1e-6, *, n_states: int = 5,
                       seed: int = 0, convention: str = "literal"):
    """Build ``I1 = H - P^2/2m`` and ``I2 = L - (K x P)/m`` and test them.

    Returns ``(I1, I2, report)``; the report holds ``[I_a, G]`` residuals for
    every generator and the sizes of ``I_a psi``.
    """
    G = {k: build_generator(k, grid, phys, theta, ctx, convention) for k in GeneratorKind}
    P1, P2 = G[GeneratorKind.P1], G[GeneratorKind.P2]
    K1, K2 = G[GeneratorKind.K1], G[GeneratorKind.K2]
    I1 = G[GeneratorKind.H] - (P1 @ P1 + P2 @ P2) * (1 / (2 * phys.m))
    I2 = G[GeneratorKind.L] - (K1 @ P2 - K2 @ P1) * (1 / phys.m)
    states = random_test_states(grid, n_states, seed)
    zero = lambda psi: psi * 0.0  # noqa: E731
    report = AlgebraReport(boost_commutator_sign=boost_commutator_sign(convention))
    for name, inv in (("I1", I1), ("I2", I2)):
        report.add(f"{name} psi", max(_rel_residual(inv @ psi, psi) for psi in states), tol,
                   note="identically zero in this representation")
        for kind in (GeneratorKind.P1, GeneratorKind.P2, GeneratorKind.K1, GeneratorKind.K2,
                     GeneratorKind.L, GeneratorKind.H):
            report.add(f"[{name},{kind.value}]", _max_residual(inv, G[kind], states, zero), tol)
    return I1, I2, report


def moyal_star(f: PolynomialPotential, g: PolynomialPotential, theta: ThetaTensor,
               max_order: int | None = None) -> PolynomialPotential:
    """Star product of two polynomials in the plane.

    Sums the bidifferential series
    ``sum_n (i theta/2)^n / n! sum_k C(n,k) (-1)^(n-k) (dx^k dy^(n-k) f)(dx^(n-k) dy^k g)``,
    which is the exponential of ``(i/2) theta^{mu nu} d_mu (x) d_nu`` with
    ``theta^{12} = theta``.  The series stops by itself after
    ``min(deg f, deg g)`` orders; a smaller ``max_order`` sets ``truncated``.
    """
    exact_order = min(f.degree, g.degree)
    if max_order is None:
        max_order = exact_order
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    t = theta.theta
    result = PolynomialPotential()
    for n in range(min(max_order, exact_order) + 1):
        pref = (0.5j * t) ** n / math.factorial(n)
        for k in range(n + 1):
            w = pref * math.comb(n, k) * (-1) ** (n - k)
            result = result + (f.derivative(k, n - k) * g.derivative(n - k, k)) * w
    truncated = False
    if max_order < exact_order:
        tail = PolynomialPotential()
        for n in range(max_order + 1, exact_order + 1):
            for k in range(n + 1):
                tail = tail + f.derivative(k, n - k) * g.derivative(n - k, k) * (math.comb(n, k) * (-1) ** (n - k))
            truncated = truncated or (t != 0 and bool(tail.coefficients))
    return PolynomialPotential(result.coefficients, truncated)
