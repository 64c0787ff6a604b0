"""Grids, wavefunctions, discrete operators and spectral differentiation.

Every 2D field is flattened row-major as ``iy * nx + ix`` and every operator
matrix acts on vectors in that ordering.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class UnsupportedBoundaryError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class HermiticityError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class Grid2D:
    """Uniform sampling of ``[-lx, lx] x [-ly, ly]``.

    Periodic grids hold ``x_i = -lx + i*hx`` with ``hx = 2*lx/nx``.  Dirichlet
    grids hold only the interior nodes ``x_i = -lx + (i+1)*hx`` with
    ``hx = 2*lx/(nx+1)``; the walls at ``+-lx`` are implicit zeros.
    """

    nx: int
    ny: int
    lx: float
    ly: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 16 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 16, got {n}")
            object.__setattr__(self, name, int(n))
        for name in ("lx", "ly"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val <= 0:
                raise ValueError(f"{name} must be positive, got {val}")
            object.__setattr__(self, name, val)

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    def _axis(self, n, half):
        if self.periodic:
            h = 2 * half / n
            return -half + h * np.arange(n), h
        h = 2 * half / (n + 1)
        return -half + h * np.arange(1, n + 1), h

    @property
    def hx(self) -> float:
        return self._axis(self.nx, self.lx)[1]

    @property
    def hy(self) -> float:
        return self._axis(self.ny, self.ly)[1]

    @property
    def x(self) -> np.ndarray:
        return self._axis(self.nx, self.lx)[0]

    @property
    def y(self) -> np.ndarray:
        return self._axis(self.ny, self.ly)[0]

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "lx": self.lx, "ly": self.ly,
                "boundary": self.boundary.value}


@dataclass(frozen=True)
class ThetaTensor:
    """Antisymmetric noncommutativity tensor ``theta_ij = theta * eps_ij``."""

    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")

    @property
    def matrix(self) -> np.ndarray:
        t = self.theta
        return np.array([[0.0, t], [-t, 0.0]])

    def __getitem__(self, ij) -> float:
        i, j = ij
        return self.matrix[i, j]

    def flipped(self) -> "ThetaTensor":
        return ThetaTensor(-self.theta)


@dataclass(frozen=True)
class PhysParams:
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.hbar > 0):
            raise ValueError("mass and hbar must be positive")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "hbar", float(self.hbar))


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: Grid2D
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if a.size != self.grid.size:
            raise ShapeError(f"expected {self.grid.size} amplitudes, got {a.size}")
        if not np.all(np.isfinite(a)):
            raise ValueError("wavefunction amplitudes must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> "WaveFunction":
        X, Y = grid.mesh()
        return cls(grid, np.asarray(func(X, Y), dtype=complex))

    @property
    def field(self) -> np.ndarray:
        return self.amplitudes.reshape(self.grid.shape)

    def norm(self) -> float:
        g = self.grid
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * g.hx * g.hy))

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero wavefunction")
        return WaveFunction(self.grid, self.amplitudes / n)

    def with_amplitudes(self, amplitudes) -> "WaveFunction":
        return WaveFunction(self.grid, amplitudes)

    def __add__(self, other):
        _check_same_grid(self, other)
        return WaveFunction(self.grid, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return WaveFunction(self.grid, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar):
        return WaveFunction(self.grid, self.amplitudes * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: WaveFunction, b: WaveFunction):
    if a.grid != b.grid:
        raise ShapeError("wavefunctions live on different grids")


def inner_product(phi: WaveFunction, psi: WaveFunction) -> complex:
    _check_same_grid(phi, psi)
    g = phi.grid
    return complex(np.vdot(phi.amplitudes, psi.amplitudes) * g.hx * g.hy)


# ---------------------------------------------------------------------------
# differentiation

def _wavenumbers(n: int, half: float) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(n, d=2 * half / n)


def _symbol(n: int, half: float, order: int) -> np.ndarray:
    k = _wavenumbers(n, half)
    sym = (1j * k) ** order
    if order % 2:
        # the Nyquist mode has no sign; odd derivatives of it are dropped
        sym[n // 2] = 0.0
    return sym


def spectral_derivative(psi: WaveFunction, axis: str, order: int) -> WaveFunction:
    """Fourier-collocation derivative of ``psi`` along ``axis`` ('x' or 'y')."""
    if order not in (1, 2, 4):
        raise ValueError(f"order must be 1, 2 or 4, got {order}")
    grid = psi.grid
    if not grid.periodic:
        raise UnsupportedBoundaryError("spectral_derivative requires a periodic grid")
    if axis == "x":
        sym = _symbol(grid.nx, grid.lx, order)[None, :]
        ax = 1
    elif axis == "y":
        sym = _symbol(grid.ny, grid.ly, order)[:, None]
        ax = 0
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    out = np.fft.ifft(sym * np.fft.fft(psi.field, axis=ax), axis=ax)
    return WaveFunction(grid, out)


@lru_cache(maxsize=64)
def _fourier_matrix(n: int, half: float, order: int) -> np.ndarray:
    eye = np.eye(n)
    mat = np.fft.ifft(_symbol(n, half, order)[:, None] * np.fft.fft(eye, axis=0), axis=0)
    mat = mat.real  # even n: every symbol is conjugate-symmetric
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=8)
def _dst_basis(n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    s = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))
    s.setflags(write=False)
    return s


@lru_cache(maxsize=64)
def _sine_matrix(n: int, half: float, order: int) -> np.ndarray:
    """Sine-DVR derivative: exact Galerkin matrix elements in the box sine basis."""
    length = 2 * half
    S = _dst_basis(n)
    j = np.arange(1, n + 1)
    kap = np.pi * j / length
    if order % 2 == 0:
        mat = S @ np.diag((-(kap**2)) ** (order // 2)) @ S.T
    else:
        m, q = j[:, None], j[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where((m + q) % 2 == 1, 4.0 * m * q / (length * (m * m - q * q)), 0.0)
        d1 = S @ g @ S.T
        d1 = 0.5 * (d1 - d1.T)
        if order == 1:
            mat = d1
        else:
            even = _sine_matrix(n, half, order - 1)
            mat = 0.5 * (d1 @ even + even @ d1)
    mat = np.array(mat)
    mat.setflags(write=False)
    return mat


def derivative_matrix_1d(n: int, half: float, order: int, boundary=Boundary.PERIODIC) -> np.ndarray:
    """Dense 1D differentiation matrix of the given order (order 0 is identity)."""
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    if order == 0:
        return np.eye(n)
    if Boundary(boundary) is Boundary.PERIODIC:
        return _fourier_matrix(n, float(half), order)
    return _sine_matrix(n, float(half), order)


def derivative_matrix(grid: Grid2D, dx: int = 0, dy: int = 0) -> sp.csr_matrix:
    """Sparse 2D matrix for the mixed derivative d^dx/dx^dx d^dy/dy^dy."""
    mx = derivative_matrix_1d(grid.nx, grid.lx, dx, grid.boundary)
    my = derivative_matrix_1d(grid.ny, grid.ly, dy, grid.boundary)
    if dx == 0 and dy == 0:
        return sp.identity(grid.size, format="csr")
    if dy == 0:
        return sp.kron(sp.identity(grid.ny), sp.csr_matrix(mx), format="csr")
    if dx == 0:
        return sp.kron(sp.csr_matrix(my), sp.identity(grid.nx), format="csr")
    return sp.kron(sp.csr_matrix(my), sp.csr_matrix(mx), format="csr")


def multiplication_matrix(grid: Grid2D, values) -> sp.csr_matrix:
    return sp.diags(np.asarray(values).reshape(-1), format="csr")


def monomial_values(grid: Grid2D, ax: int, ay: int) -> np.ndarray:
    X, Y = grid.mesh()
    return (X**ax * Y**ay).reshape(-1)


# ---------------------------------------------------------------------------
# operators

_PRODUCT_WORK_LIMIT = 4_000_000


def _max_abs(mat) -> float:
    if sp.issparse(mat):
        return float(abs(mat).max()) if mat.nnz else 0.0
    return float(np.max(np.abs(mat))) if mat.size else 0.0


class OperatorMatrix:
    """A discrete linear operator on flattened grid vectors.

    ``storage`` is a dense ndarray, a scipy sparse matrix, or a lazy
    ``scipy.sparse.linalg.LinearOperator`` (used for products that would
    fill in).  When ``hermitian`` is claimed it is checked on construction.
    """

    HERMITIAN_RTOL = 1e-12

    def __init__(self, storage, hermitian: bool = False, *, check: bool = True, grid: Grid2D | None = None):
        if sp.issparse(storage):
            storage = storage.tocsr()
        elif not isinstance(storage, spla.LinearOperator):
            storage = np.asarray(storage)
        if storage.ndim != 2 or storage.shape[0] != storage.shape[1]:
            raise ShapeError(f"operator must be square, got shape {storage.shape}")
        self.storage = storage
        self.hermitian = bool(hermitian)
        if grid is not None and grid.size != storage.shape[0]:
            raise ShapeError("grid size does not match operator dimension")
        self.grid = grid
        if self.hermitian and check:
            err = self.hermiticity_error()
            if err > self.HERMITIAN_RTOL:
                raise HermiticityError(f"operator claimed hermitian but relative asymmetry is {err:.3e}")

    @property
    def dim(self) -> int:
        return self.storage.shape[0]

    @property
    def lazy(self) -> bool:
        return isinstance(self.storage, spla.LinearOperator)

    @property
    def is_real(self) -> bool:
        if self.lazy:
            return False
        data = self.storage.data if sp.issparse(self.storage) else self.storage
        return not np.iscomplexobj(data) or not np.any(np.imag(data))

    def hermiticity_error(self) -> float:
        """max|A - A^H| / max|A| (probe-based estimate for lazy operators)."""
        if self.lazy:
            rng = np.random.default_rng(0)
            n = self.dim
            u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            au, av = self.storage @ u, self.storage @ v
            scale = np.linalg.norm(au) * np.linalg.norm(v) + np.linalg.norm(av) * np.linalg.norm(u)
            return float(abs(np.vdot(u, av) - np.vdot(au, v)) / scale) if scale else 0.0
        a = self.storage
        scale = _max_abs(a)
        if scale == 0:
            return 0.0
        return _max_abs(a - a.conj().T) / scale

    def to_dense(self) -> np.ndarray:
        if self.lazy:
            return self.storage @ np.eye(self.dim, dtype=complex)
        if sp.issparse(self.storage):
            return self.storage.toarray()
        return np.array(self.storage)

    def apply(self, vec):
        if isinstance(vec, WaveFunction):
            if vec.grid.size != self.dim:
                raise ShapeError("operator and wavefunction dimensions differ")
            return WaveFunction(vec.grid, self.storage @ vec.amplitudes)
        vec = np.asarray(vec)
        if vec.shape[0] != self.dim:
            raise ShapeError(f"vector of length {vec.shape[0]} for operator of dim {self.dim}")
        return self.storage @ vec

    def _other(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.dim != self.dim:
            raise ShapeError(f"dimension mismatch {self.dim} vs {other.dim}")
        return other

    def __matmul__(self, other):
        if isinstance(other, (WaveFunction, np.ndarray)):
            return self.apply(other)
        other = self._other(other)
        if other is NotImplemented:
            return other
        a, b = self.storage, other.storage
        if not self.lazy and not other.lazy:
            if sp.issparse(a) and sp.issparse(b):
                work = a.nnz * b.nnz / max(self.dim, 1)
                if work <= _PRODUCT_WORK_LIMIT:
                    return OperatorMatrix(a @ b, grid=self._grid_with(other))
            elif not sp.issparse(a) and not sp.issparse(b):
                return OperatorMatrix(a @ b, grid=self._grid_with(other))
        return OperatorMatrix(spla.aslinearoperator(a) @ spla.aslinearoperator(b), grid=self._grid_with(other))

    def _grid_with(self, other):
        return self.grid if self.grid == other.grid else None

    def _combine(self, other, sign):
        other = self._other(other)
        if other is NotImplemented:
            return other
        herm = self.hermitian and other.hermitian
        if self.lazy or other.lazy:
            res = spla.aslinearoperator(self.storage) + sign * spla.aslinearoperator(other.storage)
            return OperatorMatrix(res, herm, check=False, grid=self._grid_with(other))
        a, b = self.storage, other.storage
        res = a + sign * b
        if not sp.issparse(res):
            res = np.asarray(res)
        return OperatorMatrix(res, herm, check=False, grid=self._grid_with(other))

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        if isinstance(scalar, OperatorMatrix):
            return NotImplemented
        scalar = complex(scalar)
        herm = self.hermitian and scalar.imag == 0
        if scalar.imag == 0:
            scalar = scalar.real
        return OperatorMatrix(self.storage * scalar, herm, check=False, grid=self.grid)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def dagger(self) -> "OperatorMatrix":
        if self.lazy:
            return OperatorMatrix(self.storage.H, self.hermitian, check=False, grid=self.grid)
        return OperatorMatrix(self.storage.conj().T, self.hermitian, check=False, grid=self.grid)

    def __repr__(self):
        kind = "lazy" if self.lazy else ("sparse" if sp.issparse(self.storage) else "dense")
        return f"OperatorMatrix(dim={self.dim}, {kind}, hermitian={self.hermitian})"


def identity_operator(grid: Grid2D) -> OperatorMatrix:
    return OperatorMatrix(sp.identity(grid.size, format="csr"), hermitian=True, grid=grid)


CONVENTIONS = ("literal", "flipped")


def effective_theta(theta: ThetaTensor, convention: str = "literal") -> float:
    """Scalar theta entering ``x_i - (i/2) theta_ij d_j``.

    ``literal`` takes the position operator as written, which with the
    hermitian momentum ``-i hbar d`` gives ``[x1, x2] = -i theta``.
    ``flipped`` negates theta so that ``[x1, x2] = +i theta``.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    return theta.theta if convention == "literal" else -theta.theta
