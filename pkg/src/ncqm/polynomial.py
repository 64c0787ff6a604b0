"""Polynomials in (x, y) and normal-ordered differential operators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_ZERO_TOL = 0.0


def _clean(coeffs: dict) -> dict:
    return {k: complex(v) for k, v in sorted(coeffs.items()) if complex(v) != 0}


@dataclass(frozen=True, eq=False)
class PolynomialPotential:
    """Polynomial ``sum c_ab x^a y^b`` stored as ``{(a, b): c_ab}``.

    ``truncated`` marks a result that dropped nonzero higher-order terms
    (set by a star product whose series was cut short).
    """

    coefficients: dict = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        coeffs = {}
        for key, val in dict(self.coefficients).items():
            a, b = (int(key[0]), int(key[1]))
            if a < 0 or b < 0:
                raise ValueError(f"negative exponent in monomial {key}")
            val = complex(val)
            if not np.isfinite(val):
                raise ValueError("coefficients must be finite")
            coeffs[(a, b)] = coeffs.get((a, b), 0) + val
        object.__setattr__(self, "coefficients", _clean(coeffs))

    # -- named constructors -------------------------------------------------
    @classmethod
    def linear(cls, alpha: float, beta: float) -> "PolynomialPotential":
        return cls({(1, 0): alpha, (0, 1): beta})

    @classmethod
    def harmonic(cls, wx: float, wy: float | None = None, mass: float = 1.0) -> "PolynomialPotential":
        wy = wx if wy is None else wy
        return cls({(2, 0): 0.5 * mass * wx**2, (0, 2): 0.5 * mass * wy**2})

    @classmethod
    def anharmonic(cls, omega: float, alpha_c: float, gamma: float, mass: float = 1.0) -> "PolynomialPotential":
        pot = cls.harmonic(omega, omega, mass)
        return pot + cls({(3, 0): alpha_c, (0, 3): alpha_c, (4, 0): gamma, (0, 4): gamma})

    @classmethod
    def monomial(cls, a: int, b: int, coeff=1.0) -> "PolynomialPotential":
        return cls({(a, b): coeff})

    @classmethod
    def constant(cls, value) -> "PolynomialPotential":
        return cls({(0, 0): value})

    # -- named accessors ----------------------------------------------------
    def coeff(self, a: int, b: int) -> complex:
        return self.coefficients.get((a, b), 0j)

    @property
    def alpha(self) -> float:
        return self.coeff(1, 0).real

    @property
    def beta(self) -> float:
        return self.coeff(0, 1).real

    @property
    def omega_x(self) -> float:
        """Frequency of the x^2 term for unit mass."""
        return math.sqrt(2 * self.coeff(2, 0).real)

    @property
    def omega_y(self) -> float:
        return math.sqrt(2 * self.coeff(0, 2).real)

    @property
    def alpha_c(self) -> float:
        return self.coeff(3, 0).real

    @property
    def gamma(self) -> float:
        return self.coeff(4, 0).real

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self.coefficients), default=0)

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.coefficients.values())

    # -- algebra ------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PolynomialPotential):
            other = PolynomialPotential.constant(other)
        coeffs = dict(self.coefficients)
        for k, v in other.coefficients.items():
            coeffs[k] = coeffs.get(k, 0) + v
        return PolynomialPotential(coeffs, self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other if isinstance(other, PolynomialPotential) else -complex(other))

    def __mul__(self, other):
        if isinstance(other, PolynomialPotential):
            coeffs = {}
            for (a1, b1), c1 in self.coefficients.items():
                for (a2, b2), c2 in other.coefficients.items():
                    key = (a1 + a2, b1 + b2)
                    coeffs[key] = coeffs.get(key, 0) + c1 * c2
            return PolynomialPotential(coeffs, self.truncated or other.truncated)
        return PolynomialPotential({k: v * other for k, v in self.coefficients.items()}, self.truncated)

    __rmul__ = __mul__

    def derivative(self, dx: int = 0, dy: int = 0) -> "PolynomialPotential":
        coeffs = {}
        for (a, b), c in self.coefficients.items():
            if a >= dx and b >= dy:
                f = math.perm(a, dx) * math.perm(b, dy)
                coeffs[(a - dx, b - dy)] = c * f
        return PolynomialPotential(coeffs)

    def __call__(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (a, b), c in self.coefficients.items():
            out = out + c * x**a * y**b
        return out if out.ndim else complex(out)

    def equals(self, other, tol: float = 0.0) -> bool:
        keys = set(self.coefficients) | set(other.coefficients)
        return all(abs(self.coeff(*k) - other.coeff(*k)) <= tol for k in keys)

    def __eq__(self, other):
        if not isinstance(other, PolynomialPotential):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        terms = " + ".join(f"({c:g})x^{a}y^{b}" for (a, b), c in self.coefficients.items())
        return f"PolynomialPotential({terms or '0'})"

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"monomials": [
            {"ax": a, "ay": b, "re": c.real, "im": c.imag}
            for (a, b), c in self.coefficients.items()
        ]}

    @classmethod
    def from_json(cls, data: dict, mass: float = 1.0) -> "PolynomialPotential":
        """Parse ``{"monomials": [...]}`` plus the named shortcut blocks."""
        allowed = {"monomials", "linear", "harmonic", "anharmonic"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown potential keys: {sorted(unknown)}")
        pot = cls()
        for mono in data.get("monomials", []):
            extra = set(mono) - {"ax", "ay", "re", "im"}
            if extra:
                raise ValueError(f"unknown monomial keys: {sorted(extra)}")
            pot = pot + cls({(mono["ax"], mono["ay"]): complex(mono.get("re", 0.0), mono.get("im", 0.0))})
        if "linear" in data:
            lin = _strict(data["linear"], {"alpha", "beta"})
            pot = pot + cls.linear(lin.get("alpha", 0.0), lin.get("beta", 0.0))
        if "harmonic" in data:
            har = _strict(data["harmonic"], {"wx", "wy"})
            wx = har.get("wx", 1.0)
            pot = pot + cls.harmonic(wx, har.get("wy", wx), mass)
        if "anharmonic" in data:
            anh = _strict(data["anharmonic"], {"alpha_c", "gamma"})
            a_c, g = anh.get("alpha_c", 0.0), anh.get("gamma", 0.0)
            pot = pot + cls({(3, 0): a_c, (0, 3): a_c, (4, 0): g, (0, 4): g})
        return pot


def _strict(block, keys):
    extra = set(block) - keys
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)}; allowed {sorted(keys)}")
    return block


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PseudoDiffOperator:
    """Finite sum ``c * x^a y^b d_x^m d_y^n`` in normal order.

    Terms are stored as ``{(a, b, m, n): c}``: multiplications to the left of
    all derivatives.
    """

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", {k: complex(v) for k, v in sorted(self.terms.items()) if complex(v) != 0})

    @classmethod
    def multiplication(cls, poly: PolynomialPotential) -> "PseudoDiffOperator":
        return cls({(a, b, 0, 0): c for (a, b), c in poly.coefficients.items()})

    @classmethod
    def derivative(cls, m: int, n: int, coeff=1.0) -> "PseudoDiffOperator":
        return cls({(0, 0, m, n): coeff})

    @classmethod
    def identity(cls) -> "PseudoDiffOperator":
        return cls({(0, 0, 0, 0): 1.0})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return PseudoDiffOperator(out)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, scalar):
        if isinstance(scalar, PseudoDiffOperator):
            return self @ scalar
        return PseudoDiffOperator({k: v * scalar for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PseudoDiffOperator") -> "PseudoDiffOperator":
        # d^m x^a = sum_k C(m,k) a!/(a-k)! x^(a-k) d^(m-k)
        out = {}
        for (a1, b1, m1, n1), c1 in self.terms.items():
            for (a2, b2, m2, n2), c2 in other.terms.items():
                for kx in range(min(m1, a2) + 1):
                    fx = math.comb(m1, kx) * math.perm(a2, kx)
                    for ky in range(min(n1, b2) + 1):
                        fy = math.comb(n1, ky) * math.perm(b2, ky)
                        key = (a1 + a2 - kx, b1 + b2 - ky, m1 + m2 - kx, n1 + n2 - ky)
                        out[key] = out.get(key, 0) + c1 * c2 * fx * fy
        return PseudoDiffOperator(out)

    def adjoint(self) -> "PseudoDiffOperator":
        """Formal adjoint, returned in normal order."""
        out = PseudoDiffOperator()
        for (a, b, m, n), c in self.terms.items():
            # (c x^a y^b d^(m,n))^+ = conj(c) (-1)^(m+n) d^(m,n) x^a y^b
            left = PseudoDiffOperator.derivative(m, n, np.conj(c) * (-1) ** (m + n))
            out = out + left @ PseudoDiffOperator({(a, b, 0, 0): 1.0})
        return out

    def equals(self, other, tol: float = 0.0) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def is_formally_hermitian(self, tol: float = 1e-13) -> bool:
        scale = max((abs(v) for v in self.terms.values()), default=1.0)
        return self.equals(self.adjoint(), tol * max(scale, 1.0))

    @property
    def order(self) -> int:
        return max((m + n for (_, _, m, n) in self.terms), default=0)

    def multiplicative_part(self) -> PolynomialPotential:
        return PolynomialPotential({(a, b): c for (a, b, m, n), c in self.terms.items() if m == n == 0})

    def __repr__(self):
        return f"PseudoDiffOperator({len(self.terms)} terms, order {self.order})"
