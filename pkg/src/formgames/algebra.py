"""Arithmetic in the group of unimodular 2x2 matrices and its Lie algebra.

Conventions
-----------
Group elements are real 2x2 matrices [a b; c d] with ad - bc = 1.
Algebra vectors are traceless 2x2 matrices written in the fixed basis

    E = [0 1; 0 0],   Fhat = [0 0; 1 0],   Hhat = [1 0; 0 -1],

so the coefficient triple (e, f, h) stands for the matrix [h e; f -h].
The inner product on the algebra is <X, Y> = trace(X^T Y), which makes
(E, Fhat, Hhat/sqrt(2)) an orthonormal triple; the norm of (e, f, h) is
sqrt(e^2 + f^2 + 2 h^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, OutOfDomainError

__all__ = [
    "GroupElement",
    "AlgebraVector",
    "E",
    "FHAT",
    "HHAT",
    "one_param",
    "stabilizer_generator",
    "v_of_a",
    "exp_alg",
    "log_alg",
    "adjoint",
]

_DET_TOL = 1e-9
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GroupElement:
    """Unimodular 2x2 matrix, rows [a b; c d]; determinant checked to 1e-9."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or abs(det - 1.0) > _DET_TOL:
            raise InvalidParameterError(f"matrix is not unimodular: det={det!r}")

    @classmethod
    def from_matrix(cls, m) -> "GroupElement":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def mat(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def inv(self) -> "GroupElement":
        # exact adjugate; det is 1
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, v) -> np.ndarray:
        """Matrix times a vector in the plane."""
        v = np.asarray(v, dtype=float)
        return np.array([self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]])


@dataclass(frozen=True)
class AlgebraVector:
    """Traceless matrix [h e; f -h] by its coefficients (e, f, h)."""

    e: float
    f: float
    h: float

    @property
    def mat(self) -> np.ndarray:
        return np.array([[self.h, self.e], [self.f, -self.h]])

    @classmethod
    def from_matrix(cls, m) -> "AlgebraVector":
        m = np.asarray(m, dtype=float)
        # symmetrize the diagonal so tiny trace noise cannot leak in
        return cls(m[0, 1], m[1, 0], 0.5 * (m[0, 0] - m[1, 1]))

    def norm(self) -> float:
        return math.sqrt(self.e * self.e + self.f * self.f + 2.0 * self.h * self.h)

    def ortho(self) -> np.ndarray:
        """Coordinates in the orthonormal frame (E, Fhat, Hhat/sqrt(2))."""
        return np.array([self.e, self.f, SQRT2 * self.h])

    @classmethod
    def from_ortho(cls, p) -> "AlgebraVector":
        return cls(float(p[0]), float(p[1]), float(p[2]) / SQRT2)

    def scaled(self, t: float) -> "AlgebraVector":
        return AlgebraVector(t * self.e, t * self.f, t * self.h)

    def add(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector(self.e + other.e, self.f + other.f, self.h + other.h)


E = AlgebraVector(1.0, 0.0, 0.0)
FHAT = AlgebraVector(0.0, 1.0, 0.0)
HHAT = AlgebraVector(0.0, 0.0, 1.0)


def stabilizer_generator(a: float) -> np.ndarray:
    """Nilpotent generator N of the one-parameter stabilizer of v_of_a(a).

    N = v u^T for u orthogonal to v, normalized so the entries are +-1.
    N^2 = 0, so I + s N is exactly unimodular and (I + sN)(I + tN) = I + (s+t)N.
    """
    if a == 0:
        raise InvalidParameterError("stabilizer needs a nonzero level a")
    if a > 0:
        return np.array([[1.0, -1.0], [1.0, -1.0]])
    return np.array([[-1.0, -1.0], [1.0, 1.0]])


def one_param(kind: str, s: float, a: float | None = None) -> GroupElement:
    """Point of a one-parameter subgroup: diagonal g_s, upper h_s, lower, or
    the stabilizer of v_of_a(a).

    The stabilizer branch is I + s*N with N = stabilizer_generator(a); its
    entries are degree-1 polynomials in s and its determinant is exactly 1.
    """
    if not math.isfinite(s):
        raise InvalidParameterError(f"parameter must be finite, got {s!r}")
    if kind == "diagonal":
        x = math.exp(s)
        return GroupElement(x, 0.0, 0.0, 1.0 / x)
    if kind == "upper":
        return GroupElement(1.0, s, 0.0, 1.0)
    if kind == "lower":
        return GroupElement(1.0, 0.0, s, 1.0)
    if kind == "stabilizer":
        if a is None or a == 0:
            raise InvalidParameterError("stabilizer kind needs a nonzero a")
        n = stabilizer_generator(a)
        return GroupElement(
            1.0 + s * n[0, 0], s * n[0, 1], s * n[1, 0], 1.0 + s * n[1, 1]
        )
    raise InvalidParameterError(f"unknown one-parameter kind {kind!r}")


def v_of_a(a: float) -> np.ndarray:
    """Plane vector with product of coordinates equal to a.

    (sqrt(a), sqrt(a)) for a > 0 and (-sqrt(|a|), sqrt(|a|)) for a < 0; the
    negative branch reads the radical as sqrt(|a|) so the product is a.
    """
    if a == 0 or not math.isfinite(a):
        raise InvalidParameterError("level a must be nonzero and finite")
    r = math.sqrt(abs(a))
    if a > 0:
        return np.array([r, r])
    return np.array([-r, r])


def _cosh_sinhc(theta2: float) -> tuple[float, float]:
    """(cosh(theta), sinh(theta)/theta) as functions of theta^2 = -det(X).

    Handles both branches: theta2 < 0 is the trigonometric case.  Below
    |theta2| < 1e-8 a 6-term series avoids the 0/0 at theta = 0.
    """
    if abs(theta2) < 1e-8:
        t = theta2
        c = 1.0 + t / 2 + t * t / 24 + t**3 / 720 + t**4 / 40320 + t**5 / 3628800
        s = 1.0 + t / 6 + t * t / 120 + t**3 / 5040 + t**4 / 362880 + t**5 / 39916800
        return c, s
    if theta2 > 0:
        th = math.sqrt(theta2)
        return math.cosh(th), math.sinh(th) / th
    om = math.sqrt(-theta2)
    return math.cos(om), math.sin(om) / om


def exp_alg(x: AlgebraVector) -> GroupElement:
    """Closed-form exponential of a traceless 2x2 matrix.

    With theta^2 = h^2 + e*f the Cayley-Hamilton identity X^2 = theta^2 * I
    gives exp(X) = cosh(theta) I + (sinh(theta)/theta) X exactly.
    """
    c, s = _cosh_sinhc(x.h * x.h + x.e * x.f)
    return GroupElement(c + s * x.h, s * x.e, s * x.f, c - s * x.h)


def _opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def log_alg(g: GroupElement) -> AlgebraVector:
    """Inverse of exp_alg near the identity.

    Requires g within operator-norm distance 0.5 of I (local inverse regime);
    outside that OutOfDomainError is raised.
    """
    m = g.mat
    if _opnorm(m - np.eye(2)) > 0.5 + 1e-12:
        raise OutOfDomainError("matrix too far from the identity for log")
    ch = 0.5 * (g.a + g.d)  # cosh(theta) of the would-be logarithm
    u = ch - 1.0
    if abs(u) < 1e-6:
        # sinh(theta)/theta expanded in u = cosh(theta) - 1
        s = 1.0 + u / 3 - u * u / 45
    elif u > 0:
        th = math.acosh(ch)
        s = math.sinh(th) / th
    else:
        om = math.acos(ch)
        s = math.sin(om) / om
    return AlgebraVector(g.b / s, g.c / s, 0.5 * (g.a - g.d) / s)


def adjoint(g: GroupElement, x: AlgebraVector) -> AlgebraVector:
    """Coefficients of g X g^{-1} in the fixed basis."""
    m = g.mat @ x.mat @ g.inv().mat
    return AlgebraVector.from_matrix(m)
