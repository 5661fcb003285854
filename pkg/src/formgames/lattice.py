"""Unimodular planar lattices: reduction, shortest vectors, local metric.

A lattice is stored as a 2x2 basis whose *columns* generate it; the
constructor normalizes the determinant to +1 (flipping the sign of the
second column if needed, which does not change the lattice).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .algebra import AlgebraVector, GroupElement, log_alg, one_param
from .errors import InvalidLatticeError, ResourceLimitError

__all__ = [
    "Lattice",
    "LatticeVector",
    "reduce",
    "systole",
    "enumerate_vectors",
    "orbit_min_systole",
    "contains_primitive",
    "dist_X",
    "FAR",
]

FAR = math.inf  # sentinel returned by dist_X outside the local regime

_UNIMODULAR_TOL = 1e-9
_DEGENERATE_TOL = 1e-12


class LatticeVector(NamedTuple):
    coords: tuple[int, int]  # integer coordinates in the lattice's own basis
    xy: tuple[float, float]
    norm: float


class Lattice:
    """Unimodular planar lattice spanned by the columns of ``basis``."""

    __slots__ = ("basis", "reduced", "_reduced_cache")

    def __init__(self, basis, reduced: bool = False):
        b = np.array(basis, dtype=float)
        if b.shape != (2, 2):
            raise InvalidLatticeError(f"basis must be 2x2, got shape {b.shape}")
        det = b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
        if abs(det) < _DEGENERATE_TOL:
            raise InvalidLatticeError(f"degenerate basis, |det|={abs(det)!r}")
        if abs(abs(det) - 1.0) > _UNIMODULAR_TOL:
            raise InvalidLatticeError(f"basis is not unimodular, det={det!r}")
        if det < 0:
            b[:, 1] = -b[:, 1]
        b.flags.writeable = False
        self.basis = b
        self.reduced = reduced
        self._reduced_cache = self if reduced else None

    @classmethod
    def standard(cls) -> "Lattice":
        return cls(np.eye(2), reduced=True)

    def transformed(self, g: GroupElement) -> "Lattice":
        """The lattice g * self (left action on the plane)."""
        return Lattice(g.mat @ self.basis)

    def flowed(self, t: float) -> "Lattice":
        """Image under the diagonal flow at time t."""
        return self.transformed(one_param("diagonal", t))

    def __repr__(self):
        return f"Lattice({self.basis.tolist()!r})"


def _gauss_reduce(basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lagrange-Gauss reduction; returns (reduced basis, integer transform U)
    with reduced = basis @ U and |det U| = 1."""
    b = basis.copy()
    u = np.eye(2, dtype=np.int64)
    for _ in range(256):
        n1 = b[0, 0] ** 2 + b[1, 0] ** 2
        n2 = b[0, 1] ** 2 + b[1, 1] ** 2
        if n1 > n2:
            b = b[:, ::-1].copy()
            u = u[:, ::-1].copy()
            n1, n2 = n2, n1
        mu = round((b[0, 0] * b[0, 1] + b[1, 0] * b[1, 1]) / n1)
        if mu == 0:
            break
        b[:, 1] -= mu * b[:, 0]
        u[:, 1] -= mu * u[:, 0]
    else:  # pragma: no cover - reduction of a sane basis terminates fast
        raise InvalidLatticeError("reduction failed to converge")
    # canonical signs: first column lexicographically positive, det(b) = +1
    if b[0, 0] < 0 or (b[0, 0] == 0 and b[1, 0] < 0):
        b[:, 0] = -b[:, 0]
        u[:, 0] = -u[:, 0]
    if b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0] < 0:
        b[:, 1] = -b[:, 1]
        u[:, 1] = -u[:, 1]
    return b, u


def _reduce_with_transform(x: Lattice) -> tuple[Lattice, np.ndarray]:
    b, u = _gauss_reduce(x.basis)
    red = Lattice(b, reduced=True)
    return red, u


def reduce(x: Lattice) -> Lattice:
    """Lagrange-Gauss reduced copy: ||b1|| <= ||b2|| and |<b1,b2>| <= ||b1||^2/2."""
    if x._reduced_cache is None:
        x._reduced_cache = _reduce_with_transform(x)[0]
    return x._reduced_cache


def systole(x: Lattice) -> float:
    """Length of the shortest nonzero lattice vector (first reduced vector)."""
    b = reduce(x).basis
    return math.hypot(b[0, 0], b[1, 0])


def enumerate_vectors(x: Lattice, R: float) -> list[LatticeVector]:
    """All nonzero lattice vectors of norm <= R with their integer coordinates
    in the basis of ``x``.

    Completeness: writing v = m b1' + n b2' in the reduced basis, the dual
    bound |m| <= R ||b2'|| and |n| <= R ||b1'|| (Cauchy-Schwarz against the
    dual basis of a determinant-1 matrix) caps the search box.
    """
    if R > 1e4:
        raise ResourceLimitError(f"enumeration radius {R} exceeds the 1e4 guard")
    if R <= 0:
        return []
    red, u = _reduce_with_transform(x)
    b = red.basis
    m_max = int(math.floor(R * math.hypot(b[0, 1], b[1, 1]) + 1e-9)) + 1
    n_max = int(math.floor(R * math.hypot(b[0, 0], b[1, 0]) + 1e-9)) + 1
    ms, ns = np.meshgrid(
        np.arange(-m_max, m_max + 1), np.arange(-n_max, n_max + 1), indexing="ij"
    )
    coeffs = np.stack([ms.ravel(), ns.ravel()])
    pts = b @ coeffs
    norms = np.hypot(pts[0], pts[1])
    keep = (norms <= R + 1e-12) & (norms > 0)
    # back to coordinates in the caller's basis: v = basis @ (u @ coeff)
    coords = u @ coeffs[:, keep]
    out = [
        LatticeVector((int(c0), int(c1)), (float(px), float(py)), float(nn))
        for c0, c1, px, py, nn in zip(
            coords[0], coords[1], pts[0, keep], pts[1, keep], norms[keep]
        )
    ]
    out.sort(key=lambda lv: (lv.norm, lv.coords))
    return out


def orbit_min_systole(x: Lattice, t_max: float, step: float) -> tuple[float, float]:
    """Minimum of systole(g_t x) over the grid t in {0, step, ..., t_max}.

    Returns (min value, argmin t).
    """
    if step <= 0 or step > t_max:
        raise InvalidLatticeError("need 0 < step <= t_max")
    best, best_t = math.inf, 0.0
    n = int(round(t_max / step))
    basis = x.basis
    for k in range(n + 1):
        t = k * step
        et = math.exp(t)
        flowed = np.array([basis[0] * et, basis[1] / et])
        s = systole(Lattice(flowed))
        if s < best:
            best, best_t = s, t
    return best, best_t


def contains_primitive(x: Lattice, v, tol: float) -> bool:
    """True iff some lattice vector within tol of v has coprime integer
    coordinates in the basis of x."""
    v = np.asarray(v, dtype=float)
    binv = np.linalg.inv(x.basis)
    c = binv @ v
    c0, c1 = round(c[0]), round(c[1])
    for d0 in (0, -1, 1):
        for d1 in (0, -1, 1):
            m, n = c0 + d0, c1 + d1
            w = x.basis @ np.array([m, n], dtype=float)
            if math.hypot(w[0] - v[0], w[1] - v[1]) <= tol:
                if math.gcd(int(m), int(n)) == 1:
                    return True
    return False


def _unimodular_candidates() -> np.ndarray:
    """Integer matrices with entries in [-3,3] and determinant 1 (cached)."""
    global _GAMMA
    if _GAMMA is None:
        rng = np.arange(-3, 4)
        a, b, c, d = np.meshgrid(rng, rng, rng, rng, indexing="ij")
        mask = (a * d - b * c) == 1
        _GAMMA = (
            np.stack([a[mask], b[mask], c[mask], d[mask]], axis=1)
            .reshape(-1, 2, 2)
            .astype(float)
        )
    return _GAMMA


_GAMMA = None


def dist_X(x: Lattice, y: Lattice) -> float:
    """Local right-invariant distance between lattices.

    Minimum of ||log(B_x gamma B_y^{-1})|| over integer unimodular gamma with
    entries in [-3, 3], computed on the reduced bases.  Values above 0.5 are
    outside the local regime and reported as the FAR sentinel (inf).
    """
    bx = reduce(x).basis
    by = reduce(y).basis
    gam = _unimodular_candidates()
    m = np.einsum("ij,njk,kl->nil", bx, gam, np.linalg.inv(by))
    dev = m - np.eye(2)
    fro = np.sqrt(np.einsum("nij,nij->n", dev, dev))
    best = FAR
    for idx in np.nonzero(fro < 0.75)[0]:
        g = m[idx]
        if np.linalg.norm(g - np.eye(2), 2) > 0.5:
            continue
        try:
            val = log_alg(GroupElement.from_matrix(g)).norm()
        except Exception:
            continue
        if val < best:
            best = val
    return best if best <= 0.5 else FAR


def log_between(x: Lattice, y: Lattice) -> AlgebraVector:
    """Algebra vector X with exp(X) * y = x (minimal norm over the gamma
    search); raises OutOfDomainError semantics via dist if too far."""
    bx = reduce(x).basis
    by = reduce(y).basis
    gam = _unimodular_candidates()
    m = np.einsum("ij,njk,kl->nil", bx, gam, np.linalg.inv(by))
    dev = m - np.eye(2)
    fro = np.sqrt(np.einsum("nij,nij->n", dev, dev))
    best, best_vec = FAR, None
    for idx in np.nonzero(fro < 0.75)[0]:
        g = m[idx]
        if np.linalg.norm(g - np.eye(2), 2) > 0.5:
            continue
        try:
            vec = log_alg(GroupElement.from_matrix(g))
        except Exception:
            continue
        val = vec.norm()
        if val < best:
            best, best_vec = val, vec
    if best_vec is None:
        from .errors import OutOfDomainError

        raise OutOfDomainError("lattices are not in a common chart")
    return best_vec
