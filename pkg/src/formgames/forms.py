"""Values of binary quadratic forms at integer points.

The family Q(p, q) = p^2 - lambda^2 q^2 is studied through the product form
Q0(x, y) = x y: ``lattice_of_lambda`` returns a unimodular lattice on whose
points Q0 reproduces Q/(2 lambda).  Continued fractions supply the test
oracle for "badly approximable" and "quadratic irrational".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .lattice import Lattice

__all__ = [
    "FormLambda",
    "CFExpansion",
    "CFDiagnostics",
    "q0",
    "q_lambda",
    "lattice_of_lambda",
    "value_spectrum",
    "gap_at",
    "gap_witness",
    "accumulation_points",
    "cf_expand",
    "cf_diagnostics",
]

_SPECTRUM_BUDGET = 4e7  # max number of (p, q) pairs a single call may touch


@dataclass(frozen=True)
class FormLambda:
    """The form p^2 - lambda^2 q^2, lambda > 0."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidParameterError("lambda must be positive and finite")

    def __call__(self, p: int, q: int) -> float:
        return q_lambda(p, q, self.lam)


def q0(x: float, y: float) -> float:
    """The product form x*y (invariant under the diagonal flow)."""
    return x * y


def q_lambda(p: int, q: int, lam: float) -> float:
    return p * p - (lam * lam) * (q * q)


def lattice_of_lambda(lam: float) -> Lattice:
    """Unimodular lattice carrying the form: with basis
    (1/sqrt(2 lam)) [1 -lam; 1 lam], the product of the coordinates of the
    lattice point with integer coordinates (p, q) equals q_lambda(p,q,lam)/(2 lam).
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise InvalidParameterError("lambda must be positive and finite")
    s = 1.0 / math.sqrt(2.0 * lam)
    return Lattice(np.array([[s, -s * lam], [s, s * lam]]))


def _box_chunks(x: Lattice, N: int, chunk: int = 512) -> Iterator[tuple]:
    """Yield (P, Q, xs, ys) arrays for integer coordinates |p|,|q| <= N."""
    b = x.basis
    qs = np.arange(-N, N + 1)
    for lo in range(-N, N + 1, chunk):
        ps = np.arange(lo, min(lo + chunk, N + 1))
        P, Q = np.meshgrid(ps, qs, indexing="ij")
        xs = b[0, 0] * P + b[0, 1] * Q
        ys = b[1, 0] * P + b[1, 1] * Q
        yield P, Q, xs, ys


def _check_spectrum_budget(N: int):
    if N > 1e5:
        raise ResourceLimitError(f"N={N} exceeds the 1e5 guard")
    if (2 * N + 1) ** 2 > _SPECTRUM_BUDGET:
        raise ResourceLimitError(f"N={N} exceeds the desk-scale budget")


def value_spectrum(x: Lattice, N: int) -> list[tuple[float, tuple[int, int]]]:
    """All values of q0 at nonzero lattice points whose integer coordinates
    have max-norm <= N, sorted by value."""
    _check_spectrum_budget(N)
    vals, coords = [], []
    for P, Q, xs, ys in _box_chunks(x, N):
        v = xs * ys
        mask = (P != 0) | (Q != 0)
        vals.append(v[mask])
        coords.append(np.stack([P[mask], Q[mask]], axis=1))
    values = np.concatenate(vals)
    cs = np.concatenate(coords)
    order = np.lexsort((cs[:, 1], cs[:, 0], values))
    return [
        (float(values[i]), (int(cs[i, 0]), int(cs[i, 1]))) for i in order
    ]


def gap_witness(x: Lattice, a: float, N: int) -> tuple[float, tuple[int, int]]:
    """Infimum of |q0 - a| over the height-N spectrum, with a witness point."""
    _check_spectrum_budget(N)
    best = math.inf
    best_pq = (0, 0)
    for P, Q, xs, ys in _box_chunks(x, N):
        d = np.abs(xs * ys - a)
        d[(P == 0) & (Q == 0)] = np.inf
        i = np.unravel_index(np.argmin(d), d.shape)
        if d[i] < best:
            best = float(d[i])
            best_pq = (int(P[i]), int(Q[i]))
    return best, best_pq


def gap_at(x: Lattice, a: float, N: int) -> float:
    """Finite-height gap: inf over the N-spectrum of |value - a| (zero vector
    excluded).  An upper bound for the true gap."""
    return gap_witness(x, a, N)[0]


def accumulation_points(
    lam,
    N: int,
    cluster_tol: float,
    value_window: float = 8.0,
    p_offsets: int = 4,
) -> np.ndarray:
    """Cluster centers of form values attained at points with |q| >= sqrt(N).

    The |q| >= sqrt(N) cutoff separates candidate accumulation values from
    small-height values; only p within ``p_offsets`` of the minimizing
    round(lam*q) can produce |Q| <= value_window, so the scan is linear in N.
    Arithmetic runs in extended precision so that exactly recurring integer
    values (Pell-type solutions) are not washed out by rounding at q ~ 1e5.
    """
    if N < 100:
        raise InvalidParameterError("need N >= 100")
    lam_ld = np.longdouble(lam)
    q = np.arange(int(math.ceil(math.sqrt(N))), N + 1, dtype=np.int64)
    p0 = np.rint(lam_ld * q).astype(np.int64)
    collected = []
    for off in range(-p_offsets, p_offsets + 1):
        p = p0 + off
        lo = p.astype(np.longdouble) - lam_ld * q
        hi = p.astype(np.longdouble) + lam_ld * q
        v = lo * hi
        keep = np.abs(v) <= value_window
        collected.append(v[keep])
    values = np.sort(np.concatenate(collected).astype(float))
    if values.size == 0:
        return np.array([])
    # split at gaps larger than cluster_tol; report the median of each cluster
    splits = np.nonzero(np.diff(values) > cluster_tol)[0] + 1
    return np.array([float(np.median(c)) for c in np.split(values, splits)])


@dataclass(frozen=True)
class CFExpansion:
    """Continued fraction x = a0 + 1/(a1 + 1/(a2 + ...)).

    ``depth`` counts the partial quotients actually produced; ``exhausted``
    is set when the expansion terminated early, either because the remainder
    vanished (rational input) or because the propagated uncertainty grew too
    large for another reliable quotient.
    """

    a0: int
    partial_quotients: tuple[int, ...]
    depth: int
    exhausted: bool
    source: float

    def convergents(self) -> list[tuple[int, int]]:
        """(p_k, q_k) for k = 0..depth, starting at a0/1."""
        out = [(self.a0, 1)]
        p_prev, q_prev = 1, 0
        p, q = self.a0, 1
        for a in self.partial_quotients:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            out.append((p, q))
        return out


class CFDiagnostics(NamedTuple):
    max_quotient: int
    period_guess: Optional[int]


def cf_expand(x: float, depth: int, uncertainty: float | None = None) -> CFExpansion:
    """Standard continued-fraction algorithm with uncertainty tracking.

    The input is only known to ``uncertainty`` (default: one ulp); each step
    divides by the fractional part squared, and expansion stops honestly when
    the next quotient would be unreliable.
    """
    if not (1 <= depth <= 60):
        raise InvalidParameterError("depth must be in [1, 60] (double precision)")
    u = max(uncertainty if uncertainty is not None else 0.0, math.ulp(x), 1e-300)
    a0 = math.floor(x)
    quotients: list[int] = []
    exhausted = False
    rem = x - a0
    val = x
    for _ in range(depth):
        # remainder indistinguishable from an integer boundary: stop cleanly
        if rem <= u or rem >= 1.0 - u:
            if rem >= 1.0 - u and quotients:
                quotients[-1] += 1
            elif rem >= 1.0 - u:
                a0 += 1
            exhausted = True
            break
        val = 1.0 / rem
        u = u / (rem * rem)
        if u > 0.49:
            exhausted = True
            break
        a = math.floor(val)
        quotients.append(int(a))
        rem = val - a
    return CFExpansion(
        a0=int(a0),
        partial_quotients=tuple(quotients),
        depth=len(quotients),
        exhausted=exhausted,
        source=x,
    )


def cf_diagnostics(e: CFExpansion) -> CFDiagnostics:
    """Max partial quotient, and the smallest tail period repeating for at
    least two full cycles (None if no such period <= depth/3 exists)."""
    pq = e.partial_quotients
    max_q = max(pq) if pq else 0
    L = len(pq)
    period = None
    for p in range(1, L // 3 + 1):
        # smallest start s with pq[i] == pq[i+p] for all s <= i < L-p
        s = L - p
        while s > 0 and pq[s - 1] == pq[s - 1 + p]:
            s -= 1
        if L - s >= 2 * p:
            period = p
            break
    return CFDiagnostics(max_quotient=max_q, period_guess=period)
