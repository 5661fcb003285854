"""Charts, closed horocycles, thickenings, and the transversality toolkit.

Charts are group-exponential: the chart at a base lattice y sends an algebra
vector X to exp(X) * y.  The avoidance targets are orbit curves of
one-parameter unipotent subgroups (closed horocycles): the orbit map is
exactly linear in the parameter, z(u) = (I + u N) * seed, which the distance
computations below exploit heavily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .algebra import (
    E,
    FHAT,
    HHAT,
    AlgebraVector,
    GroupElement,
    adjoint,
    exp_alg,
    one_param,
    stabilizer_generator,
    v_of_a,
)
from .errors import (
    InvalidParameterError,
    OutOfDomainError,
    ParameterTooLargeError,
)
from .lattice import Lattice, _unimodular_candidates, dist_X, reduce

__all__ = [
    "Chart",
    "chart_apply",
    "chart_invert",
    "CurveZ",
    "PointZ",
    "ThickenedZ",
    "make_Zv",
    "make_point_z",
    "make_orbit_curve",
    "cond_F",
    "cond_HF",
    "theta",
    "transversality_constant",
    "thicken",
    "embedding_sigma",
    "sigma1_for",
    "sigma2_estimate",
    "lie_span_rank",
]

_H_DIRS = {"upper": E, "lower": FHAT}
_RANK_TOL = 1e-6


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class Chart:
    """Exponential chart X -> exp(X) * base on the algebra ball of ``radius``."""

    base: Lattice
    radius: float

    def __post_init__(self):
        if not (0 < self.radius <= 0.5):
            raise InvalidParameterError("chart radius must be in (0, 0.5]")


def chart_apply(c: Chart, x: AlgebraVector) -> Lattice:
    if x.norm() > c.radius + 1e-12:
        raise OutOfDomainError(f"|X|={x.norm():.3g} exceeds chart radius {c.radius}")
    return Lattice(exp_alg(x).mat @ c.base.basis)


def chart_invert(c: Chart, x: Lattice) -> AlgebraVector:
    from .lattice import log_between

    vec = log_between(x, c.base)
    if vec.norm() > c.radius + 1e-9:
        raise OutOfDomainError("point is outside the chart image")
    return vec


# ---------------------------------------------------------------------------
# avoidance targets


def _log_norm_or_none(m: np.ndarray):
    if np.linalg.norm(m - np.eye(2), 2) > 0.5:
        return None
    from .algebra import log_alg

    try:
        return log_alg(GroupElement.from_matrix(m))
    except Exception:
        return None


class PointZ:
    """Degenerate zero-dimensional target: a single lattice."""

    dim = 0

    def __init__(self, x: Lattice):
        self.point = x
        self.samples = [x]
        self.tangent_frames = [[]]

    def distance_to(self, w: Lattice) -> float:
        return dist_X(w, self.point)

    def nearest(self, w: Lattice):
        """(distance, point, tangent directions at it)."""
        return self.distance_to(w), self.point, []


def make_point_z(x: Lattice) -> PointZ:
    return PointZ(x)


@dataclass
class CurveZ:
    """Sampled orbit curve z(u) = (I + u N) * seed of a unipotent subgroup.

    ``us``/``points``/``tangents`` are the sample parameterization; ``period``
    is the detected first-return parameter (None for open arcs).  The tangent
    at z(u), expressed in the exponential chart based at z(u), is the constant
    algebra vector N.
    """

    seed_basis: np.ndarray
    generator: np.ndarray
    us: np.ndarray
    period: float | None
    label: str = ""
    points: list = field(default_factory=list)
    tangents: list = field(default_factory=list)
    _reduced: np.ndarray | None = None
    _sigma1: float | None = None

    def __post_init__(self):
        if not self.points:
            eye = np.eye(2)
            self.points = [
                Lattice((eye + u * self.generator) @ self.seed_basis) for u in self.us
            ]
        n_alg = AlgebraVector.from_matrix(self.generator)
        if not self.tangents:
            self.tangents = [n_alg] * len(self.us)
        self.tangent_frames = [[t] for t in self.tangents]
        self.samples = self.points
        self._reduced = np.stack([reduce(p).basis for p in self.points])
        self._reduced_inv = np.linalg.inv(self._reduced)
        self._spacing = float(self.us[1] - self.us[0]) if len(self.us) > 1 else 1.0

    @property
    def dim(self):
        return 1

    def point_at(self, u: float) -> Lattice:
        return Lattice((np.eye(2) + u * self.generator) @ self.seed_basis)

    def tangent_at(self, u: float) -> AlgebraVector:
        return AlgebraVector.from_matrix(self.generator)

    # -- distance machinery -------------------------------------------------

    def _refine(self, w_red: np.ndarray, idx: int):
        """Best (value, u) near sample idx: bases of z(u_idx + d) are
        (I + d N) R_idx, so the gamma-quotient is linear in d."""
        r0 = self._reduced[idx]
        r0_inv = self._reduced_inv[idx]
        gam = _unimodular_candidates()
        c = np.einsum("ij,njk,kl->nil", w_red, gam, r0_inv)
        dev = c - np.eye(2)
        fro = np.sqrt(np.einsum("nij,nij->n", dev, dev))
        keep = np.nonzero(fro < 1.2)[0]
        if keep.size == 0:
            return math.inf, float(self.us[idx])
        n = self.generator
        best_val, best_u = math.inf, float(self.us[idx])
        lim = 1.5 * self._spacing
        for i in keep:
            ci = c[i]
            d_mat = -ci @ n  # dM/dd
            denom = float(np.sum(d_mat * d_mat))
            if denom < 1e-30:
                d0 = 0.0
            else:
                d0 = -float(np.sum(d_mat * (ci - np.eye(2)))) / denom
            d0 = max(-lim, min(lim, d0))

            def val(d, ci=ci, n=n):
                vec = _log_norm_or_none(ci @ (np.eye(2) - d * n))
                return math.inf if vec is None else vec.norm()

            v0 = val(d0)
            if v0 < best_val:
                # polish on the true log-norm
                res = minimize_scalar(
                    val, bracket=None, bounds=(d0 - lim, d0 + lim), method="bounded",
                    options={"xatol": 1e-12},
                )
                if res.fun < v0:
                    d0, v0 = float(res.x), float(res.fun)
                best_val, best_u = v0, float(self.us[idx]) + d0
        return best_val, best_u

    def distance_to(self, w: Lattice, with_param: bool = False):
        w_red = reduce(w).basis
        diffs = self._reduced - w_red
        fro = np.sqrt(np.einsum("nij,nij->n", diffs, diffs))
        order = np.argsort(fro)
        best_val, best_u = math.inf, 0.0
        for idx in order[:4]:
            v, u = self._refine(w_red, int(idx))
            if v < best_val:
                best_val, best_u = v, u
        if with_param:
            return best_val, best_u
        return best_val

    def nearest(self, w: Lattice):
        """(distance, nearest curve point, tangent directions there)."""
        d, u = self.distance_to(w, with_param=True)
        return d, self.point_at(u), [self.tangent_at(u)]


def _detect_period(seed_basis: np.ndarray, n: np.ndarray) -> float:
    """First return of u -> (I + u N) * seed, refined to ~1e-9."""
    seed = Lattice(seed_basis)
    eye = np.eye(2)

    def gap(u):
        return dist_X(seed, Lattice((eye + u * n) @ seed_basis))

    u = 0.05
    prev = u
    for _ in range(600):
        g = gap(u)
        if g < 0.05:
            break
        prev = u
        u *= 1.07
    else:
        raise InvalidParameterError("no period found below the search bound")
    res = minimize_scalar(gap, bounds=(0.8 * prev, 1.3 * u), method="bounded",
                          options={"xatol": 1e-12})
    if res.fun > 1e-6:
        raise InvalidParameterError(f"period refinement failed, residual {res.fun}")
    return float(res.x)


def make_Zv(a: float, n_max: int, samples_per_curve: int = 512) -> list[CurveZ]:
    """For each n <= n_max, the closed stabilizer orbit through a seed lattice
    containing v_of_a(a)/n as a primitive vector."""
    if a == 0:
        raise InvalidParameterError("level a must be nonzero")
    c = math.sqrt(abs(a))
    n_mat = stabilizer_generator(a)
    out = []
    for n in range(1, n_max + 1):
        if a > 0:
            basis = np.array([[c / n, 0.0], [c / n, n / c]])
        else:
            basis = np.array([[-c / n, -n / c], [c / n, 0.0]])
        period = _detect_period(basis, n_mat)
        us = np.linspace(0.0, period, samples_per_curve, endpoint=False)
        out.append(
            CurveZ(
                seed_basis=basis,
                generator=n_mat,
                us=us,
                period=period,
                label=f"Z_v(a={a}, n={n})",
            )
        )
    return out


def make_orbit_curve(
    generator: np.ndarray,
    seed: Lattice,
    u_min: float,
    u_max: float,
    samples: int = 256,
    label: str = "arc",
) -> CurveZ:
    """Arc of the orbit u -> (I + u*generator) * seed (generator nilpotent)."""
    g = np.asarray(generator, dtype=float)
    if np.max(np.abs(g @ g)) > 1e-12:
        raise InvalidParameterError("generator must be nilpotent (N^2 = 0)")
    us = np.linspace(u_min, u_max, samples)
    return CurveZ(seed_basis=seed.basis, generator=g, us=us, period=None, label=label)


def arc_of(curve: CurveZ, u_min: float, u_max: float, samples: int = 256) -> CurveZ:
    """Compact sub-arc of a closed curve (a manifold with boundary)."""
    us = np.linspace(u_min, u_max, samples)
    return CurveZ(
        seed_basis=curve.seed_basis,
        generator=curve.generator,
        us=us,
        period=None,
        label=curve.label + f"[{u_min:.3g},{u_max:.3g}]",
    )


# ---------------------------------------------------------------------------
# thickenings


@dataclass
class ThickenedZ:
    """Two-parameter surface {g_t z(u) : |t| <= tau} over a curve."""

    source: CurveZ
    tau: float

    def __post_init__(self):
        n_t = 9
        self.ts = np.linspace(-self.tau, self.tau, n_t) if self.tau > 0 else np.zeros(1)
        self.samples = []
        self.tangent_frames = []
        n_alg = AlgebraVector.from_matrix(self.source.generator)
        for t in self.ts:
            g = one_param("diagonal", float(t))
            pushed = adjoint(g, n_alg)
            for p in self.source.points:
                self.samples.append(p.transformed(g))
                self.tangent_frames.append([pushed, HHAT])

    @property
    def dim(self):
        return 2

    def point_at(self, u: float, t: float) -> Lattice:
        return self.source.point_at(u).transformed(one_param("diagonal", t))

    def distance_to(self, w: Lattice, with_param: bool = False):
        # alternate exact 1-d minimizations in t and u
        best_t, best_u = 0.0, 0.0
        d0, best_u = self.source.distance_to(w, with_param=True)
        best = d0
        for _ in range(3):
            def over_t(t):
                wt = w.transformed(one_param("diagonal", -float(t)))
                return self.source.point_at(best_u) and dist_X(
                    wt, self.source.point_at(best_u)
                )

            res = minimize_scalar(
                over_t, bounds=(-self.tau, self.tau), method="bounded",
                options={"xatol": 1e-12},
            ) if self.tau > 0 else None
            if res is not None:
                best_t = float(res.x)
            wt = w.transformed(one_param("diagonal", -best_t))
            d, best_u = self.source.distance_to(wt, with_param=True)
            if d >= best - 1e-15:
                best = min(best, d)
                break
            best = d
        if with_param:
            return best, (best_u, best_t)
        return best

    def nearest(self, w: Lattice):
        d, (u, t) = self.distance_to(w, with_param=True)
        n_alg = AlgebraVector.from_matrix(self.source.generator)
        pushed = adjoint(one_param("diagonal", t), n_alg)
        return d, self.point_at(u, t), [pushed, HHAT]


def embedding_sigma(z: CurveZ, sigma_max: float = 0.4, probes: int = 24) -> float:
    """Largest grid-verified thickening that stays embedded: g_s z(u) must
    keep a distance from the curve commensurate with |s|."""
    sigma = sigma_max
    idxs = np.linspace(0, len(z.us) - 1, probes).astype(int)
    while sigma > 1e-4:
        ok = True
        for sgn in (1.0, -1.0):
            g = one_param("diagonal", sgn * sigma)
            for i in idxs:
                d = z.distance_to(z.points[int(i)].transformed(g))
                if d < 0.35 * sigma:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return sigma
        sigma /= 2.0
    return sigma


def thicken(z: CurveZ, tau: float) -> ThickenedZ:
    """Thickened surface; rejects tau beyond the embedding check."""
    if tau < 0:
        raise InvalidParameterError("tau must be nonnegative")
    if tau > 0 and tau > embedding_sigma(z) + 1e-12:
        raise ParameterTooLargeError(
            f"tau={tau} fails the embedding check (sigma={embedding_sigma(z):.4g})"
        )
    return ThickenedZ(source=z, tau=tau)


# ---------------------------------------------------------------------------
# transversality


def _frame_matrix(dirs: list[AlgebraVector]) -> np.ndarray:
    cols = []
    for d in dirs:
        v = d.ortho()
        n = np.linalg.norm(v)
        if n > 0:
            cols.append(v / n)
    if not cols:
        return np.zeros((3, 0))
    return np.stack(cols, axis=1)


def _rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > _RANK_TOL))


def cond_F(z, i: int) -> bool:
    """Flow direction not contained in the tangent space at sample i."""
    frame = _frame_matrix(list(z.tangent_frames[i]) + [HHAT])
    return _rank(frame) == _rank(_frame_matrix(z.tangent_frames[i])) + 1


def cond_HF(z, i: int, h: str) -> bool:
    """Horospherical direction not contained in tangent + flow at sample i."""
    eta = _H_DIRS[h]
    base = list(z.tangent_frames[i]) + [HHAT]
    return _rank(_frame_matrix(base + [eta])) == _rank(_frame_matrix(base)) + 1


def theta(z, i: int, h: str) -> float:
    """Distance from the unit horospherical direction to the tangent space of
    z at sample i (both in the fixed inner product)."""
    eta = _H_DIRS[h].ortho()
    eta = eta / np.linalg.norm(eta)
    frame = _frame_matrix(z.tangent_frames[i])
    if frame.shape[1] == 0:
        return 1.0
    q, _ = np.linalg.qr(frame)
    resid = eta - q @ (q.T @ eta)
    return float(np.linalg.norm(resid))


def transversality_constant(z, h: str) -> float:
    """Minimum of theta over all samples; positive iff transversal at tolerance."""
    return min(theta(z, i, h) for i in range(len(z.samples)))


# ---------------------------------------------------------------------------
# chart scale constants


def _bilipschitz_ok(y: Lattice, rad: float, rng, n_pairs: int = 24) -> bool:
    for _ in range(n_pairs):
        p = rng.uniform(-1, 1, 3)
        p = p / max(np.linalg.norm(p), 1e-12) * rad * rng.uniform(0.1, 1.0)
        q = p + rng.uniform(-1, 1, 3) * min(0.1, rad) * 0.5
        if np.linalg.norm(q) > rad:
            continue
        xv = AlgebraVector.from_ortho(p)
        yv = AlgebraVector.from_ortho(q)
        sep = np.linalg.norm(p - q)
        if sep < 1e-9:
            continue
        d = dist_X(
            Lattice(exp_alg(xv).mat @ y.basis), Lattice(exp_alg(yv).mat @ y.basis)
        )
        if not (0.5 * sep <= d <= 2.0 * sep):
            return False
    return True


def sigma1_for(z, start: float = 0.25) -> float:
    """Halving search for the chart bi-Lipschitz scale near z: exp_y is
    2-bi-Lipschitz on the algebra ball of radius 4*sigma1 for probe bases y
    near the target."""
    cached = getattr(z, "_sigma1", None)
    if cached is not None:
        return cached
    rng = np.random.default_rng(20230917)
    idxs = np.linspace(0, len(z.samples) - 1, min(5, len(z.samples))).astype(int)
    probes = [z.samples[int(i)] for i in idxs]
    sigma = start
    while sigma > 1e-4:
        if all(_bilipschitz_ok(y, 4.0 * sigma, rng) for y in probes):
            break
        sigma /= 2.0
    try:
        z._sigma1 = sigma
    except Exception:
        pass
    return sigma


def _chart_image_deviation(z: CurveZ, y_basis: np.ndarray, u0: float, sigma: float) -> float:
    """Max distance of the chart image of the sigma-window of the curve around
    z(u0) from its affine tangent line, in the chart with base basis y_basis.

    Uses the exact quotient exp(X(d)) = (I + d N) R0 gamma ... with gamma = I,
    valid because the window stays inside one chart.
    """
    r0 = reduce(z.point_at(u0)).basis
    y_inv = np.linalg.inv(y_basis)
    eye = np.eye(2)

    def coords(d):
        m = (eye + d * z.generator) @ r0 @ y_inv
        vec = _log_norm_or_none(m)
        return None if vec is None else vec.ortho()

    # window: parameters within ~sigma of u0 (distance along the curve scales
    # like the tangent norm)
    speed = max(AlgebraVector.from_matrix(z.generator).norm(), 1e-9)
    half = 1.2 * sigma / speed
    ds = np.linspace(-half, half, 15)
    pts = [coords(float(d)) for d in ds]
    pts = [p for p in pts if p is not None]
    if len(pts) < 3:
        return math.inf
    center = coords(0.0)
    h = half / 7.0
    p_plus, p_minus = coords(h), coords(-h)
    if center is None or p_plus is None or p_minus is None:
        return math.inf
    direction = (p_plus - p_minus) / (2 * h)
    direction = direction / max(np.linalg.norm(direction), 1e-12)
    worst = 0.0
    for p in pts:
        rel = p - center
        resid = rel - direction * float(direction @ rel)
        worst = max(worst, float(np.linalg.norm(resid)))
    return worst


def sigma2_estimate(z, b: float, probes: int = 6) -> float:
    """Largest grid-tested sigma (halving from sigma1) such that near every
    probe point the chart image of the sigma-ball piece of z lies within
    b*sigma of the affine tangent line at a nearby point of z."""
    if b <= 0:
        raise InvalidParameterError("b must be positive")
    sigma1 = sigma1_for(z)
    if isinstance(z, PointZ):
        return sigma1
    rng = np.random.default_rng(911)
    idxs = np.linspace(0, len(z.us) - 1, probes).astype(int)
    sigma = sigma1
    while sigma > 1e-9:
        ok = True
        for i in idxs:
            u0 = float(z.us[int(i)])
            base_red = reduce(z.points[int(i)]).basis
            offsets = [np.zeros(3)]
            for _ in range(2):
                v = rng.uniform(-1, 1, 3)
                offsets.append(v / np.linalg.norm(v) * 0.7 * sigma)
            for off in offsets:
                y_basis = exp_alg(AlgebraVector.from_ortho(off)).mat @ base_red
                dev = _chart_image_deviation(z, y_basis, u0, sigma)
                if dev > b * sigma:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return sigma
        sigma /= 2.0
    return sigma


# ---------------------------------------------------------------------------
# exact rank of Lie spans


def lie_span_rank(generators: list[AlgebraVector]) -> int:
    """Rank of the span inside the 3-dimensional algebra, computed exactly in
    rational arithmetic (floats are exact rationals)."""
    rows = [
        [Fraction(g.e), Fraction(g.f), Fraction(g.h)] for g in generators
    ]
    rank = 0
    cols = 3
    pivot_col = 0
    for r in range(len(rows)):
        if pivot_col >= cols:
            break
        pivot = None
        for rr in range(r, len(rows)):
            if rows[rr][pivot_col] != 0:
                pivot = rr
                break
        if pivot is None:
            pivot_col += 1
            # retry this row index with the next column
            for rr in range(r, len(rows)):
                for cc in range(pivot_col, cols):
                    if rows[rr][cc] != 0:
                        pivot_col = cc
                        pivot = rr
                        break
                if pivot is not None:
                    break
            if pivot is None:
                break
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rank += 1
        lead = rows[r][pivot_col]
        for rr in range(r + 1, len(rows)):
            factor = rows[rr][pivot_col] / lead
            if factor != 0:
                rows[rr] = [a - factor * b for a, b in zip(rows[rr], rows[r])]
        pivot_col += 1
    return rank
