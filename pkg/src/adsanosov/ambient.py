"""The quadratic space R^{2,n}, conformal models of AdS_{n+1} and Ein_n,
and exact causal predicates.

Conventions
-----------
Vectors have length n+2 with coordinates (u1, u2, x1, ..., xn) and

    q(u) = -u1^2 - u2^2 + x1^2 + ... + xn^2.

AdS_{n+1} is the quadric {q = -1}; the Einstein universe Ein_n is the set of
rays of the cone {q = 0}, realised here as *signed* unit vectors for the
Euclidean norm (the double cover; signs matter and are fixed by the achronal
lift convention <x, y> <= 0).

The conformal chart is (theta, Y): theta = atan2(u2, u1) is the time angle
and Y is a unit vector of S^n with Y[0] >= 0; interior AdS points have
Y[0] > 0 and boundary points Y[0] = 0.  In this chart two points are
causally related iff |dtheta| >= d_{S^n}(Y_p, Y_q), with equality the
lightlike case.

Paired coordinates (a1, a2, b1, b2, x1, ..., x_{n-2}) diagonalise the boost
flows: the paired form is qp(v) = -4 a1 b1 - 4 a2 b2 + sum x_i^2, and
``from_paired``/``to_paired`` are exact mutually inverse isometries
(qp(v) = q(from_paired(v)) to machine precision).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

LIGHT_TOL = 1e-9        # causal equality tolerance
CONSTRAINT_TOL = 1e-10  # |q(lift)| residual tolerance
UNIT_TOL = 1e-12        # Euclidean normalization tolerance


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Space:
    """Ambient quadratic space R^{2,n}."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise GeometryError("n must be >= 2")

    @property
    def dim(self) -> int:
        return self.n + 2

    @property
    def jdiag(self) -> np.ndarray:
        d = np.ones(self.dim)
        d[0] = d[1] = -1.0
        return d

    @property
    def J(self) -> np.ndarray:
        return np.diag(self.jdiag)


def q_inner(space: Space, u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != space.dim or v.shape[-1] != space.dim:
        raise GeometryError(f"expected vectors of length {space.dim}")
    return float(-u[0] * v[0] - u[1] * v[1] + u[2:] @ v[2:])


def q_form(space: Space, u) -> float:
    return q_inner(space, u, u)


def norm0(u) -> float:
    return float(np.linalg.norm(u))


# ------------------------------------------------------------ paired coords

def paired_form(space: Space, v) -> float:
    """qp(v) = -4 a1 b1 - 4 a2 b2 + sum x_i^2 on (a1, a2, b1, b2, x...)."""
    v = np.asarray(v, dtype=float)
    return float(-4 * v[0] * v[2] - 4 * v[1] * v[3] + v[4:] @ v[4:])


def from_paired(space: Space, v) -> np.ndarray:
    """Exact isometry (paired) -> (standard): q(from_paired(v)) = qp(v)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (space.dim,):
        raise GeometryError(f"expected vector of length {space.dim}")
    a1, a2, b1, b2 = v[0], v[1], v[2], v[3]
    out = np.empty(space.dim)
    out[0] = a1 + b1
    out[1] = a2 + b2
    out[2:space.n] = v[4:]
    out[space.n] = a1 - b1
    out[space.n + 1] = a2 - b2
    return out


def to_paired(space: Space, u) -> np.ndarray:
    """Inverse of from_paired."""
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dim,):
        raise GeometryError(f"expected vector of length {space.dim}")
    n = space.n
    out = np.empty(space.dim)
    out[0] = 0.5 * (u[0] + u[n])
    out[1] = 0.5 * (u[1] + u[n + 1])
    out[2] = 0.5 * (u[0] - u[n])
    out[3] = 0.5 * (u[1] - u[n + 1])
    out[4:] = u[2:n]
    return out


# ------------------------------------------------------------ model points

@dataclass(frozen=True)
class EinPoint:
    """Signed null ray: lift is q-null with Euclidean norm 1."""

    space: Space
    lift: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.lift, dtype=float)
        nrm = np.linalg.norm(u)
        if nrm < 1e-14:
            raise GeometryError("zero lift")
        u = u / nrm
        object.__setattr__(self, "lift", u)
        if abs(q_form(self.space, u)) > CONSTRAINT_TOL:
            raise GeometryError(f"lift is not null: q = {q_form(self.space, u):.2e}")

    def __neg__(self) -> "EinPoint":
        return EinPoint(self.space, -self.lift)


@dataclass(frozen=True)
class AdSPoint:
    """Point of AdS_{n+1}: lift with q(lift) = -1."""

    space: Space
    lift: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.lift, dtype=float)
        qv = q_form(self.space, u)
        if qv >= 0:
            raise GeometryError("lift is not timelike")
        u = u / np.sqrt(-qv)
        object.__setattr__(self, "lift", u)
        if abs(q_form(self.space, u) + 1.0) > CONSTRAINT_TOL:
            raise GeometryError("could not normalize to q = -1")


@dataclass(frozen=True)
class ConformalCoords:
    """Einstein-static-universe chart: time angle theta, hemisphere point Y."""

    theta: float
    Y: np.ndarray  # unit vector in R^{n+1}, Y[0] >= 0

    @property
    def boundary(self) -> bool:
        return abs(self.Y[0]) < 1e-13


def to_conformal(point) -> ConformalCoords:
    """Chart coordinates of an AdSPoint or EinPoint."""
    space, u = point.space, point.lift
    theta = float(np.arctan2(u[1], u[0]))
    if isinstance(point, AdSPoint):
        r = np.hypot(u[0], u[1])
        y = np.concatenate([[1.0], u[2:]]) / r
    else:
        sp = u[2:]
        nrm = np.linalg.norm(sp)
        if nrm < 1e-14:
            raise GeometryError("boundary point with zero spatial part")
        y = np.concatenate([[0.0], sp / nrm])
    y = y / np.linalg.norm(y)
    return ConformalCoords(theta=theta, Y=y)


def from_conformal(space: Space, cc: ConformalCoords):
    """Inverse chart map; returns AdSPoint for interior Y, EinPoint on Y[0]=0."""
    y = np.asarray(cc.Y, dtype=float)
    if abs(np.linalg.norm(y) - 1.0) > 1e-9:
        raise GeometryError("Y must be a unit vector")
    c, s = np.cos(cc.theta), np.sin(cc.theta)
    if y[0] > 1e-13:
        r = 1.0 / y[0]
        lift = np.concatenate([[r * c, r * s], y[1:] / y[0]])
        return AdSPoint(space, lift)
    lift = np.concatenate([[c, s], y[1:]]) / np.sqrt(2.0)
    return EinPoint(space, lift)


def sphere_dist(y1, y2) -> float:
    return float(np.arccos(np.clip(np.dot(y1, y2), -1.0, 1.0)))


def causal_relation(p: ConformalCoords, q: ConformalCoords, tol: float = LIGHT_TOL) -> str:
    """'timelike', 'lightlike' or 'unrelated' on a common cover branch."""
    dt = abs(p.theta - q.theta)
    d = sphere_dist(p.Y, q.Y)
    if abs(dt - d) <= tol:
        return "lightlike"
    return "timelike" if dt > d else "unrelated"


def theta_unwrap(thetas) -> np.ndarray:
    """Continuous branch of the time angle along a supplied path."""
    return np.unwrap(np.asarray(thetas, dtype=float))


# ------------------------------------------------------- achronal signs

def sign_fix_lifts(space: Space, lifts, tol: float = 1e-8) -> list[EinPoint]:
    """Choose lift signs so all pairwise q-inner products are <= tol.

    Greedy from the first point with most-decisive-first propagation;
    deterministic.  Raises GeometryError if no consistent choice exists
    ("not achronal as lifted").
    """
    arr = np.array([np.asarray(l, dtype=float) for l in lifts])
    if arr.ndim != 2 or len(arr) == 0:
        raise GeometryError("need a nonempty list of lifts")
    arr = arr / np.linalg.norm(arr, axis=1, keepdims=True)
    if len(arr) == 1:
        return [EinPoint(space, arr[0])]
    signs = kernels.sign_fix(arr, space.jdiag, tol)
    fixed = arr * signs[:, None]
    worst = kernels.max_offdiag_inner(fixed, space.jdiag)
    if worst > tol:
        raise GeometryError(f"not achronal as lifted: max pair inner {worst:.3e}")
    return [EinPoint(space, v) for v in fixed]
