"""Group presentations, word-ball enumeration, Fuchsian and product
embeddings into SO_0(2,n), limit-set sampling and regular domains.

Words are strings over single-letter generator labels; an upper-case letter
is the inverse of its lower-case generator ("aBc" = a b^{-1} c).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .ambient import (EinPoint, GeometryError, Space, sign_fix_lifts,
                      sphere_dist, to_conformal)
from .cartan import GroupElementQ, MembershipError, membership_check

WORD_RADIUS_CAP = 16
BALL_GUARD = 3_000_000

# R^{2,2} as 2x2 matrices with q = -det; the identification is fixed by
#   M(u1, u2, x1, x2) = [[u1 + x1, u2 + x2], [-u2 + x2, u1 - x1]]
# and (A, B) in SL(2,R)^2 acts by M -> A M B^T.


def mat2_to_vec(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return np.array([
        0.5 * (M[0, 0] + M[1, 1]),
        0.5 * (M[0, 1] - M[1, 0]),
        0.5 * (M[0, 0] - M[1, 1]),
        0.5 * (M[0, 1] + M[1, 0]),
    ])


def vec_to_mat2(v) -> np.ndarray:
    u1, u2, x1, x2 = v
    return np.array([[u1 + x1, u2 + x2], [-u2 + x2, u1 - x1]])


def sl2_to_so12(g) -> np.ndarray:
    """SL(2,R) -> SO_0(1,2) on (u, x1, x2) via symmetric matrices
    u*I + x1*diag(1,-1) + x2*offdiag; q = -u^2 + x1^2 + x2^2 = -det."""
    g = np.asarray(g, dtype=float)
    basis = [np.eye(2), np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])]
    cols = []
    for Mb in basis:
        S = g @ Mb @ g.T
        cols.append([0.5 * (S[0, 0] + S[1, 1]),
                     0.5 * (S[0, 0] - S[1, 1]),
                     S[0, 1]])
    return np.array(cols).T


def so12_to_sl2(T) -> np.ndarray:
    """One of the two SL(2,R) lifts of T in SO_0(1,2)."""
    T = np.asarray(T, dtype=float)
    v = T @ np.array([1.0, 0.0, 0.0])
    S0 = np.array([[v[0] + v[1], v[2]], [v[2], v[0] - v[1]]])
    w, V = np.linalg.eigh(S0)
    g1 = V @ np.diag(np.sqrt(np.maximum(w, 1e-300))) @ V.T
    R2 = np.linalg.inv(sl2_to_so12(g1)) @ T
    th = np.arctan2(R2[2, 1], R2[1, 1])
    g2 = np.array([[np.cos(th / 2), -np.sin(th / 2)],
                   [np.sin(th / 2), np.cos(th / 2)]])
    g = g1 @ g2
    if np.abs(sl2_to_so12(g) - T).max() > 1e-8:
        raise GeometryError("not an SO_0(1,2) matrix")
    return g


@dataclass
class Representation:
    """Finitely generated subgroup of SO_0(2,n) given by generator matrices."""

    space: Space
    generators: dict[str, GroupElementQ]          # lower-case label -> element
    relators: list[str] = field(default_factory=list)
    kind: str = "custom"                          # fuchsian-lattice | deformed | product | custom
    product: tuple[dict[str, np.ndarray], dict[str, np.ndarray]] | None = None
    base_so12: dict[str, np.ndarray] | None = None  # base hyperbolic structure
    torus_data: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        for lbl, g in self.generators.items():
            if not (len(lbl) == 1 and lbl.islower()):
                raise ValueError(f"generator labels must be single lower-case letters, got {lbl!r}")
            membership_check(self.space, g.matrix, word=lbl)
        for rel in self.relators:
            m = self.evaluate(rel)
            res = np.abs(m - np.eye(self.space.dim)).max()
            if res > 1e-6:
                raise MembershipError("relator-failure", f"{rel!r} residual {res:.2e}")

    @property
    def letters(self) -> dict[str, np.ndarray]:
        out = {}
        for lbl, g in self.generators.items():
            out[lbl] = g.matrix
            out[lbl.upper()] = g.inverse().matrix
        return out

    def evaluate(self, word: str) -> np.ndarray:
        M = np.eye(self.space.dim)
        letters = self.letters
        for ch in word:
            M = M @ letters[ch]
        return M

    def element(self, word: str) -> GroupElementQ:
        return GroupElementQ(self.space, self.evaluate(word), word)


def fuchsian_embed(gens_so1n: dict[str, np.ndarray], relators=None,
                   kind: str = "fuchsian-lattice") -> Representation:
    """Block embedding SO(1,n) -> SO(2,n) fixing the extra negative direction.

    Input matrices act on (u, x1..xn) with q = -u^2 + |x|^2; the embedded
    matrices fix the u2 axis (index 1) of R^{2,n}.
    """
    mats = {k: np.asarray(v, dtype=float) for k, v in gens_so1n.items()}
    n = next(iter(mats.values())).shape[0] - 1
    space = Space(n)
    J1 = np.diag([-1.0] + [1.0] * n)
    gens = {}
    for lbl, m in mats.items():
        if np.abs(m.T @ J1 @ m - J1).max() > 1e-8:
            raise MembershipError("not-orthogonal", f"generator {lbl} does not preserve q_(1,n)")
        M = np.eye(n + 2)
        idx = [0] + list(range(2, n + 2))
        M[np.ix_(idx, idx)] = m
        gens[lbl] = membership_check(space, M, word=lbl)
    return Representation(space=space, generators=gens,
                          relators=list(relators or []), kind=kind,
                          base_so12=mats if n == 2 else None)


def product_embed(left: dict[str, np.ndarray], right: dict[str, np.ndarray],
                  relators=None, kind: str = "product") -> Representation:
    """SO(2,2) representation from a pair of SL(2,R) representations acting
    by M -> A M B^T on R^{2,2} = 2x2 matrices (q = -det)."""
    space = Space(2)
    if set(left) != set(right):
        raise ValueError("left/right labels differ")
    gens = {}
    basis = np.eye(4)
    for lbl in sorted(left):
        A = np.asarray(left[lbl], dtype=float)
        B = np.asarray(right[lbl], dtype=float)
        for M2 in (A, B):
            if abs(np.linalg.det(M2) - 1.0) > 1e-9:
                raise MembershipError("wrong-determinant", f"factor of {lbl} not unimodular")
        cols = [mat2_to_vec(A @ vec_to_mat2(e) @ B.T) for e in basis]
        M = np.array(cols).T
        gens[lbl] = membership_check(space, M, word=lbl)
    base = {lbl: sl2_to_so12(left[lbl]) for lbl in left}
    return Representation(space=space, generators=gens,
                          relators=list(relators or []), kind=kind,
                          product=({k: np.asarray(v, float) for k, v in left.items()},
                                   {k: np.asarray(v, float) for k, v in right.items()}),
                          base_so12=base)


# --------------------------------------------------------------- word balls

def _invlabel(ch: str) -> str:
    return ch.swapcase()


def word_ball(rep: Representation, radius: int, dedup_tol: float = 1e-7):
    """All reduced words of length <= radius, deduplicated by matrix proximity.

    Returns (words, mats): words in deterministic (length, generation) order,
    mats the matching stacked matrices.  Deduplication keeps the first
    (shortest, earliest) word whose matrix quantizes to the same key.
    """
    if radius > WORD_RADIUS_CAP:
        raise ValueError(f"word radius capped at {WORD_RADIUS_CAP}")
    letters = sorted(rep.letters)
    mats = rep.letters
    N = rep.space.dim

    def key_of(batch: np.ndarray) -> np.ndarray:
        return np.round(batch / dedup_tol).astype(np.int64).reshape(len(batch), -1)

    words = [""]
    all_mats = [np.eye(N)[None]]
    seen = {key_of(np.eye(N)[None])[0].tobytes()}
    frontier_words = [""]
    frontier_mats = np.eye(N)[None]
    for _ in range(radius):
        cand_words = []
        keep_rows = []
        for i, w in enumerate(frontier_words):
            for ch in letters:
                if w and _invlabel(w[-1]) == ch:
                    continue
                cand_words.append(w + ch)
                keep_rows.append((i, ch))
        if not cand_words:
            break
        if len(all_mats) + len(cand_words) > BALL_GUARD:
            raise MemoryError("word ball memory guard exceeded")
        stack = np.stack([mats[ch] for _, ch in keep_rows])
        idx = np.array([i for i, _ in keep_rows])
        cand = frontier_mats[idx] @ stack
        keys = key_of(cand)
        new_words = []
        new_rows = []
        for j, w in enumerate(cand_words):
            kb = keys[j].tobytes()
            if kb in seen:
                continue
            seen.add(kb)
            new_words.append(w)
            new_rows.append(j)
        frontier_words = new_words
        frontier_mats = cand[new_rows] if new_rows else np.empty((0, N, N))
        words.extend(new_words)
        all_mats.append(frontier_mats)
        if not new_words:
            break
    return words, np.concatenate(all_mats)


# ------------------------------------------------------------- limit sets

@dataclass
class LipschitzGraph:
    grid_ys: np.ndarray      # points of S^{n-1}
    theta: np.ndarray        # fitted time values on the grid
    constant: float          # Lipschitz constant estimate


@dataclass
class LimitSetSample:
    space: Space
    points: list[EinPoint]
    lifts: np.ndarray
    thetas: np.ndarray
    ys: np.ndarray           # hemisphere coordinates (first entry 0)
    words: list[str]
    graph: LipschitzGraph | None
    verdict: str             # acausal | achronal-not-acausal | not-achronal
    max_inner: float
    max_ratio: float
    lightlike_pairs: int
    acausal_margin: float    # 1 - max_ratio


def _proximal_fixed_points(rep: Representation, words, mats, gap: float = 1e-6):
    """Attracting fixed rays of proximal words: top eigenvector per matrix."""
    vals, vecs = np.linalg.eig(mats)
    out_lifts, out_words = [], []
    for i, w in enumerate(words):
        if not w:
            continue
        av = np.abs(vals[i])
        top = int(np.argmax(av))
        others = np.delete(av, top)
        if av[top] <= 1.0 + gap or (len(others) and av[top] <= others.max() * (1 + gap)):
            continue
        if abs(vals[i, top].imag) > 1e-8 * av[top]:
            continue
        v = vecs[i][:, top].real
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            continue
        out_lifts.append(v / nrm)
        out_words.append(w)
    return out_lifts, out_words


def _dedup_rays(lifts, words, tol=1e-9):
    seen = {}
    keep_l, keep_w = [], []
    for v, w in zip(lifts, words):
        imax = int(np.argmax(np.abs(v)))
        vv = v if v[imax] >= 0 else -v
        key = tuple(np.round(vv / 1e-7).astype(np.int64))
        if key in seen:
            continue
        seen[key] = True
        keep_l.append(vv)
        keep_w.append(w)
    return keep_l, keep_w


def _verdict_from_stats(max_inner, max_ratio, n_light, tol=1e-9, achronal_tol=1e-8):
    if max_inner > achronal_tol:
        return "not-achronal"
    if n_light > 0 or max_ratio >= 1.0 - tol:
        return "achronal-not-acausal"
    return "acausal"


def _assemble_sample(space: Space, lifts, words, graph_grid: int = 0) -> LimitSetSample:
    points = sign_fix_lifts(space, lifts)
    arr = np.array([p.lift for p in points])
    ccs = [to_conformal(p) for p in points]
    thetas = np.array([c.theta for c in ccs])
    # canonical band: global flip toward theta = 0, then recenter each theta
    # to the branch nearest the circular mean (achronal graphs have
    # theta-diameter <= pi, so this is consistent)
    mean = np.arctan2(np.sin(thetas).mean(), np.cos(thetas).mean())
    if abs(mean) > np.pi / 2:
        arr = -arr
        points = [EinPoint(space, v) for v in arr]
        ccs = [to_conformal(p) for p in points]
        thetas = np.array([c.theta for c in ccs])
        mean = np.arctan2(np.sin(thetas).mean(), np.cos(thetas).mean())
    thetas = thetas - 2 * np.pi * np.round((thetas - mean) / (2 * np.pi))
    ys = np.array([c.Y for c in ccs])
    max_inner, max_ratio, n_light, _ = kernels.pair_stats(thetas, ys, 1e-9)
    verdict = _verdict_from_stats(max_inner, max_ratio, n_light)
    graph = None
    if graph_grid and space.n == 2:
        graph = fit_lipschitz_graph(thetas, ys, graph_grid)
    return LimitSetSample(space=space, points=points, lifts=arr, thetas=thetas,
                          ys=ys, words=list(words), graph=graph, verdict=verdict,
                          max_inner=float(max_inner), max_ratio=float(max_ratio),
                          lightlike_pairs=int(n_light),
                          acausal_margin=float(1.0 - max_ratio))


def fit_lipschitz_graph(thetas, ys, grid_size: int = 256) -> LipschitzGraph:
    """Fit the limit-set graph over S^{n-1} (n = 2: the circle)."""
    ys = np.asarray(ys)
    spatial = ys[:, 1:]
    nrm = np.linalg.norm(spatial, axis=1, keepdims=True)
    spatial = spatial / np.maximum(nrm, 1e-300)
    _, max_ratio, _, _ = kernels.pair_stats(np.asarray(thetas), ys, 1e-9)
    L = min(max(max_ratio, 1e-12), 1.0)
    ang = np.linspace(-np.pi, np.pi, grid_size, endpoint=False)
    grid = np.column_stack([np.cos(ang), np.sin(ang)])
    dots = np.clip(grid @ spatial.T, -1, 1)
    d = np.arccos(dots)
    upper = (thetas[None, :] + L * d).min(axis=1)
    lower = (thetas[None, :] - L * d).max(axis=1)
    return LipschitzGraph(grid_ys=grid, theta=0.5 * (upper + lower), constant=float(max_ratio))


def limit_set_sample(rep: Representation, radius: int,
                     min_points: int = 8, graph_grid: int = 256) -> LimitSetSample:
    """Sample the limit set by attracting fixed points of word-ball elements.

    The torus-universe representation routes to the explicit lightlike-arc
    construction (its proximal fixed points are only the four vertex rays).
    """
    if rep.kind == "torus-universe":
        return nonacausal_example(rep.space.n, 1, 1, rep.torus_data)
    words, mats = word_ball(rep, radius)
    lifts, fwords = _proximal_fixed_points(rep, words, mats)
    lifts, fwords = _dedup_rays(lifts, fwords)
    if len(lifts) < min_points:
        raise GeometryError(f"too few loxodromic words: {len(lifts)}")
    return _assemble_sample(rep.space, lifts, fwords, graph_grid)


# ------------------------------------------------------------ regular domain

@dataclass
class RegularDomain:
    grid_ys: np.ndarray     # hemisphere grid in R^{n+1}
    f_minus: np.ndarray
    f_plus: np.ndarray


def hemisphere_grid(n: int, n_radial: int = 24, n_angular: int = 48) -> np.ndarray:
    """Deterministic polar grid on the closed hemisphere {Y in S^n, Y1 >= 0}."""
    pts = [np.eye(n + 1)[0]]
    for r in np.linspace(0, np.pi / 2, n_radial + 1)[1:]:
        if n == 2:
            for aphi in np.linspace(-np.pi, np.pi, n_angular, endpoint=False):
                pts.append(np.array([np.cos(r), np.sin(r) * np.cos(aphi),
                                     np.sin(r) * np.sin(aphi)]))
        else:
            golden = np.pi * (3 - np.sqrt(5))
            for j in range(n_angular):
                z = 1 - 2 * (j + 0.5) / n_angular
                rho = np.sqrt(max(0.0, 1 - z * z))
                ang = j * golden
                sph = np.array([z, rho * np.cos(ang), rho * np.sin(ang)])
                pts.append(np.concatenate([[np.cos(r)], np.sin(r) * sph]))
    return np.array(pts)


def regular_domain_bounds(sample: LimitSetSample, n_radial: int = 24,
                          n_angular: int = 48) -> RegularDomain:
    """Invariant-domain bounds f^-(Y) < theta < f^+(Y) from the sample:
    f^+(Y) = min_i (theta_i + d(Y, Y_i)), f^-(Y) = max_i (theta_i - d)."""
    if sample.verdict == "not-achronal":
        raise GeometryError("regular domain requires an achronal sample")
    if len(sample.points) == 0:
        raise GeometryError("empty sample")
    grid = hemisphere_grid(sample.space.n, n_radial, n_angular)
    f_plus, f_minus = kernels.envelope(sample.thetas, sample.ys, grid)
    return RegularDomain(grid_ys=grid, f_minus=f_minus, f_plus=f_plus)


def envelope_at(sample: LimitSetSample, y: np.ndarray) -> tuple[float, float]:
    """(f_minus, f_plus) at a single hemisphere point."""
    f_plus, f_minus = kernels.envelope(sample.thetas, sample.ys,
                                       np.asarray(y, dtype=float)[None, :])
    return float(f_minus[0]), float(f_plus[0])


# ------------------------------------------------------- non-acausal example

def nonacausal_example(n: int, p: int, q: int, torus_data=None,
                       points_per_arc: int = 64) -> LimitSetSample:
    """Achronal, non-acausal limit sphere built from two spacelike spheres
    joined by lightlike segments (desk scale: p = q = 1, n = 2).

    The four arcs (theta, phi): theta = phi, pi - phi, phi - pi, 2 pi - phi
    trace a closed lightlike square in Ein_2; same-arc pairs are lightlike
    (q-inner exactly zero) and cross-arc pairs satisfy <l, l'> <= 0.
    """
    if not (n == 2 and p == 1 and q == 1):
        raise GeometryError("only the desk-scale case p = q = 1, n = 2 is supported")
    space = Space(2)
    lifts, words = [], []
    t = np.linspace(0.0, np.pi / 2, points_per_arc, endpoint=False)
    arcs = [
        lambda f: np.array([np.cos(f), np.sin(f), np.cos(f), np.sin(f)]),
        lambda f: np.array([-np.cos(f + np.pi / 2), np.sin(f + np.pi / 2),
                            np.cos(f + np.pi / 2), np.sin(f + np.pi / 2)]),
        lambda f: np.array([-np.cos(f + np.pi), -np.sin(f + np.pi),
                            np.cos(f + np.pi), np.sin(f + np.pi)]),
        lambda f: np.array([np.cos(f + 3 * np.pi / 2), -np.sin(f + 3 * np.pi / 2),
                            np.cos(f + 3 * np.pi / 2), np.sin(f + 3 * np.pi / 2)]),
    ]
    for ai, arc in enumerate(arcs):
        for j, f in enumerate(t):
            lifts.append(arc(f) / np.sqrt(2.0))
            words.append(f"arc{ai}:{j}")
    return _assemble_sample(space, lifts, words, graph_grid=256)
