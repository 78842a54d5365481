"""SO(2,n) matrix group: membership, KAK decomposition, balanced/unbalanced
classification of escaping sequences, poles, photons, and Lipschitz /
expansion estimates of the sphere action.

The decomposition g = k a(lam, mu) l uses the maximal compact K =
SO(2) x SO(n) (block diagonal, the stabilizer of the negative 2-plane
span(e0, e1)) and the Weyl chamber 0 <= mu <= lam, where a(lam, mu) is the
commuting pair of boosts in the planes (e0, e_n) and (e1, e_{n+1}).
Diagonalised in paired coordinates those boosts scale a1, b1 by e^{+-lam}
and a2, b2 by e^{+-mu}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ambient import EinPoint, Space, from_paired, q_inner

MEMBER_TOL = 1e-8


class MembershipError(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


@dataclass(frozen=True)
class GroupElementQ:
    """Validated element of SO_0(2,n)."""

    space: Space
    matrix: np.ndarray
    word: str = ""

    def __matmul__(self, other: "GroupElementQ") -> "GroupElementQ":
        return GroupElementQ(self.space, self.matrix @ other.matrix,
                             self.word + other.word)

    def inverse(self) -> "GroupElementQ":
        J = self.space.jdiag
        inv = (self.matrix.T * J[None, :]) * J[:, None]  # J M^T J
        word = "".join(c.swapcase() for c in reversed(self.word))
        return GroupElementQ(self.space, inv, word)


def membership_check(space: Space, M, word: str = "", tol: float = MEMBER_TOL) -> GroupElementQ:
    """Validate M in SO_0(2,n); raises MembershipError naming the violation."""
    M = np.asarray(M, dtype=float)
    if M.shape != (space.dim, space.dim):
        raise MembershipError("wrong-shape", f"expected {(space.dim, space.dim)}")
    J = space.J
    res = np.abs(M.T @ J @ M - J).max()
    if res > tol:
        raise MembershipError("not-orthogonal", f"|M^T J M - J| = {res:.3e}")
    det = np.linalg.det(M)
    if abs(det - 1.0) > max(tol, 1e-6 * abs(det)):
        raise MembershipError("wrong-determinant", f"det = {det:.6f}")
    if np.linalg.det(M[:2, :2]) <= 0:
        raise MembershipError("wrong-component", "negative-plane block reverses orientation")
    return GroupElementQ(space, M, word)


def a_matrix(space: Space, lam: float, mu: float) -> np.ndarray:
    n = space.n
    M = np.eye(space.dim)
    M[0, 0] = M[n, n] = np.cosh(lam)
    M[0, n] = M[n, 0] = np.sinh(lam)
    M[1, 1] = M[n + 1, n + 1] = np.cosh(mu)
    M[1, n + 1] = M[n + 1, 1] = np.sinh(mu)
    return M


def x_plus_model(space: Space) -> np.ndarray:
    """Attracting direction of a(lam, mu): the paired a1 axis."""
    v = np.zeros(space.dim)
    v[0] = 1.0
    return from_paired(space, v) / np.sqrt(2.0)


def x_minus_model(space: Space) -> np.ndarray:
    """Repelling direction: the paired b1 axis."""
    v = np.zeros(space.dim)
    v[2] = 1.0
    return from_paired(space, v) / np.sqrt(2.0)


@dataclass(frozen=True)
class CartanTriple:
    k: GroupElementQ
    lam: float
    mu: float
    l: GroupElementQ

    def reconstruct(self) -> np.ndarray:
        sp = self.k.space
        return self.k.matrix @ a_matrix(sp, self.lam, self.mu) @ self.l.matrix


def _balance(v: np.ndarray) -> np.ndarray:
    """Rescale negative and positive parts to Euclidean norm 1/sqrt(2) each."""
    vm, vp = v[:2], v[2:]
    return np.concatenate([vm / (np.linalg.norm(vm) * np.sqrt(2.0)),
                           vp / (np.linalg.norm(vp) * np.sqrt(2.0))])


def _build_l(space: Space, Vt: np.ndarray, mu: float):
    """Right compact factor from the top right-singular frame.

    Returns (l, v, w) where l in SO(2) x SO(n) maps v to (e0+e_n)/sqrt2 and
    w to (e1+e_{n+1})/sqrt2.
    """
    n, N = space.n, space.dim
    J = space.jdiag
    v = _balance(Vt[0].copy())
    use_w_eig = mu > 1e-7
    w = None
    if use_w_eig:
        w = Vt[1].copy()
        Jv = J * v
        w = w - (w @ v) * v - (w @ Jv) * Jv
        if min(np.linalg.norm(w[:2]), np.linalg.norm(w[2:])) < 0.3 / np.sqrt(2.0):
            use_w_eig = False  # near-degenerate mix; fall back to completion
        else:
            w = _balance(w)
    if not use_w_eig:
        x = np.array([-v[1], v[0]]) * np.sqrt(2.0)
        vp_unit = v[2:] / np.linalg.norm(v[2:])
        y = None
        for kk in range(n):
            cand = np.zeros(n)
            cand[kk] = 1.0
            cand -= (cand @ vp_unit) * vp_unit
            nc = np.linalg.norm(cand)
            if nc > 0.5:
                y = cand / nc
                break
        w = np.concatenate([x, y]) / np.sqrt(2.0)
    A = np.vstack([v[:2] * np.sqrt(2.0), w[:2] * np.sqrt(2.0)])
    A[0] /= np.linalg.norm(A[0])
    A[1] -= (A[1] @ A[0]) * A[0]
    A[1] /= np.linalg.norm(A[1])
    if np.linalg.det(A) < 0:
        w = -w
        A[1] = -A[1]
    b1 = v[2:] * np.sqrt(2.0)
    b2 = w[2:] * np.sqrt(2.0)
    b1 /= np.linalg.norm(b1)
    b2 -= (b2 @ b1) * b1
    b2 /= np.linalg.norm(b2)
    rest = []
    for kk in range(n):
        c = np.zeros(n)
        c[kk] = 1.0
        c -= (c @ b1) * b1 + (c @ b2) * b2
        for r in rest:
            c -= (c @ r) * r
        nc = np.linalg.norm(c)
        if nc > 1e-7:
            rest.append(c / nc)
        if len(rest) == n - 2:
            break
    B = np.array(rest + [b1, b2]) if rest else np.vstack([b1, b2])
    if np.linalg.det(B) < 0:
        if n > 2:
            B[0] = -B[0]
        elif not use_w_eig:
            B[1] = -B[1]
            w = np.concatenate([w[:2], -w[2:]])
        else:
            raise MembershipError("not-orthogonal", "orientation parity failure")
    l = np.zeros((N, N))
    l[:2, :2] = A
    l[2:, 2:] = B
    return l, v, w


def cartan_decompose(g: GroupElementQ) -> CartanTriple:
    """g = k a(lam, mu) l with 0 <= mu <= lam and k, l in SO(2) x SO(n).

    Algorithm: SVD of g in the Euclidean norm gives a(lam, mu)^2-data on the
    right frame; l rotates that frame into the standard boost planes; the
    columns of k come from stably normalized singular images (the contracted
    columns via the J-pairing, the neutral ones via g l^T).
    """
    space = g.space
    n, N = space.n, space.dim
    U, s, Vt = np.linalg.svd(g.matrix)
    lam = float(np.log(s[0]))
    mu = float(min(max(np.log(s[1]), 0.0), lam))
    if lam < 1e-9:
        ident = GroupElementQ(space, np.eye(N))
        return CartanTriple(k=GroupElementQ(space, g.matrix.copy(), g.word),
                            lam=0.0, mu=0.0, l=ident)
    l, v, w = _build_l(space, Vt, mu)
    J = space.jdiag
    u1 = g.matrix @ v
    u1 /= np.linalg.norm(u1)
    u2 = g.matrix @ w
    u2 /= np.linalg.norm(u2)
    f_pl = np.zeros(N); f_pl[0] = f_pl[n] = 1 / np.sqrt(2.0)
    f_ml = np.zeros(N); f_ml[0] = 1 / np.sqrt(2.0); f_ml[n] = -1 / np.sqrt(2.0)
    f_pm = np.zeros(N); f_pm[1] = f_pm[n + 1] = 1 / np.sqrt(2.0)
    f_mm = np.zeros(N); f_mm[1] = 1 / np.sqrt(2.0); f_mm[n + 1] = -1 / np.sqrt(2.0)
    k = np.zeros((N, N))
    for f, target in ((f_pl, u1), (f_ml, -(J * u1)), (f_pm, u2), (f_mm, -(J * u2))):
        k += np.outer(target, f)
    if n > 2:
        glt = g.matrix @ l.T
        for j in range(2, n):
            k += np.outer(glt[:, j], np.eye(N)[j])
    return CartanTriple(
        k=GroupElementQ(space, k),
        lam=lam, mu=mu,
        l=GroupElementQ(space, l),
    )


def singular_exponents(space: Space, mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched (lam, mu) from stacked matrices, via singular values only."""
    mats = np.asarray(mats, dtype=float)
    s = np.linalg.svd(mats, compute_uv=False)
    lam = np.log(s[..., 0])
    mu = np.clip(np.log(s[..., 1]), 0.0, lam)
    return lam, mu


# ------------------------------------------------------ sequence dynamics

@dataclass
class SequenceClass:
    kind: str                      # "balanced" | "unbalanced"
    nu_hat: float                  # limit estimate of e^{mu - lam} in [0, 1]
    lambda_trace: np.ndarray
    mu_trace: np.ndarray
    k_inf: GroupElementQ
    l_inf: GroupElementQ
    cauchy_residual: float         # tail diagnostic for the compact parts
    trend_slope: float             # fitted slope of (mu - lam) against lam
    order: np.ndarray              # indices sorted by lam (the subsequence)


def classify_sequence(gs: list[GroupElementQ], nu_threshold: float = 1e-3,
                      escape_min: float = 1.0) -> SequenceClass:
    """Balanced/unbalanced classification of an escaping sequence.

    The sequence is sorted by lam (the algorithmic converging subsequence);
    nu is estimated from the tail of e^{mu - lam} together with a linear
    trend fit of (mu - lam) against lam.
    """
    if len(gs) < 2:
        raise ValueError("need at least two elements")
    trips = [cartan_decompose(g) for g in gs]
    lam = np.array([t.lam for t in trips])
    mu = np.array([t.mu for t in trips])
    if lam.max() < escape_min:
        raise ValueError("not escaping: lambda trace bounded")
    order = np.argsort(lam, kind="stable")
    lam_s, mu_s = lam[order], mu[order]
    y = mu_s - lam_s
    if len(lam_s) >= 3:
        slope = float(np.polyfit(lam_s, y, 1)[0])
    else:
        slope = 0.0
    tail = y[-min(3, len(y)):]
    nu_hat = float(np.exp(np.median(tail)))
    kind = "balanced" if nu_hat > nu_threshold else "unbalanced"
    last = trips[order[-1]]
    tail_idx = order[len(order) // 2:]
    kmats = [trips[i].k.matrix for i in tail_idx]
    lmats = [trips[i].l.matrix for i in tail_idx]
    resid = 0.0
    for mlist in (kmats, lmats):
        for m in mlist:
            resid = max(resid, float(np.abs(m - mlist[-1]).max()))
    return SequenceClass(kind=kind, nu_hat=min(nu_hat, 1.0),
                         lambda_trace=lam, mu_trace=mu,
                         k_inf=last.k, l_inf=last.l,
                         cauchy_residual=resid, trend_slope=slope,
                         order=order)


@dataclass(frozen=True)
class PoleData:
    x_plus: EinPoint
    x_minus: EinPoint

    def basin_minus(self, x) -> float:
        """Sign of <x, x^->_q : negative on the attracting basin Omega^-(x^-)."""
        sp = self.x_minus.space
        return q_inner(sp, np.asarray(x, dtype=float), self.x_minus.lift)

    def cone_center(self) -> np.ndarray:
        """Euclidean center of the shrunken cones C^-(eps): -J x^-."""
        sp = self.x_minus.space
        return -(sp.jdiag * self.x_minus.lift)


@dataclass(frozen=True)
class PhotonData:
    delta_plus: tuple[np.ndarray, np.ndarray]   # spanning null vectors
    delta_minus: tuple[np.ndarray, np.ndarray]
    nu: float
    k_inf: GroupElementQ
    l_inf: GroupElementQ

    def project_plus(self, x) -> np.ndarray:
        """Limit map pi^+ (partial: undefined near the repelling photon)."""
        sp = self.k_inf.space
        from .ambient import to_paired
        linf = self.l_inf.matrix
        kinf = self.k_inf.matrix
        vp = to_paired(sp, linf @ np.asarray(x, dtype=float))
        img = np.zeros(sp.dim)
        img[0] = vp[0]
        img[1] = self.nu * vp[1]
        out = kinf @ from_paired(sp, img)
        nrm = np.linalg.norm(out)
        if nrm < 1e-12:
            raise ValueError("point lies on the repelling photon cone")
        return out / nrm


def poles_and_photons(sc: SequenceClass):
    """Limit objects of a classified sequence: PoleData or PhotonData."""
    space = sc.k_inf.space
    if sc.kind == "unbalanced":
        xp = sc.k_inf.matrix @ x_plus_model(space)
        linv = sc.l_inf.inverse().matrix
        xm = linv @ x_minus_model(space)
        return PoleData(x_plus=EinPoint(space, xp), x_minus=EinPoint(space, xm))
    n = space.dim
    pa1 = np.zeros(n); pa1[0] = 1.0
    pa2 = np.zeros(n); pa2[1] = 1.0
    pb1 = np.zeros(n); pb1[2] = 1.0
    pb2 = np.zeros(n); pb2[3] = 1.0
    kinf, linv = sc.k_inf.matrix, sc.l_inf.inverse().matrix
    dplus = tuple(kinf @ from_paired(space, v) / np.sqrt(2.0) for v in (pa1, pa2))
    dminus = tuple(linv @ from_paired(space, v) / np.sqrt(2.0) for v in (pb1, pb2))
    return PhotonData(delta_plus=dplus, delta_minus=dminus, nu=sc.nu_hat,
                      k_inf=sc.k_inf, l_inf=sc.l_inf)


def pole_in_limit_set(pole: EinPoint, sample_lifts: np.ndarray, tol: float = 1e-6) -> EinPoint:
    """Resolve the +-x sign ambiguity: the pole contained in the limit set is
    the one achronal with the (sign-fixed) sample."""
    sp = pole.space
    jl = sample_lifts * sp.jdiag[None, :]
    for cand in (pole, -pole):
        if (jl @ cand.lift).max() <= tol:
            return cand
    raise ValueError("neither pole sign is achronal with the sample")


# ------------------------------------------------- sphere action estimates

def _sphere_differential(space: Space, M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Differential at unit x of x -> Mx/|Mx| as a map of tangent spaces.

    Returns an (N, N) matrix whose restriction to T_x has the right singular
    values (it kills x and lands in T_{Mx/|Mx|}).
    """
    y = M @ x
    ny = np.linalg.norm(y)
    yh = y / ny
    P_out = np.eye(space.dim) - np.outer(yh, yh)
    P_in = np.eye(space.dim) - np.outer(x, x)
    return P_out @ M @ P_in / ny


def _cap_net(space: Space, center: np.ndarray, radius: float,
             n_radial: int = 8, n_sphere: int = 24) -> np.ndarray:
    """Deterministic net on the spherical cap around a unit center."""
    N = space.dim
    # orthonormal tangent frame at center, deterministic
    basis = []
    for k in range(N):
        c = np.eye(N)[k] - (np.eye(N)[k] @ center) * center
        for b in basis:
            c = c - (c @ b) * b
        nc = np.linalg.norm(c)
        if nc > 1e-9:
            basis.append(c / nc)
        if len(basis) == N - 1:
            break
    basis = np.array(basis)
    # low-discrepancy directions in the tangent sphere (golden-angle spiral)
    dirs = []
    m = len(basis)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    for j in range(n_sphere):
        if m == 1:
            u = basis[0] * (1 if j % 2 == 0 else -1)
        else:
            ang = j * golden
            vec = np.zeros(m)
            vec[0] = np.cos(ang)
            vec[1] = np.sin(ang)
            for extra in range(2, m):
                vec[extra] = np.sin(0.5 * ang * (extra + 1)) * 0.7
            vec /= np.linalg.norm(vec)
            u = vec @ basis
        dirs.append(u)
    pts = [center]
    for t in np.linspace(radius / n_radial, radius, n_radial):
        for u in dirs:
            pts.append(np.cos(t) * center + np.sin(t) * u)
    return np.array(pts)


def lipschitz_bound(g: GroupElementQ, eps: float, net_size: tuple[int, int] = (8, 24)):
    """Sampled sup of the Lipschitz constant of the sphere action of g on the
    shrunken cone C^-(eps), together with the sampled image radius about x^+.

    Works in the model chart: with g = k a l and k, l Euclidean isometries,
    the action on C^-(eps) for the poles of (g^m) is isometric to the a-action
    on the model cap of radius pi/2 - eps about x0^+; the estimate is exactly
    conjugation-invariant under K.
    """
    if eps <= 0 or eps >= np.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    space = g.space
    trip = cartan_decompose(g)
    a = a_matrix(space, trip.lam, trip.mu)
    center = x_plus_model(space)
    net = _cap_net(space, center, np.pi / 2 - eps, *net_size)
    eta = 0.0
    radius = 0.0
    for x in net:
        D = _sphere_differential(space, a, x)
        sv = np.linalg.svd(D, compute_uv=False)
        eta = max(eta, float(sv[0]))
        img = a @ x
        img /= np.linalg.norm(img)
        radius = max(radius, float(np.arccos(np.clip(img @ center, -1, 1))))
    return eta, radius


def inverse_expansion_at(g: GroupElementQ, x: EinPoint) -> float:
    """Minimal singular value of the differential at x of the sphere action
    of g^{-1} (the expansion factor; >= 1 means expansion of all tangents)."""
    space = g.space
    M = g.inverse().matrix
    D = _sphere_differential(space, M, x.lift)
    sv = np.linalg.svd(D, compute_uv=False)
    sv = sv[sv > 1e-300]
    if len(sv) < space.dim - 1:
        raise ValueError("x is singular for the normalized inverse action")
    return float(sv[space.dim - 2])


# ------------------------------------------------------ distortion scan

@dataclass
class DistortionReport:
    lam: np.ndarray
    mu: np.ndarray
    words: list[str]
    gap_envelope_slope: float     # fitted slope of (mu - lam) vs lam, upper envelope
    no_balanced_tail: bool
    largest: list[tuple[str, float, float]]  # (word, lam, mu) of the top-lam entries


def balanced_distortion_scan(gs: list[GroupElementQ], top: int = 50,
                             balanced_gap: float = -1e-3) -> DistortionReport:
    """Scan (lam, mu) over a word list and flag whether a balanced tail exists.

    no_balanced_tail is True when the top-lam entries all have mu - lam
    below balanced_gap (no sequence with e^{mu-lam} bounded away from 0).
    """
    mats = np.array([g.matrix for g in gs])
    lam, mu = singular_exponents(gs[0].space, mats)
    words = [g.word for g in gs]
    order = np.argsort(lam, kind="stable")
    nz = [i for i in order if lam[i] > 1e-9]
    top_idx = nz[-top:] if len(nz) >= top else nz
    gaps = np.array([mu[i] - lam[i] for i in top_idx])
    no_tail = bool((gaps <= balanced_gap).all()) if len(gaps) else True
    lam_nz = lam[nz]
    gap_nz = (mu - lam)[nz]
    slope = float(np.polyfit(lam_nz, gap_nz, 1)[0]) if len(nz) >= 3 else 0.0
    largest = [(words[i], float(lam[i]), float(mu[i])) for i in top_idx]
    return DistortionReport(lam=lam, mu=mu, words=words,
                            gap_envelope_slope=slope,
                            no_balanced_tail=no_tail, largest=largest)
