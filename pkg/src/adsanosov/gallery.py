"""Built-in example representations.

* fuchsian-genus2: the genus-2 surface group from the regular hyperbolic
  octagon (vertex angles pi/4, all eight vertices glued to one point),
  side pairing pattern a b a^-1 b^-1 c d c^-1 d^-1, embedded in SO(2,2).
* fuchsian-genus2-perturbed: the product pair (rho, c rho c^-1) for a small
  isometry c; a valid quasi-Fuchsian deformation with generator perturbation
  of order 1e-2 (its convex hull stays flat).
* product-deformed: (rho, rho o sigma) where sigma is the relation-preserving
  twist a -> a, b -> b a; a genuinely non-Fuchsian point of the deformation
  space with full-dimensional convex hull.
* schottky-deformed: a rank-2 free (ping-pong) pair with independently
  perturbed right factor, for deep word-ball scans.
* torus-universe: the achronal-not-acausal block-boost lattice example.
"""

from __future__ import annotations

import numpy as np

from .groups import (Representation, fuchsian_embed, product_embed,
                     sl2_to_so12, so12_to_sl2)
from .ambient import Space
from .cartan import membership_check

OCTAGON_RELATOR = "abABcdCD"
GENUS2_LABELS = "abcd"

_J3 = np.diag([-1.0, 1.0, 1.0])


def _h2_point(r: float, phi: float) -> np.ndarray:
    return np.array([np.cosh(r), np.sinh(r) * np.cos(phi), np.sinh(r) * np.sin(phi)])


def _qdot3(a, b) -> float:
    return float(a @ _J3 @ b)


def _frame(p, q) -> np.ndarray:
    """SO(1,2) frame at p looking toward q (columns p, tangent, normal)."""
    t = q + _qdot3(p, q) * p
    t = t / np.sqrt(_qdot3(t, t))
    s = _J3 @ np.cross(p, t)
    s = s / np.sqrt(_qdot3(s, s))
    return np.column_stack([p, t, s])


def _pair_isometry(p, q, p2, q2) -> np.ndarray:
    return _frame(p2, q2) @ np.linalg.inv(_frame(p, q))


def octagon_so12() -> dict[str, np.ndarray]:
    """Side pairings of the regular octagon: generators a, b, c, d in
    SO_0(1,2) satisfying a b a^-1 b^-1 c d c^-1 d^-1 = 1.

    Circumradius r with cosh r = 3 + 2 sqrt(2) (vertex angles pi/4); the
    letters sit on sides 0..7 in the order a b A B c d C D, and the pairing
    maps side(X) reversed onto side(x); b and d are inverted so the relator
    takes the commutator form.
    """
    rc = np.arccosh(3.0 + 2.0 * np.sqrt(2.0))
    verts = [_h2_point(rc, k * np.pi / 4) for k in range(8)]

    def side(k):
        return verts[k % 8], verts[(k + 1) % 8]

    pos = {"a": 0, "b": 1, "A": 2, "B": 3, "c": 4, "d": 5, "C": 6, "D": 7}
    raw = {}
    for x in "abcd":
        p, q = side(pos[x])
        p2, q2 = side(pos[x.upper()])
        raw[x] = _pair_isometry(q2, p2, p, q)
    return {"a": raw["a"], "b": np.linalg.inv(raw["b"]),
            "c": raw["c"], "d": np.linalg.inv(raw["d"])}


def octagon_sl2() -> dict[str, np.ndarray]:
    return {k: so12_to_sl2(v) for k, v in octagon_so12().items()}


def twist_sl2(left: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Precompose with the relation-preserving automorphism b -> b a."""
    out = dict(left)
    out["b"] = left["b"] @ left["a"]
    return out


def fuchsian_genus2() -> Representation:
    return fuchsian_embed(octagon_so12(), relators=[OCTAGON_RELATOR],
                          kind="fuchsian-lattice")


def fuchsian_genus2_perturbed(scale: float = 1e-3) -> Representation:
    """Product pair (rho, c rho c^-1), generator perturbation ~ 1e-2."""
    left = octagon_sl2()
    th = scale
    c = np.array([[np.cosh(th), np.sinh(th)], [np.sinh(th), np.cosh(th)]])
    c = c @ np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    right = {k: c @ v @ np.linalg.inv(c) for k, v in left.items()}
    return product_embed(left, right, relators=[OCTAGON_RELATOR], kind="deformed")


def product_deformed() -> Representation:
    """(rho, rho o twist): non-Fuchsian quasi-Fuchsian product representation."""
    left = octagon_sl2()
    right = twist_sl2(left)
    return product_embed(left, right, relators=[OCTAGON_RELATOR], kind="product")


def _sl2_boost(length: float) -> np.ndarray:
    """Translation of given length along a hyperbolic axis: diag boost."""
    return np.diag([np.exp(length / 2), np.exp(-length / 2)])


def _sl2_rot(angle: float) -> np.ndarray:
    return np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])


def schottky_sl2(l1: float = 3.0, l2: float = 3.0) -> dict[str, np.ndarray]:
    """Two hyperbolic translations with orthogonal axes (ping-pong pair)."""
    a = _sl2_boost(l1)
    b = _sl2_rot(np.pi / 4) @ _sl2_boost(l2) @ _sl2_rot(-np.pi / 4)
    return {"a": a, "b": b}


def schottky_deformed(eps: float = 0.05) -> Representation:
    """Free rank-2 product pair with an independently perturbed right factor."""
    left = schottky_sl2()
    right = {
        "a": _sl2_rot(eps) @ _sl2_boost(3.0 + eps) @ _sl2_rot(-eps),
        "b": _sl2_rot(np.pi / 4 + eps / 2) @ _sl2_boost(3.0 - eps) @ _sl2_rot(-np.pi / 4 - eps / 2),
    }
    return product_embed(left, right, relators=[], kind="product")


def torus_universe(s1: float = 1.2, t1: float = 0.5,
                   s2: float = 0.4, t2: float = 1.3) -> Representation:
    """Rank-2 lattice of commuting block boosts on R^{1,1} + R^{1,1}.

    Generator (s, t) boosts the (u1, x1) plane by s and the (u2, x2) plane
    by t; the invariant limit sphere is the lightlike square, so the limit
    set is achronal but not acausal.
    """
    if abs(s1 * t2 - s2 * t1) < 1e-9:
        raise ValueError("lattice data must be linearly independent")
    space = Space(2)

    def block(s, t):
        M = np.eye(4)
        M[0, 0] = M[2, 2] = np.cosh(s)
        M[0, 2] = M[2, 0] = np.sinh(s)
        M[1, 1] = M[3, 3] = np.cosh(t)
        M[1, 3] = M[3, 1] = np.sinh(t)
        return M

    gens = {"a": membership_check(space, block(s1, t1), word="a"),
            "b": membership_check(space, block(s2, t2), word="b")}
    return Representation(space=space, generators=gens,
                          relators=["abAB"], kind="torus-universe",
                          torus_data=(s1, t1, s2, t2))


GALLERY = {
    "fuchsian-genus2": fuchsian_genus2,
    "fuchsian-genus2-perturbed": fuchsian_genus2_perturbed,
    "product-deformed": product_deformed,
    "schottky-deformed": schottky_deformed,
    "torus-universe": torus_universe,
}
