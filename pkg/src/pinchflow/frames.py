"""Special orthonormal frames for codimension-two surfaces.

For (n, k) = (2, 2) the second fundamental form reduces, after rotating the
normal frame so nu_1 points along the mean curvature vector and rotating the
tangent frame to diagonalize h.nu_1, to four numbers (a, b, c, |H|):

    h . nu_1 = [[|H|/2 + a, 0], [0, |H|/2 - a]]
    h . nu_2 = [[b, c], [c, -b]]

with the gauge fixed by a >= 0.  The normal curvature is 2ac in this frame
and |Atraceless|^2 = 2(a^2 + b^2 + c^2).

When H = 0 the frame is under-determined; the fallback rule (documented
below) picks nu_1 as the normal direction maximizing |h . nu|, with ties
broken in favor of the first input normal direction.  This reproduces the
minimal-surface computations that use (a, b, c) without a mean-curvature
direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDims
from .tensor_kernel import SecondFundamentalForm

H_ZERO_TOL = 1e-12
EIG_TIE_REL = 1e-9


@dataclass
class ABCFrame:
    a: float
    b: float
    c: float
    h_norm: float
    tangent_rotation: np.ndarray
    normal_rotation: np.ndarray

    @property
    def kperp(self) -> float:
        return 2.0 * self.a * self.c

    @property
    def normTracelessA2(self) -> float:
        return 2.0 * (self.a * self.a + self.b * self.b + self.c * self.c)


@dataclass
class TracelessSplit:
    normA1_2: float
    normAminus_2: float


def _components(h) -> np.ndarray:
    if isinstance(h, SecondFundamentalForm):
        return h.components
    return np.asarray(h, dtype=float)


def _fallback_direction(amats: np.ndarray) -> np.ndarray:
    """Unit k-vector maximizing |h . nu| when H vanishes.

    Top eigenvector of the normal-space Gram matrix <A_alpha, A_beta>;
    a (numerically) degenerate top eigenvalue falls back to the first
    normal direction.  The sign is canonicalized so the largest-magnitude
    component is positive.
    """
    k = amats.shape[0]
    gram = np.einsum("aij,bij->ab", amats, amats)
    evals, evecs = np.linalg.eigh(gram)
    top = evals[-1]
    gap = top - evals[-2] if k > 1 else top
    if top <= H_ZERO_TOL or gap <= EIG_TIE_REL * max(top, 1.0):
        u = np.zeros(k)
        u[0] = 1.0
        return u
    u = evecs[:, -1]
    pivot = np.argmax(np.abs(u))
    if u[pivot] < 0:
        u = -u
    return u


def specialize(h) -> ABCFrame:
    """Reduce a (2, 2) second fundamental form to its ABCFrame.

    The returned rotations satisfy: rotating the input normal frame by
    normal_rotation and the tangent frame by tangent_rotation puts h into
    the canonical (a, b, c, |H|) shape.  Both are proper rotations, so the
    sign of the normal curvature is preserved: K_perp(input) = 2ac.
    """
    comp = _components(h)
    if comp.shape != (2, 2, 2):
        raise BadDims("specialize requires (n, k) = (2, 2), got shape %s" % (comp.shape,))
    amats = np.moveaxis(comp, -1, 0)  # (k, n, n)
    mean = np.einsum("aii->a", amats)
    h_norm = float(np.linalg.norm(mean))

    if h_norm > H_ZERO_TOL:
        u = mean / h_norm
    else:
        u = _fallback_direction(amats)
    # proper rotation sending the input normal frame to (nu1, nu2)
    nrot = np.array([[u[0], u[1]], [-u[1], u[0]]])
    aprime = np.einsum("ab,bij->aij", nrot, amats)

    evals, evecs = np.linalg.eigh(aprime[0])
    # descending eigenvalue order gives the nonnegative gap; keep det = +1
    trot = np.stack([evecs[:, 1], evecs[:, 0]])
    if np.linalg.det(trot) < 0:
        trot = np.stack([evecs[:, 1], -evecs[:, 0]])
    a1 = trot @ aprime[0] @ trot.T
    a2 = trot @ aprime[1] @ trot.T

    a = 0.5 * (a1[0, 0] - a1[1, 1])
    b = a2[0, 0]
    c = a2[0, 1]
    return ABCFrame(
        a=float(a),
        b=float(b),
        c=float(c),
        h_norm=h_norm,
        tangent_rotation=trot,
        normal_rotation=nrot,
    )


def reconstruct(frame: ABCFrame) -> np.ndarray:
    """Rebuild h (in the original input frames) from an ABCFrame."""
    half = 0.5 * frame.h_norm
    a1 = np.array([[half + frame.a, 0.0], [0.0, half - frame.a]])
    a2 = np.array([[frame.b, frame.c], [frame.c, -frame.b]])
    trot = frame.tangent_rotation
    nrot = frame.normal_rotation
    ap = np.stack([trot.T @ a1 @ trot, trot.T @ a2 @ trot])
    amats = np.einsum("ab,aij->bij", nrot, ap)
    return np.moveaxis(amats, 0, -1)


def split_traceless(h) -> TracelessSplit:
    """Split |Atraceless|^2 into the mean-curvature direction and the rest.

    Works for any (n, k).  With H = 0 the direction is chosen by the same
    fallback rule as specialize, so the two operations stay consistent on
    minimal surfaces.
    """
    comp = _components(h)
    n = comp.shape[0]
    amats = np.moveaxis(comp, -1, 0)
    mean = np.einsum("aii->a", amats)
    h_norm = float(np.linalg.norm(mean))
    if h_norm > H_ZERO_TOL:
        u = mean / h_norm
    else:
        u = _fallback_direction(amats)
    a_nu1 = np.einsum("a,aij->ij", u, amats)
    tracefree = a_nu1 - (np.trace(a_nu1) / n) * np.eye(n)
    norm_a1 = float(np.einsum("ij,ij->", tracefree, tracefree))
    normA2 = float(np.einsum("aij,aij->", amats, amats))
    normH2 = float(mean @ mean)
    total = normA2 - normH2 / n
    return TracelessSplit(normA1_2=norm_a1, normAminus_2=total - norm_a1)
