"""Pinching cones and the negativity sweeps for their reaction terms.

A cone is the region Q < 0 of a curvature polynomial Q; preservation under
the flow hinges on the sign of Q's reaction terms on the boundary Q = 0.
Those signs are claims under test here: the sweep machinery evaluates the
reaction assembled from the defining contractions (via the identities
module), never from a pre-expanded polynomial, and reports the measured
supremum, its argmax, and bisected critical constants.

The Q = 0 slice is compactified by degree-4 homogeneity: scaling h by
lambda and kbar by lambda^2 scales every reaction by lambda^4, so it is
enough to sweep

    Thm1:  |Atr1|^2 + |Atr-|^2 + kbar = 1     (h realized with 2 normals)
    Thm2:  a^2 + b^2 + c^2 + kbar = 1          (special-frame coordinates)

with |H|^2 >= 0 recovered from the Q = 0 constraint and infeasible
configurations skipped.  Sweeps are deterministic: a fixed lattice, chunked
threaded evaluation, and a (value, lexicographic-configuration) reduction
that is independent of the thread schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadDims, BadParams, EmptyFeasibleSet
from .identities import kperp_scalar, norms_batch, r1_batch, r2_batch, reaction_terms
from .tensor_kernel import SecondFundamentalForm

SUP_SIGN_TOL = 1e-9      # "sup is positive" threshold for bisection
BRACKET_WIDTH = 1e-4


def thread_count() -> int:
    """Worker count: PINCHFLOW_THREADS caps it, 0 or unset means auto."""
    raw = os.environ.get("PINCHFLOW_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        n = 0
    if n <= 0:
        return min(os.cpu_count() or 1, 8)
    return n


# ---------------------------------------------------------------------------
# cone parameters

@dataclass
class ConeParams:
    """Constants of a pinching cone.

    variant "thm1": Q = |A|^2 - alpha |H|^2 - beta kbar
        defaults alpha = 4/(3n) (n <= 3) or 1/(n-1) (n >= 4); beta = n/2 or 2.
    variant "thm2": Q = |A|^2 + 2 gamma |Kperp| - k |H|^2 - epsilon kbar
        defaults k = 29/40, gamma = 1 - (4/3)k - delta, epsilon = 4(k - 1/2);
        requires gamma >= 0, which caps k at 3(1 - delta)/4.  The catalogued
        statement uses k <= 29/40; larger k is allowed here so the critical
        threshold can be located by bisection.
    """

    variant: str
    n: int = 2
    alpha: float | None = None
    beta: float | None = None
    k: float | None = None
    gamma: float | None = None
    epsilon: float | None = None
    delta: float = 0.0
    kbar: float = 1.0

    def __post_init__(self):
        v = str(self.variant).strip().lower()
        if v in ("thm1", "1"):
            v = "thm1"
        elif v in ("thm2", "2"):
            v = "thm2"
        else:
            raise BadParams("variant must be thm1 or thm2, got %r" % (self.variant,))
        self.variant = v
        self.n = int(self.n)
        if self.n < 2:
            raise BadParams("need n >= 2")
        if self.delta < 0:
            raise BadParams("delta must be nonnegative")
        if v == "thm1":
            if self.alpha is None:
                self.alpha = 4.0 / (3.0 * self.n) if self.n <= 3 else 1.0 / (self.n - 1)
            if self.beta is None:
                self.beta = self.n / 2.0 if self.n <= 3 else 2.0
            if self.alpha <= 1.0 / self.n:
                raise BadParams("thm1 needs alpha > 1/n")
            if self.beta < 0:
                raise BadParams("thm1 needs beta >= 0")
        else:
            if self.n != 2:
                raise BadParams("thm2 is a codimension-two surface cone (n = 2)")
            if self.k is None:
                self.k = 29.0 / 40.0
            if self.epsilon is None:
                self.epsilon = 4.0 * (self.k - 0.5)
            if self.gamma is None:
                self.gamma = 1.0 - (4.0 / 3.0) * self.k - self.delta
            if self.gamma < 0:
                raise BadParams("thm2 needs gamma >= 0 (k too large for this delta)")

    def describe(self) -> dict:
        return {
            "variant": self.variant,
            "n": self.n,
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "kbar": self.kbar,
        }


def q_from_invariants(normA2, normH2, kperp, params: ConeParams):
    """Q from raw invariants; array-friendly."""
    if params.variant == "thm1":
        return normA2 - params.alpha * normH2 - params.beta * params.kbar
    if kperp is None:
        raise BadDims("thm2 needs the normal curvature, i.e. (n, k) = (2, 2)")
    return (normA2 + 2.0 * params.gamma * np.abs(kperp)
            - params.k * normH2 - params.epsilon * params.kbar)


def q_value(g, params: ConeParams):
    """Q at a PointGeometry/BatchGeometry; negative means inside the cone."""
    kp = g.kperp if params.variant == "thm2" else None
    return q_from_invariants(g.normA2, g.normH2, kp, params)


def reaction_of_Q(h, params: ConeParams) -> float:
    """Zeroth-order reaction of Q along the flow, assembled from the
    identities-module contractions.

    Thm1:  2 R1 - 2 alpha R2 - 2n kbar |Atr|^2 - 2n(alpha - 1/n) kbar |H|^2
    Thm2:  2 R1 + 2 gamma sign(Kperp) R3 - 2 k R2
           - 4 kbar |Atr|^2 + 2 kbar |H|^2 - 4 k kbar |H|^2 - 4 gamma kbar |Kperp|
    """
    comp = h.components if isinstance(h, SecondFundamentalForm) else np.asarray(h, float)
    if comp.ndim != 3 or comp.shape[0] != comp.shape[1]:
        raise BadDims("expected a single (n, n, k) array of components")
    n = comp.shape[0]
    kb = params.kbar
    rt = reaction_terms(comp)
    _, normH2, traceless = (float(x) for x in norms_batch(comp))
    if params.variant == "thm1":
        if n != params.n:
            raise BadDims("h has n = %d but params.n = %d" % (n, params.n))
        return (2.0 * rt.r1 - 2.0 * params.alpha * rt.r2
                - 2.0 * n * kb * traceless
                - 2.0 * n * (params.alpha - 1.0 / n) * kb * normH2)
    if comp.shape != (2, 2, 2):
        raise BadDims("thm2 reaction needs (n, k) = (2, 2)")
    kp = float(kperp_scalar(comp))
    return (2.0 * rt.r1 + 2.0 * params.gamma * np.sign(kp) * rt.r3
            - 2.0 * params.k * rt.r2
            - 4.0 * kb * traceless + 2.0 * kb * normH2
            - 4.0 * params.k * kb * normH2
            - 4.0 * params.gamma * kb * abs(kp))


# ---------------------------------------------------------------------------
# slice realizations

def thm1_config_h(n: int, x, y, hsq) -> np.ndarray:
    """Special-frame h with |Atr1|^2 = x, |Atr-|^2 = y, |H|^2 = hsq.

    Two normal directions: the first carries the mean curvature and a
    diagonal traceless part, the second a pure off-diagonal block.  For
    surfaces (n = 2) this realization maximizes R1 at fixed (x, y), so the
    sweep supremum is attained on it; for higher n it realizes the same
    |Atr1|^2/|Atr-|^2 split the estimates are phrased in.
    """
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    hsq = np.atleast_1d(np.asarray(hsq, float))
    m = x.shape[0]
    h = np.zeros((m, n, n, 2))
    idx = np.arange(n)
    h[:, idx, idx, 0] = (np.sqrt(hsq) / n)[:, None]
    s = np.sqrt(x / 2.0)
    h[:, 0, 0, 0] += s
    h[:, 1, 1, 0] -= s
    t = np.sqrt(y / 2.0)
    h[:, 0, 1, 1] = t
    h[:, 1, 0, 1] = t
    return h


def thm2_config_h(a, b, c, hsq) -> np.ndarray:
    """Special-frame h for (n, k) = (2, 2) from (a, b, c) and |H|^2."""
    a = np.atleast_1d(np.asarray(a, float))
    b = np.atleast_1d(np.asarray(b, float))
    c = np.atleast_1d(np.asarray(c, float))
    hsq = np.atleast_1d(np.asarray(hsq, float))
    m = a.shape[0]
    h = np.zeros((m, 2, 2, 2))
    half = np.sqrt(hsq) / 2.0
    h[:, 0, 0, 0] = half + a
    h[:, 1, 1, 0] = half - a
    h[:, 0, 0, 1] = b
    h[:, 1, 1, 1] = -b
    h[:, 0, 1, 1] = c
    h[:, 1, 0, 1] = c
    return h


def realize_argmax(params: ConeParams, argmax: dict):
    """(h components, params with kbar = slice value) for an argmax record."""
    p = replace(params, kbar=float(argmax["kbar"]))
    if params.variant == "thm1":
        h = thm1_config_h(params.n, argmax["x"], argmax["y"], argmax["hsq"])[0]
    else:
        h = thm2_config_h(argmax["a"], argmax["b"], argmax["c"], argmax["hsq"])[0]
    return h, p


def _thm1_reaction_batch(params: ConeParams, x, y, kb, hsq):
    h = thm1_config_h(params.n, x, y, hsq)
    r1 = r1_batch(h)
    r2 = r2_batch(h)
    _, normH2, traceless = norms_batch(h)
    n = params.n
    return (2.0 * r1 - 2.0 * params.alpha * r2
            - 2.0 * n * kb * traceless
            - 2.0 * n * (params.alpha - 1.0 / n) * kb * normH2)


def _thm2_reaction_batch(params: ConeParams, a, b, c, kb, hsq):
    """(printed-R3 route, frame-invariant-R3 route).

    sign(Kperp) R3 = |Kperp| (|A|^2 + 2|Atr|^2 - 2 b^2) in the construction
    frame; the second route drops the frame-dependent -2b^2 term, which is
    exactly the measured brute-vs-closed discrepancy of kperp_checks.
    """
    h = thm2_config_h(a, b, c, hsq)
    r1 = r1_batch(h)
    r2 = r2_batch(h)
    normA2, normH2, traceless = norms_batch(h)
    kpa = np.abs(kperp_scalar(h))
    common = (2.0 * r1 - 2.0 * params.k * r2
              - 4.0 * kb * traceless + 2.0 * kb * normH2
              - 4.0 * params.k * kb * normH2
              - 4.0 * params.gamma * kb * kpa)
    printed = common + 2.0 * params.gamma * kpa * (normA2 + 2.0 * traceless - 2.0 * b * b)
    invariant = common + 2.0 * params.gamma * kpa * (normA2 + 2.0 * traceless)
    return printed, invariant


# ---------------------------------------------------------------------------
# sweep machinery

@dataclass
class SweepGrid:
    """Sampling plan for reaction_sweep.

    resolution^3 lattice evaluations at the base level (resolution for the
    one-dimensional hzero stratum), then `refine_rounds` local refinements
    shrinking the lattice spacing by `refine_factor` around the incumbent
    argmax.  stratum "full" sweeps the whole Q = 0 slice; "hzero" (thm1
    only) restricts to |H| = 0, where the beta boundary lives.
    """

    resolution: int = 200
    refine_rounds: int = 3
    refine_factor: int = 4
    chunk: int = 131072
    stratum: str = "full"
    bisect: bool = True

    def __post_init__(self):
        if self.resolution < 2:
            raise BadParams("resolution must be at least 2")
        if self.stratum not in ("full", "hzero"):
            raise BadParams("stratum must be 'full' or 'hzero'")
        if self.chunk < 1 or self.refine_factor < 2 or self.refine_rounds < 0:
            raise BadParams("bad sweep grid settings")


@dataclass
class SweepReport:
    variant: str
    stratum: str
    params: dict
    sup_value: float
    argmax: dict
    samples: int
    critical_constant: float | None
    bracket_width: float | None
    notes: list

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "stratum": self.stratum,
            "params": self.params,
            "sup_value": self.sup_value,
            "argmax": self.argmax,
            "samples": self.samples,
            "critical_constant": self.critical_constant,
            "bracket_width": self.bracket_width,
            "notes": list(self.notes),
        }


def _feasible_thm1(params, x, y, kb):
    hsq = (x + y - params.beta * kb) / (params.alpha - 1.0 / params.n)
    return hsq


def _feasible_thm2(params, a, b, c, kb):
    return (2.0 * (a * a + b * b + c * c) + 4.0 * params.gamma * a * c
            - params.epsilon * kb) / (params.k - 0.5)


def _eval_configs(params, stratum, coords):
    """Reaction on explicit free coordinates; infeasible entries -> -inf.

    Returns (values, inv_values, feasible_mask, config_arrays) where
    config_arrays are the slice coordinates needed to rebuild the point.
    """
    if params.variant == "thm1" and stratum == "hzero":
        tau = coords[0]
        s_tot = params.beta / (1.0 + params.beta)
        kbv = 1.0 / (1.0 + params.beta)
        x = tau * s_tot
        y = (1.0 - tau) * s_tot
        kb = np.full_like(x, kbv)
        hsq = np.zeros_like(x)
        ok = (tau >= 0.0) & (tau <= 1.0)
        xs, ys = np.clip(x, 0.0, None), np.clip(y, 0.0, None)
        vals = np.where(ok, _thm1_reaction_batch(params, xs, ys, kb, hsq), -np.inf)
        return vals, None, ok, {"x": x, "y": y, "kbar": kb, "hsq": hsq}
    if params.variant == "thm1":
        x, y = coords
        kb = 1.0 - x - y
        ok = (x >= 0.0) & (y >= 0.0) & (kb >= -1e-15)
        kb = np.clip(kb, 0.0, None)
        hsq = _feasible_thm1(params, x, y, kb)
        ok &= hsq >= 0.0
        hsq = np.where(ok, hsq, 0.0)
        raw = _thm1_reaction_batch(
            params, np.clip(x, 0.0, None), np.clip(y, 0.0, None), kb, hsq)
        vals = np.where(ok, raw, -np.inf)
        return vals, None, ok, {"x": x, "y": y, "kbar": kb, "hsq": hsq}
    a, b, c = coords
    r2_ = a * a + b * b + c * c
    kb = 1.0 - r2_
    ok = (a >= 0.0) & (b >= 0.0) & (c >= 0.0) & (kb >= -1e-15)
    kb = np.clip(kb, 0.0, None)
    if abs(params.k - 0.5) < 1e-12:
        ok &= False
        hsq = np.zeros_like(a)
    else:
        hsq = _feasible_thm2(params, a, b, c, kb)
        ok &= hsq >= 0.0
        hsq = np.where(ok, hsq, 0.0)
    printed, inv = _thm2_reaction_batch(params, a, b, c, kb, hsq)
    vals = np.where(ok, printed, -np.inf)
    invs = np.where(ok, inv, -np.inf)
    return vals, invs, ok, {"a": a, "b": b, "c": c, "kbar": kb, "hsq": hsq}


def _lattice_chunk(params, stratum, res, lo, hi):
    """Free coordinates of lattice indices [lo, hi) in lexicographic order."""
    idx = np.arange(lo, hi)
    if params.variant == "thm1" and stratum == "hzero":
        return (idx / (res - 1.0),)
    if params.variant == "thm1":
        i = idx // (res * res)
        j = (idx // res) % res
        l = idx % res
        s = i + j + l
        s = np.where(s == 0, 1, s)  # index 0 is discarded by feasibility anyway
        x = i / s
        y = j / s
        bad = (i + j + l) == 0
        x = np.where(bad, -1.0, x)  # forces infeasible
        return (x, y)
    i = idx // (res * res)
    j = (idx // res) % res
    l = idx % res
    return (i / (res - 1.0), j / (res - 1.0), l / (res - 1.0))


def _chunk_size(params, grid):
    scale = (2.0 / params.n) ** 2
    return max(1024, int(grid.chunk * scale))


def _run_base_sweep(params, grid):
    res = grid.resolution
    stratum = grid.stratum
    total = res if (params.variant == "thm1" and stratum == "hzero") else res ** 3
    chunk = _chunk_size(params, grid)
    starts = list(range(0, total, chunk))

    def work(lo):
        hi = min(lo + chunk, total)
        coords = _lattice_chunk(params, stratum, res, lo, hi)
        vals, invs, ok, cfg = _eval_configs(params, stratum, coords)
        count = int(ok.sum())
        if count == 0:
            return count, -np.inf, None, -np.inf
        pos = int(np.argmax(vals))  # first max = lexicographically smallest
        best_cfg = {k: float(v[pos]) for k, v in cfg.items()}
        inv_sup = float(invs.max()) if invs is not None else -np.inf
        return count, float(vals[pos]), best_cfg, inv_sup

    samples = 0
    best = -np.inf
    best_cfg = None
    inv_sup = -np.inf
    workers = thread_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(work, starts))
    else:
        results = [work(lo) for lo in starts]
    for count, val, cfg, inv in results:  # reduce in lattice order
        samples += count
        if cfg is not None and val > best:
            best = val
            best_cfg = cfg
        if inv > inv_sup:
            inv_sup = inv
    return best, best_cfg, samples, inv_sup


def _free_coords(params, stratum, cfg):
    if params.variant == "thm1" and stratum == "hzero":
        s_tot = params.beta / (1.0 + params.beta)
        return [cfg["x"] / s_tot if s_tot > 0 else 0.0]
    if params.variant == "thm1":
        return [cfg["x"], cfg["y"]]
    return [cfg["a"], cfg["b"], cfg["c"]]


def _refine(params, grid, best, best_cfg):
    """Local lattice refinement around the incumbent; monotone in sup."""
    stratum = grid.stratum
    center = _free_coords(params, stratum, best_cfg)
    dim = len(center)
    spacing = 1.0 / grid.resolution
    extra = 0
    for _ in range(grid.refine_rounds):
        axes = [np.linspace(co - spacing, co + spacing, 2 * grid.refine_factor + 1)
                for co in center]
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = tuple(m.reshape(-1) for m in mesh)
        vals, _, ok, cfg = _eval_configs(params, stratum, coords)
        extra += int(ok.sum())
        pos = int(np.argmax(vals))
        if np.isfinite(vals[pos]) and vals[pos] > best:
            best = float(vals[pos])
            best_cfg = {k: float(v[pos]) for k, v in cfg.items()}
            center = _free_coords(params, stratum, best_cfg)
        spacing /= grid.refine_factor
    return best, best_cfg, extra


def _sup_at(params, resolution, stratum, chunk):
    g = SweepGrid(resolution=resolution, refine_rounds=0, chunk=chunk,
                  stratum=stratum, bisect=False)
    best, cfg, _, _ = _run_base_sweep(params, g)
    return best if cfg is not None else -np.inf


def _with_constant(params, stratum, value):
    if params.variant == "thm2":
        return replace(params, k=value, gamma=None, epsilon=None)
    if stratum == "hzero":
        return replace(params, beta=value)
    return replace(params, alpha=value)


def _scan_range(params, stratum):
    if params.variant == "thm2":
        hi = 0.75 * (1.0 - params.delta) - 1e-4
        return np.linspace(0.52, min(0.7499, hi), 21)
    n = params.n
    if stratum == "hzero":
        b0 = 2.0 * n / 3.0
        return np.linspace(0.2 * b0, 1.8 * b0, 21)
    span = max(params.alpha - 1.0 / n, 1.0 / (n - 1) - 1.0 / n)
    return np.linspace(1.0 / n + 0.05 * span, 1.0 / n + 2.0 * span, 21)


def _critical_constant(params, grid):
    """Scan the cone constant, bracket every sign change of the sweep sup,
    and bisect the first bracket down to BRACKET_WIDTH."""
    stratum = grid.stratum
    res = min(grid.resolution, 64)
    chunk = grid.chunk
    values = _scan_range(params, stratum)
    notes = []

    def positive(cv):
        p = _with_constant(params, stratum, float(cv))
        return _sup_at(p, res, stratum, chunk) > SUP_SIGN_TOL

    flags = [positive(cv) for cv in values]
    brackets = [(float(values[i]), float(values[i + 1]))
                for i in range(len(values) - 1) if flags[i] != flags[i + 1]]
    if not brackets:
        notes.append("critical scan: no sign change of sup over [%.4f, %.4f]"
                     % (values[0], values[-1]))
        return None, None, notes
    if len(brackets) > 1:
        notes.append("critical scan: multiple sign changes at %s; bisecting the first"
                     % (["(%.4f, %.4f)" % b for b in brackets],))
    lo, hi = brackets[0]
    lo_pos = positive(lo)
    while hi - lo > BRACKET_WIDTH:
        mid = 0.5 * (lo + hi)
        if positive(mid) == lo_pos:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), hi - lo, notes


def reaction_sweep(params: ConeParams, grid: SweepGrid | dict | int | None = None) -> SweepReport:
    """Supremum of reaction_of_Q over the compactified Q = 0 slice.

    params.kbar is ignored: the background curvature is a slice coordinate
    under the homogeneity normalization.  The reported sup_value is the
    scalar re-evaluation of the argmax through reaction_of_Q, so the report
    is reproducible from its own argmax record.
    """
    if grid is None:
        grid = SweepGrid()
    elif isinstance(grid, int):
        grid = SweepGrid(resolution=grid)
    elif isinstance(grid, dict):
        grid = SweepGrid(**grid)
    if grid.stratum == "hzero" and params.variant != "thm1":
        raise BadParams("the |H| = 0 stratum sweep is a thm1 construction")

    best, best_cfg, samples, inv_sup = _run_base_sweep(params, grid)
    if best_cfg is None:
        raise EmptyFeasibleSet("no feasible configuration on the Q = 0 slice")
    if grid.refine_rounds > 0:
        best, best_cfg, extra = _refine(params, grid, best, best_cfg)
        samples += extra

    h, p_at = realize_argmax(params, best_cfg)
    sup = float(reaction_of_Q(h, p_at))
    notes = []
    if abs(sup - best) > 1e-10 * max(1.0, abs(best)):
        notes.append("argmax recheck moved sup from %.15e to %.15e" % (best, sup))

    claim = "sup <= 0 (negativity claim holds on this slice)" if sup <= SUP_SIGN_TOL \
        else "sup > 0 (negativity claim FAILS on this slice)"
    notes.append("measured sup = %.6e: %s" % (sup, claim))
    if params.variant == "thm2":
        notes.append("frame-invariant-R3 variant sup = %.6e" % inv_sup)

    critical = width = None
    if grid.bisect:
        critical, width, extra_notes = _critical_constant(params, grid)
        notes.extend(extra_notes)

    return SweepReport(
        variant=params.variant,
        stratum=grid.stratum,
        params=params.describe(),
        sup_value=sup,
        argmax=best_cfg,
        samples=int(samples),
        critical_constant=critical,
        bracket_width=width,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# discriminant bookkeeping

def discriminant_report(n: int, alpha: float, beta: float) -> dict:
    """Evaluate the catalogued discriminant formulas verbatim and, separately,
    test negativity of the underlying quadratic form by direct sweep.

    The quadratic form in (x, w) = (|Atr-|^2, kbar) is

        q = c_x x^2 + 4 (B' - n) x w - 2 beta (B' - n) w^2,
        B' = beta / (n (alpha - 1/n)),
        c_x = -3 (n <= 4)  or  -(2(n - 4) + 3) (n >= 4),

    and direct_negativity reports whether q < 0 on the nonnegative quadrant
    away from the origin.  The printed formulas are recorded as-is; their
    sign is not asserted anywhere.
    """
    n = int(n)
    if n < 2:
        raise BadParams("need n >= 2")
    if alpha <= 1.0 / n:
        raise BadParams("need alpha > 1/n")
    bprime = beta / (n * (alpha - 1.0 / n))
    cross = bprime - n
    printed1 = 8.0 * cross * (2.0 * bprime - 3.0 * beta)
    printed2 = 8.0 * cross * (2.0 * bprime - (2.0 * (n - 4) + 3.0) * beta)
    c_x = -3.0 if n <= 4 else -(2.0 * (n - 4) + 3.0)

    t = np.linspace(0.0, 1.0, 2001)
    x, w = t, 1.0 - t
    q = c_x * x * x + 4.0 * cross * x * w - 2.0 * beta * cross * w * w
    qmax = float(q.max())
    return {
        "n": n,
        "alpha": alpha,
        "beta": beta,
        "delta_printed_1": float(printed1),
        "delta_printed_2": float(printed2),
        "quadratic_coeffs": {"xx": float(c_x), "xw": float(4.0 * cross),
                             "ww": float(-2.0 * beta * cross)},
        "direct_negativity": bool(qmax < 0.0),
        "quadrant_max": qmax,
    }


# ---------------------------------------------------------------------------
# blow-up comparison and the curvature lower bound along paths

@dataclass
class BlowupTime:
    b0: float
    tau: float
    n: int
    t_star: float

    def b(self, t):
        t = np.asarray(t, dtype=float)
        denom = self.n - 8.0 * self.b0 * (t - self.tau)
        out = np.where(t < self.t_star, self.n * self.b0 / np.where(denom > 0, denom, 1.0),
                       np.inf)
        if out.ndim == 0:
            return float(out)
        return out


def blowup_time(b0: float, tau: float, n: int) -> BlowupTime:
    """Comparison solution b(t) = n b0 / (n - 8 b0 (t - tau)) and its blow-up
    time t_star = tau + n/(8 b0)."""
    if b0 <= 0:
        raise BadParams("need b0 > 0")
    return BlowupTime(b0=float(b0), tau=float(tau), n=int(n),
                      t_star=float(tau) + n / (8.0 * float(b0)))


def harnack_bound(h0: float, csharp: float, t: float, delta0: float, d) -> float:
    """Lower bound for |H| at distance d from a point where |H| = h0:

        h0 / (1 + csharp * exp(-(delta0/2) t) * d * h0)

    Preconditions h0, csharp > 0 and d >= 0 are the caller's contract; the
    bound is monotone nonincreasing in d and equals h0 at d = 0.
    """
    d = np.asarray(d, dtype=float)
    out = h0 / (1.0 + csharp * np.exp(-0.5 * delta0 * t) * d * h0)
    if out.ndim == 0:
        return float(out)
    return out
