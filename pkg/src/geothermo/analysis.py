"""Manifold-level experiments over the catalog.

Homogeneity detection, curvature-invariance comparisons between
representations, singularity scans with bisection refinement against the
analytic van der Waals phase-transition locus, constant-curvature and
degeneracy sweeps, and the qualitative Ising curvature profile.

The Ising profile runs in extended precision (mpmath): below T ~ 0.3 the
interaction term exp(-4J/T) is smaller than the double-precision cancellation
floor of the surrounding hyperbolic terms, and the curvature — which lives
entirely in that term — cannot be resolved with float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import (DegenerateMetric, DomainViolation, EmptyGrid,
                     GeothermoError, NonFinite, PreconditionFailure)
from .geometry import curvature_at, metric_at, natural_metric, ricci_scalar
from .jets import EPS, MAX_ORDER, Jet4, default_fd_step, fd_partial
from .systems import SystemSpec, get_system
from .transforms import u_from_vP

HOMOGENEITY_LAMBDAS = (1/3, 1/2, 2/3, 3/2, 2.0, 3.0)
HOMOGENEITY_RTOL = 1e-8
BLOWUP_THRESHOLD = 1e8
JUMP_DECADES = 2.0
REFINE_TOL = 1e-6
ISING_T_CUTOFF = 0.05


# ---- grids ---------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int

    def values(self):
        if self.count <= 0:
            return np.empty(0)
        if self.count == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class GridSpec:
    """Linear-spaced rectangular grid, one Axis per coordinate."""

    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(
            a if isinstance(a, Axis) else Axis(*a) for a in self.axes))

    def points(self):
        vals = [a.values() for a in self.axes]
        if any(len(v) == 0 for v in vals) or not vals:
            raise EmptyGrid("grid has no points")
        pts = []

        def rec(prefix, rest):
            if not rest:
                pts.append(tuple(prefix))
                return
            for v in rest[0]:
                rec(prefix + [float(v)], rest[1:])

        rec([], vals)
        return pts

    def shape(self):
        return tuple(a.count for a in self.axes)


def grid_for(spec: SystemSpec, count: int = 15) -> GridSpec:
    """A grid over the spec's sample box."""
    return GridSpec(tuple(Axis(c.name, lo, hi, count)
                          for c, (lo, hi) in zip(spec.coords, spec.sample_box)))


# ---- homogeneity ---------------------------------------------------------


@dataclass
class HomogeneityReport:
    is_homogeneous: bool
    degree: float | None
    max_residual: float
    lambdas: tuple


def homogeneity_degree(fieldval, base, lambdas=HOMOGENEITY_LAMBDAS) -> HomogeneityReport:
    """Fit beta in Phi(lambda E) = lambda^beta Phi(E) by log-log least squares.

    ``fieldval`` is any callable on a coordinate sequence returning a float
    (a compiled relation or ``lambda x: evaluate(spec, x)``).
    """
    base = [float(c) for c in base]
    lambdas = tuple(float(l) for l in lambdas)
    if any(l <= 0 for l in lambdas):
        raise PreconditionFailure("homogeneity samples need lambda > 0")

    def val(pt):
        out = fieldval(pt)
        return out.value if hasattr(out, "value") else float(out)

    phi0 = val(base)
    scale = 1.0 + abs(phi0)
    ratios = []
    vals = []
    for lam in lambdas:
        y = val([lam * c for c in base])
        vals.append(y)
        ratios.append(y / phi0 if phi0 != 0.0 else math.nan)

    usable = [(lam, r) for lam, r in zip(lambdas, ratios)
              if math.isfinite(r) and r > 0.0]
    if len(usable) < 2:
        return HomogeneityReport(False, None, math.inf, lambdas)
    ls = np.array([math.log(lam) for lam, _ in usable])
    lr = np.array([math.log(r) for _, r in usable])
    beta = float(ls @ lr / (ls @ ls))

    residual = max(abs(y - lam**beta * phi0)
                   for lam, y in zip(lambdas, vals))
    homogeneous = residual < HOMOGENEITY_RTOL * scale
    # snap to a clean degree when the fit is essentially exact
    if homogeneous and abs(beta - round(beta)) < 1e-9:
        beta = float(round(beta))
    return HomogeneityReport(homogeneous, beta if homogeneous else None,
                             residual, lambdas)


# ---- invariance ----------------------------------------------------------


@dataclass
class InvarianceReport:
    rows: list          # (point_a, R_a, R_b, abs diff)
    max_abs: float
    max_rel: float
    failures: int


def invariance_report(spec_a: SystemSpec, spec_b: SystemSpec, map_ab,
                      grid: GridSpec) -> InvarianceReport:
    """Compare R between two descriptions over a grid of spec_a points.

    ``map_ab`` sends a spec_a point to the corresponding spec_b point.
    Per-point evaluation errors are excluded from the maxima and counted.
    """
    rows = []
    failures = 0
    max_abs = 0.0
    max_rel = 0.0
    for x in grid.points():
        try:
            ra = curvature_at(spec_a, x).ricci_scalar
            xb = map_ab(list(x))
            rb = curvature_at(spec_b, xb, check_domain=False).ricci_scalar
        except GeothermoError:
            failures += 1
            continue
        d = abs(ra - rb)
        rows.append((x, ra, rb, d))
        max_abs = max(max_abs, d)
        max_rel = max(max_rel, d / (1.0 + abs(ra)))
    return InvarianceReport(rows, max_abs, max_rel, failures)


# ---- singularity scan ----------------------------------------------------


@dataclass
class Detection:
    segment: tuple       # (point_lo, point_hi) bracketing grid points
    refined: tuple       # refined coordinates of the divergence
    axis: int
    classification: str = "unclassified"
    locus_deviation: float | None = None


@dataclass
class ScanReport:
    grid: GridSpec
    values: dict                  # point -> R (math.nan on failure)
    nonfinite: dict               # point -> flag
    detections: list
    locus_points: tuple = ()
    max_locus_dev: float | None = None
    sign_factor: int = 1
    failures: int = 0


def _scan_eval(spec, evaluator, x):
    if evaluator is not None:
        return float(evaluator(x))
    res = curvature_at(spec, x)
    return res.ricci_scalar


def singularity_scan(spec: SystemSpec, grid: GridSpec,
                     blowup_threshold: float = BLOWUP_THRESHOLD,
                     evaluator=None) -> ScanReport:
    """Locate curvature divergences on a grid and refine them by bisection.

    A grid segment is a candidate when |R| crosses ``blowup_threshold``, when
    |R| jumps by more than two decades between neighbors, or when R changes
    sign at large magnitude (a pole crossing).  Each candidate segment is
    bisected toward 1/|R| -> 0 to a 1e-6 coordinate tolerance.

    ``evaluator`` optionally replaces the pipeline (a callable point -> R),
    e.g. for scans in non-fundamental coordinates such as (v, P).
    """
    pts = grid.points()
    values = {}
    nonfinite = {}
    failures = 0
    for x in pts:
        try:
            r = _scan_eval(spec, evaluator, x)
        except GeothermoError:
            r = math.nan
            failures += 1
        values[x] = r
        nonfinite[x] = not math.isfinite(r) or abs(r) > blowup_threshold

    shape = grid.shape()
    idx_of = {x: i for i, x in enumerate(pts)}

    def neighbor(x, axis):
        # next grid point along `axis`, or None at the boundary
        i = idx_of[x]
        stride = 1
        for a in range(len(shape) - 1, axis, -1):
            stride *= shape[a]
        pos = (i // stride) % shape[axis]
        if pos + 1 >= shape[axis]:
            return None
        return pts[i + stride]

    def prev_neighbor(x, axis):
        i = idx_of[x]
        stride = 1
        for a in range(len(shape) - 1, axis, -1):
            stride *= shape[a]
        pos = (i // stride) % shape[axis]
        if pos == 0:
            return None
        return pts[i - stride]

    candidates = []
    for x in pts:
        for axis in range(len(shape)):
            y = neighbor(x, axis)
            if y is None:
                continue
            r0, r1 = values[x], values[y]
            if math.isnan(r0) or math.isnan(r1):
                continue
            a0, a1 = abs(r0), abs(r1)
            crossed = (a0 > blowup_threshold) != (a1 > blowup_threshold)
            jumped = (min(a0, a1) > 0.0
                      and math.log10(max(a0, a1) / max(min(a0, a1), 1e-300))
                      > JUMP_DECADES and max(a0, a1) > 1e3)
            flipped = (r0 * r1 < 0.0 and max(a0, a1) > 1e3
                       and max(a0, a1) / max(min(a0, a1), 1e-300) > 10.0)
            if crossed or jumped or flipped:
                candidates.append((x, y, axis))
            # interior local maximum of |R|: a pole between coarse nodes
            # may not produce a two-decade jump, so bracket it explicitly
            p = prev_neighbor(x, axis)
            if p is not None and not math.isnan(values[p]):
                if a0 > 1e2 and a0 > abs(values[p]) and a0 >= a1:
                    candidates.append((p, y, axis))

    detections = []
    for x, y, axis in candidates:
        refined = _refine_segment(spec, evaluator, x, y, axis,
                                  blowup_threshold)
        if refined is not None:
            detections.append(Detection(segment=(x, y), refined=refined,
                                        axis=axis))

    detections = _merge_detections(detections)
    return ScanReport(grid=grid, values=values, nonfinite=nonfinite,
                      detections=detections, failures=failures)


def _refine_segment(spec, evaluator, x0, x1, axis, blowup_threshold):
    """Ternary search on [x0, x1] toward the |R| maximum (1/|R| -> 0).

    Returns None when the refined maximum stays below ``blowup_threshold``
    (a smooth local bump rather than a pole).
    """
    lo, hi = list(x0), list(x1)

    def absr(pt):
        try:
            r = _scan_eval(spec, evaluator, tuple(pt))
        except GeothermoError:
            return math.inf     # landing on the pole itself
        return abs(r) if math.isfinite(r) else math.inf

    span = abs(hi[axis] - lo[axis])
    scale = max(1.0, abs(lo[axis]), abs(hi[axis]))
    while span > REFINE_TOL * scale:
        t1 = [a + (b - a) / 3.0 for a, b in zip(lo, hi)]
        t2 = [a + 2.0 * (b - a) / 3.0 for a, b in zip(lo, hi)]
        if absr(t1) < absr(t2):
            lo = t1
        else:
            hi = t2
        span = abs(hi[axis] - lo[axis])
    best = [0.5 * (a + b) for a, b in zip(lo, hi)]
    if absr(best) < blowup_threshold:
        return None
    return tuple(best)


def _merge_detections(detections, tol=1e-4):
    out = []
    for d in detections:
        dup = False
        for kept in out:
            if (d.axis == kept.axis
                    and max(abs(a - b) for a, b in zip(d.refined, kept.refined))
                    < tol * max(1.0, max(abs(c) for c in kept.refined))):
                dup = True
                break
        if not dup:
            out.append(d)
    out.sort(key=lambda d: d.refined)
    return out


# ---- van der Waals (v, P) scan vs the phase-transition locus -------------


def vdw_vP_evaluator(a: float = 1.0, b: float = 1.0):
    """R as a function of (v, P): eliminate u and run the entropy pipeline."""
    spec = get_system("vdw_s", a=a, b=b)

    def ev(pt):
        v, P = float(pt[0]), float(pt[1])
        u = u_from_vP(v, P, a, b)
        return curvature_at(spec, (u, v)).ricci_scalar

    return ev


def vdw_locus_roots(a: float, b: float, P: float):
    """Positive real roots of 2ab - av + Pv^3 = 0 (candidate transitions)."""
    roots = np.roots([P, 0.0, -a, 2.0 * a * b])
    return tuple(sorted(float(r.real) for r in roots
                        if abs(r.imag) < 1e-10 and r.real > 0.0))


def scan_vdw_vP(P: float, v_range, count: int = 241,
                a: float = 1.0, b: float = 1.0,
                blowup_threshold: float = BLOWUP_THRESHOLD) -> ScanReport:
    """Fixed-pressure line scan of R(v, P) with locus classification.

    Detections within 1e-3 of a positive root of 2ab - av + Pv^3 = 0 are
    classified as "locus"; remaining denominator zeros (P = 0, v = b) as
    "other"; the rest stay "unclassified".
    """
    spec = get_system("vdw_s", a=a, b=b)
    grid = GridSpec((Axis("v", float(v_range[0]), float(v_range[1]), count),
                     Axis("P", P, P, 1)))
    report = singularity_scan(spec, grid, blowup_threshold,
                              evaluator=vdw_vP_evaluator(a, b))
    roots = vdw_locus_roots(a, b, P)
    report.locus_points = tuple((r, P) for r in roots)
    worst = None
    for d in report.detections:
        v = d.refined[0]
        if roots:
            dev = min(abs(v - r) for r in roots)
        else:
            dev = math.inf
        if dev < 1e-3 * max(1.0, abs(v)):
            d.classification = "locus"
            d.locus_deviation = dev
            worst = dev if worst is None else max(worst, dev)
        elif abs(v - b) < 1e-3 or abs(P) < 1e-12:
            d.classification = "other"
        else:
            d.classification = "unclassified"
    report.max_locus_dev = worst
    return report


def locus_numerator_check(a: float, b: float, critical_points):
    """Numerator of R(v, P) on the locus: finite, generically nonzero.

    Each (v_c, P_c) must satisfy 2ab - a v_c + P_c v_c^3 = 0 to 1e-8.
    """
    rows = []
    for vc, Pc in critical_points:
        locus = 2*a*b - a*vc + Pc*vc**3
        if abs(locus) > 1e-8 * max(1.0, abs(a*b), abs(Pc*vc**3)):
            raise PreconditionFailure(
                f"({vc}, {Pc}) is not on the transition locus "
                f"(2ab - av + Pv^3 = {locus:.3e})")
        num = -(a**3 * (vc - 2*b)**2
                * (-9*b**3 + 21*b**2*vc - 13*b*vc**2 + vc**3)) / vc**2
        if not math.isfinite(num):
            raise NonFinite(f"locus numerator not finite at ({vc}, {Pc})")
        rows.append((vc, Pc, num))
    return rows


# ---- constant curvature & degeneracy -------------------------------------


def constant_curvature_check(spec: SystemSpec, grid: GridSpec):
    """(mean R, max |R - mean|) over an in-domain grid."""
    vals = [curvature_at(spec, x).ricci_scalar for x in grid.points()]
    mean = sum(vals) / len(vals)
    spread = max(abs(v - mean) for v in vals)
    return mean, spread


def degeneracy_sweep(alpha_values, beta_values, grid: GridSpec,
                     s0: float = 1.0, C: float = 1.0):
    """min |det g| of the dark-fluid entropy metric per (alpha, beta) cell."""
    pts = grid.points()       # raises EmptyGrid up front
    rows = []
    for al in alpha_values:
        for be in beta_values:
            spec = get_system("chap_s", alpha=float(al), beta=float(be),
                              s0=s0, C=C)
            best = math.inf
            for x in pts:
                try:
                    m = metric_at(spec, x, check_degenerate=False)
                except GeothermoError:
                    continue
                best = min(best, abs(m.det))
            rows.append((float(al), float(be), best))
    return rows


# ---- finite-difference-only curvature oracle -----------------------------


def fd_jet4(fieldval, x) -> Jet4:
    """All partials through order 4 by nested central differences only."""
    x = [float(c) for c in x]
    n = len(x)
    value = fieldval(x)
    value = value.value if hasattr(value, "value") else float(value)
    grad = np.empty(n)
    hess = np.empty((n, n))
    third = np.empty((n, n, n))
    fourth = np.empty((n, n, n, n))
    def h_for(idx):
        # fd_partial's stencil is fourth-order accurate, so the balanced
        # step grows to eps^(1/(k+4)); the default eps^(1/(k+2)) leaves
        # round-off dominant at order 4
        scale = max([1.0] + [abs(x[a]) for a in idx])
        return EPS ** (1.0 / (len(idx) + 4)) * scale

    for i in range(n):
        grad[i] = fd_partial(fieldval, x, (i,), step=h_for((i,)))
    for i in range(n):
        for j in range(i, n):
            hess[i, j] = hess[j, i] = fd_partial(fieldval, x, (i, j),
                                                 step=h_for((i, j)))
    for idx in _sym_indices(n, 3):
        v = fd_partial(fieldval, x, idx, step=h_for(idx))
        for p in _perms(idx):
            third[p] = v
    for idx in _sym_indices(n, 4):
        v = fd_partial(fieldval, x, idx, step=h_for(idx))
        for p in _perms(idx):
            fourth[p] = v
    return Jet4(value=value, grad=grad, hess=hess, third=third, fourth=fourth)


def _sym_indices(n, k):
    def rec(start, left, prefix):
        if left == 0:
            yield tuple(prefix)
            return
        for i in range(start, n):
            yield from rec(i, left - 1, prefix + [i])
    yield from rec(0, k, [])


def _perms(idx):
    from itertools import permutations
    return set(permutations(idx))


def fd_ricci_scalar(spec: SystemSpec, x) -> float:
    """Curvature through the same geometric assembly but FD derivatives only."""
    jet = fd_jet4(spec.field, x)
    m = natural_metric(jet, x, spec.excluded_index)
    return ricci_scalar(m).ricci_scalar


# ---- Ising profile (extended precision) ----------------------------------


@dataclass
class IsingCurve:
    H: float
    T: tuple
    R: tuple
    plateau: float          # R at the largest sampled T
    growth_exponent: float | None = None   # d log|R| / d log T at small T


@dataclass
class IsingProfile:
    J: float
    curves: list = field(default_factory=list)


def _mp_ising_R(J, H, T, dps):
    """Ricci scalar of the Ising free-energy metric at (T, H), in mpmath.

    Same conformal-Hessian assembly as the float pipeline, with all
    derivatives taken by mpmath's arbitrary-precision differentiator.
    """
    with mp.workdps(dps):
        Jm = mp.mpf(J)

        def f(t, h):
            return -t * mp.log(mp.cosh(h / t)
                               + mp.sqrt(mp.sinh(h / t)**2
                                         + mp.exp(-4 * Jm / t)))

        x = (mp.mpf(T), mp.mpf(H))
        n = 2
        cache = {}

        def d(*orders):
            if orders not in cache:
                cache[orders] = mp.diff(f, x, orders)
            return cache[orders]

        G = [d(1, 0), d(0, 1)]
        Hs = [[d(2, 0), d(1, 1)], [d(1, 1), d(0, 2)]]
        T3 = [[[None] * n for _ in range(n)] for _ in range(n)]
        F4 = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    ct = (i == 1) + (j == 1) + (k == 1)
                    T3[i][j][k] = d(3 - ct, ct)
                    for l in range(n):
                        cf = ct + (l == 1)
                        F4[i][j][k][l] = d(4 - cf, cf)

        # excluded slot 0 (the T/s pair); conformal sum over H only
        w = x[1] * G[1]
        c = 1 / w
        dw = [x[1] * Hs[1][0], G[1] + x[1] * Hs[1][1]]
        ddw = [[x[1] * T3[1][0][0],
                Hs[1][0] + x[1] * T3[1][0][1]],
               [Hs[1][0] + x[1] * T3[1][1][0],
                2 * Hs[1][1] + x[1] * T3[1][1][1]]]
        dc = [-dw[a] / w**2 for a in range(n)]
        ddc = [[2 * dw[a] * dw[b] / w**3 - ddw[a][b] / w**2
                for b in range(n)] for a in range(n)]

        g = [[c * Hs[a][b] for b in range(n)] for a in range(n)]
        dg = [[[dc[e] * Hs[a][b] + c * T3[a][b][e]
                for b in range(n)] for a in range(n)] for e in range(n)]
        ddg = [[[[ddc[e][f_] * Hs[a][b] + dc[e] * T3[a][b][f_]
                  + dc[f_] * T3[a][b][e] + c * F4[a][b][e][f_]
                  for b in range(n)] for a in range(n)]
                for f_ in range(n)] for e in range(n)]

        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        ginv = [[g[1][1] / det, -g[0][1] / det],
                [-g[1][0] / det, g[0][0] / det]]
        dginv = []
        for e in range(n):
            m_ = dg[e]
            tmp = [[-sum(ginv[a][i] * m_[i][j] * ginv[j][b]
                         for i in range(n) for j in range(n))
                    for b in range(n)] for a in range(n)]
            dginv.append(tmp)

        def bracket(b_, c_, d_):
            return dg[b_][d_][c_] + dg[c_][d_][b_] - dg[d_][b_][c_]

        def dbracket(e_, b_, c_, d_):
            return (ddg[e_][b_][d_][c_] + ddg[e_][c_][d_][b_]
                    - ddg[e_][d_][b_][c_])

        gamma = [[[sum(ginv[a][dd] * bracket(b_, c_, dd) for dd in range(n)) / 2
                   for c_ in range(n)] for b_ in range(n)] for a in range(n)]
        dgamma = [[[[(sum(dginv[e][a][dd] * bracket(b_, c_, dd)
                          for dd in range(n))
                      + sum(ginv[a][dd] * dbracket(e, b_, c_, dd)
                            for dd in range(n))) / 2
                     for c_ in range(n)] for b_ in range(n)]
                   for a in range(n)] for e in range(n)]

        def riem_up(r, s, mu, nu):
            t = dgamma[mu][r][nu][s] - dgamma[nu][r][mu][s]
            for l in range(n):
                t += gamma[r][mu][l] * gamma[l][nu][s]
                t -= gamma[r][nu][l] * gamma[l][mu][s]
            return t

        R = mp.mpf(0)
        for s in range(n):
            for nu in range(n):
                ricci = sum(riem_up(r, s, r, nu) for r in range(n))
                R += ginv[s][nu] * ricci
        return float(R)


def ising_dps(J, H, T):
    """Working precision: enough digits to resolve exp(-(4J+2H)/T)."""
    return 30 + int(1.2 * (4 * abs(J) + 2 * abs(H)) / T)


def ising_curvature(T: float, H: float, J: float = 1.0) -> float:
    """Extended-precision R(T, H) for the 1-D Ising free energy."""
    if T < ISING_T_CUTOFF:
        raise PreconditionFailure(
            f"T = {T} below the working cutoff {ISING_T_CUTOFF}")
    if H == 0.0:
        raise PreconditionFailure("profile needs H != 0")
    return _mp_ising_R(J, H, T, ising_dps(J, H, T))


def ising_profile(J: float, H_values, T_range, samples: int = 60) -> IsingProfile:
    """R(T) curves per field strength, with plateau and small-T growth rate.

    Temperatures are sampled geometrically over ``T_range``.
    """
    lo, hi = float(T_range[0]), float(T_range[1])
    if lo < ISING_T_CUTOFF:
        raise PreconditionFailure(
            f"T_range starts below the working cutoff {ISING_T_CUTOFF}")
    if lo <= 0 or hi <= lo:
        raise PreconditionFailure("T_range must be increasing and positive")
    Ts = np.geomspace(lo, hi, samples)
    profile = IsingProfile(J=float(J))
    for H in H_values:
        Rs = tuple(ising_curvature(float(t), float(H), J) for t in Ts)
        growth = None
        if samples >= 4:
            # log-log slope over the four lowest temperatures
            lt = np.log(Ts[:4])
            lr = np.log(np.abs(np.array(Rs[:4])))
            if np.all(np.isfinite(lr)):
                growth = float(np.polyfit(lt, lr, 1)[0])
        profile.curves.append(IsingCurve(
            H=float(H), T=tuple(float(t) for t in Ts), R=Rs,
            plateau=Rs[-1], growth_exponent=growth))
    return profile
