"""Natural metric assembly and curvature of the equilibrium manifold.

The metric is a conformal rescaling of the potential's Hessian,

    g_ab = c * d2Phi/dE^a dE^b,   c = sum_{j != i} 1 / (E^j dPhi/dE^j),

with the i-th (excluded) pair being the one traded for the potential under a
change of representation.  First and second coordinate derivatives of g are
assembled from the order-3/order-4 jet slots by the product rule, which is all
the Levi-Civita connection and the Riemann tensor need.

Curvature conventions:  R^rho_{sigma mu nu} = d_mu Gamma^rho_{nu sigma}
- d_nu Gamma^rho_{mu sigma} + Gamma Gamma - Gamma Gamma,
Ricci_{sigma nu} = R^rho_{sigma rho nu}, R = g^{sigma nu} Ricci_{sigma nu}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetric, NonFinite, SingularPrefactor
from .jets import Jet4, jet_eval
from .systems import SystemSpec, domain_check
from .errors import DomainViolation

DEGENERACY_RTOL = 1e-12      # |det g| < rtol * max|g_ab|^2 flags degeneracy
PREFACTOR_ATOL = 1e-13       # |E^j Phi_j| below this (times scale) is singular
NONFINITE_R = 1e12           # |R| beyond this is reported, not trusted


@dataclass
class MetricTensor:
    at: np.ndarray
    g: np.ndarray          # (n, n)
    dg: np.ndarray         # (c, a, b) = d_c g_ab
    ddg: np.ndarray        # (d, c, a, b) = d_d d_c g_ab
    det: float
    conformal_factor: float

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def scale(self) -> float:
        return float(np.max(np.abs(self.g)))

    def is_degenerate(self) -> bool:
        s = self.scale()
        return abs(self.det) < DEGENERACY_RTOL * max(s * s, 1e-300)


@dataclass
class ChristoffelArray:
    gamma: np.ndarray      # (a, b, c) = Gamma^a_{bc}
    dgamma: np.ndarray     # (d, a, b, c) = d_d Gamma^a_{bc}


@dataclass
class CurvatureResult:
    at: np.ndarray
    ricci_scalar: float
    det_g: float
    degenerate: bool
    conformal_factor: float
    nonfinite: bool = False
    sign_factor: int | None = None     # filled by oracle harnesses
    cross_check_dev: float | None = None  # 2D identity residual, diagnostics


def natural_metric(jet: Jet4, x, excluded_index: int,
                   check_degenerate: bool = True) -> MetricTensor:
    """Assemble g, dg, ddg from a Jet4 of the potential at ``x``.

    Raises SingularPrefactor when some E^j Phi_j in the conformal sum
    vanishes, and (by default) DegenerateMetric when |det g| is below the
    degeneracy threshold; pass ``check_degenerate=False`` to inspect the
    degenerate tensor instead.
    """
    x = np.asarray([float(c) for c in x])
    n = jet.n
    if jet.order < 4:
        raise ValueError("natural_metric needs a jet of order 4")
    G, H, T3, F4 = jet.grad, jet.hess, jet.third, jet.fourth

    js = [j for j in range(n) if j != excluded_index]
    w = np.array([x[j] * G[j] for j in js])
    scale = max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
    if np.any(np.abs(w) < PREFACTOR_ATOL * scale):
        bad = js[int(np.argmin(np.abs(w)))]
        raise SingularPrefactor(
            f"E^{bad} * dPhi/dE^{bad} = {w[int(np.argmin(np.abs(w)))]:.3e} "
            "vanishes in the conformal sum")

    # conformal factor and its first/second coordinate derivatives
    c = float(np.sum(1.0 / w))
    dc = np.zeros(n)
    ddc = np.zeros((n, n))
    for idx, j in enumerate(js):
        wj = w[idx]
        dw = np.array([(G[j] if a == j else 0.0) + x[j] * H[j, a]
                       for a in range(n)])
        ddw = np.empty((n, n))
        for a in range(n):
            for b in range(n):
                ddw[a, b] = ((H[j, b] if a == j else 0.0)
                             + (H[j, a] if b == j else 0.0)
                             + x[j] * T3[j, a, b])
        dc += -dw / wj ** 2
        ddc += 2.0 * np.outer(dw, dw) / wj ** 3 - ddw / wj ** 2

    g = c * H
    dg = np.empty((n, n, n))
    ddg = np.empty((n, n, n, n))
    for cc in range(n):
        dg[cc] = dc[cc] * H + c * T3[:, :, cc]
    for d in range(n):
        for cc in range(n):
            ddg[d, cc] = (ddc[cc, d] * H + dc[cc] * T3[:, :, d]
                          + dc[d] * T3[:, :, cc] + c * F4[:, :, cc, d])

    det = float(np.linalg.det(g))
    m = MetricTensor(at=x, g=g, dg=dg, ddg=ddg, det=det, conformal_factor=c)
    if check_degenerate and m.is_degenerate():
        raise DegenerateMetric(
            f"|det g| = {abs(det):.3e} below degeneracy threshold", metric=m)
    return m


def metric_determinant(m: MetricTensor) -> float:
    return m.det


def christoffel(m: MetricTensor) -> ChristoffelArray:
    """Levi-Civita connection and its first coordinate derivatives."""
    if m.is_degenerate():
        raise DegenerateMetric("metric is degenerate", metric=m)
    n = m.n
    ginv = np.linalg.inv(m.g)
    # dg[c,a,b] = d_c g_ab ; bracket[b,c,d] = d_b g_dc + d_c g_db - d_d g_bc
    dg = m.dg
    bracket = np.empty((n, n, n))
    for b in range(n):
        for c in range(n):
            for d in range(n):
                bracket[b, c, d] = dg[b, d, c] + dg[c, d, b] - dg[d, b, c]
    gamma = 0.5 * np.einsum("ad,bcd->abc", ginv, bracket)

    dginv = np.empty((n, n, n))
    for e in range(n):
        dginv[e] = -ginv @ dg[e] @ ginv
    dbracket = np.empty((n, n, n, n))   # (e, b, c, d) = d_e bracket[b,c,d]
    ddg = m.ddg
    for e in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    dbracket[e, b, c, d] = (ddg[e, b, d, c] + ddg[e, c, d, b]
                                            - ddg[e, d, b, c])
    dgamma = 0.5 * (np.einsum("ead,bcd->eabc", dginv, bracket)
                    + np.einsum("ad,ebcd->eabc", ginv, dbracket))
    return ChristoffelArray(gamma=gamma, dgamma=dgamma)


def riemann_down(m: MetricTensor, ch: ChristoffelArray) -> np.ndarray:
    """Fully covariant Riemann tensor R_{abcd}."""
    up = riemann_up(ch)
    return np.einsum("ae,ebcd->abcd", m.g, up)


def riemann_up(ch: ChristoffelArray) -> np.ndarray:
    """R^rho_{sigma mu nu} from Gamma and dGamma."""
    gamma, dgamma = ch.gamma, ch.dgamma
    # d_mu Gamma^rho_{nu sigma} is dgamma[mu, rho, nu, sigma]
    t1 = np.einsum("mrns->rsmn", dgamma)
    t2 = np.einsum("nrms->rsmn", dgamma)
    t3 = np.einsum("rml,lns->rsmn", gamma, gamma)
    t4 = np.einsum("rnl,lms->rsmn", gamma, gamma)
    return t1 - t2 + t3 - t4


def ricci_scalar(m: MetricTensor) -> CurvatureResult:
    """Ricci scalar of the natural metric with degeneracy/blow-up flags."""
    if m.is_degenerate():
        raise DegenerateMetric("metric is degenerate", metric=m)
    n = m.n
    ch = christoffel(m)
    up = riemann_up(ch)
    ricci = np.einsum("rsrn->sn", up)
    ginv = np.linalg.inv(m.g)
    R = float(np.einsum("sn,sn->", ginv, ricci))

    cross_dev = None
    if n == 2:
        down = np.einsum("ae,ebcd->abcd", m.g, up)
        R2 = 2.0 * down[0, 1, 0, 1] / m.det
        cross_dev = abs(R - R2)

    nonfinite = not math.isfinite(R) or abs(R) > NONFINITE_R
    if not math.isfinite(R):
        raise NonFinite("Ricci scalar is not finite")
    return CurvatureResult(at=m.at, ricci_scalar=R, det_g=m.det,
                           degenerate=False, conformal_factor=m.conformal_factor,
                           nonfinite=nonfinite, cross_check_dev=cross_dev)


def curvature_at(spec: SystemSpec, x, check_domain: bool = True) -> CurvatureResult:
    """Full pipeline: domain check, order-4 jet, metric, Ricci scalar."""
    if check_domain:
        violated = domain_check(spec, x)
        if violated:
            raise DomainViolation(
                f"{spec.id}: point {tuple(x)} violates {violated}", violated)
    jet = jet_eval(spec.field, x, 4)
    m = natural_metric(jet, x, spec.excluded_index)
    return ricci_scalar(m)


def metric_at(spec: SystemSpec, x, check_degenerate: bool = True) -> MetricTensor:
    jet = jet_eval(spec.field, x, 4)
    return natural_metric(jet, x, spec.excluded_index,
                          check_degenerate=check_degenerate)
