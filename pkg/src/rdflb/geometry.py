"""Volumes and Gaussian masses of differences/intersections of two n-balls.

The primitive is a radial integral over spheres: the part of the radius-r
sphere inside the off-center ball is a cap, so every quantity reduces to

    integral  [density](r) * r^(n-1) * Omega_n(theta(r)) dr

with theta(r) from the triangle (r, c1, r1).  Integrands underflow doubles
for n beyond a few hundred, so everything is assembled in the log domain
and re-exponentiated around the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .logdomain import LOG_ZERO, LogReal, log_diff, logsumexp
from .special import (
    log_cone_area,
    log_reg_gamma_lower,
    log_reg_inc_beta,
    noncentral_chi2_cdf,
    unit_ball_volume,
)

__all__ = [
    "BallPair",
    "semiangle",
    "prob_diff",
    "prob_intersect",
    "log_prob_diff",
    "log_prob_intersect",
    "vol_diff",
    "vol_intersect",
]


@dataclass(frozen=True)
class BallPair:
    """Origin ball of radius r0, second ball of radius r1 centered at distance c1.

    sigma2 is the per-coordinate variance of the ambient Gaussian measure.
    """

    dim: int
    r0: float
    c1: float
    r1: float
    sigma2: float = 1.0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dim}")
        if self.r0 < 0 or self.c1 < 0 or self.r1 < 0:
            raise ValueError("radii and center distance must be >= 0")
        if self.sigma2 <= 0:
            raise ValueError(f"variance must be > 0, got {self.sigma2}")


def semiangle(bp: BallPair, r: float) -> float:
    """Cap semiangle theta(r) of the radius-r sphere inside the second ball."""
    if bp.c1 <= 0 or r <= 0:
        raise ValueError("semiangle needs c1 > 0 and r > 0")
    arg = (bp.c1**2 + r * r - bp.r1**2) / (2.0 * bp.c1 * r)
    if not -1.0 - 1e-12 <= arg <= 1.0 + 1e-12:
        raise ValueError(f"cosine argument {arg} outside [-1, 1]: r={r} not in the shell")
    return math.acos(min(1.0, max(-1.0, arg)))


# ---------------------------------------------------------------------------
# batched radial integrals
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _gl_nodes(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def _log_cap_angle(n, c1, r1, rho):
    """cos(theta) clamped to the geometric range; outside values mean the
    sphere is fully inside (theta = pi) or fully outside (theta = 0) the cap."""
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (c1**2 + rho**2 - r1**2) / (2.0 * c1 * rho)
    arg = np.where(np.isnan(arg), 1.0, arg)
    return np.arccos(np.clip(arg, -1.0, 1.0))


def _log_diff_vec(la: np.ndarray, lb: np.ndarray) -> np.ndarray:
    """Vector log(exp(la) - exp(lb)) for la >= lb (slack for roundoff)."""
    la = np.asarray(la, dtype=float)
    lb = np.asarray(lb, dtype=float)
    d = np.where(np.isneginf(la), 0.0, lb - la)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = la + np.log1p(-np.exp(np.minimum(d, 0.0)))
    return np.where((np.isneginf(lb)) | np.isneginf(la), la, out)


def _log_full_shell(n, a, b, sigma2):
    """ln of the full-sphere shell integral over a < r <= b (closed form)."""
    a = np.maximum(a, 0.0)
    if sigma2 is not None:
        la = log_reg_gamma_lower(0.5 * n, 0.5 * b**2 / sigma2)
        lb = log_reg_gamma_lower(0.5 * n, 0.5 * a**2 / sigma2)
        return _log_diff_vec(la, lb)
    with np.errstate(divide="ignore"):
        lvb = unit_ball_volume(n).log_value + n * np.log(b)
        lva = np.where(a > 0, unit_ball_volume(n).log_value + n * np.log(np.maximum(a, 1e-300)), LOG_ZERO)
    return _log_diff_vec(lvb, lva)


def _cap_half_quadrature(n, edge, far, c1, r1, sigma2, from_left, nodes):
    """Quadrature for the cap shell between edge and far, substituting
    r = edge +- u**2 so the sqrt behavior of theta at tangency is analytic.

    Returns log-terms (rows x nodes_total) to be logsumexp-reduced.
    """
    rows = edge.shape[0]
    span = np.maximum((far - edge) * np.where(from_left, 1.0, -1.0), 0.0)
    u_max = np.sqrt(span)
    # refine in u on the edge decay length of the log-integrand
    edge_safe = np.maximum(edge, 1e-300)
    if sigma2 is not None:
        slope = np.abs(-edge_safe / sigma2 + (n - 1) / edge_safe)
    else:
        slope = (n - 1) / edge_safe
    delta = 1.0 / np.maximum(slope, 1e-300)
    u_splits = np.sqrt(np.minimum(delta[:, None] * np.array([[3.0, 15.0, 60.0]]), span[:, None]))
    frac = u_max[:, None] * np.array([[0.35, 0.8]])
    edges_u = np.concatenate(
        [np.zeros((rows, 1)), np.sort(np.concatenate([u_splits, frac], axis=1), axis=1), u_max[:, None]],
        axis=1,
    )
    x, w = _gl_nodes(nodes)
    a = edges_u[:, :-1]
    b = edges_u[:, 1:]
    half = 0.5 * (b - a)
    u = (a[:, :, None] + half[:, :, None] * (x[None, None, :] + 1.0)).reshape(rows, -1)
    wgt = (half[:, :, None] * w[None, None, :]).reshape(rows, -1)
    sgn = np.where(from_left, 1.0, -1.0)[:, None]
    rho = edge[:, None] + sgn * u**2
    jac = 2.0 * u

    with np.errstate(divide="ignore", invalid="ignore"):
        base = (n - 1) * np.log(np.maximum(rho, 1e-300))
        if sigma2 is not None:
            base = base - rho**2 / (2.0 * sigma2) - 0.5 * n * math.log(2.0 * math.pi * sigma2)
        ok = (wgt > 0) & (jac > 0)
        base = np.where(ok, base + np.log(np.where(ok, wgt * jac, 1.0)), LOG_ZERO)
    # the cap area is at most the full sphere: lanes more than ~46 nats
    # below the row peak cannot matter, skip their beta evaluation
    row_max = np.max(base, axis=1, keepdims=True)
    keep = ok & (base >= row_max - 46.0)
    log_omega = np.full(base.shape, LOG_ZERO)
    if np.any(keep):
        ri, _ = np.nonzero(keep)
        theta = _log_cap_angle(n, c1[ri], r1[ri], rho[keep])
        log_omega[keep] = log_cone_area(n, theta)
    log_terms = base + log_omega
    return np.where(np.isnan(log_terms), LOG_ZERO, log_terms)


def log_shell_mass_batch(
    n: int,
    lo: np.ndarray,
    hi: np.ndarray,
    c1: np.ndarray,
    r1: np.ndarray,
    sigma2: float | None,
    nodes_per_panel: int = 16,
) -> np.ndarray:
    """ln of integral_lo^hi [density] r^(n-1) Omega_n(theta(r)) dr, per row.

    sigma2=None drops the Gaussian density (volume mode).  Rows with
    hi <= lo return exact log-zero.  The region below |c1 - r1| (full
    spheres) is handled in closed form; the cap region is integrated in
    two halves with a square-root substitution at each end, which removes
    the tangency cusps of theta(r).
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    c1 = np.broadcast_to(np.asarray(c1, dtype=float), lo.shape).astype(float)
    r1 = np.broadcast_to(np.asarray(r1, dtype=float), lo.shape).astype(float)

    kink = np.abs(c1 - r1)
    # full-sphere segment exists only when the origin is inside C1
    a_hi = np.minimum(hi, kink)
    full_rows = (r1 > c1) & (a_hi > lo)
    log_full = np.where(full_rows, _log_full_shell(n, np.where(full_rows, lo, 0.0), np.where(full_rows, a_hi, 1.0), sigma2), LOG_ZERO)

    cap_lo = np.maximum(lo, kink)
    cap_hi = np.minimum(hi, c1 + r1)
    has_cap = cap_hi > cap_lo
    width = np.maximum(cap_hi - cap_lo, 0.0)
    # anchor the halves so the integrand peak faces a substitution edge:
    # the radial density peak in probability mode, the upper limit (where
    # r^(n-1) concentrates) in volume mode
    peak = math.sqrt(sigma2 * max(n - 1, 1)) if sigma2 is not None else 0.0
    mid = np.clip(peak, cap_lo + 0.05 * width, cap_hi - 0.05 * width)

    left = _cap_half_quadrature(n, cap_lo, mid, c1, r1, sigma2, np.ones_like(cap_lo, bool), nodes_per_panel)
    right = _cap_half_quadrature(n, cap_hi, mid, c1, r1, sigma2, np.zeros_like(cap_lo, bool), nodes_per_panel)
    log_cap = logsumexp(np.concatenate([left, right], axis=1), axis=1)
    log_cap = np.where(has_cap, log_cap, LOG_ZERO)

    out = np.logaddexp(log_full, log_cap)
    return np.where(hi > lo, out, LOG_ZERO)


def _log_chi2_ball(n: int, radius: float, sigma2: float) -> float:
    """ln P(||x|| <= radius) under N(0, sigma2 I_n)."""
    if radius <= 0:
        return LOG_ZERO
    return float(log_reg_gamma_lower(0.5 * n, 0.5 * radius**2 / sigma2))


# ---------------------------------------------------------------------------
# probability of C1 \ C0 and C1 & C0
# ---------------------------------------------------------------------------

def log_prob_diff(bp: BallPair) -> float:
    """ln P(C1 \\ C0) under the centered Gaussian; -inf when empty."""
    n, r0, c1, r1, s2 = bp.dim, bp.r0, bp.c1, bp.r1, bp.sigma2
    if r1 == 0.0 or r0 >= c1 + r1:
        return LOG_ZERO
    if c1 == 0.0:
        if r1 <= r0:
            return LOG_ZERO
        return _log_shell_chi2(n, r0, r1, s2)
    if r0 == 0.0:
        p = noncentral_chi2_cdf(n, c1**2 / s2, r1**2 / s2)
        return math.log(p) if p > 0 else LOG_ZERO
    lo = max(r0, c1 - r1)
    return float(log_shell_mass_batch(n, [lo], [c1 + r1], [c1], [r1], s2)[0])


def _log_shell_chi2(n: int, r_lo: float, r_hi: float, sigma2: float) -> float:
    """ln P(r_lo < ||x|| <= r_hi) for the centered Gaussian, concentric case."""
    la = _log_chi2_ball(n, r_hi, sigma2)
    lb = _log_chi2_ball(n, r_lo, sigma2)
    return log_diff(la, lb)


def log_prob_intersect(bp: BallPair) -> float:
    """ln P(C1 intersect C0) under the centered Gaussian; -inf when empty."""
    n, r0, c1, r1, s2 = bp.dim, bp.r0, bp.c1, bp.r1, bp.sigma2
    if r0 == 0.0 or r1 == 0.0 or c1 >= r0 + r1:
        return LOG_ZERO
    if c1 == 0.0:
        return _log_chi2_ball(n, min(r0, r1), s2)
    if r1 <= c1:
        lo = c1 - r1
        hi = min(r0, c1 + r1)
        return float(log_shell_mass_batch(n, [lo], [hi], [c1], [r1], s2)[0])
    # origin lies inside C1: full ball of radius r1 - c1 plus a cap shell
    inner = r1 - c1
    if inner >= r0:
        return _log_chi2_ball(n, r0, s2)
    log_ball = _log_chi2_ball(n, inner, s2)
    hi = min(r0, c1 + r1)
    log_shell = float(log_shell_mass_batch(n, [inner], [hi], [c1], [r1], s2)[0])
    return float(np.logaddexp(log_ball, log_shell))


def prob_diff(bp: BallPair) -> float:
    """P(C1 \\ C0) in [0, 1]; equals the noncentral chi-squared mass at r0 = 0."""
    return min(1.0, math.exp(log_prob_diff(bp)))


def prob_intersect(bp: BallPair) -> float:
    """P(C1 intersect C0) in [0, 1]."""
    return min(1.0, math.exp(log_prob_intersect(bp)))


# ---------------------------------------------------------------------------
# volumes: radical-plane cap decomposition, exact in the log domain
# ---------------------------------------------------------------------------

def _log_ball_volume(n: int, radius: float) -> float:
    if radius <= 0:
        return LOG_ZERO
    return unit_ball_volume(n).log_value + n * math.log(radius)


def _log_diff_soft(la: float, lb: float) -> float:
    """log(exp(la) - exp(lb)) tolerating roundoff-level negatives."""
    if lb == LOG_ZERO:
        return la
    d = lb - la
    if d >= 0.0:
        if d > 1e-9:
            raise ValueError(f"negative volume difference: {la} < {lb}")
        return LOG_ZERO
    return la + math.log1p(-math.exp(d))


def _log_cap_volume(n: int, r: float, a: float) -> float:
    """ln volume of the cap of a radius-r ball cut by a hyperplane at
    signed center distance a (a >= 0: minor cap, a < 0: major)."""
    if a >= r:
        return LOG_ZERO
    if a <= -r:
        return _log_ball_volume(n, r)
    s = (r - a) * (r + a) / (r * r)
    half = _log_ball_volume(n, r) - math.log(2.0)
    log_i = float(log_reg_inc_beta(0.5 * (n + 1), 0.5, s))
    if a >= 0.0:
        return half + log_i
    return float(np.logaddexp(half, _log_diff_soft(half, half + log_i)))


def _log_vol_intersect(n: int, r0: float, c1: float, r1: float) -> float:
    if r0 <= 0.0 or r1 <= 0.0 or c1 >= r0 + r1:
        return LOG_ZERO
    if c1 == 0.0:
        return _log_ball_volume(n, min(r0, r1))
    if c1 + r1 <= r0:
        return _log_ball_volume(n, r1)
    if c1 + r0 <= r1:
        return _log_ball_volume(n, r0)
    # lens: split by the radical hyperplane at distance d0 from the origin
    d0 = (c1 * c1 + r0 * r0 - r1 * r1) / (2.0 * c1)
    return float(np.logaddexp(_log_cap_volume(n, r0, d0), _log_cap_volume(n, r1, c1 - d0)))


def vol_diff(bp: BallPair) -> LogReal:
    """Lebesgue volume of C1 \\ C0 (sigma2 is ignored)."""
    n, r0, c1, r1 = bp.dim, bp.r0, bp.c1, bp.r1
    return LogReal.from_log(
        _log_diff_soft(_log_ball_volume(n, r1), _log_vol_intersect(n, r0, c1, r1))
    )


def vol_intersect(bp: BallPair) -> LogReal:
    """Lebesgue volume of C1 intersect C0 (sigma2 is ignored)."""
    return LogReal.from_log(_log_vol_intersect(bp.dim, bp.r0, bp.c1, bp.r1))


def log_vol_diff_vec(n: int, r0: np.ndarray, c1: float, r1: np.ndarray) -> np.ndarray:
    """ln volume of C1 \\ C0 for vectors of radii at a fixed center distance."""
    r0 = np.asarray(r0, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    log_vn = unit_ball_volume(n).log_value
    with np.errstate(divide="ignore"):
        log_v1 = np.where(r1 > 0, log_vn + n * np.log(np.maximum(r1, 1e-300)), LOG_ZERO)
        log_v0 = np.where(r0 > 0, log_vn + n * np.log(np.maximum(r0, 1e-300)), LOG_ZERO)

    d0 = (c1 * c1 + r0**2 - r1**2) / (2.0 * c1)
    a0 = d0
    a1 = c1 - d0

    def cap(r, a, log_ball):
        s = np.clip((r - np.abs(a)) * (r + np.abs(a)) / np.maximum(r * r, 1e-300), 0.0, 1.0)
        half = log_ball - math.log(2.0)
        log_i = log_reg_inc_beta(0.5 * (n + 1), 0.5, s)
        minor = half + log_i
        with np.errstate(invalid="ignore"):
            major = np.logaddexp(half, half + np.log1p(-np.minimum(np.exp(log_i), 1.0)))
        out = np.where(a >= 0.0, minor, major)
        out = np.where(a >= r, LOG_ZERO, out)
        return np.where(a <= -r, log_ball, out)

    log_lens = np.logaddexp(cap(r0, a0, log_v0), cap(r1, a1, log_v1))
    log_lens = np.where(c1 >= r0 + r1, LOG_ZERO, log_lens)
    log_lens = np.where(c1 + r1 <= r0, log_v1, log_lens)
    log_lens = np.where(c1 + r0 <= r1, log_v0, log_lens)
    log_lens = np.where((r0 <= 0) | (r1 <= 0), LOG_ZERO, log_lens)
    with np.errstate(invalid="ignore"):
        ratio = np.minimum(log_lens - log_v1, 0.0)
        diff = log_v1 + np.log1p(-np.exp(ratio))
    diff = np.where(np.isneginf(log_lens), log_v1, diff)
    return np.where(np.isneginf(log_v1), LOG_ZERO, diff)
