"""Finite-blocklength bounds for the binary non-symmetric source.

The lower bound pairs the sorted source masses with the largest codeword
likelihoods (rearrangement inequality); both arrays have 2**n entries but
only O(n) distinct levels, so the pairing is walked level by level with
log-domain multiplicities.  The upper bounds decompose over the Hamming
weight of the source word, whose distance law is a convolution of two
binomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .bss import OrderedStatsBound, hamming_ball_threshold, log_q_minus
from .logdomain import LOG_ZERO, log_diff, logsumexp
from .ratedistortion import BinaryNonSymmetricSource, solve
from .special import binary_entropy_nats

__all__ = [
    "WeightProfile",
    "weight_distance_pmf",
    "lower_bound",
    "upper_bound_os",
    "upper_bound_rr",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class WeightProfile:
    """Distribution of the Hamming distance n*d(x, y) for a weight-w word x
    against a codeword with i.i.d. Bernoulli(z) bits."""

    n: int
    w: int
    z: float
    log_pmf: np.ndarray  # index d = 0..n

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)


def _log_binom_row(m: int) -> np.ndarray:
    j = np.arange(m + 1)
    return gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1)


def _mismatch_parts(n: int, w: int, z: float):
    """Log pmfs of the mismatch counts among the w ones and n-w zeros of x."""
    lz, l1z = math.log(z), math.log1p(-z)
    i = np.arange(w + 1)
    ones = _log_binom_row(w) + (w - i) * lz + i * l1z
    j = np.arange(n - w + 1)
    zeros = _log_binom_row(n - w) + j * lz + (n - w - j) * l1z
    return ones, zeros


def _log_pmf_at(ones: np.ndarray, zeros: np.ndarray, d: int) -> float:
    w = ones.size - 1
    nz = zeros.size - 1
    i_lo = max(0, d - nz)
    i_hi = min(w, d)
    if i_lo > i_hi:
        return LOG_ZERO
    i = np.arange(i_lo, i_hi + 1)
    return float(logsumexp(ones[i] + zeros[d - i]))


def weight_distance_pmf(n: int, w: int, z: float) -> WeightProfile:
    """P(n d(x,y) = d) for weight-w x, codeword bits i.i.d. Bernoulli(z)."""
    if not 0 <= w <= n:
        raise ValueError(f"need 0 <= w <= n, got w={w}, n={n}")
    if not 0.0 < z < 1.0:
        raise ValueError(f"need 0 < z < 1, got {z}")
    ones, zeros = _mismatch_parts(n, w, z)
    log_pmf = np.array([_log_pmf_at(ones, zeros, d) for d in range(n + 1)])
    return WeightProfile(n, w, z, log_pmf)


def _check(n: int, rate: float, p: float) -> None:
    if n < 1:
        raise ValueError(f"blocklength must be >= 1, got {n}")
    if not 0.0 < p <= 0.5:
        raise ValueError(f"need 0 < p <= 0.5, got {p}")
    if not 0.0 < rate < binary_entropy_nats(p) / _LN2:
        raise ValueError(f"rate {rate} outside (0, H(p))")


# ---------------------------------------------------------------------------
# lower bound: rearrangement pairing of source masses and codeword likelihoods
# ---------------------------------------------------------------------------

def _paired_sum_nats(n: int, rate: float, p: float, d: float) -> float:
    """sum a_i b_i over the 2**n best pairings, in nats.

    a-levels: source masses p^k (1-p)^(n-k), multiplicity C(n,k), descending.
    b-levels: ln q(x|y) at distance i, multiplicity Q C(n,i) up to the
    packing radius (leftover K at the radius), descending.
    """
    lb = _log_binom_row(n)
    d_t, log_rem = hamming_ball_threshold(lb, n * (1.0 - rate) * _LN2)
    log_q = n * rate * _LN2
    lp, l1p = math.log(p), math.log1p(-p)
    ld, l1d = math.log(d), math.log1p(-d)

    # a-levels in descending value order (p <= 1/2 makes k ascending work)
    a_vals = [k * lp + (n - k) * l1p for k in range(n + 1)]
    a_mult = [float(lb[k]) for k in range(n + 1)]
    # b-levels: distance i value in nats, with multiplicities summing to 2**n
    b_vals = [i * ld + (n - i) * l1d for i in range(d_t + 1)]
    b_mult = [log_q + float(lb[i]) for i in range(d_t)]
    b_mult.append(log_q + log_rem if log_rem > LOG_ZERO else LOG_ZERO)

    terms = []
    ia = ib = 0
    ra, rb = a_mult[0], b_mult[0]
    while ia <= n and ib <= d_t:
        if rb == LOG_ZERO:
            ib += 1
            if ib > d_t:
                break
            rb = b_mult[ib]
            continue
        if ra == LOG_ZERO:
            ia += 1
            if ia > n:
                break
            ra = a_mult[ia]
            continue
        take = min(ra, rb)
        val = -(a_vals[ia] + math.log(-b_vals[ib]))  # b values are < 0
        terms.append(take - val)
        ra = log_diff(ra, take) if ra > take else LOG_ZERO
        rb = log_diff(rb, take) if rb > take else LOG_ZERO
    return -math.exp(logsumexp(np.array(terms)))


def lower_bound(n: int, rate: float, p: float) -> float:
    """Rearrangement lower bound on the distortion of any size-2**(nR) quantizer."""
    _check(n, rate, p)
    sol = solve(BinaryNonSymmetricSource(p), rate)
    s = _paired_sum_nats(n, rate, p, sol.dstar)
    residue = n * rate * _LN2 - (s + n * binary_entropy_nats(p))
    return sol.dstar + sol.lambda_hat_nats / n * residue


# ---------------------------------------------------------------------------
# per-weight upper bounds
# ---------------------------------------------------------------------------

def _weight_window(n: int, p: float):
    """Weights with non-negligible probability, their log weights, and the
    log of the discarded tail mass."""
    lb = _log_binom_row(n)
    w = np.arange(n + 1)
    logw = lb + w * math.log(p) + (n - w) * math.log1p(-p)
    keep = logw >= logw.max() - 92.0
    kept = float(logsumexp(logw[keep]))
    tail = log_diff(0.0, min(kept, 0.0))
    return w[keep], logw[keep], tail


def _scan_threshold(ones, zeros, log_budget, n):
    """Smallest t with cumulative pmf mass > budget; returns
    (t, log cumulative below t, log pmf at t).  t == n+1 means the budget
    exceeds the whole distribution."""
    cum = LOG_ZERO
    for t in range(n + 1):
        lp = _log_pmf_at(ones, zeros, t)
        new = float(np.logaddexp(cum, lp))
        if new > log_budget:
            return t, cum, lp
        cum = new
    return n + 1, cum, LOG_ZERO


def upper_bound_os(n: int, rate: float, p: float, eps: float) -> OrderedStatsBound:
    """Ordered-statistics bound averaged over the weight classes of x.

    Per weight the threshold t is the smallest distance whose cumulative
    mass under the optimal codeword marginal reaches ln(1/eps)/(Q-1).
    """
    _check(n, rate, p)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    z = solve(BinaryNonSymmetricSource(p), rate).marginal_one_prob
    log_budget = math.log(math.log(1.0 / eps)) - log_q_minus(n, rate, 1)
    if log_budget > 0.0:
        return OrderedStatsBound((1.0 - eps) + eps / 2.0, n, degenerate=True)
    weights, logw, log_tail = _weight_window(n, p)
    total = 0.0
    t_max = 0
    for w, lw in zip(weights, logw):
        ones, zeros = _mismatch_parts(n, int(w), z)
        t, cum, lp = _scan_threshold(ones, zeros, log_budget, n)
        # budget demands cum_{<=t} >= b; _scan_threshold used strict >, so
        # accept t when cum_{<=t} == b as well (float equality is moot)
        t = min(t, n)
        t_max = max(t_max, t)
        total += math.exp(lw) * ((1.0 - eps) * t / n + eps / 2.0)
    total += math.exp(log_tail) * ((1.0 - eps) + eps / 2.0)
    return OrderedStatsBound(total, t_max)


def upper_bound_rr(n: int, rate: float, p: float, d0: float) -> float:
    """Reference-rate bound with the extra codeword drawn at distortion d0.

    Per weight w the value cap is u_w = z0 (1 - w/n) + (1 - z0) w/n and the
    mass budget is (1/Q)((Q-1)/Q)**(Q-1); the capped region collects the
    likelihood ratios q0(x|y)/p(x) = D0^j (1-D0)^(n-j) / p^w (1-p)^(n-w).
    """
    _check(n, rate, p)
    d = solve(BinaryNonSymmetricSource(p), rate).dstar
    if not d < d0 < p:
        raise ValueError(f"need D < d0 < p with D={d:.6g}, got d0={d0}")
    z0 = (p - d0) / (1.0 - 2.0 * d0)
    u = math.exp(-n * rate * _LN2)
    if u < 1e-8:
        pow_term = -1.0 + 0.5 * u + u * u / 6.0
    else:
        pow_term = (1.0 / u - 1.0) * math.log1p(-u)
    log_budget = -n * rate * _LN2 + pow_term
    ld0, l1d0 = math.log(d0), math.log1p(-d0)
    lp, l1p = math.log(p), math.log1p(-p)
    weights, logw, log_tail = _weight_window(n, p)
    total = 0.0
    for w, lw in zip(weights, logw):
        w = int(w)
        ones, zeros = _mismatch_parts(n, w, z0)
        dx, cum, lpmf = _scan_threshold(ones, zeros, log_budget, n)
        log_px = w * lp + (n - w) * l1p
        terms = []
        cum_run = LOG_ZERO
        for j in range(min(dx, n + 1)):
            lpj = _log_pmf_at(ones, zeros, j)
            terms.append(lpj + j * ld0 + (n - j) * l1d0 - log_px)
            cum_run = float(np.logaddexp(cum_run, lpj))
        if dx <= n:
            log_l_mass = log_diff(log_budget, cum_run) if log_budget > cum_run else LOG_ZERO
            if log_l_mass > LOG_ZERO:
                terms.append(log_l_mass + dx * ld0 + (n - dx) * l1d0 - log_px)
        u_w = z0 * (1.0 - w / n) + (1.0 - z0) * w / n
        h_w = u_w * (math.exp(logsumexp(np.array(terms))) if terms else 0.0)
        total += math.exp(lw) * h_w
    total += math.exp(log_tail) * (1.0 - z0)
    return d0 + total
