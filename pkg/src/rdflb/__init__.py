"""Finite-blocklength bounds on optimal quantization distortion.

Upper and lower bounds on the distortion of size-2**(nR) vector
quantizers for i.i.d. binary symmetric, binary non-symmetric, and
Gaussian sources, plus the enumeration / Monte-Carlo oracles that
validate them.  See the bss, bns, gauss, and simulate modules for the
per-family bounds and experiments.
"""

from . import bns, bss, gauss, geometry, logdomain, quadrature, ratedistortion, simulate, special
from .geometry import BallPair, prob_diff, prob_intersect, semiangle, vol_diff, vol_intersect
from .logdomain import LogReal, log_binomial, log_sum
from .quadrature import Quadrature, find_root, integrate
from .ratedistortion import (
    BinaryNonSymmetricSource,
    BinarySymmetricSource,
    DiscreteChannel,
    GaussianSource,
    RdSolution,
    SourceModel,
    blahut_arimoto,
    kkt_residual,
    solve,
)
from .simulate import (
    Codebook,
    ExperimentConfig,
    delta_residue,
    duality_error_prob,
    exact_distortion,
    mc_mean_distortion,
    quantize,
)
from .special import (
    binary_entropy,
    chi2_cdf,
    cone_area,
    exp_gap_inverse,
    inverse_binary_entropy,
    noncentral_chi2_cdf,
    noncentral_chi2_quantile,
    unit_ball_volume,
    unit_sphere_area,
)

__version__ = "0.1.0"
