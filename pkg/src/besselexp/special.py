"""Numerically robust special functions.

``bessel_eval`` never forms I0 itself, only its log, so arguments up to 1e8
and beyond are safe.  The Lambert W routines cover the principal branch; the
Winitzki closed form is both a standalone approximation and the seed for the
exact Halley iteration.
"""

import math
from dataclasses import dataclass

import scipy.special as _sp

from . import _kernels

NEG_INV_E = _kernels.NEG_INV_E


@dataclass(frozen=True)
class BesselEval:
    """log I0(kappa) together with the mean resultant ratio I1/I0."""

    log_i0: float
    ratio: float


def bessel_eval(kappa: float) -> BesselEval:
    """Evaluate log I0(kappa) and r(kappa) = I1(kappa)/I0(kappa).

    Power series for small arguments, asymptotic expansion beyond; both
    log-scaled so no overflow occurs for any representable kappa.
    """
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa < 0.0:
        raise ValueError(f"bessel_eval requires finite kappa >= 0, got {kappa}")
    li0, ratio = _kernels.log_i0_and_ratio(kappa)
    return BesselEval(log_i0=li0, ratio=ratio)


def _check_lambert_domain(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < NEG_INV_E - 1e-14:
        raise ValueError(f"Lambert W0 requires t >= -1/e, got {t}")
    # values within rounding of the branch point clamp onto it
    return max(t, NEG_INV_E)


def lambert_w0(t: float) -> float:
    """Principal branch of the Lambert W function, w*exp(w) = t, w >= -1.

    Halley iteration seeded by the Winitzki value (branch-point series very
    close to -1/e); residual |w*exp(w) - t| <= 1e-12 * max(1, |t|).
    """
    return _kernels.lambert_w0(_check_lambert_domain(t))


def lambert_w0_winitzki(t: float) -> float:
    """Winitzki's closed-form W0 approximation, exact at t = 0 and t = -1/e.

    Accurate on [-1/e, 0], which is the range the envelope tuner feeds it;
    the measured error bound on that interval is recorded in the README.
    """
    return _kernels.lambert_w0_winitzki(_check_lambert_domain(t))


def log_gamma_fn(x: float) -> float:
    """log Gamma(x) for x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma_fn requires x > 0, got {x}")
    return math.lgamma(x)


def digamma(x: float) -> float:
    """Digamma function Psi(x) for x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    return float(_sp.digamma(x))
