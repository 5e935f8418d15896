"""Fast exact sampling from the Bessel exponential distribution.

The Bessel exponential density, proportional to I0(kappa)^(-eta) *
exp(-eta*beta0*kappa) on kappa >= 0, is the posterior of the von Mises
concentration under its conjugate prior.  This package provides a tuned
shifted-gamma rejection sampler for it, a numeric oracle for the truly
optimal proposal, a squeezed fast path, a Gibbs layer for full posterior
inference, and a validation harness.
"""

from ._accel import NUMBA_ENABLED, backend
from .errors import InvalidPosteriorError, NumericError, SamplerStallError
from .posterior import (ConjugatePrior, GibbsChain, VonMisesParams,
                        gibbs_sample, posterior_hyperparams, read_angles,
                        sample_von_mises, sample_von_mises_batch,
                        von_mises_log_density, wrap_angle)
from .sampler import (RngStream, SampleStats, acceptance_trial, gamma_variate,
                      sample_batch, sample_kappa, sample_kappa_squeezed,
                      truncated_gamma_variate)
from .special import (BesselEval, bessel_eval, digamma, lambert_w0,
                      lambert_w0_winitzki, log_gamma_fn)
from .tuning import (Envelope, PosteriorParams, approx_tune,
                     expected_acceptance, g_value, h_value, log_normalizer,
                     oracle_tune)
from .validation import (CdfTable, EfficiencyCurve, adjudicate_errata,
                         efficiency_sweep, ks_test, mixed_workload_bench,
                         quadrature_cdf, throughput_bench)

__version__ = "0.1.0"

__all__ = [
    "BesselEval", "CdfTable", "ConjugatePrior", "EfficiencyCurve", "Envelope",
    "GibbsChain", "InvalidPosteriorError", "NumericError", "NUMBA_ENABLED",
    "PosteriorParams", "RngStream", "SampleStats", "SamplerStallError",
    "VonMisesParams", "acceptance_trial", "adjudicate_errata", "approx_tune",
    "backend", "bessel_eval", "digamma", "efficiency_sweep",
    "expected_acceptance", "g_value", "gamma_variate", "gibbs_sample",
    "h_value", "ks_test", "lambert_w0", "lambert_w0_winitzki",
    "log_gamma_fn", "log_normalizer", "mixed_workload_bench", "oracle_tune",
    "posterior_hyperparams", "quadrature_cdf", "read_angles", "sample_batch",
    "sample_kappa", "sample_kappa_squeezed", "sample_von_mises",
    "sample_von_mises_batch", "throughput_bench", "truncated_gamma_variate",
    "von_mises_log_density", "wrap_angle",
]
