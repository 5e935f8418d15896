"""Von Mises posterior inference layer.

Maps observed angles and a conjugate prior onto the Bessel exponential
posterior of the concentration, and runs a Gibbs sampler alternating the
von Mises mean and the concentration.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import InvalidPosteriorError
from .sampler import RngStream, sample_kappa_squeezed
from .tuning import PosteriorParams, approx_tune

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return float(_kernels.wrap_angle(float(theta)))


@dataclass(frozen=True)
class VonMisesParams:
    mu: float
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.kappa)):
            raise ValueError("mu and kappa must be finite")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        object.__setattr__(self, "mu", wrap_angle(self.mu))


@dataclass(frozen=True)
class ConjugatePrior:
    """Prior I0(kappa)^(-a) * exp(-b*kappa) with an optional resultant
    (mu0, R0) coupling the mean into the concentration update."""

    a: float = 0.0
    b: float = 0.0
    mu0: float = 0.0
    r0: float = 0.0

    def __post_init__(self):
        if self.a < 0.0 or self.r0 < 0.0:
            raise ValueError("prior pseudo-counts a and R0 must be >= 0")


@dataclass(frozen=True)
class GibbsChain:
    draws: np.ndarray  # shape (n, 2): columns mu, kappa
    burn_in: int
    seed: int

    @property
    def mus(self) -> np.ndarray:
        return self.draws[:, 0]

    @property
    def kappas(self) -> np.ndarray:
        return self.draws[:, 1]

    def __len__(self):
        return self.draws.shape[0]


def von_mises_log_density(theta: float, params: VonMisesParams) -> float:
    """kappa*cos(theta - mu) - log(2 pi) - log I0(kappa)."""
    return (params.kappa * math.cos(theta - params.mu)
            - math.log(TWO_PI)
            - _kernels.log_i0(params.kappa))


def sample_von_mises(params: VonMisesParams, rng: RngStream) -> float:
    """One von Mises draw (Best-Fisher); kappa = 0 is uniform on the circle."""
    return float(_kernels.von_mises_draw(params.mu, params.kappa,
                                         rng.generator))


def sample_von_mises_batch(params: VonMisesParams, n: int,
                           rng: RngStream) -> np.ndarray:
    out = np.empty(n, dtype=np.float64)
    _kernels.von_mises_batch(n, params.mu, params.kappa, rng.generator, out)
    return out


def posterior_hyperparams(angles: Sequence[float], mu: float,
                          prior: ConjugatePrior) -> PosteriorParams:
    """(eta, beta0) of the concentration posterior given the mean direction.

    eta = a + n and beta0 = (b - sum cos(theta_i - mu)) / (a + n); the data
    term is divided by a + n so the prior-only (n = 0) and flat-prior special
    cases both come out of the same formula.
    """
    angles = np.asarray(angles, dtype=np.float64)
    n = angles.size
    eta = prior.a + n
    if eta <= 0.0:
        raise InvalidPosteriorError("a + n must be positive")
    cos_sum = float(np.cos(angles - mu).sum()) if n else 0.0
    beta0 = (prior.b - cos_sum) / eta
    if beta0 <= -1.0:
        raise InvalidPosteriorError(
            f"beta0 = {beta0} <= -1: posterior is not normalizable "
            f"(perfectly concentrated data with no prior mass)")
    return PosteriorParams(eta=eta, beta0=beta0)


def gibbs_sample(angles: Sequence[float], prior: ConjugatePrior, iters: int,
                 burn_in: int, rng: RngStream,
                 init_kappa: float = 1.0) -> GibbsChain:
    """Gibbs sampler for (mu, kappa) given angles under the conjugate prior.

    Alternates mu | kappa ~ von Mises(atan2(S, C), kappa*sqrt(C^2 + S^2))
    with C = R0 cos(mu0) + sum cos(theta_i), S = R0 sin(mu0) + sum sin(theta_i),
    and kappa | mu through the Bessel exponential posterior with prior rate
    b - R0*cos(mu - mu0) (which is the paper's fixed-b prior when R0 = 0).
    Draws before ``burn_in`` are discarded.
    """
    if not iters > burn_in >= 0:
        raise ValueError("need iters > burn_in >= 0")
    angles = np.asarray(angles, dtype=np.float64)
    c_data = prior.r0 * math.cos(prior.mu0) + float(np.cos(angles).sum())
    s_data = prior.r0 * math.sin(prior.mu0) + float(np.sin(angles).sum())
    resultant = math.hypot(c_data, s_data)
    mu_hat = math.atan2(s_data, c_data)

    kappa = float(init_kappa)
    kept = np.empty((iters - burn_in, 2), dtype=np.float64)
    for it in range(iters):
        mu = sample_von_mises(
            VonMisesParams(mu=mu_hat, kappa=kappa * resultant), rng)
        b_eff = prior.b - prior.r0 * math.cos(mu - prior.mu0)
        step_prior = ConjugatePrior(a=prior.a, b=b_eff)
        post = posterior_hyperparams(angles, mu, step_prior)
        env = approx_tune(post, "exact")
        kappa, _ = sample_kappa_squeezed(post, env, rng)
        if it >= burn_in:
            kept[it - burn_in, 0] = mu
            kept[it - burn_in, 1] = kappa
    return GibbsChain(draws=kept, burn_in=burn_in, seed=rng.seed)


def read_angles(path, degrees: bool = False) -> np.ndarray:
    """Read one angle per line (radians, or degrees with the flag)."""
    values = []
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from exc
    out = np.asarray(values, dtype=np.float64)
    if degrees:
        out = out * (math.pi / 180.0)
    return np.array([wrap_angle(v) for v in out])
