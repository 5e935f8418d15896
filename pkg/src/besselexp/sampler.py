"""Exact draws from the Bessel exponential distribution.

Two rejection loops are provided: the plain loop evaluates log I0 on every
proposal, the squeezed loop brackets the accept test with cheap bounds and
falls back to the Bessel evaluation only when they are inconclusive.  Both
consume randomness identically and make bit-identical accept decisions on a
shared stream.
"""

from dataclasses import dataclass, fields

import numpy as np

from . import _kernels
from .errors import SamplerStallError
from .tuning import Envelope, PosteriorParams, approx_tune

DEFAULT_MAX_ITER = 1_000_000


class RngStream:
    """Deterministic uniform-variate source (PCG64 behind SeedSequence).

    The same seed always yields the same stream, and ``split`` derives
    independent substreams addressed by index; substreams are stable across
    processes and backends.
    """

    def __init__(self, seed: int, _spawn_key: tuple = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(_spawn_key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def split(self, index: int) -> "RngStream":
        """Independent substream number ``index`` of this stream's seed."""
        return RngStream(self.seed, self.spawn_key + (int(index),))

    def uniform(self) -> float:
        return self.generator.random()

    def __repr__(self):
        return f"RngStream(seed={self.seed}, spawn_key={self.spawn_key})"


@dataclass
class SampleStats:
    """Counters instrumenting the rejection loop.

    ``proposals`` counts every gamma draw, including those discarded by the
    left truncation, so accepted/proposals estimates the same quantity as the
    expected-acceptance integral.
    """

    proposals: int = 0
    truncation_rejects: int = 0
    loop_rejects: int = 0
    accepted: int = 0
    squeeze_accepts: int = 0
    squeeze_rejects: int = 0
    bessel_evals: int = 0

    @classmethod
    def _from_array(cls, arr) -> "SampleStats":
        return cls(*(int(x) for x in arr))

    def merge(self, other: "SampleStats") -> "SampleStats":
        return SampleStats(*(getattr(self, f.name) + getattr(other, f.name)
                             for f in fields(self)))

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0

    @property
    def bessel_fraction(self) -> float:
        return self.bessel_evals / self.proposals if self.proposals else 0.0


def _new_stat_array():
    return np.zeros(_kernels.N_STATS, dtype=np.int64)


def gamma_variate(shape: float, rate: float, rng: RngStream) -> float:
    """One Gamma(shape, rate) draw, shape >= 1 (Marsaglia-Tsang)."""
    if shape < 1.0:
        raise ValueError(f"gamma_variate requires shape >= 1, got {shape}")
    if rate <= 0.0:
        raise ValueError(f"gamma_variate requires rate > 0, got {rate}")
    return _kernels.gamma_mt(shape, rng.generator) / rate


def truncated_gamma_variate(shape: float, rate: float, lower: float,
                            rng: RngStream) -> float:
    """Gamma(shape, rate) conditioned on the result being >= lower.

    Retry-on-reject over the plain generator; the tuned envelopes place the
    truncation point far into the left tail, so retries are rare.
    """
    if lower < 0.0:
        raise ValueError(f"lower truncation must be >= 0, got {lower}")
    while True:
        x = gamma_variate(shape, rate, rng)
        if x >= lower:
            return x


def _draw(post: PosteriorParams, env: Envelope, rng: RngStream,
          use_squeeze: bool, max_iter: int):
    stats = _new_stat_array()
    kappa = _kernels.draw_kappa(
        post.eta, post.beta0, env.alpha, env.beta, env.epsilon, env.kappa0,
        env.log_i0_kappa0, env.guard, use_squeeze, max_iter, rng.generator,
        stats)
    st = SampleStats._from_array(stats)
    if kappa < 0.0:
        raise SamplerStallError(
            f"rejection loop exceeded {max_iter} iterations at "
            f"eta={post.eta}, beta0={post.beta0}; envelope is broken",
            stats=st)
    return kappa, st


def sample_kappa(post: PosteriorParams, env: Envelope, rng: RngStream,
                 max_iter: int = DEFAULT_MAX_ITER):
    """One exact draw using the plain rejection loop."""
    return _draw(post, env, rng, False, max_iter)


def sample_kappa_squeezed(post: PosteriorParams, env: Envelope,
                          rng: RngStream, max_iter: int = DEFAULT_MAX_ITER):
    """One exact draw using the squeezed loop (Bessel call mostly avoided)."""
    return _draw(post, env, rng, True, max_iter)


def sample_batch(post: PosteriorParams, n: int, method: str = "squeezed",
                 w_mode: str = "exact", rng: RngStream = None,
                 env: Envelope = None, max_iter: int = DEFAULT_MAX_ITER):
    """n independent draws with a single up-front tuning.

    ``method`` is ``"plain"`` or ``"squeezed"``; ``w_mode`` is forwarded to
    ``approx_tune`` unless an explicit envelope is supplied.  Returns
    (samples, SampleStats).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    use_squeeze = _parse_method(method)
    if rng is None:
        raise ValueError("sample_batch requires an RngStream")
    if env is None:
        env = approx_tune(post, w_mode)
    out = np.empty(n, dtype=np.float64)
    stats = _new_stat_array()
    done = _kernels.draw_kappa_batch(
        n, post.eta, post.beta0, env.alpha, env.beta, env.epsilon, env.kappa0,
        env.log_i0_kappa0, env.guard, use_squeeze, max_iter, rng.generator,
        out, stats)
    st = SampleStats._from_array(stats)
    if done < n:
        raise SamplerStallError(
            f"rejection loop exceeded {max_iter} iterations on draw {done} "
            f"at eta={post.eta}, beta0={post.beta0}", stats=st)
    return out, st


def acceptance_trial(post: PosteriorParams, env: Envelope, n_proposals: int,
                     rng: RngStream) -> int:
    """Number of acceptances in a fixed budget of proposals."""
    return int(_kernels.acceptance_trial(
        n_proposals, post.eta, post.beta0, env.alpha, env.beta, env.epsilon,
        env.kappa0, env.log_i0_kappa0, env.guard, rng.generator))


def _parse_method(method: str) -> bool:
    if method == "squeezed":
        return True
    if method == "plain":
        return False
    raise ValueError(f"method must be 'plain' or 'squeezed', got {method!r}")
