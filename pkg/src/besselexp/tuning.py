"""Envelope tuning for the Bessel exponential rejection sampler.

The target density is p(kappa) ∝ I0(kappa)^(-eta) * exp(-eta*beta0*kappa) on
kappa >= 0.  A shifted-gamma proposal (shape eta*alpha+1, rate eta*beta, left
shift epsilon) dominates the target through

    g(kappa) = (beta - beta0)*kappa - alpha*log(kappa + eps) - log I0(kappa),

whose maximum over kappa >= 0 sets the acceptance threshold.  ``approx_tune``
is the closed-form fast tuner; ``oracle_tune`` solves the full stationarity
system numerically and is the reference optimum.
"""

import math
from dataclasses import dataclass

import scipy.special as _sp

from . import _kernels
from .errors import NumericError
from .special import digamma, log_gamma_fn

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PosteriorParams:
    """Target parameters: eta > 0 and beta0 > -1."""

    eta: float
    beta0: float

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError(f"eta must be positive and finite, got {self.eta}")
        if not (math.isfinite(self.beta0) and self.beta0 > -1.0):
            raise ValueError(f"beta0 must exceed -1, got {self.beta0}")


@dataclass(frozen=True)
class Envelope:
    """Tuned proposal parameters plus cached values of g at its extremes."""

    alpha: float
    beta: float
    epsilon: float
    kappa0: float
    log_i0_kappa0: float
    r_kappa0: float
    g_at_kappa0: float
    g_at_zero: float

    @property
    def threshold(self) -> float:
        """Envelope level actually used in the accept test."""
        return max(self.g_at_kappa0, self.g_at_zero)

    @property
    def guard(self) -> float:
        """Exactness guard: max(0, g(0) - g(kappa0)).

        Nonzero only when the Winitzki approximation leaves g(0) a hair above
        g(kappa0); folding it into the accept test keeps the sampler exact for
        either Lambert mode.
        """
        return max(0.0, self.g_at_zero - self.g_at_kappa0)


def g_value(post: PosteriorParams, env: Envelope, kappa: float) -> float:
    """(beta - beta0)*kappa - alpha*log(kappa + eps) - log I0(kappa)."""
    kappa = float(kappa)
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    shifted = kappa + env.epsilon
    if shifted == 0.0:
        # alpha = 0 makes the log term vanish; otherwise g diverges to -inf
        if env.alpha == 0.0:
            return -_kernels.log_i0(kappa) + (env.beta - post.beta0) * kappa
        return -math.inf
    return ((env.beta - post.beta0) * kappa
            - env.alpha * math.log(shifted)
            - _kernels.log_i0(kappa))


def approx_tune(post: PosteriorParams, w_mode: str = "exact") -> Envelope:
    """Closed-form envelope tuner (fast path).

    ``w_mode`` selects how the Lambert W solve for epsilon is carried out:
    ``"exact"`` (Halley) or ``"winitzki"`` (closed-form approximation).
    """
    use_winitzki = _parse_w_mode(w_mode)
    alpha, beta, eps, k0, li0, r, g_k0, g_0 = _kernels.tune_envelope(
        post.eta, post.beta0, use_winitzki)
    return Envelope(alpha=alpha, beta=beta, epsilon=eps, kappa0=k0,
                    log_i0_kappa0=li0, r_kappa0=r, g_at_kappa0=g_k0,
                    g_at_zero=g_0)


def _parse_w_mode(w_mode: str) -> bool:
    if w_mode == "winitzki":
        return True
    if w_mode == "exact":
        return False
    raise ValueError(f"w_mode must be 'exact' or 'winitzki', got {w_mode!r}")


def h_value(post: PosteriorParams, kappa0: float, alpha: float, beta: float,
            epsilon: float) -> float:
    """Objective of the envelope optimization (log acceptance up to a shift).

    log(expected acceptance) = eta * h + log normalizer, so maximizing h over
    the proposal parameters maximizes the acceptance probability.
    """
    eta = post.eta
    if beta <= 0.0 or eta * alpha + 1.0 <= 0.0:
        raise ValueError("h_value requires beta > 0 and eta*alpha + 1 > 0")
    li0 = _kernels.log_i0(kappa0)
    if alpha == 0.0:
        log_term = 0.0
    else:
        log_term = alpha * math.log(kappa0 + epsilon)
    g_k0 = (beta - post.beta0) * kappa0 - log_term - li0
    return ((alpha + 1.0 / eta) * math.log(eta * beta)
            - log_gamma_fn(eta * alpha + 1.0) / eta
            - beta * epsilon - g_k0)


# ---------------------------------------------------------------------------
# numeric oracle tuner
# ---------------------------------------------------------------------------

def _params_at(post: PosteriorParams, kappa0: float, beta: float,
               li0: float, r: float):
    """alpha and epsilon implied by stationarity at (kappa0, beta)."""
    denom = beta - post.beta0 - r
    c3 = (li0 / kappa0 - beta + post.beta0) / denom
    t = c3 * math.exp(c3)
    if t < _kernels.NEG_INV_E:
        t = _kernels.NEG_INV_E
    c4 = _kernels.lambert_w0(t)
    eps = c4 * kappa0 / (c3 - c4)
    alpha = denom * (kappa0 + eps)
    return alpha, eps


def _dl_dbeta(post: PosteriorParams, kappa0: float, beta: float,
              li0: float, r: float) -> float:
    """Derivative of the envelope Lagrangian with respect to beta.

    Tends to +inf as beta approaches beta0 + r(kappa0) from above; epsilon
    underflow near that edge is mapped onto the same limit.
    """
    eta = post.eta
    alpha, eps = _params_at(post, kappa0, beta, li0, r)
    if not (eps > kappa0 * 1e-300) or not math.isfinite(eps):
        return math.inf
    ke = kappa0 + eps
    denom2 = math.log1p(kappa0 / eps) - kappa0 / eps
    lam2 = (digamma(eta * alpha + 1.0) - math.log(eta * beta * ke) - 1.0
            + beta * ke / alpha) / denom2
    lam1 = ke / (alpha * eps) * (beta * eps * eps + (kappa0 * beta - alpha) * eps
                                 + alpha * lam2 * kappa0)
    val = (alpha + 1.0 / eta) / beta - ke + lam1 - lam2 * kappa0
    if math.isnan(val):
        return math.inf
    return val


def _solve_beta(post: PosteriorParams, kappa0: float):
    """Optimal beta for a fixed kappa0 (bisection on dL/dbeta)."""
    li0, r = _kernels.log_i0_and_ratio(kappa0)
    lo = max(0.0, post.beta0 + r) + 1e-9
    hi = post.beta0 + 1.0
    if lo >= hi:
        raise NumericError(
            f"degenerate beta bracket at eta={post.eta}, beta0={post.beta0}, "
            f"kappa0={kappa0}")
    if _dl_dbeta(post, kappa0, hi, li0, r) > 0.0:
        beta = hi
    else:
        if not _dl_dbeta(post, kappa0, lo, li0, r) > 0.0:
            raise NumericError(
                f"beta bisection bracket failure at eta={post.eta}, "
                f"beta0={post.beta0}, kappa0={kappa0}")
        a, b = lo, hi
        for _ in range(100):
            mid = 0.5 * (a + b)
            if _dl_dbeta(post, kappa0, mid, li0, r) > 0.0:
                a = mid
            else:
                b = mid
            if b - a <= 1e-15 * max(1.0, abs(b)):
                break
        beta = 0.5 * (a + b)
    alpha, eps = _params_at(post, kappa0, beta, li0, r)
    return beta, alpha, eps, li0, r


def oracle_tune(post: PosteriorParams) -> Envelope:
    """Numerically optimal envelope (slow reference tuner).

    For each candidate kappa0 the inner bisection finds the stationary beta
    (or the boundary beta0 + 1); the outer golden-section maximizes h over
    kappa0, breaking ties leftward so flat plateaus resolve deterministically.
    Always uses the exact Lambert W.
    """
    eta, beta0 = post.eta, post.beta0
    eb = eta * beta0
    kl = 2.0 / (eb + math.sqrt(2.0 * eta + eb * eb))
    ku = (2.0 + 1.0 / eta) / ((eta + 1.0) * beta0
                              + math.sqrt(2.0 * eta + 1.0 + eb * eb))

    def h_at(kappa0: float) -> float:
        beta, alpha, eps, li0, _ = _solve_beta(post, kappa0)
        return h_value(post, kappa0, alpha, beta, eps)

    a, b = kl / 4.0, 4.0 * ku
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = h_at(x1), h_at(x2)
    while (b - a) > 5e-9 * (abs(a) + abs(b)) and (b - a) > 1e-14:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = h_at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = h_at(x2)
    kappa0 = 0.5 * (a + b)
    beta, alpha, eps, li0, r = _solve_beta(post, kappa0)
    g_k0 = ((beta - beta0) * kappa0
            - (alpha * math.log(kappa0 + eps) if alpha > 0.0 else 0.0) - li0)
    g_0 = -alpha * math.log(eps) if alpha > 0.0 else 0.0
    return Envelope(alpha=alpha, beta=beta, epsilon=eps, kappa0=kappa0,
                    log_i0_kappa0=li0, r_kappa0=r, g_at_kappa0=g_k0,
                    g_at_zero=g_0)


# ---------------------------------------------------------------------------
# normalizer quadrature and expected acceptance
# ---------------------------------------------------------------------------

def integrand_mode(post: PosteriorParams) -> float:
    """Argmax of exp(-eta*beta0*kappa) / I0(kappa)^eta over kappa >= 0."""
    if post.beta0 >= 0.0:
        return 0.0
    lo, hi = 1e-12, 1e12
    if post.beta0 + _kernels.log_i0_and_ratio(lo)[1] >= 0.0:
        return 0.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if post.beta0 + _kernels.log_i0_and_ratio(mid)[1] < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


def _tail_cutoff(post: PosteriorParams, kstar: float) -> float:
    # integrand tail ~ exp(-eta*(1+beta0)*k) * k^(eta/2); two fixed-point
    # passes of the cutoff rule land beyond 40 nats of decay
    eta, beta0 = post.eta, post.beta0
    kmax = max(kstar, 1.0)
    for _ in range(2):
        kmax = kstar + (0.5 * eta * math.log(max(kmax, 2.0)) + 40.0) / (eta * (1.0 + beta0))
    return kmax


def log_normalizer(post: PosteriorParams, tol: float = 1e-11,
                   max_panels: int = 4000, min_refine: int = 0) -> float:
    """log of the normalizing integral, by adaptive Gauss-Kronrod panels.

    The integrand is shifted by its own log-maximum before exponentiation, so
    the quadrature runs on values in (0, 1] regardless of eta.
    ``min_refine`` forces extra global bisection rounds (used by convergence
    self-tests).
    """
    if post.beta0 <= -1.0:
        raise NumericError("normalizing integral diverges for beta0 <= -1")
    eta, beta0 = post.eta, post.beta0
    kstar = integrand_mode(post)
    # peak of the log-integrand; exp(phi - shift) <= 1 on the whole range
    shift = -eta * (beta0 * kstar + _kernels.log_i0(kstar))
    kmax = _tail_cutoff(post, kstar)

    edges = sorted({x for x in (0.0, kstar / 2.0, kstar, 2.0 * kstar,
                                4.0 * kstar, kmax / 4.0, kmax / 2.0, kmax)
                    if 0.0 <= x <= kmax})
    panels = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            panels.append(_panel(a, b, eta, beta0, shift))
    for _ in range(min_refine):
        nxt = []
        for a, b, val, err in panels:
            mid = 0.5 * (a + b)
            nxt.append(_panel(a, mid, eta, beta0, shift))
            nxt.append(_panel(mid, b, eta, beta0, shift))
        panels = nxt

    while len(panels) < max_panels:
        total = sum(p[2] for p in panels)
        err_total = sum(p[3] for p in panels)
        if err_total <= tol * abs(total):
            break
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        a, b, _, _ = panels.pop(worst)
        mid = 0.5 * (a + b)
        panels.append(_panel(a, mid, eta, beta0, shift))
        panels.append(_panel(mid, b, eta, beta0, shift))
    else:
        raise NumericError(
            f"log_normalizer failed to converge at eta={eta}, beta0={beta0}")
    total = sum(p[2] for p in panels)
    return math.log(total) + shift


def _panel(a: float, b: float, eta: float, beta0: float, shift: float):
    sk, sg = _kernels.gk15_panel(a, b, eta, beta0, shift)
    diff = abs(sk - sg)
    err = min(diff, (200.0 * diff) ** 1.5) if diff > 0.0 else 0.0
    return (a, b, sk, err)


def expected_acceptance(post: PosteriorParams, env: Envelope,
                        tol: float = 1e-11) -> float:
    """Expected probability of accepting a proposal from the tuned envelope.

    Uses the envelope's effective threshold max(g(kappa0), g(0)), i.e. the
    level the sampler actually tests against, so the value matches the
    empirical accept rate for both Lambert modes (truncation discards counted
    as rejections).
    """
    eta = post.eta
    lz = log_normalizer(post, tol=tol)
    log_acc = ((eta * env.alpha + 1.0) * math.log(eta * env.beta)
               - log_gamma_fn(eta * env.alpha + 1.0)
               - eta * env.beta * env.epsilon
               - eta * env.threshold
               + lz)
    acc = math.exp(log_acc)
    if not 0.0 < acc <= 1.0 + 1e-9:
        raise NumericError(
            f"expected acceptance {acc} outside (0, 1] at eta={eta}, "
            f"beta0={post.beta0}")
    return acc
