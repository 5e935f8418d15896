"""Scalar numeric kernels.

Everything here is written in numba-compatible scalar Python and compiled via
:func:`besselexp._accel.jit_kernel` (a no-op when the JIT is disabled).  The
rejection loops consume randomness exclusively through a
``numpy.random.Generator`` passed in by the caller, so jitted and interpreted
runs of the same seed produce identical streams.
"""

import math

import numpy as np

from ._accel import jit_kernel

TWO_PI = 2.0 * math.pi
NEG_INV_E = -math.exp(-1.0)
_E = math.e
_INV_EM1 = 1.0 / (math.e - 1.0)
_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Power series below this point, asymptotic expansion above.  At the switch
# the asymptotic truncation floor is ~e^(-2*18) = 2e-16 relative, so both
# sides deliver full double accuracy.
_BESSEL_SWITCH = 18.0

# Gauss-Kronrod 7-15 nodes and weights (Kronrod nodes; Gauss weight is zero
# on the Kronrod-only nodes).
_XK15 = np.array([
    -0.991455371120812639207, -0.949107912342758524526,
    -0.864864423359769072789, -0.741531185599394439864,
    -0.586087235467691130294, -0.405845151377397166907,
    -0.207784955007898467601, 0.0,
    0.207784955007898467601, 0.405845151377397166907,
    0.586087235467691130294, 0.741531185599394439864,
    0.864864423359769072789, 0.949107912342758524526,
    0.991455371120812639207,
])
_WK15 = np.array([
    0.022935322010529224964, 0.063092092629978553291,
    0.104790010322250183839, 0.140653259715525918745,
    0.169004726639267902827, 0.190350578064785409913,
    0.204432940075298892414, 0.209482141084727828013,
    0.204432940075298892414, 0.190350578064785409913,
    0.169004726639267902827, 0.140653259715525918745,
    0.104790010322250183839, 0.063092092629978553291,
    0.022935322010529224964,
])
_WG7 = np.array([
    0.0, 0.129484966168869693271,
    0.0, 0.279705391489276667901,
    0.0, 0.381830050505118944950,
    0.0, 0.417959183673469387755,
    0.0, 0.381830050505118944950,
    0.0, 0.279705391489276667901,
    0.0, 0.129484966168869693271,
    0.0,
])

# SampleStats slot layout for the int64 counter array threaded through the
# rejection kernels.
STAT_PROPOSALS = 0
STAT_TRUNC_REJECTS = 1
STAT_LOOP_REJECTS = 2
STAT_ACCEPTED = 3
STAT_SQUEEZE_ACCEPTS = 4
STAT_SQUEEZE_REJECTS = 5
STAT_BESSEL_EVALS = 6
N_STATS = 7


@jit_kernel
def log_i0(kappa):
    # log I0(kappa), log-scaled throughout: no overflow for any finite kappa.
    if kappa <= _BESSEL_SWITCH:
        x = 0.25 * kappa * kappa
        term = 1.0
        s = 1.0
        m = 1
        while m < 200:
            term *= x / (m * m)
            s += term
            if term < 1e-17 * s:
                break
            m += 1
        return math.log(s)
    inv8k = 1.0 / (8.0 * kappa)
    term = 1.0
    s = 1.0
    m = 1
    while m < 40:
        f = 2.0 * m - 1.0
        nxt = term * f * f * inv8k / m
        if nxt >= term and m > 2:
            break
        term = nxt
        s += term
        if term < 1e-18 * s:
            break
        m += 1
    return kappa - 0.5 * math.log(TWO_PI * kappa) + math.log(s)


@jit_kernel
def log_i0_and_ratio(kappa):
    # (log I0(kappa), I1(kappa)/I0(kappa))
    if kappa <= _BESSEL_SWITCH:
        x = 0.25 * kappa * kappa
        t0 = 1.0
        s0 = 1.0
        t1 = 1.0
        s1 = 1.0
        m = 1
        while m < 200:
            t0 *= x / (m * m)
            t1 *= x / (m * (m + 1.0))
            s0 += t0
            s1 += t1
            if t0 < 1e-17 * s0:
                break
            m += 1
        return math.log(s0), 0.5 * kappa * s1 / s0
    inv8k = 1.0 / (8.0 * kappa)
    t0 = 1.0
    s0 = 1.0
    t1 = 1.0
    s1 = 1.0
    m = 1
    while m < 40:
        f = 2.0 * m - 1.0
        n0 = t0 * f * f * inv8k / m
        if n0 >= t0 and m > 2:
            break
        t0 = n0
        t1 *= (f * f - 4.0) * inv8k / m
        s0 += t0
        s1 += t1
        if t0 < 1e-18 * s0:
            break
        m += 1
    li0 = kappa - 0.5 * math.log(TWO_PI * kappa) + math.log(s0)
    return li0, s1 / s0


@jit_kernel
def lambert_w0_winitzki(t):
    # Global closed-form approximation of W0; exact at t=0 and at the branch
    # point -1/e.  Intended for t in [-1/e, 0] where the tuner uses it.
    s = 2.0 * _E * t + 2.0
    if s <= 0.0:
        return -1.0
    br = 1.0 / math.sqrt(s) + _INV_EM1 - _INV_SQRT2
    return _E * t / (1.0 + 1.0 / br)


@jit_kernel
def lambert_w0(t):
    # Principal branch via Halley iteration; caller clamps t >= -1/e.
    if t == 0.0:
        return 0.0
    s = _E * t + 1.0
    if s <= 0.0:
        return -1.0
    if s < 0.02:
        # branch-point series seed: W0 = -1 + p - p^2/3 + 11 p^3/72 + ...
        p = math.sqrt(2.0 * s)
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    elif t > 0.3:
        w = math.log(1.0 + t)
    else:
        w = lambert_w0_winitzki(t)
    for _ in range(20):
        ew = math.exp(w)
        f = w * ew - t
        if abs(f) <= 1e-13 * max(1.0, abs(t)):
            break
        wp1 = w + 1.0
        if wp1 <= 1e-12:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        w -= f / denom
        if w < -1.0:
            w = -1.0
    return w


@jit_kernel
def tune_envelope(eta, beta0, use_winitzki):
    """Closed-form proposal parameters for one (eta, beta0).

    Returns (alpha, beta, epsilon, kappa0, log_i0_kappa0, r_kappa0,
    g_at_kappa0, g_at_zero).
    """
    eb = eta * beta0
    kl = 2.0 / (eb + math.sqrt(2.0 * eta + eb * eb))
    ku = (2.0 + 1.0 / eta) / ((eta + 1.0) * beta0 + math.sqrt(2.0 * eta + 1.0 + eb * eb))
    c1 = 0.5 + (1.0 - 0.5 / eta) / (2.0 * eta)
    # dormant for eta >= 1/2; keeps kappa0 in [kl, ku] for tiny eta
    if c1 < 0.0:
        c1 = 0.0
    elif c1 > 1.0:
        c1 = 1.0
    kappa0 = (1.0 - c1) * kl + c1 * ku
    li0, r = log_i0_and_ratio(kappa0)
    c2 = 0.25 / eta - 2.0 / (3.0 * math.sqrt(eta))
    if beta0 <= c2:
        beta = beta0 + 1.0
    else:
        d = beta0 - c2
        beta = beta0 + r + (1.0 - r) / (1.0 + 40.0 * eta * d * d)
    c3 = (li0 / kappa0 - beta + beta0) / (beta - beta0 - r)
    t = c3 * math.exp(c3)
    if t < NEG_INV_E:
        t = NEG_INV_E
    if use_winitzki:
        c4 = lambert_w0_winitzki(t)
    else:
        c4 = lambert_w0(t)
    eps = c4 * kappa0 / (c3 - c4)
    if eps > 0.0:
        alpha = (beta - beta0 - r) * (kappa0 + eps)
        g_k0 = (beta - beta0) * kappa0 - alpha * math.log(kappa0 + eps) - li0
        g_0 = -alpha * math.log(eps)
    else:
        # exp(c3) underflowed (only for extreme beta0); fall back to the
        # alpha = epsilon = 0 boundary envelope, which requires beta = beta0 + r.
        eps = 0.0
        alpha = 0.0
        beta = beta0 + r
        g_k0 = (beta - beta0) * kappa0 - li0
        g_0 = 0.0
    return alpha, beta, eps, kappa0, li0, r, g_k0, g_0


@jit_kernel
def gamma_mt(shape, gen):
    # Marsaglia-Tsang, shape >= 1, unit rate.
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = gen.standard_normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = gen.random()
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return d * v
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v


@jit_kernel
def accept_test(kappa, u, eta, beta0, alpha, beta, eps, kappa0, li0, guard,
                use_squeeze):
    """One accept/reject decision.

    Returns (accepted, squeeze_accept, squeeze_reject, bessel_used).  The
    squeezed and plain paths share the same v and the same final comparison,
    so their decisions agree bit for bit on a shared stream.
    """
    v = (math.log(u) / eta
         - (beta - beta0) * (kappa - kappa0)
         + alpha * math.log((kappa + eps) / (kappa0 + eps))
         - li0 + guard)
    if use_squeeze:
        c6 = 0.5 * math.log(TWO_PI * kappa) - kappa
        if kappa < 0.258 or v < c6:
            if v < c6 - math.log1p(0.5 / kappa):
                return True, True, False, False
            if v < -log_i0(kappa):
                return True, False, False, True
            return False, False, False, True
        return False, False, True, False
    if v < -log_i0(kappa):
        return True, False, False, True
    return False, False, False, True


@jit_kernel
def draw_kappa(eta, beta0, alpha, beta, eps, kappa0, li0, guard, use_squeeze,
               max_iter, gen, stats):
    # One exact draw; returns -1.0 if the iteration cap is hit.
    shape = eta * alpha + 1.0
    rate = eta * beta
    it = 0
    while it < max_iter:
        it += 1
        x = gamma_mt(shape, gen) / rate
        stats[STAT_PROPOSALS] += 1
        if x < eps:
            stats[STAT_TRUNC_REJECTS] += 1
            continue
        kappa = x - eps
        u = gen.random()
        acc, sq_acc, sq_rej, bessel = accept_test(
            kappa, u, eta, beta0, alpha, beta, eps, kappa0, li0, guard,
            use_squeeze)
        if bessel:
            stats[STAT_BESSEL_EVALS] += 1
        if acc:
            stats[STAT_ACCEPTED] += 1
            if sq_acc:
                stats[STAT_SQUEEZE_ACCEPTS] += 1
            return kappa
        stats[STAT_LOOP_REJECTS] += 1
        if sq_rej:
            stats[STAT_SQUEEZE_REJECTS] += 1
    return -1.0


@jit_kernel
def draw_kappa_batch(n, eta, beta0, alpha, beta, eps, kappa0, li0, guard,
                     use_squeeze, max_iter, gen, out, stats):
    # Fills out[:n]; returns the number actually drawn (< n means a stall).
    for i in range(n):
        k = draw_kappa(eta, beta0, alpha, beta, eps, kappa0, li0, guard,
                       use_squeeze, max_iter, gen, stats)
        if k < 0.0:
            return i
        out[i] = k
    return n


@jit_kernel
def acceptance_trial(n_proposals, eta, beta0, alpha, beta, eps, kappa0, li0,
                     guard, gen):
    # Fixed proposal budget; truncation discards count as rejections.
    shape = eta * alpha + 1.0
    rate = eta * beta
    acc = 0
    for _ in range(n_proposals):
        x = gamma_mt(shape, gen) / rate
        if x < eps:
            continue
        kappa = x - eps
        u = gen.random()
        ok, _, _, _ = accept_test(kappa, u, eta, beta0, alpha, beta, eps,
                                  kappa0, li0, guard, True)
        if ok:
            acc += 1
    return acc


@jit_kernel
def wrap_angle(theta):
    # wrap to [-pi, pi)
    return theta - TWO_PI * math.floor((theta + math.pi) / TWO_PI)


@jit_kernel
def von_mises_draw(mu, kappa, gen):
    # Best-Fisher with a wrapped-Cauchy envelope.
    if kappa < 1e-10:
        return wrap_angle(-math.pi + TWO_PI * gen.random())
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    rr = (1.0 + rho * rho) / (2.0 * rho)
    while True:
        z = math.cos(math.pi * gen.random())
        f = (1.0 + rr * z) / (rr + z)
        c = kappa * (rr - f)
        u2 = gen.random()
        if c * (2.0 - c) - u2 > 0.0 or math.log(c / u2) + 1.0 - c >= 0.0:
            u3 = gen.random()
            if u3 >= 0.5:
                return wrap_angle(mu + math.acos(f))
            return wrap_angle(mu - math.acos(f))


@jit_kernel
def von_mises_batch(n, mu, kappa, gen, out):
    for i in range(n):
        out[i] = von_mises_draw(mu, kappa, gen)


@jit_kernel
def gk15_panel(a, b, eta, beta0, shift):
    # Gauss-Kronrod 7-15 on exp(-eta*(beta0*k + log I0(k)) - shift) over [a,b];
    # returns (kronrod, gauss).
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    sk = 0.0
    sg = 0.0
    for i in range(15):
        x = mid + half * _XK15[i]
        f = math.exp(-eta * (beta0 * x + log_i0(x)) - shift)
        sk += _WK15[i] * f
        sg += _WG7[i] * f
    return sk * half, sg * half
