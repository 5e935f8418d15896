"""Command-line front door.

Subcommands: ``sample`` (stream draws), ``tune`` (inspect an envelope),
``gibbs`` (posterior chains from an angle file), ``efficiency`` (acceptance
curves as CSV), ``verify`` (validation gauntlet, nonzero exit on failure) and
``bench`` (throughput).  Exit codes: 0 success, 1 validation/test failure,
2 usage error, 3 numeric error.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._accel import backend
from .errors import NumericError
from .posterior import ConjugatePrior, gibbs_sample, read_angles
from .sampler import RngStream, sample_batch
from .tuning import PosteriorParams, approx_tune, expected_acceptance, oracle_tune
from . import validation

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


@dataclass
class RunConfig:
    command: str
    eta: float = 1.0
    beta0: float = 0.0
    n: int = 1
    seed: int = 0
    method: str = "squeezed"
    w_mode: str = "exact"
    output: Optional[str] = None
    fmt: str = "csv"
    # command-specific extras
    oracle: bool = False
    data: Optional[str] = None
    degrees: bool = False
    a: float = 0.0
    b: float = 0.0
    mu0: float = 0.0
    r0: float = 0.0
    iters: int = 1000
    burn_in: int = 0
    etas: tuple = (1.0, 10.0, 100.0)
    grid: int = 200
    full: bool = False
    modes: tuple = ("approx", "oracle")
    jobs: int = 1
    seconds: float = 1.0
    mixed: bool = False
    verify_n: int = 20_000


def atomic_write_text(path, text: str) -> None:
    """Write via temp-and-rename so failures leave no partial file."""
    path = os.fspath(path)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(cfg.output, text)


def _stats_dict(stats) -> dict:
    return {
        "proposals": stats.proposals,
        "truncation_rejects": stats.truncation_rejects,
        "loop_rejects": stats.loop_rejects,
        "accepted": stats.accepted,
        "squeeze_accepts": stats.squeeze_accepts,
        "squeeze_rejects": stats.squeeze_rejects,
        "bessel_evals": stats.bessel_evals,
    }


def cmd_sample(cfg: RunConfig) -> int:
    post = PosteriorParams(eta=cfg.eta, beta0=cfg.beta0)
    rng = RngStream(cfg.seed)
    draws, stats = sample_batch(post, cfg.n, method=cfg.method,
                                w_mode=cfg.w_mode, rng=rng)
    if cfg.fmt == "jsonl":
        lines = [json.dumps({"kappa": k, "i": i}, sort_keys=True)
                 for i, k in enumerate(draws)]
        lines.append(json.dumps({"stats": _stats_dict(stats)}, sort_keys=True))
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, "\n".join(repr(float(k)) for k in draws) + "\n")
    return EXIT_OK


def cmd_tune(cfg: RunConfig) -> int:
    post = PosteriorParams(eta=cfg.eta, beta0=cfg.beta0)
    env = oracle_tune(post) if cfg.oracle else approx_tune(post, cfg.w_mode)
    eff = expected_acceptance(post, env)
    payload = {
        "eta": post.eta,
        "beta0": post.beta0,
        "tuner": "oracle" if cfg.oracle else "approx",
        "w_mode": "exact" if cfg.oracle else cfg.w_mode,
        "alpha": env.alpha,
        "beta": env.beta,
        "epsilon": env.epsilon,
        "kappa0": env.kappa0,
        "log_i0_kappa0": env.log_i0_kappa0,
        "r_kappa0": env.r_kappa0,
        "g_at_kappa0": env.g_at_kappa0,
        "g_at_zero": env.g_at_zero,
        "expected_acceptance": eff,
    }
    if cfg.fmt == "jsonl":
        _emit(cfg, json.dumps(payload, sort_keys=True) + "\n")
    else:
        _emit(cfg, "".join(f"{k}={v!r}\n" if isinstance(v, float)
                           else f"{k}={v}\n" for k, v in payload.items()))
    return EXIT_OK


def cmd_gibbs(cfg: RunConfig) -> int:
    angles = read_angles(cfg.data, degrees=cfg.degrees)
    prior = ConjugatePrior(a=cfg.a, b=cfg.b, mu0=cfg.mu0, r0=cfg.r0)
    rng = RngStream(cfg.seed)
    chain = gibbs_sample(angles, prior, cfg.iters, cfg.burn_in, rng)
    if cfg.fmt == "jsonl":
        lines = [json.dumps({"mu": m, "kappa": k, "i": i}, sort_keys=True)
                 for i, (m, k) in enumerate(chain.draws)]
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        rows = ["mu,kappa"]
        rows.extend(f"{m!r},{k!r}" for m, k in chain.draws)
        _emit(cfg, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_efficiency(cfg: RunConfig) -> int:
    grid = 2000 if cfg.full else cfg.grid
    curves = validation.efficiency_sweep(
        cfg.etas, grid, modes=cfg.modes, w_mode=cfg.w_mode, seed=cfg.seed,
        jobs=cfg.jobs)
    if cfg.output in (None, "-"):
        chunks = []
        for curve in curves:
            chunks.append(f"# eta={curve.eta:g}\n{curve.to_csv()}")
        sys.stdout.write("".join(chunks))
    else:
        os.makedirs(cfg.output, exist_ok=True)
        for curve in curves:
            path = os.path.join(cfg.output, f"eff_eta{curve.eta:g}.csv")
            atomic_write_text(path, curve.to_csv())
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    rng = RngStream(cfg.seed)
    out = [f"backend={backend()}"]
    results = {}
    for method in ("plain", "squeezed"):
        if cfg.mixed:
            rate, stats = validation.mixed_workload_bench(
                cfg.eta, method, cfg.seconds, rng.split(hash(method) % 1024))
        else:
            post = PosteriorParams(eta=cfg.eta, beta0=cfg.beta0)
            rate, stats = validation.throughput_bench(
                post, method, cfg.seconds, rng.split(0 if method == "plain" else 1))
        results[method] = rate
        out.append(
            f"{method}: {rate:,.0f} samples/s  acceptance={stats.acceptance_rate:.4f}  "
            f"bessel_fraction={stats.bessel_fraction:.4f}  "
            f"squeeze_accepts={stats.squeeze_accepts}  "
            f"squeeze_rejects={stats.squeeze_rejects}")
    out.append(f"speedup(squeezed/plain)={results['squeezed'] / results['plain']:.3f}")
    print("\n".join(out))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    failures = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
        if not ok:
            failures += 1

    # 1. efficiency floor on the sweep grid
    for eta in (1.0, 10.0, 100.0):
        grid = validation.open_grid(-0.995, 0.995, cfg.grid)
        effs = np.array([
            expected_acceptance(PosteriorParams(eta=eta, beta0=b0),
                                approx_tune(PosteriorParams(eta=eta, beta0=b0),
                                            "exact"))
            for b0 in grid])
        check(f"efficiency floor >= 0.7 (eta={eta:g})", float(effs.min()) >= 0.70,
              f"min={effs.min():.4f}")

    # 2. KS exactness + acceptance-rate consistency on the standard grid
    ks_grid = [(eta, b0) for eta in (1.0, 5.0, 10.0, 100.0)
               for b0 in (-0.9, -0.5, 0.0, 0.3, 0.9, 2.0, 5.0)]
    ks_fail = 0
    rate_fail = 0
    base = RngStream(cfg.seed)
    for idx, (eta, b0) in enumerate(ks_grid):
        post = PosteriorParams(eta=eta, beta0=b0)
        env = approx_tune(post, "exact")
        draws, stats = sample_batch(post, cfg.verify_n, method="squeezed",
                                    rng=base.split(idx), env=env)
        cdf = validation.quadrature_cdf(post, tol=1e-9)
        _, p = validation.ks_test(draws, cdf)
        if p <= 0.01:
            ks_fail += 1
        eff = expected_acceptance(post, env)
        sigma = math.sqrt(eff * (1.0 - eff) / stats.proposals)
        if abs(stats.acceptance_rate - eff) > 3.0 * sigma:
            rate_fail += 1
    check("KS exactness grid (28 combos)", ks_fail <= 1,
          f"{ks_fail} failures at alpha=0.01")
    check("acceptance rate within 3 sigma of quadrature", rate_fail <= 1,
          f"{rate_fail} out of {len(ks_grid)}")

    # 3. decision equivalence spot check
    eq_ok = True
    for idx, (eta, b0) in enumerate([(1.0, 0.0), (10.0, 0.5), (100.0, -0.9)]):
        post = PosteriorParams(eta=eta, beta0=b0)
        d1, _ = sample_batch(post, 2000, method="plain",
                             rng=RngStream(cfg.seed).split(500 + idx))
        d2, _ = sample_batch(post, 2000, method="squeezed",
                             rng=RngStream(cfg.seed).split(500 + idx))
        if not np.array_equal(d1, d2):
            eq_ok = False
    check("plain/squeezed decision equivalence", eq_ok)

    # 4. errata adjudication
    report = validation.adjudicate_errata(cfg.output)
    res_norm, res_rate = validation.errata_residuals()
    check("erratum residuals < 1e-6", res_norm < 1e-6 and res_rate < 1e-6,
          f"normalization={res_norm:.2e}, rate={res_rate:.2e}")
    if cfg.output in (None, "-"):
        print(report, end="")

    print(f"verify: {'OK' if failures == 0 else f'{failures} failure(s)'}")
    return EXIT_OK if failures == 0 else EXIT_FAIL


def _parse_etas(text: str) -> tuple:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eta list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("eta list is empty")
    return values


def _parse_modes(text: str) -> tuple:
    values = tuple(x.strip() for x in text.split(",") if x.strip())
    for v in values:
        if v not in ("approx", "oracle", "empirical"):
            raise argparse.ArgumentTypeError(f"unknown mode {v!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="besselexp",
        description="Sampling and inference for the Bessel exponential "
                    "distribution (von Mises concentration posterior).")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, beta0=True):
        sp.add_argument("--eta", type=float, default=1.0)
        if beta0:
            sp.add_argument("--beta0", type=float, default=0.0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", default=None,
                        help="output path (default: stdout)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "jsonl"),
                        default="csv")

    sp = sub.add_parser("sample", help="stream kappa draws")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--method", choices=("plain", "squeezed"),
                    default="squeezed")
    sp.add_argument("--w-mode", dest="w_mode", choices=("exact", "winitzki"),
                    default="exact")

    sp = sub.add_parser("tune", help="print the tuned envelope")
    common(sp)
    sp.add_argument("--w-mode", dest="w_mode", choices=("exact", "winitzki"),
                    default="exact")
    sp.add_argument("--oracle", action="store_true",
                    help="numerically optimal tuner instead of closed form")

    sp = sub.add_parser("gibbs", help="Gibbs chain for (mu, kappa)")
    sp.add_argument("--data", required=True, help="angle file, one per line")
    sp.add_argument("--degrees", action="store_true")
    sp.add_argument("--a", type=float, default=0.0)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--mu0", type=float, default=0.0)
    sp.add_argument("--r0", type=float, default=0.0)
    sp.add_argument("--iters", type=int, default=1000)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", default=None)
    sp.add_argument("--format", dest="fmt", choices=("csv", "jsonl"),
                    default="csv")

    sp = sub.add_parser("efficiency", help="acceptance curves as CSV")
    sp.add_argument("--etas", type=_parse_etas, default=(1.0, 10.0, 100.0))
    sp.add_argument("--grid", type=int, default=200)
    sp.add_argument("--full", action="store_true",
                    help="use the full 2000-point grid")
    sp.add_argument("--modes", type=_parse_modes,
                    default=("approx", "oracle"))
    sp.add_argument("--w-mode", dest="w_mode", choices=("exact", "winitzki"),
                    default="exact")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", default=None,
                    help="directory for per-eta CSV files (default: stdout)")

    sp = sub.add_parser("verify", help="run the validation gauntlet")
    sp.add_argument("--grid", type=int, default=50)
    sp.add_argument("--n", dest="verify_n", type=int, default=20_000)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--output", default=None,
                    help="path for the errata report (default: stdout)")

    sp = sub.add_parser("bench", help="throughput benchmark")
    common(sp)
    sp.add_argument("--seconds", type=float, default=1.0)
    sp.add_argument("--mixed", action="store_true",
                    help="beta0 ~ Uniform(-1,1), re-tuned per 100 draws")

    return p


_COMMANDS = {
    "sample": cmd_sample,
    "tune": cmd_tune,
    "gibbs": cmd_gibbs,
    "efficiency": cmd_efficiency,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def run(cfg: RunConfig) -> int:
    """Dispatch a validated configuration; returns the process exit code."""
    try:
        return _COMMANDS[cfg.command](cfg)
    except (NumericError, FloatingPointError) as exc:
        print(f"besselexp: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"besselexp: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors already
        return int(exc.code) if exc.code else 0
    kwargs = {k: v for k, v in vars(ns).items() if v is not None}
    cfg = RunConfig(**kwargs)
    code = run(cfg)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
