"""Command-line front end: ``basketlevy {price,mc,density,validate} --config FILE``.

Exit codes: 0 ok, 1 a validation check failed, 2 config, 3 domain,
4 numeric, 5 capability.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .calibration import adjust_drifts, emm_residual
from .config import ModelConfig, load_config
from .errors import BasketLevyError, CapabilityError, ConfigError
from .model import BasketModel, characteristic_function
from .montecarlo import discounted_forwards, empirical_cf, mc_price, simulate_terminal
from .pricing import density_nd, price_basket
from .reference import MargrabeInputs, black_scholes_call, margrabe_price

_CATEGORY = {2: "config", 3: "domain", 4: "numeric", 5: "capability"}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="basketlevy", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("price", "Fourier price of the configured payoff"),
                        ("mc", "Monte Carlo price of the configured payoff"),
                        ("density", "emit the joint density of U_T as CSV"),
                        ("validate", "run the cross-oracle checks")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--grid-n", type=int)
        p.add_argument("--grid-l", type=float)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--no-adjust", action="store_true",
                       help="skip drift adjustment and the martingale gate (experts only)")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=("json", "csv"))
    return ap


def _apply_flags(cfg: ModelConfig, args) -> ModelConfig:
    if args.paths is not None:
        if args.paths <= 0:
            raise ConfigError(f"--paths must be positive, got {args.paths}")
        cfg.paths = args.paths
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be >= 0, got {args.seed}")
        cfg.seed = args.seed
    if args.grid_n is not None:
        if args.grid_n < 64 or args.grid_n & (args.grid_n - 1):
            raise ConfigError(f"--grid-n must be a power of two >= 64, got {args.grid_n}")
        cfg.grid_points = args.grid_n
    if args.grid_l is not None:
        if not args.grid_l > 0:
            raise ConfigError(f"--grid-l must be positive, got {args.grid_l}")
        cfg.grid_halfwidth = args.grid_l
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if cfg.antithetic and cfg.paths % 2:
        raise ConfigError(f"mc/paths must be even with antithetic sampling, got {cfg.paths}")
    return cfg


def _prepare(cfg: ModelConfig, no_adjust: bool):
    pre = emm_residual(cfg.model, cfg.market.r)
    model = cfg.model if no_adjust else adjust_drifts(cfg.model, cfg.market.r)
    post = emm_residual(model, cfg.market.r)
    return model, pre, post


def _header(cfg: ModelConfig, command: str, no_adjust: bool) -> dict:
    return {"command": command, "engine_version": __version__,
            "config_sha256": cfg.fingerprint, "adjusted": not no_adjust}


def _need_payoff(cfg: ModelConfig):
    if cfg.payoff is None:
        raise ConfigError(f"{cfg.source}: 'payoff' section is required for this command")
    return cfg.payoff


def _floats(x) -> list:
    return [float(v) for v in np.atleast_1d(x)]


def _render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        lines = ["key,value"]

        def walk(prefix, obj):
            if isinstance(obj, dict):
                for k in sorted(obj):
                    walk(f"{prefix}.{k}" if prefix else k, obj[k])
            elif isinstance(obj, list):
                for i, v in enumerate(obj):
                    walk(f"{prefix}[{i}]", v)
            else:
                lines.append(f"{prefix},{obj!r}" if isinstance(obj, float) else f"{prefix},{obj}")

        walk("", report)
        return "\n".join(lines) + "\n"
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


# --------------------------------------------------------------------------- #


def cmd_price(cfg: ModelConfig, args) -> int:
    payoff = _need_payoff(cfg)
    model, pre, post = _prepare(cfg, args.no_adjust)
    res = price_basket(model, cfg.market, payoff, cfg.grid(model), check_emm=not args.no_adjust)
    report = _header(cfg, "price", args.no_adjust)
    report.update({
        "price": res.price,
        "grid": res.grid.as_dict(),
        "diagnostics": {"normalization_defect": res.normalization_defect,
                        "truncation_loss": res.truncation_loss,
                        "min_density": res.min_density},
        "emm_residual_pre": _floats(pre),
        "emm_residual_post": _floats(post),
    })
    _emit(_render(report, args.format or "json"), args.out)
    return 0


def cmd_mc(cfg: ModelConfig, args) -> int:
    payoff = _need_payoff(cfg)
    model, pre, post = _prepare(cfg, args.no_adjust)
    res = mc_price(model, cfg.market, payoff, cfg.paths, cfg.seed, cfg.antithetic,
                   workers=args.workers, check_emm=not args.no_adjust)
    report = _header(cfg, "mc", args.no_adjust)
    report.update({
        "estimate": res.estimate, "std_error": res.std_error, "n_paths": res.n_paths,
        "seed": res.seed, "antithetic": res.antithetic,
        "model_fingerprint": res.model_fingerprint,
        "emm_residual_pre": _floats(pre), "emm_residual_post": _floats(post),
    })
    _emit(_render(report, args.format or "json"), args.out)
    return 0


def cmd_density(cfg: ModelConfig, args) -> int:
    if cfg.model.n > 2:
        raise CapabilityError(f"density emission supports n <= 2, model has n={cfg.model.n}")
    model, _, _ = _prepare(cfg, args.no_adjust)
    dens = density_nd(model, cfg.market.t_maturity, cfg.grid(model))
    g = dens.grid
    if (args.format or "csv") == "json":
        report = _header(cfg, "density", args.no_adjust)
        report.update({"grid": g.as_dict(),
                       "axes": [g.nodes(d).tolist() for d in range(g.ndim)],
                       "density": dens.values.tolist(),
                       "normalization_defect": dens.normalization_defect})
        _emit(_render(report, "json"), args.out)
        return 0
    fmt = "%.17g"
    if g.ndim == 1:
        rows = ["x,density"] + [f"{fmt % x},{fmt % p}" for x, p in zip(g.nodes(0), dens.values)]
    else:
        xs, ys = g.nodes(0), g.nodes(1)
        rows = ["x,y,density"]
        for i, x in enumerate(xs):
            sx = fmt % x
            rows.extend(f"{sx},{fmt % y},{fmt % p}" for y, p in zip(ys, dens.values[i]))
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def _check(name: str, passed: bool, **measured) -> dict:
    return {"name": name, "pass": bool(passed), **measured}


def run_checks(cfg: ModelConfig, model: BasketModel, no_adjust: bool, workers: int = 1) -> List[dict]:
    mkt = cfg.market
    t = mkt.t_maturity
    checks = []
    res = emm_residual(model, mkt.r)
    worst = float(np.max(np.abs(res)))
    checks.append(_check("emm_residual", worst <= 1e-8, max_abs=worst, tolerance=1e-8))

    samples = simulate_terminal(model, t, cfg.paths, cfg.seed, cfg.antithetic, workers)
    for s, (est, se) in enumerate(discounted_forwards(model, mkt, samples, cfg.antithetic)):
        gap = abs(est - mkt.spots[s])
        checks.append(_check(f"emm_martingale[{s}]", gap <= 3 * se, estimate=est,
                             spot=mkt.spots[s], std_error=se))

    rng = np.random.default_rng(cfg.seed)
    tol = max(5e-3, 5.0 / math.sqrt(cfg.paths))
    worst_cf = 0.0
    for _ in range(20):
        v = rng.normal(size=model.n)
        v *= rng.uniform(0.0, 4.0) / np.linalg.norm(v)
        worst_cf = max(worst_cf, abs(characteristic_function(model, v, t) - empirical_cf(samples, v)))
    checks.append(_check("empirical_cf", worst_cf <= tol, max_abs=worst_cf, tolerance=tol))

    if cfg.payoff is not None:
        mc = mc_price(model, mkt, cfg.payoff, cfg.paths, cfg.seed, cfg.antithetic,
                      check_emm=False, samples=samples)
        fourier = None
        if model.n <= 3:
            fourier = price_basket(model, mkt, cfg.payoff, cfg.grid(model), check_emm=False).price
            gap = abs(fourier - mc.estimate)
            checks.append(_check("fourier_vs_mc", gap <= 3 * mc.std_error + 1e-3 * abs(mc.estimate),
                                 fourier=fourier, mc=mc.estimate, std_error=mc.std_error))
        ref = cfg.reference
        if ref is not None:
            if ref["kind"] == "black_scholes":
                value = black_scholes_call(mkt.spots[0], cfg.payoff.strike, mkt.r,
                                           ref["sigma"], t)
                rel = 1e-4
            else:
                value = margrabe_price(MargrabeInputs(
                    mkt.spots[0], mkt.spots[1], ref["sigma1"], ref["sigma2"], ref["rho"], t,
                    ref.get("q1", 0.0), ref.get("q2", 0.0)))
                rel = 5e-4
            if fourier is not None:
                checks.append(_check(f"fourier_vs_{ref['kind']}",
                                     abs(fourier - value) <= rel * abs(value),
                                     fourier=fourier, reference=value, rel_tolerance=rel))
            checks.append(_check(f"mc_vs_{ref['kind']}",
                                 abs(mc.estimate - value) <= 3 * mc.std_error,
                                 mc=mc.estimate, reference=value, std_error=mc.std_error))
    return checks


def cmd_validate(cfg: ModelConfig, args) -> int:
    model, pre, _ = _prepare(cfg, args.no_adjust)
    checks = run_checks(cfg, model, args.no_adjust, args.workers)
    report = _header(cfg, "validate", args.no_adjust)
    report.update({"seed": cfg.seed, "n_paths": cfg.paths, "checks": checks,
                   "emm_residual_pre": _floats(pre),
                   "passed": all(c["pass"] for c in checks)})
    _emit(_render(report, args.format or "json"), args.out)
    for c in checks:
        sys.stderr.write(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}\n")
    return 0 if report["passed"] else 1


_COMMANDS = {"price": cmd_price, "mc": cmd_mc, "density": cmd_density, "validate": cmd_validate}


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        return _COMMANDS[args.command](cfg, args)
    except BasketLevyError as exc:
        sys.stderr.write(f"error [{_CATEGORY.get(exc.exit_code, 'error')}]: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
