"""Command line entry point: polydens <command> --config file.json [--out dir] [--format csv|json] [--seed n].

Exit codes: 0 when every checked predicate holds, 2 when one fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .density import density_from_config
from .geometry import Domain
from .gny import decompose, measure_space, verify
from .spectrum import kernel_dimension, kernel_size

log = logging.getLogger("polydens")


class PredicateFailed(Exception):
    pass


def _domain(cfg: dict) -> Domain:
    if "domain" in cfg:
        return Domain.from_dict(cfg["domain"])
    return Domain.unit(int(cfg.get("dim", 1)))


def cmd_solve(cfg: dict, args) -> list:
    domain = _domain(cfg)
    m = int(cfg["m"])
    rho = density_from_config(cfg.get("density", {"kind": "constant"}), domain, m)
    space = ex.graded_space(rho, m, int(cfg.get("cells", 16)), cfg.get("degree"),
                            int(cfg.get("cells_per_feature", 4)), growth=float(cfg.get("growth", 1.3)))
    s = ex.solve_density(rho, m, int(cfg.get("k", kernel_size(domain.dim, m) + 4)), space, seed=args.seed,
                         check_kernel=False)
    ok = s.converged
    if len(s) > kernel_size(domain.dim, m):
        ok = ok and kernel_dimension(s, domain.dim, m, strict=False) == kernel_size(domain.dim, m)
    ex.emit(s, args.out, args.format)
    if not ok:
        raise PredicateFailed("spectrum not converged or kernel dimension wrong")
    return [s]


def cmd_sweep(cfg: dict, args) -> list:
    conf = ex.ExperimentConfig.from_dict({**cfg, "seed": args.seed})
    s = ex.run_sweep(conf)
    tol = conf.tolerances
    d = kernel_size(conf.domain.dim, conf.m)
    js = tol.get("j", [d + 1])
    js = [js] if isinstance(js, int) else list(js)
    ex.emit(s, args.out, args.format)
    fits = [ex.fit_rate(s, j) for j in js]
    ex.emit(fits, args.out, args.format)
    out = [s] + fits
    failures = []
    for f in fits:
        if "slope" in tol and abs(f.slope - float(tol["slope"])) > float(tol.get("slope_tol", 0.0)):
            failures.append(f"j={f.j}: slope {f.slope:.4f} outside {tol['slope']} +- {tol.get('slope_tol', 0.0)}")
        if "r2_min" in tol and f.r2 < float(tol["r2_min"]):
            failures.append(f"j={f.j}: R^2 {f.r2:.4f} below {tol['r2_min']}")
    ex.write_json(Path(args.out) / "acceptance.json", {"tolerances": tol, "failures": failures})
    if failures:
        raise PredicateFailed("; ".join(failures))
    return out


def cmd_gny(cfg: dict, args) -> list:
    domain = _domain(cfg)
    m = int(cfg.get("m", 1))
    rho = density_from_config(cfg.get("density", {"kind": "constant"}), domain, m)
    ms = measure_space(rho, int(cfg.get("cells", 32)), int(cfg.get("sub", 4)))
    j = int(cfg["j"])
    dec = decompose(ms, j, float(cfg.get("theta", 0.5)), volume_filter=bool(cfg.get("volume_filter", False)))
    rep = verify(dec, ms, j, float(cfg.get("c_min", 0.0)))
    out = Path(args.out)
    ex.emit(dec, out, "json")
    rows = [{"clause": k, "passed": int(v)} for k, v in rep.clauses.items()]
    ex.emit([("verify", rows)], out, args.format)
    if not rep.passed:
        raise PredicateFailed(f"decomposition failed: {[k for k, v in rep.clauses.items() if not v]}")
    return [dec, rep]


def cmd_steklov(cfg: dict, args) -> list:
    domain = _domain(cfg)
    eps = cfg.get("eps") or ex.default_ladder(domain.dim)[:4]
    table = ex.steklov_compare(domain, int(cfg.get("m", 1)), eps, int(cfg.get("j_max", 2)),
                               int(cfg.get("cells", 16)), cfg.get("degree"), args.seed)
    ex.emit(table, args.out, args.format)
    return [table]


def cmd_verify(cfg: dict, args) -> list:
    conf = ex.ExperimentConfig.from_dict({**cfg, "seed": args.seed})
    if not conf.kinds:
        raise ValueError("config lists no bound kinds")
    s = ex.run_sweep(conf)
    reports = ex.bound_reports(s)
    verdicts = ex.verdicts(reports)
    ex.emit([s, ("bounds", reports), ("verdicts", verdicts)], args.out, args.format)
    return [s, reports, verdicts]


def cmd_taylor(cfg: dict, args) -> list:
    eps = cfg.get("eps") or list(np.geomspace(1e-1, 1e-3, 8))
    rep = ex.taylor_remainder_check(int(cfg["m"]), int(cfg["N"]), int(cfg["k"]), eps,
                                    max_spread=float(cfg.get("max_spread", 10.0)))
    ex.emit(rep, args.out, args.format)
    if not rep.passed:
        raise PredicateFailed("remainder ratios not bounded")
    return [rep]


COMMANDS = {
    "solve": (cmd_solve, "one spectrum"),
    "sweep": (cmd_sweep, "eps ladder with rate fits"),
    "gny": (cmd_gny, "annular decomposition and its verification"),
    "steklov": (cmd_steklov, "boundary concentration against Steklov eigenvalues"),
    "verify": (cmd_verify, "bound ratios and uniformity verdicts"),
    "taylor": (cmd_taylor, "Taylor remainder ratios on small balls"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polydens", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        c = sub.add_parser(name, help=help_)
        c.add_argument("--config", required=True, help="JSON config file")
        c.add_argument("--out", default="out", help="output directory")
        c.add_argument("--format", choices=("csv", "json"), default="csv")
        c.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        c.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if args.seed is None:
            args.seed = int(cfg.get("seed", 0))
        COMMANDS[args.command][0](cfg, args)
    except PredicateFailed as exc:
        print(f"predicate failed: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
