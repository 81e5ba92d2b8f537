"""gfbm-lab command line: every subcommand writes a data file (csv|json) plus a metadata sidecar."""
import argparse, os, sys, time
from dataclasses import asdict
from typing import Any, Dict, List, Optional
import numpy as np
from .bergomi import table1, vvix_surface
from .config import OUT_DIR, THREADS
from .constants import EXIT_OK, EXIT_FAILURE, EXIT_DOMAIN, EXIT_NUMERICAL, SURFACE_GAMMAS, TABLE1_T, TABLE1_DELTA, TABLE1_ETA
from .errors import DomainError, NumericalError
from .girsanov import solve_wiener_hopf, solve_volterra, triangular_rows
from .helpers import fmt17, parse_floats, parse_ints, parse_bool
from .logging_setup import log, setup_logging
from .market import martingale_check, arbitrage_demo
from .model import classify, make_params, make_rl_params
from .models import RunConfig, QuadratureSpec, FouParams, ShotNoiseParams, MarketParams
from .simulate import (uniform_grid, sample_gfbm, sample_rl_gfbm, sample_mixed, sample_fou,
                       sample_shot_noise_prelimit, shot_noise_variance)
from .storage import write_matrix_csv, write_rows_csv, write_json, write_meta, paths_csv, dumps, load_config_file
from .tables import table1_table, sweep_table, classify_table
from .variation import variation_sweep

CLI_LEVELS = "2^4,2^6,2^8"
REQUIRED = {c: ("alpha", "gamma") for c in ("classify", "simulate", "variation", "wiener-hopf", "price")}
REQUIRED["vvix-surface"] = ("H", "t")
GLOBAL_KEYS = ("config", "threads", "seed", "out", "format", "pretty", "quad_abs_tol", "quad_rel_tol",
               "quad_limit", "quad_rule", "command")

def _flag(p, name, **kw):
    # booleans accept --x, --x true|false (also from config files)
    p.add_argument(name, type=parse_bool, nargs="?", const=True, default=False, **kw)

def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--config", help="key = value file; flags override it")
    c.add_argument("--threads", type=int, default=None, help="worker cap (fallback GFBM_LAB_THREADS)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None, help="output path")
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    _flag(c, "--pretty", help="also print a human table / indented JSON")
    c.add_argument("--quad-abs-tol", type=float, default=None)
    c.add_argument("--quad-rel-tol", type=float, default=None)
    c.add_argument("--quad-limit", type=int, default=None)
    c.add_argument("--quad-rule", choices=("gauss-jacobi", "tanh-sinh"), default=None)
    return c

def _model_args(p):
    # not argparse-required so a --config file can supply them
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)

EXIT_CODES = (f"exit codes: {EXIT_OK} success, {EXIT_FAILURE} unexpected failure, "
              f"{EXIT_DOMAIN} invalid input or configuration, {EXIT_NUMERICAL} numerical failure")

def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="gfbm-lab", description="Generalized fractional Brownian motion toolkit",
                                 epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="region and semimartingale properties")
    _model_args(p)

    p = sub.add_parser("table1", parents=[common], help="rough-Bergomi VVIX table")
    p.add_argument("--side", choices=("a", "b"), default="a")

    p = sub.add_parser("simulate", parents=[common], help="exact Gaussian paths")
    _model_args(p)
    p.add_argument("--kind", choices=("gfbm", "rl", "mixed", "fou"), default="gfbm")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--fou-a", type=float, default=1.0)
    p.add_argument("--fou-m", type=float, default=0.0)
    p.add_argument("--fou-nu", type=float, default=1.0)
    p.add_argument("--fou-z0", type=float, default=0.0)

    p = sub.add_parser("variation", parents=[common], help="p-variation sweep")
    _model_args(p)
    p.add_argument("--p", default="1,2")
    p.add_argument("--n", default="2^4,2^6,2^8")
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--T", type=float, default=1.0)
    _flag(p, "--no-expected", help="skip the deterministic expected sums")

    p = sub.add_parser("wiener-hopf", parents=[common], help="panel-mean L and Volterra ell on the slice grid")
    _model_args(p)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--T", type=float, default=1.0)

    p = sub.add_parser("vvix-surface", parents=[common], help="VVIX approximation along gamma at fixed H")
    p.add_argument("--H", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--gammas", default=None, help="list or start:stop:count (default 0.00..0.99)")
    p.add_argument("--T", type=float, default=TABLE1_T)
    p.add_argument("--delta", type=float, default=TABLE1_DELTA)
    p.add_argument("--eta", type=float, default=TABLE1_ETA)

    p = sub.add_parser("price", parents=[common], help="martingale check or arbitrage portfolios")
    _model_args(p)
    p.add_argument("--mode", choices=("martingale", "bachelier", "black_scholes"), default="martingale")
    p.add_argument("--mu", type=float, default=0.05)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--r", type=float, default=0.01)
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--strike", type=float, default=None)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--levels", default=CLI_LEVELS)
    _flag(p, "--no-gfbm", help="pure Brownian price (phi = 0)")

    p = sub.add_parser("shotnoise", parents=[common], help="scaled shot-noise paths")
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--window", type=float, default=400.0)
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=100)
    return ap

def _apply_config(ap: argparse.ArgumentParser, argv: List[str]):
    pre = argparse.ArgumentParser(add_help=False); pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config: return
    values = load_config_file(known.config)
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sp in action.choices.values(): sp.set_defaults(**values)

def run_config(args: argparse.Namespace) -> RunConfig:
    kw = {k: v for k, v in (("abs_tol", args.quad_abs_tol), ("rel_tol", args.quad_rel_tol),
                            ("max_subdivisions", args.quad_limit), ("singular_endpoint_rule", args.quad_rule))
          if v is not None}
    opts = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS}
    missing = [k for k in REQUIRED.get(args.command, ()) if opts.get(k) is None]
    if missing: raise DomainError(f"{args.command} needs " + ", ".join(f"--{k}" for k in missing))
    threads = THREADS if args.threads is None else max(1, int(args.threads))
    return RunConfig(args.command, opts, args.out, args.format, int(args.seed), threads, QuadratureSpec(**kw))

def _out(rc: RunConfig, stem: Optional[str] = None) -> str:
    return rc.output_path or os.path.join(OUT_DIR, f"{stem or rc.command}.{rc.format}")

def _emit_rows(rc: RunConfig, rows: List[Dict], started: float, jitter: float = 0.0, pretty: bool = False,
               printer=None) -> str:
    path = _out(rc)
    if rc.format == "json": write_json(path, rows, pretty)
    else: write_rows_csv(path, rows)
    write_meta(path, _meta_config(rc), rc.seed, jitter, started)
    if pretty and printer: print(printer(rows))
    return path

def _meta_config(rc: RunConfig) -> Dict[str, Any]:
    return dict(command=rc.command, options=rc.options, format=rc.format, threads=rc.threads, quad=asdict(rc.quad))

# ---- Commands ----
def cmd_classify(rc: RunConfig, args, started):
    res = classify(make_params(args.alpha, args.gamma, rc.quad))
    print(classify_table(res) if args.pretty else dumps(res))
    if rc.output_path:
        write_json(rc.output_path, res); write_meta(rc.output_path, _meta_config(rc), rc.seed, 0.0, started)

def cmd_table1(rc: RunConfig, args, started):
    rows = table1(args.side, rc.quad, rc.threads)
    if rc.output_path: _emit_rows(rc, rows, started)
    elif rc.format == "json": print(dumps(rows, args.pretty))
    else: print(table1_table(rows) if args.pretty else _csv_text(rows))

def _csv_text(rows):
    cols = list(rows[0].keys())
    fmt = lambda v: fmt17(v) if isinstance(v, (float, np.floating)) else str(v)
    return "\n".join([",".join(cols)] + [",".join(fmt(r[c]) for c in cols) for r in rows])

def cmd_simulate(rc: RunConfig, args, started):
    grid = uniform_grid(args.T, args.n)
    if args.kind == "rl":
        batch = sample_rl_gfbm(make_rl_params(args.alpha, args.gamma), grid, args.paths, rc.seed, rc.quad, rc.threads)
    else:
        params = make_params(args.alpha, args.gamma, rc.quad)
        if args.kind == "gfbm": batch = sample_gfbm(params, grid, args.paths, rc.seed, rc.quad, rc.threads)
        elif args.kind == "mixed": batch = sample_mixed(params, grid, args.paths, rc.seed, rc.quad, rc.threads)
        else:
            fou = FouParams(args.fou_a, args.fou_m, args.fou_nu, args.fou_z0)
            batch = sample_fou(params, fou, grid, args.paths, rc.seed, rc.quad, rc.threads)
    path = _out(rc)
    if rc.format == "json": write_json(path, dict(t=grid.points, paths=batch.values, label=batch.label), args.pretty)
    else: paths_csv(path, grid.points, batch.values)
    write_meta(path, _meta_config(rc), rc.seed, batch.jitter, started)

def cmd_variation(rc: RunConfig, args, started):
    params = make_params(args.alpha, args.gamma, rc.quad)
    rows = variation_sweep(params, parse_floats(args.p), parse_ints(args.n), args.paths, rc.seed, args.T,
                           not args.no_expected, rc.quad, rc.threads)
    _emit_rows(rc, rows, started, pretty=args.pretty, printer=sweep_table)

def cmd_wiener_hopf(rc: RunConfig, args, started):
    params = make_params(args.alpha, args.gamma, rc.quad)
    wh = solve_wiener_hopf(params, args.T, args.n, spec=rc.quad, threads=rc.threads)
    vg = solve_volterra(wh)
    lr, er = triangular_rows(wh), triangular_rows(vg)
    path = _out(rc)
    if rc.format == "json":
        write_json(path, dict(n=wh.n, T=wh.horizon, residual_norm=wh.residual_norm, condition=wh.condition,
                              volterra_residual=vg.residual_norm, s=lr[:, 0], t=lr[:, 1], L=lr[:, 2], ell=er[:, 2]),
                   args.pretty)
    else:
        write_matrix_csv(path, ["s", "t", "L", "ell"], np.column_stack([lr, er[:, 2]]))
    write_meta(path, _meta_config(rc) | dict(residual_norm=wh.residual_norm, condition=wh.condition), rc.seed, 0.0, started)

def cmd_vvix_surface(rc: RunConfig, args, started):
    gammas = parse_floats(args.gammas) if args.gammas else list(SURFACE_GAMMAS)
    rows = vvix_surface(args.H, args.t, gammas, args.T, args.delta, args.eta, rc.quad, rc.threads)
    _emit_rows(rc, rows, started)

def cmd_price(rc: RunConfig, args, started):
    params = make_params(args.alpha, args.gamma, rc.quad)
    if args.mode == "martingale":
        mkt = MarketParams(args.mu, args.sigma, args.r, args.p0)
        wh = solve_wiener_hopf(params, args.T, args.n, spec=rc.quad, threads=rc.threads)
        rep = martingale_check(mkt, wh, args.paths, rc.seed, include_gfbm=not args.no_gfbm, strike=args.strike,
                               spec=rc.quad, threads=rc.threads)
    else:
        levels = parse_ints(args.levels)
        rep = arbitrage_demo(params, uniform_grid(args.T, max(levels)), rc.seed, args.mode, args.paths, levels,
                             args.r, rc.quad, rc.threads)
    path = rc.output_path or os.path.join(OUT_DIR, "price.json")
    write_json(path, rep, True)
    write_meta(path, _meta_config(rc), rc.seed, 0.0, started)
    if args.pretty: print(dumps(rep))

def cmd_shotnoise(rc: RunConfig, args, started):
    sn = ShotNoiseParams(args.rate, args.alpha, args.gamma, args.epsilon, args.window, args.noise_scale)
    grid = uniform_grid(args.T, args.n)
    batch = sample_shot_noise_prelimit(sn, grid, args.paths, rc.seed, rc.quad)
    path = _out(rc)
    if rc.format == "json":
        mc = float(np.var(batch.values[:, -1], ddof=1)) if args.paths > 1 else float("nan")
        write_json(path, dict(t=grid.horizon, variance_mc=mc, variance=shot_noise_variance(sn, grid.horizon, spec=rc.quad),
                              n_paths=args.paths, seed=rc.seed), args.pretty)
    else: paths_csv(path, grid.points, batch.values)
    write_meta(path, _meta_config(rc), rc.seed, 0.0, started)

COMMANDS = {
    "classify": cmd_classify, "table1": cmd_table1, "simulate": cmd_simulate, "variation": cmd_variation,
    "wiener-hopf": cmd_wiener_hopf, "vvix-surface": cmd_vvix_surface, "price": cmd_price, "shotnoise": cmd_shotnoise,
}

def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
        args = ap.parse_args(argv)
        rc = run_config(args)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_DOMAIN
    except DomainError as e:
        log.error(f"invalid configuration: {e}")
        return EXIT_DOMAIN
    started = time.time()
    try:
        COMMANDS[rc.command](rc, args, started)
    except DomainError as e:
        log.error(f"{rc.command}: {e}")
        return EXIT_DOMAIN
    except NumericalError as e:
        log.error(f"{rc.command}: numerical failure: {e} (estimate {e.estimate:.3g})")
        return EXIT_NUMERICAL
    except Exception:
        log.exception(f"{rc.command}: unexpected failure")
        return EXIT_FAILURE
    log.info(f"{rc.command} finished in {time.time() - started:.2f}s")
    return EXIT_OK

def entrypoint():
    setup_logging()
    sys.exit(main())
