"""``nasco`` command line: margin, synthesize, simulate, verify.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 unstable
loop, 4 infeasible synthesis, 5 runtime fault.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from .contract import (
    check_trace,
    format_verdict,
    read_trace_csv,
    validate_parameters,
    write_trace_csv,
    write_violations_csv,
)
from .config import build_scenario, dump_contract, load_config
from .errors import ConfigError, InvalidContract, MalformedTrace, UnstableClosedLoop
from .jitter import composite_stats
from .margin import Infeasible, SynthesisPolicy, margin_per_state, synthesize_contract, write_profile_csv
from .simulator import format_monte_carlo, format_summary, monte_carlo, run, write_signals_csv

log = logging.getLogger("nasco")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_UNSTABLE = 3
EXIT_INFEASIBLE = 4
EXIT_FAULT = 5

OUTPUT_ENV = "NASCO_OUTPUT_DIR"


def fmt_time(v: float) -> str:
    if math.isinf(v):
        return "inf s"
    if 0 < abs(v) < 1:
        return f"{v:.7f} s ({v * 1e3:.4f} ms)"
    return f"{v:.7f} s"


def _outdir(args, cfg=None) -> Path:
    d = args.out or (cfg.output_dir if cfg is not None else None) or os.environ.get(OUTPUT_ENV) or "nasco_out"
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, path: Path):
    path.write_text(text)
    sys.stdout.write(text)


def _sweep(cfg) -> dict:
    sweep = {}
    for key in ("omega_lo", "omega_hi"):
        if key in cfg.margin:
            sweep[key] = float(cfg.margin[key])
    if "grid_points" in cfg.margin:
        sweep["grid_points"] = int(cfg.margin["grid_points"])
    return sweep


def _need_loop(cfg):
    if cfg.plant is None or not cfg.bank:
        raise ConfigError("config needs plant and controller sections")


def cmd_margin(args) -> int:
    cfg = load_config(args.config)
    _need_loop(cfg)
    out = _outdir(args, cfg)
    results = margin_per_state(cfg.plant, cfg.bank, **_sweep(cfg))
    lines = []
    for label, res in results:
        lines.append(
            f"state {label}: j_max = {fmt_time(res.j_max)}, "
            f"omega* = {res.omega_star:.7g} rad/s"
        )
        write_profile_csv(res, out / f"margin_profile_{label}.csv")
    worst = min(r.j_max for _, r in results)
    lines.append(f"overall: j_max = {fmt_time(worst)}")
    h = cfg.contract.h if cfg.contract is not None else cfg.synthesis.get("h")
    if h is not None:
        lines.append(f"effective period bound: h_k >= {fmt_time(worst + float(h))}")
    _emit("\n".join(lines) + "\n", out / "margin_report.txt")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    cfg = load_config(args.config)
    _need_loop(cfg)
    if cfg.network is None:
        raise ConfigError("synthesis needs a markov section for the jitter statistics")
    syn = cfg.synthesis
    h = args.h if args.h is not None else syn.get("h")
    tau = args.tau if args.tau is not None else syn.get("tau")
    if h is None or tau is None:
        raise ConfigError("synthesis needs h and tau (synthesis section or --h/--tau)")
    try:
        policy = SynthesisPolicy(
            allocation=float(args.rho if args.rho is not None else syn.get("rho", 0.5)),
            safety_factor=float(args.gamma if args.gamma is not None else syn.get("gamma", 0.8)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = _outdir(args, cfg)
    stats = composite_stats(cfg.hardware, cfg.software, cfg.network)
    result = synthesize_contract(
        cfg.plant, cfg.bank, stats, float(h), float(tau), policy, **_sweep(cfg)
    )
    if isinstance(result, Infeasible):
        lines = ["synthesis: infeasible"]
        lines += [f"  violated {r}" for r in result.reasons]
        lines.append(f"j_total = {fmt_time(result.j_total)}")
        lines.append(f"sigma_T = {fmt_time(stats.sigma_T)}")
        lines.append(f"candidate: {result.candidate.to_dict()}")
        lines.append(f"h must exceed {result.min_period!r} s")
        _emit("\n".join(lines) + "\n", out / "synthesis_report.txt")
        return EXIT_INFEASIBLE
    text = dump_contract(result)
    _emit(text, out / "contract.yaml")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sc = build_scenario(cfg, seed=args.seed)
    out = _outdir(args, cfg)
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")
    try:
        res = run(sc)
        write_trace_csv(res.trace, out / "trace.csv")
        write_signals_csv(res, out / "signals.csv")
        summary = format_summary(res)
        (out / "summary.txt").write_text(summary)
        sys.stdout.write(summary)
        if args.runs > 1:
            rep = monte_carlo(sc, args.runs)
            _emit(format_monte_carlo(rep), out / "monte_carlo.txt")
            with open(out / "monte_carlo.csv", "w") as f:
                f.write("seed,iae,ise,overshoot,settling_time\n")
                for seed, m in zip(rep.seeds, rep.metrics):
                    f.write(f"{seed},{m.iae!r},{m.ise!r},{m.overshoot!r},{m.settling_time!r}\n")
    except (ConfigError, UnstableClosedLoop):
        raise
    except Exception as exc:  # noqa: BLE001 - reported as runtime fault
        log.error("simulation failed: %s", exc)
        return EXIT_FAULT
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.contract)
    if cfg.contract is None:
        raise ConfigError(f"{args.contract}: no contract section")
    problems = validate_parameters(cfg.contract)
    if problems:
        raise InvalidContract("; ".join(map(str, problems)))
    trace = read_trace_csv(args.trace)
    verdict = check_trace(cfg.contract, trace)
    out = _outdir(args, cfg)
    _emit(format_verdict(cfg.contract, verdict, len(trace)), out / "verdict.txt")
    write_violations_csv(verdict, out / "violations.csv")
    return EXIT_OK if verdict.satisfied else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nasco", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help=f"output directory (default: config output_dir, ${OUTPUT_ENV}, ./nasco_out)")

    sp = sub.add_parser("margin", help="per-state jitter margins")
    sp.add_argument("config")
    common(sp)
    sp.set_defaults(func=cmd_margin)

    sp = sub.add_parser("synthesize", help="derive contract parameters")
    sp.add_argument("config")
    sp.add_argument("--rho", type=float, help="share of the margin given to j_h")
    sp.add_argument("--gamma", type=float, help="safety factor applied to the margin")
    sp.add_argument("--h", type=float, help="nominal period [s]")
    sp.add_argument("--tau", type=float, help="nominal sensor-to-actuator delay [s]")
    common(sp)
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("simulate", help="run the loop simulation")
    sp.add_argument("config")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="check a trace against a contract")
    sp.add_argument("contract")
    sp.add_argument("trace")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except UnstableClosedLoop as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (ConfigError, MalformedTrace, InvalidContract, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
