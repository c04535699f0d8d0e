"""Command line entry point.

Exit codes: 0 success, 1 invalid configuration or usage, 2 a verification,
figure or Monte Carlo check failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, TPMError
from .scenarios.config import ScenarioConfig, load_config
from .scenarios.csvout import CheckResult, CsvTable, render, write_csv
from .scenarios.montecarlo import monte_carlo_tpm
from .scenarios.pipelines import FIGURES, _channels, _metadata, grid_points, run_single, sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK = 2
MC_Z_LIMIT = 4.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonideal-tpm", description="Two-point-measurement work estimation with thermal pointers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, parallel=False):
        p.add_argument("--out", type=Path, help="output directory (default: config 'outputs.csv' or stdout)")
        if parallel:
            p.add_argument("--parallel", type=_positive, default=1, help="worker processes for the grid")

    p = sub.add_parser("run", help="evaluate a single scenario")
    p.add_argument("config", type=Path)
    common(p)
    p = sub.add_parser("sweep", help="evaluate a configuration grid")
    p.add_argument("config", type=Path)
    common(p, parallel=True)
    p = sub.add_parser("figure", help="reproduce a figure's data and check its claims")
    p.add_argument("name", choices=sorted(FIGURES))
    common(p, parallel=True)
    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--quick", action="store_true", help="fewer random instances and samples")
    p.add_argument("--seed", type=_u64, default=2024)
    p = sub.add_parser("mc", help="compare Monte Carlo estimates against analytic values")
    p.add_argument("config", type=Path)
    p.add_argument("--seed", type=_u64, help="override the config's mc seed")
    common(p)
    return parser


def _emit(table: CsvTable, out_dir, default_name: str, config: ScenarioConfig = None, config_path: Path = None) -> None:
    if out_dir is not None:
        path = write_csv(table, Path(out_dir) / default_name)
    elif config is not None and config.outputs.csv:
        target = Path(config.outputs.csv)
        if not target.is_absolute():
            target = config_path.parent / target
        path = write_csv(table, target)
    else:
        sys.stdout.write(render(table))
        return
    print(f"wrote {path}", file=sys.stderr)


def _report(checks, stream) -> bool:
    for c in checks:
        detail = f" ({c.detail})" if c.detail else ""
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}{detail}", file=stream)
    return all(c.passed for c in checks)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    _emit(run_single(config), args.out, f"{args.config.stem}.csv", config, args.config)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    _emit(sweep(config, args.parallel), args.out, f"{args.config.stem}.csv", config, args.config)
    return EXIT_OK


def _cmd_figure(args) -> int:
    table = FIGURES[args.name](parallel=args.parallel)
    _emit(table, args.out, f"{args.name}.csv")
    return EXIT_OK if _report(table.checks, sys.stderr) else EXIT_CHECK


def _cmd_verify(args) -> int:
    from .scenarios.verify import run_verification

    checks, notes = run_verification(quick=args.quick, seed=args.seed)
    ok = _report(checks, sys.stdout)
    for n in notes:
        print(f"NOTE  {n}")
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return EXIT_OK if ok else EXIT_CHECK


def mc_table(config: ScenarioConfig, seed: int) -> CsvTable:
    """Monte Carlo estimates next to analytic values at every grid point, stream ``seed XOR index``."""
    from .fluct import jarzynski_functional
    from .tpm import mean_work_of, nonideal_joint

    beta = config.system.beta_s
    rows = []
    checks = []
    rabi = config.process.kind == "rabi"
    for index, (ratio, theta) in enumerate(grid_points(config)):
        process = config.build_process(theta)
        _, ch0, chf = _channels(config, process, ratio)
        est = monte_carlo_tpm(process, beta, ch0, chf, config.mc.samples, seed, index)
        w = mean_work_of(nonideal_joint(process, beta, ch0), process.h0, process.hf)
        j = jarzynski_functional(process, beta, ch0)
        zw = (est.mean_w.value - w) / est.mean_w.stderr if est.mean_w.stderr > 0 else 0.0
        zj = (est.jarzynski.value - j) / est.jarzynski.stderr if est.jarzynski.stderr > 0 else 0.0
        key = (theta, ratio) if rabi else (ratio,)
        rows.append(key + (est.mean_w.value, est.mean_w.stderr, w, zw, est.jarzynski.value, est.jarzynski.stderr, j, zj))
        where = f"ratio={ratio:g}" + (f", theta={theta:.6g}" if rabi else "")
        checks.append(CheckResult(f"<W> at {where}", abs(zw) < MC_Z_LIMIT, f"z = {zw:+.2f}"))
        checks.append(CheckResult(f"<exp(-beta W)> at {where}", abs(zj) < MC_Z_LIMIT, f"z = {zj:+.2f}"))
    header = (("theta", "ratio") if rabi else ("ratio",)) + (
        "w_mc", "w_stderr", "w_analytic", "w_z", "jar_mc", "jar_stderr", "jar_analytic", "jar_z",
    )
    meta = _metadata(config, "mc") + (("samples", config.mc.samples), ("seed", seed))
    return CsvTable(header, tuple(rows), meta, tuple(checks))


def _cmd_mc(args) -> int:
    config = load_config(args.config)
    if config.mc is None:
        raise ConfigError(f"{args.config}: 'mc' section with 'samples' and 'seed' is required")
    seed = config.mc.seed if args.seed is None else args.seed
    table = mc_table(config, seed)
    _emit(table, args.out, f"{args.config.stem}.mc.csv")
    return EXIT_OK if _report(table.checks, sys.stderr) else EXIT_CHECK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "figure": _cmd_figure, "verify": _cmd_verify, "mc": _cmd_mc}


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TPMError as exc:
        print(f"invalid scenario: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
