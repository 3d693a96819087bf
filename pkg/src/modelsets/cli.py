"""Command-line front end: simulate | simulate-arma | run | mcs | report.

Flag values beat config-file values beat built-in defaults; the config
file is flat key=value lines keyed by the long flag names with
underscores (e.g. alpha_bar=0.2).  Exit codes: 0 success, 1 usage
error, 2 data/validation error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import engine, losses, report, simulate
from .calibrate import MpsConfig, grid_from_step
from .mcs import family_for_prefix, model_set


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    cfg: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(_usage(f"config line {lineno}: expected key=value, got {line!r}"))
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


def _usage(msg: str) -> int:
    print(f"modelsets: error: {msg}", file=sys.stderr)
    return 1


class _Resolver:
    """Merge precedence: explicit flag > config file > default."""

    def __init__(self, args: argparse.Namespace, cfg: dict[str, str]):
        self.args = args
        self.cfg = cfg

    def get(self, key: str, cast, default=None, required: bool = False):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.cfg:
            raw = self.cfg[key]
            try:
                return cast(raw)
            except ValueError:
                raise SystemExit(_usage(f"config value {key}={raw!r} is not a valid {cast.__name__}"))
        if required and default is None:
            raise SystemExit(_usage(f"missing required option --{key.replace('_', '-')}"))
        return default

    def seed(self, default: int = 1) -> int:
        # subcommand --seed beats global --seed beats config beats default
        local = getattr(self.args, "seed", None)
        if local is not None:
            return local
        if self.args.global_seed is not None:
            return self.args.global_seed
        if "seed" in self.cfg:
            return int(self.cfg["seed"])
        return default


def _bool_flag(v: str) -> bool:
    return v.strip().lower() in ("1", "true", "yes", "on")


def build_parser() -> _Parser:
    parser = _Parser(prog="modelsets", description=__doc__)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", dest="global_seed", type=int, help="fallback seed for all subcommands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a designed loss matrix CSV")
    p.add_argument("--design", choices=["a", "b", "c"])
    p.add_argument("--T", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate-arma", help="generate the model-fitting experiment losses")
    p.add_argument("--T", type=int)
    p.add_argument("--switch-point", dest="switch_point", type=int)
    p.add_argument("--ar-coef", dest="ar_coef", type=float)
    p.add_argument("--ma-coef", dest="ma_coef", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--series-out", dest="series_out", help="also write the simulated series")

    p = sub.add_parser("run", help="run the online prediction-set engine over a loss CSV")
    p.add_argument("--losses", required=True)
    p.add_argument("--alpha-bar", dest="alpha_bar", type=float)
    p.add_argument("--lambda-max", dest="lambda_max", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--tau", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--train-n", dest="train_n", type=int)
    p.add_argument("--block-len", dest="block_len", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("mcs", help="one-shot offline confidence set on a loss CSV")
    p.add_argument("--losses", required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--B", type=int)
    p.add_argument("--block-len", dest="block_len", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("report", help="summarize a step log into the report CSV")
    p.add_argument("--steps", required=True)
    p.add_argument("--losses")
    p.add_argument("--window", type=int)
    p.add_argument("--quality-window", dest="quality_window", type=int)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out", required=True)

    return parser


def _cmd_simulate(res: _Resolver) -> int:
    spec = simulate.DesignSpec(
        design=res.get("design", str, required=True),
        T=res.get("T", int, 2000),
        m=res.get("m", int, 10),
        seed=res.seed(),
    )
    lm = simulate.gen_design(spec)
    losses.write_csv(lm, res.args.out)
    return 0


def _cmd_simulate_arma(res: _Resolver) -> int:
    spec = simulate.ArmaSpec(
        T=res.get("T", int, 2000),
        seed=res.seed(),
        switch_point=res.get("switch_point", int, 1000),
        ar_coef=res.get("ar_coef", float, 0.3),
        ma_coef=res.get("ma_coef", float, 0.3),
    )
    lm = simulate.arma_experiment_losses(spec)
    losses.write_csv(lm, res.args.out)
    if res.args.series_out:
        simulate.write_series_csv(simulate.gen_arma_series(spec), res.args.series_out)
    return 0


def _cmd_run(res: _Resolver) -> int:
    lm = losses.ingest_csv(res.args.losses)
    config = MpsConfig(
        train_n=res.get("train_n", int, required=True),
        seed=res.seed(),
        alpha_bar=res.get("alpha_bar", float, 0.2),
        lambda_max=res.get("lambda_max", float, 2000.0),
        c=res.get("c", float, 0.2),
        tau=res.get("tau", int, 100),
        B=res.get("B", int, 100),
        grid=grid_from_step(res.get("grid_step", float, 0.05)),
        block_len_override=res.get("block_len", int),
    )
    workers = res.get("workers", int, 1)

    def progress(i: int, total: int) -> None:
        if i % 100 == 0 or i == total:
            print(f"step {i}/{total}", file=sys.stderr)

    records = engine.run(lm, config, workers=workers, progress=progress)
    engine.write_step_log(records, res.args.out)
    return 0


def _cmd_mcs(res: _Resolver) -> int:
    lm = losses.ingest_csv(res.args.losses)
    if lm.time_len < 1:
        raise ValueError("loss matrix has no rows")
    beta = res.get("beta", float, 0.2)
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    fam = family_for_prefix(
        lm,
        lm.time_len,
        B=res.get("B", int, 100),
        seed=res.seed(),
        block_len=res.get("block_len", int),
    )
    selected = set(model_set(fam, beta))
    print("model,pvalue,in_set")
    for i, label in enumerate(lm.labels, start=1):
        print(f"{label},{repr(float(fam.pvalues[i - 1]))},{int(i in selected)}")
    return 0


def _cmd_report(res: _Resolver) -> int:
    records = engine.read_step_log(res.args.steps)
    resolved = [r for r in records if r.covered is not None]
    if res.args.losses is None:
        raise ValueError("loss ranges require --losses")
    lm = losses.ingest_csv(res.args.losses)
    rows = report.build_report(
        resolved,
        lm,
        window=res.get("window", int, 100),
        quality_window=res.get("quality_window", int, 20),
    )
    report.write_report(rows, res.args.out, force=res.args.force)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "simulate-arma": _cmd_simulate_arma,
    "run": _cmd_run,
    "mcs": _cmd_mcs,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _read_config(args.config)
    except FileNotFoundError as exc:
        print(f"modelsets: error: {exc}", file=sys.stderr)
        return 2
    res = _Resolver(args, cfg)
    try:
        return _COMMANDS[args.command](res)
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"modelsets: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
