"""Command-line interface.

Subcommands
    distribution  posterior table (n, U_n, prob) for a game family and prior
    optimal       stochastically optimal index, integer bracket, continuous optimum
    calibrate     disbelief magnitude from the variance-matching condition
    repeated      optimal run length and distribution over repeated games
    roulette      stop/continue stage table for the martingale sequence
    simulate      Monte Carlo summaries (repeated games or martingale)

Every flag mirrors a config-file key; ``--config file.json`` supplies a base
configuration and explicit flags win.  Exit codes: 1 config error, 2 domain
or sign error, 3 solver/truncation failure.  Errors print one
machine-parsable line to stderr: ``error:<category>:<message>``.

The environment variable PETERSBURG_OUTDIR redirects relative output paths.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from typing import Sequence

from .calibration import (
    CalibrationResult,
    calibrate_bernoulli_disbelief,
    calibrate_disbelief_general,
)
from .errors import DomainError, SolverError
from .lotteries import (
    ExpectedUtilitySeq,
    GameFamily,
    UtilitySpec,
    bernoulli_utilities,
)
from .posteriors import (
    TruncationPolicy,
    optimal_bracket,
    posterior,
    stochastically_optimal,
)
from .priors import PriorSpec, continuous_optimum
from .scenarios import (
    DOUBLE_ZERO_WIN_PROB,
    repeated_game_posterior,
    repeated_game_utilities,
    repeated_optimal,
    roulette_sequence,
    roulette_sequence_to_csv,
)
from .simulate import (
    SimConfig,
    repeated_summaries_to_csv,
    simulate_martingale,
    simulate_repeated,
)

OUTDIR_ENV = "PETERSBURG_OUTDIR"

_COMMANDS = ("distribution", "optimal", "calibrate", "repeated", "roulette", "simulate")


class _ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    """Resolved configuration of one CLI invocation; JSON round-trippable."""

    command: str = ""
    game: dict = field(default_factory=lambda: {"family": "bernoulli"})
    prior: dict = field(default_factory=lambda: {"kind": "luce"})
    utility: dict = field(default_factory=lambda: {"kind": "linear"})
    beta: float | None = None
    output_format: str = "table"
    output_path: str | None = None
    timestamp: bool = True
    rows: int = 50
    truncation: dict = field(
        default_factory=lambda: {"rel_tol": 1e-14, "max_index": 10 ** 6}
    )
    sim: dict = field(
        default_factory=lambda: {
            "seed": 0,
            "replications": 1000,
            "max_tosses": 60,
            "parallel_shards": 1,
        }
    )
    stages: int = 5
    x0: float = 1.0
    p_win: float = DOUBLE_ZERO_WIN_PROB
    target: str = "martingale"
    n_games: list[int] = field(
        default_factory=lambda: [8, 16, 32, 64, 128, 256, 512, 1024]
    )

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise _ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for key, value in doc.items():
            if key in ("truncation", "sim"):
                merged = dict(getattr(cfg, key))
                merged.update(value)
                value = merged
            setattr(cfg, key, value)
        return cfg

    # -- resolved objects ------------------------------------------------

    def prior_spec(self) -> PriorSpec:
        return PriorSpec.from_json(self.prior)

    def utility_spec(self) -> UtilitySpec:
        return UtilitySpec.from_json(self.utility)

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(
            rel_tol=float(self.truncation["rel_tol"]),
            max_index=int(self.truncation["max_index"]),
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            seed=int(self.sim["seed"]),
            replications=int(self.sim["replications"]),
            max_tosses=int(self.sim["max_tosses"]),
            parallel_shards=int(self.sim["parallel_shards"]),
        )

    def utilities(self) -> ExpectedUtilitySeq:
        if (
            self.game.get("family") == "bernoulli"
            and self.utility.get("kind") == "linear"
        ):
            return bernoulli_utilities()  # exact closed form, any index
        family = GameFamily.from_json(self.game)
        return ExpectedUtilitySeq.from_family(family, self.utility_spec())

    def is_bernoulli_luce(self) -> bool:
        return (
            self.game.get("family") == "bernoulli"
            and self.prior.get("kind") == "luce"
            and self.utility.get("kind") == "linear"
        )


def _fmt(x, sig: int = 12) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{sig}g}"
    return str(x)


def _round_floats(obj, sig: int = 12):
    """Recursively normalize floats to ``sig`` significant digits so JSON
    output is precision-stable; non-finite values become strings."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return _fmt(obj)
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, sig) for v in obj]
    return obj


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> list[str]:
    cells = [[_fmt(v, 4) for v in row] for row in rows]
    widths = [
        max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
        for i, h in enumerate(header)
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return lines


@dataclass
class Emission:
    """One command's output in all three formats."""

    payload: dict
    csv_text: str
    table_lines: list[str]


# -- command handlers ----------------------------------------------------


def _resolve_beta(cfg: RunConfig) -> tuple[float, CalibrationResult | None]:
    """The configured beta, or -|beta| from calibration when absent."""
    if cfg.beta is not None:
        return float(cfg.beta), None
    result = _calibrate(cfg)
    return -result.abs_beta, result


def _calibrate(cfg: RunConfig) -> CalibrationResult:
    if cfg.command == "repeated":
        return calibrate_disbelief_general(
            repeated_game_utilities(), cfg.prior_spec(), cfg.policy()
        )
    if cfg.is_bernoulli_luce():
        return calibrate_bernoulli_disbelief()
    return calibrate_disbelief_general(
        cfg.utilities(), cfg.prior_spec(), cfg.policy()
    )


def _cmd_distribution(cfg: RunConfig) -> Emission:
    beta, calib = _resolve_beta(cfg)
    dist = posterior(cfg.prior_spec(), cfg.utilities(), beta, cfg.policy())
    payload = dist.to_json()
    if calib is not None:
        payload["meta"]["calibration"] = calib.to_json()
    buf = io.StringIO()
    dist.to_csv(buf)
    rows = [
        (r["n"], r["u"], r["prob"]) for r in payload["rows"][: cfg.rows]
    ]
    lines = _table(("n", "U_n", "prob"), rows)
    if dist.n_trunc > cfg.rows:
        lines.append(f"... ({dist.n_trunc - cfg.rows} more rows; see csv/json)")
    return Emission(payload, buf.getvalue(), lines)


def _cmd_optimal(cfg: RunConfig) -> Emission:
    beta, calib = _resolve_beta(cfg)
    prior = cfg.prior_spec()
    dist = posterior(prior, cfg.utilities(), beta, cfg.policy())
    n_opt = stochastically_optimal(dist)
    u_star = continuous_optimum(prior, beta) if beta < 0.0 else None
    bracket = (
        optimal_bracket(beta, prior)
        if beta < 0.0 and cfg.game.get("family") == "bernoulli"
        and cfg.utility.get("kind") == "linear"
        else None
    )
    payload = {
        "beta": beta,
        "n_opt": n_opt,
        "prob_opt": dist.prob(n_opt),
        "u_opt": dist.utility(n_opt),
        "continuous_optimum": u_star,
        "bracket_low": bracket[0] if bracket else None,
        "bracket_high": bracket[1] if bracket else None,
    }
    if calib is not None:
        payload["calibration"] = calib.to_json()
    header = list(payload)
    csv_buf = io.StringIO()
    csv_buf.write(",".join(h for h in header if h != "calibration") + "\n")
    csv_buf.write(
        ",".join(
            _fmt(payload[h]) if payload[h] is not None else ""
            for h in header
            if h != "calibration"
        )
        + "\n"
    )
    rows = [(k, v) for k, v in payload.items() if k != "calibration"]
    return Emission(payload, csv_buf.getvalue(), _table(("field", "value"), rows))


def _cmd_calibrate(cfg: RunConfig) -> Emission:
    result = _calibrate(cfg)
    payload = result.to_json()
    payload["route"] = (
        "closed" if cfg.is_bernoulli_luce() and cfg.command != "repeated" else "general"
    )
    csv_buf = io.StringIO()
    csv_buf.write("abs_beta,residual,iterations,method\n")
    csv_buf.write(
        f"{result.abs_beta:.12g},{result.residual:.12g},"
        f"{result.iterations},{result.method}\n"
    )
    rows = list(payload.items())
    return Emission(payload, csv_buf.getvalue(), _table(("field", "value"), rows))


def _cmd_repeated(cfg: RunConfig) -> Emission:
    beta, calib = _resolve_beta(cfg)
    result = repeated_optimal(beta)
    dist = repeated_game_posterior(beta, cfg.policy())
    payload = {
        "result": result.to_json(),
        "posterior_meta": {
            "beta": dist.beta,
            "n_trunc": dist.n_trunc,
            "tail_bound": dist.tail_bound,
        },
        "rows": [
            {"n": k + 1, "u": float(dist.utilities[k]), "prob": float(dist.probs[k])}
            for k in range(min(cfg.rows, dist.n_trunc))
        ],
    }
    if calib is not None:
        payload["calibration"] = calib.to_json()
    buf = io.StringIO()
    buf.write(f"# beta: {beta:.12g}\n")
    buf.write(f"# u_opt: {result.u_opt:.12g}\n")
    buf.write(f"# n_opt_continuous: {result.n_opt_continuous:.12g}\n")
    buf.write(f"# n_opt: {result.n_opt}\n")
    buf.write(f"# n_trunc: {dist.n_trunc}\n")
    buf.write(f"# tail_bound: {_fmt(dist.tail_bound)}\n")
    buf.write("N,U_N,prob\n")
    for row in payload["rows"]:
        buf.write(f"{row['n']},{row['u']:.12g},{row['prob']:.12g}\n")
    lines = _table(
        ("field", "value"),
        [
            ("beta", beta),
            ("u_opt", result.u_opt),
            ("n_opt_continuous", result.n_opt_continuous),
            ("n_opt", result.n_opt),
        ],
    )
    lines.append("")
    lines.extend(
        _table(("N", "U_N", "prob"), [(r["n"], r["u"], r["prob"]) for r in payload["rows"]])
    )
    return Emission(payload, buf.getvalue(), lines)


def _cmd_roulette(cfg: RunConfig) -> Emission:
    beta = float(cfg.beta) if cfg.beta is not None else 0.0
    choices = roulette_sequence(cfg.stages, beta, cfg.x0, cfg.p_win)
    payload = {
        "beta": beta,
        "x0": cfg.x0,
        "p_win": cfg.p_win,
        "stages": [
            {
                "stage": c.stage,
                "u_stop": c.u_stop,
                "u_continue": c.u_continue,
                "p_stop": c.p_stop,
                "p_continue": c.p_continue,
            }
            for c in choices
        ],
    }
    buf = io.StringIO()
    roulette_sequence_to_csv(choices, buf)
    rows = [
        (c.stage, c.u_stop, c.u_continue, c.p_stop, c.p_continue) for c in choices
    ]
    lines = _table(
        ("stage", "u_stop", "u_continue", "p_stop", "p_continue"), rows
    )
    return Emission(payload, buf.getvalue(), lines)


def _cmd_simulate(cfg: RunConfig) -> Emission:
    sim = cfg.sim_config()
    if cfg.target == "repeated":
        summaries = [simulate_repeated(n, sim) for n in cfg.n_games]
        payload = {"target": "repeated", "runs": [s.to_json() for s in summaries]}
        buf = io.StringIO()
        repeated_summaries_to_csv(summaries, buf)
        rows = [
            (s.n_games, s.per_game_mean, s.per_game_median_of_means, s.stderr_proxy)
            for s in summaries
        ]
        lines = _table(
            ("n_games", "mean", "median_of_means", "stderr_proxy"), rows
        )
        return Emission(payload, buf.getvalue(), lines)
    if cfg.target == "martingale":
        summary = simulate_martingale(cfg.stages, cfg.x0, cfg.p_win, sim)
        payload = {"target": "martingale", **summary.to_json()}
        buf = io.StringIO()
        summary.to_csv(buf)
        rows = [
            (k + 1, m, s)
            for k, (m, s) in enumerate(
                zip(summary.stage_means, summary.stage_stderrs)
            )
        ]
        lines = _table(("stage", "mean", "stderr"), rows)
        return Emission(payload, buf.getvalue(), lines)
    raise _ConfigError(f"unknown simulate target {cfg.target!r}")


_HANDLERS = {
    "distribution": _cmd_distribution,
    "optimal": _cmd_optimal,
    "calibrate": _cmd_calibrate,
    "repeated": _cmd_repeated,
    "roulette": _cmd_roulette,
    "simulate": _cmd_simulate,
}


# -- argument parsing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit code 1, not argparse's 2
        raise _ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="petersburg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--config", help="JSON file with a RunConfig")
        p.add_argument("--emit-config", help="write the resolved RunConfig here")
        p.add_argument("--format", dest="output_format", choices=("table", "csv", "json"))
        p.add_argument("--output", dest="output_path", help="output file (default stdout)")
        p.add_argument("--no-timestamp", action="store_true", default=None,
                       help="omit the timestamp field from csv/json output")
        p.add_argument("--rows", type=int, help="max table rows to print")
        p.add_argument("--game", help='"bernoulli" or a JSON family file')
        p.add_argument("--prior", choices=("luce", "power", "log", "logit"))
        p.add_argument("--alpha", type=float, help="power prior exponent")
        p.add_argument("--u0", type=float, help="log prior scale")
        p.add_argument("--b", type=float, help="logit prior coefficient")
        p.add_argument("--c", type=float, help="logit prior offset")
        p.add_argument("--gamma", type=float, help="logit prior curvature")
        p.add_argument("--utility", choices=("linear", "logarithmic", "power", "geometric"))
        p.add_argument("--exponent", type=float, help="power utility exponent")
        p.add_argument("--base", type=float, help="geometric utility base")
        p.add_argument("--beta", type=float)
        p.add_argument("--rel-tol", dest="rel_tol", type=float)
        p.add_argument("--max-index", dest="max_index", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--replications", type=int)
        p.add_argument("--max-tosses", dest="max_tosses", type=int)
        p.add_argument("--shards", dest="parallel_shards", type=int)
        p.add_argument("--stages", type=int)
        p.add_argument("--x0", type=float)
        p.add_argument("--p-win", dest="p_win", type=float)

    for name in _COMMANDS:
        p = sub.add_parser(name)
        common(p)
        if name == "simulate":
            p.add_argument("--target", choices=("repeated", "martingale"))
            p.add_argument("--n-games", dest="n_games", type=int, nargs="+")

    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = RunConfig.from_json(json.load(fh))
        except OSError as exc:
            raise _ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise _ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        cfg = RunConfig()
    cfg.command = args.command

    if args.game is not None:
        if args.game == "bernoulli":
            cfg.game = {"family": "bernoulli"}
        else:
            try:
                with open(args.game, "r", encoding="utf-8") as fh:
                    cfg.game = json.load(fh)
            except OSError as exc:
                raise _ConfigError(f"cannot read game file: {exc}") from exc
    if args.prior is not None:
        doc: dict = {"kind": args.prior}
        cfg.prior = doc
    for key in ("alpha", "u0", "b", "c", "gamma"):
        value = getattr(args, key)
        if value is not None:
            cfg.prior[key] = value
    if args.utility is not None:
        cfg.utility = {"kind": args.utility}
    for key in ("exponent", "base"):
        value = getattr(args, key)
        if value is not None:
            cfg.utility[key] = value
    for key in ("beta", "output_format", "output_path", "rows",
                "stages", "x0", "p_win"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.no_timestamp:
        cfg.timestamp = False
    for key in ("rel_tol", "max_index"):
        value = getattr(args, key)
        if value is not None:
            cfg.truncation[key] = value
    for key in ("seed", "replications", "max_tosses", "parallel_shards"):
        value = getattr(args, key)
        if value is not None:
            cfg.sim[key] = value
    if cfg.command == "simulate":
        if getattr(args, "target", None) is not None:
            cfg.target = args.target
        if getattr(args, "n_games", None) is not None:
            cfg.n_games = list(args.n_games)
    return cfg


def _output_stream(cfg: RunConfig):
    if cfg.output_path is None:
        return sys.stdout, False
    path = cfg.output_path
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not os.path.isabs(path):
        path = os.path.join(outdir, path)
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _emit(cfg: RunConfig, emission: Emission) -> None:
    stream, close = _output_stream(cfg)
    try:
        if cfg.output_format == "json":
            payload = dict(emission.payload)
            if cfg.timestamp:
                payload["timestamp"] = datetime.now(timezone.utc).isoformat()
            stream.write(
                json.dumps(_round_floats(payload), sort_keys=True, indent=2)
            )
            stream.write("\n")
        elif cfg.output_format == "csv":
            if cfg.timestamp:
                stream.write(
                    f"# timestamp: {datetime.now(timezone.utc).isoformat()}\n"
                )
            stream.write(emission.csv_text)
        else:
            stream.write("\n".join(emission.table_lines))
            stream.write("\n")
    finally:
        if close:
            stream.close()


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args)
        if args.emit_config:
            with open(args.emit_config, "w", encoding="utf-8") as fh:
                json.dump(
                    _round_floats(cfg.to_json()), fh, sort_keys=True, indent=2
                )
                fh.write("\n")
        emission = _HANDLERS[cfg.command](cfg)
        _emit(cfg, emission)
        return 0
    except _ConfigError as exc:
        print(f"error:config:{exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error:domain:{exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error:solver:{exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, KeyError) as exc:
        # malformed values in a config file surface here
        print(f"error:config:{exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
