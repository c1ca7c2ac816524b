"""Command line front end and seeded experiment drivers.

Every subcommand reads a JSON config (``--config``), applies flag overrides
(``--seed``, ``--trials``, ``--out``; flags win) and writes CSV/JSON files into
the output directory.  Outputs depend only on the resolved config, so two
runs with the same config and seed produce identical bytes.  CSV files open
with ``#`` comment lines echoing the tool version and the resolved config.

Exit codes: 0 success, 2 usage error, 3 certification failed, 4 enumeration
budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .bounds import (
    R_GRID_POINTS,
    epsilon_star,
    region_sweep,
    theta_star,
    tighter_bsc_thresholds,
    union_bound_thresholds,
)
from .channel import ChannelKind, ChannelModel, bhattacharyya, derive_seed, transmit
from .code import (
    CodeParams,
    StreamEncoder,
    derive_generator,
    load_code,
    make_rng,
    sample_tz,
    save_code,
)
from .control import (
    TRACE_COLUMNS as CONTROL_TRACE_COLUMNS,
    PlantParams,
    QuantizerConfig,
    closed_loop_sim,
    open_loop_sim,
    performance_curve,
    random_walk_demo,
    sizing,
)
from .decode import TRACE_COLUMNS as DECODE_TRACE_COLUMNS
from .decode import DecoderState, complexity_stats
from .spectrum import BudgetExceeded, certify, enumerate_spectrum

__all__ = [
    "main",
    "UsageError",
    "ExponentFit",
    "delay_histograms",
    "fit_exponent",
    "find_certified_code",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_CERT_FAILED",
    "EXIT_BUDGET",
]

EXIT_OK, EXIT_USAGE, EXIT_CERT_FAILED, EXIT_BUDGET = 0, 2, 3, 4
TOOL = "anytime-codes"


class UsageError(ValueError):
    pass


class CertificationFailed(RuntimeError):
    pass


# -- experiments -----------------------------------------------------------------------------


def delay_histograms(h, channel: ChannelModel, steps: int, trials: int, seed: int) -> np.ndarray:
    """Decode ``trials`` independent streams of random messages; count instants per delay.

    Returns an int array of shape ``(trials, max_delay + 1)``; entry ``[i, d]``
    is the number of instants in trial ``i`` whose earliest unresolved block
    sits ``d`` steps back (``d = t - r``).  Trial ``i`` draws messages and
    channel noise from ``derive_seed(seed, i)``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    g = derive_generator(h)
    k = h.params.k
    rows = []
    for i in range(trials):
        rng = make_rng(derive_seed(seed, i))
        enc, dec = StreamEncoder(g), DecoderState(h, generator=g)
        delays = np.empty(steps, dtype=np.int64)
        for t in range(steps):
            c = enc.push(rng.integers(0, 2, k))
            delays[t] = dec.step(transmit(channel, c, rng)).delay
        rows.append(np.bincount(delays))
    width = max(len(r) for r in rows)
    return np.array([np.pad(r, (0, width - len(r))) for r in rows])


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    """Least-squares slope of ``log2 P(d)`` against ``d``."""
    ci_low: float
    ci_high: float
    delays: tuple[int, ...]
    instants: int


def _slope(counts: np.ndarray, delays: np.ndarray) -> float:
    total = counts.sum()
    # half-count floor keeps resampled zero cells finite
    p = np.maximum(counts[delays], 0.5) / total
    return float(np.polyfit(delays, np.log2(p), 1)[0])


def fit_exponent(hist: np.ndarray, min_count: int = 10, resamples: int = 999, seed: int = 0) -> ExponentFit:
    """Slope of ``log2 P(d)`` over delays ``d >= 1`` with at least ``min_count`` instants.

    The 95% interval is a percentile bootstrap over trials, which keeps the
    within-trial correlation of consecutive instants.  Fewer than two usable
    delays give a NaN slope.
    """
    pooled = hist.sum(axis=0)
    instants = int(pooled.sum())
    usable = np.array([d for d in range(1, len(pooled)) if pooled[d] >= min_count], dtype=np.int64)
    if len(usable) < 2:
        return ExponentFit(float("nan"), float("nan"), float("nan"), tuple(int(d) for d in usable), instants)
    slope = _slope(pooled, usable)
    if hist.shape[0] < 2:
        return ExponentFit(slope, float("nan"), float("nan"), tuple(int(d) for d in usable), instants)
    res = stats.bootstrap(
        (np.arange(hist.shape[0]),),
        lambda idx: _slope(hist[idx].sum(axis=0), usable),
        n_resamples=resamples,
        vectorized=False,
        method="percentile",
        rng=np.random.default_rng(seed),
    )
    ci = res.confidence_interval
    return ExponentFit(slope, float(ci.low), float(ci.high), tuple(int(d) for d in usable), instants)


def find_certified_code(params: CodeParams, p: float, alpha: float, theta: float, d_o: int, d_max: int, seed: int, attempts: int):
    """First code among seeds ``derive_seed(seed, 0), derive_seed(seed, 1), ...`` that certifies."""
    for a in range(attempts):
        code_seed = derive_seed(seed, a)
        h = sample_tz(params, p, code_seed)
        cert = certify(enumerate_spectrum(h, d_max), alpha, theta, d_o, h)
        if cert.passed:
            return h, code_seed, cert
    raise CertificationFailed(f"no certified code in {attempts} attempts")


# -- config ------------------------------------------------------------------------------------

_MISSING = object()


@dataclass
class Config:
    name: str
    values: dict

    def get(self, key, default=_MISSING):
        if key in self.values and self.values[key] is not None:
            return self.values[key]
        if default is _MISSING:
            raise UsageError(f"{self.name}: missing required config field '{key}'")
        return default

    def int(self, key, default=_MISSING) -> int:
        return int(self.get(key, default))

    def float(self, key, default=_MISSING) -> float:
        return float(self.get(key, default))

    def echo(self) -> str:
        shown = {k: v for k, v in self.values.items() if k != "out"}
        return json.dumps(shown, sort_keys=True, separators=(",", ":"))


def _header_lines(cfg: Config, meta: dict | None) -> list[str]:
    lines = [f"# tool: {TOOL} {__version__}", f"# command: {cfg.name}", f"# config: {cfg.echo()}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def write_csv(path: Path, cfg: Config, columns: Sequence[str], rows, meta: dict | None = None) -> None:
    with open(path, "w", newline="") as fh:
        for line in _header_lines(cfg, meta):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(x) for x in row])


def write_json(path: Path, cfg: Config, payload: dict) -> None:
    body = {"tool": f"{TOOL} {__version__}", "command": cfg.name, "config": json.loads(cfg.echo()), **payload}
    path.write_text(json.dumps(body, indent=1, sort_keys=True, allow_nan=True) + "\n")


def _out_dir(cfg: Config) -> Path:
    out = Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _channel(cfg: Config, bec_only: bool = False) -> ChannelModel:
    kind = cfg.get("channel", "bec")
    try:
        ch = ChannelModel(ChannelKind(kind), cfg.float("epsilon"))
    except ValueError as exc:
        raise UsageError(f"{cfg.name}: {exc}") from None
    if bec_only and ch.kind is not ChannelKind.BEC:
        raise UsageError(f"{cfg.name}: only the erasure channel is supported")
    return ch


def _code(cfg: Config, horizon: int):
    """Code from the ``code`` file if given, else sampled from ``n, k, p`` with the run seed."""
    if "code" in cfg.values:
        h, _ = load_code(cfg.get("code"))
        if h.horizon < horizon:
            raise UsageError(f"{cfg.name}: code horizon {h.horizon} shorter than {horizon}")
        return h
    params = CodeParams(cfg.int("n"), cfg.int("k"), horizon)
    return sample_tz(params, cfg.float("p", 0.5), derive_seed(cfg.int("seed"), 0))


def _certified_code(cfg: Config, horizon: int):
    """The ``code`` file (certified but not required to pass), else the first passing sampled code."""
    cert_args = (cfg.float("alpha", 0.15), cfg.float("theta", 1.2), cfg.int("d_o", 1), cfg.int("d_max", 3))
    if "code" in cfg.values:
        h = _code(cfg, horizon)
        return h, None, certify(enumerate_spectrum(h, cert_args[3]), *cert_args, h)
    params = CodeParams(cfg.int("n"), cfg.int("k"), horizon)
    return find_certified_code(
        params, cfg.float("p", 0.5), *cert_args, derive_seed(cfg.int("seed"), 0), cfg.int("max_attempts", 100)
    )


# -- subcommands -----------------------------------------------------------------------------------


def cmd_sample_code(cfg: Config) -> int:
    params = CodeParams(cfg.int("n"), cfg.int("k"), cfg.int("T"))
    p, seed = cfg.float("p", 0.5), cfg.int("seed")
    h = sample_tz(params, p, seed)
    derive_generator(h)
    path = _out_dir(cfg) / "code.json"
    save_code(path, h, p, seed)
    print(path)
    return EXIT_OK


def cmd_certify(cfg: Config) -> int:
    d_max = cfg.int("d_max")
    h = _code(cfg, cfg.int("T", d_max))
    ws = enumerate_spectrum(h, d_max)
    cert = certify(ws, cfg.float("alpha"), cfg.float("theta"), cfg.int("d_o"), h)
    out = _out_dir(cfg)
    write_csv(out / "spectrum.csv", cfg, ("d", "w", "N_w"), ws.rows())
    write_json(out / "certificate.json", cfg, {"certificate": cert.to_dict(), "w_min": {str(d): ws.w_min(d) for d in ws.counts}})
    print(f"certificate {'PASS' if cert.passed else 'FAIL'}")
    return EXIT_OK if cert.passed else EXIT_CERT_FAILED


def cmd_exponent(cfg: Config) -> int:
    ch = _channel(cfg, bec_only=True)
    steps, trials, seed = cfg.int("T"), cfg.int("trials", 200), cfg.int("seed")
    if trials < 1:
        raise UsageError("exponent: trials must be >= 1")
    h, code_seed, cert = _certified_code(cfg, steps)
    hist = delay_histograms(h, ch, steps, trials, derive_seed(seed, 1))
    fit = fit_exponent(hist, cfg.int("min_count", 10), cfg.int("resamples", 999), derive_seed(seed, 2))
    pooled = hist.sum(axis=0)
    total = pooled.sum()
    tail = np.cumsum(pooled[::-1])[::-1]
    rows = [(d, int(pooled[d]), pooled[d] / total, tail[d] / total) for d in range(len(pooled))]
    n = h.params.n
    summary = {
        "slope": fit.slope,
        "ci95": [fit.ci_low, fit.ci_high],
        "beta_per_use": -fit.slope / n,
        "fit_delays": list(fit.delays),
        "instants": fit.instants,
        "code_seed": code_seed,
        "certificate": cert.to_dict(),
    }
    out = _out_dir(cfg)
    meta = {"slope": repr(fit.slope), "ci95": f"{fit.ci_low!r},{fit.ci_high!r}", "instants": fit.instants}
    write_csv(out / "exponent.csv", cfg, ("d", "instants", "p_exact", "p_tail"), rows, meta)
    write_json(out / "exponent.json", cfg, summary)
    print(f"slope {fit.slope:.4f} per delay step, 95% CI [{fit.ci_low:.4f}, {fit.ci_high:.4f}], {fit.instants} instants")
    return EXIT_OK


def cmd_thresholds(cfg: Config) -> int:
    p = cfg.float("p", 0.5)
    npoints = cfg.int("npoints", R_GRID_POINTS)
    eps = None
    if "zeta" in cfg.values:
        zeta = cfg.float("zeta")
    else:
        ch = _channel(cfg)
        zeta, eps = bhattacharyya(ch), (ch.epsilon if ch.kind is ChannelKind.BSC else None)
    results = [union_bound_thresholds(zeta, p)]
    if eps is not None and 0 < eps < 0.25:
        results.append(tighter_bsc_thresholds(eps))
    rows = []
    for th in results:
        rates = np.linspace(0.0, th.R_max, npoints + 2)[1:-1]
        for r, b in th.beta_table(rates):
            rows.append((th.provenance, r, b, theta_star(r)))
    meta = {"zeta": repr(zeta), "R_grid_points": npoints, "epsilon_star": repr(epsilon_star())}
    meta.update({f"R_max[{th.provenance}]": repr(th.R_max) for th in results})
    out = _out_dir(cfg)
    write_csv(out / "thresholds.csv", cfg, ("provenance", "R", "beta", "theta_star"), rows, meta)
    write_json(out / "thresholds.json", cfg, {"zeta": zeta, "R_max": {th.provenance: th.R_max for th in results}})
    for th in results:
        print(f"{th.provenance}: R_max = {th.R_max:.6f}")
    return EXIT_OK


def cmd_region(cfg: Config) -> int:
    kinds = cfg.get("channel", "both")
    kinds = ["bec", "bsc"] if kinds == "both" else [kinds]
    npoints = cfg.int("npoints", 512)
    n, m, p = cfg.int("n", 1), cfg.int("m", 2), cfg.float("p", 0.5)
    r_points = cfg.int("r_grid_points", R_GRID_POINTS)
    use_tighter = bool(cfg.get("use_tighter", True))
    rows = []
    for kind in kinds:
        top = {"bec": 1.0, "bsc": 0.5}.get(kind)
        if top is None:
            raise UsageError(f"region: unknown channel {kind!r}")
        grid = np.linspace(0.0, top, npoints + 2)[1:-1]
        for pt in region_sweep(kind, grid, p, n, m, use_tighter and kind == "bsc", r_points):
            rows.append((kind, pt.channel_param, pt.lambda_max_nth_root, pt.R, pt.beta, pt.provenance))
    meta = {"epsilon_star": repr(epsilon_star()), "R_grid_points": r_points}
    out = _out_dir(cfg)
    write_csv(out / "region.csv", cfg, ("channel", "epsilon", "lambda_max_nth_root", "R", "beta", "provenance"), rows, meta)
    print(f"{len(rows)} region points")
    return EXIT_OK


def _plant(cfg: Config, seed: int) -> PlantParams:
    return PlantParams(cfg.float("lambda"), cfg.float("W"), cfg.float("V"), cfg.float("x0", 0.0), seed)


def cmd_stabilize(cfg: Config) -> int:
    seed, steps = cfg.int("seed"), cfg.int("T")
    plant = _plant(cfg, derive_seed(seed, 1))
    q = sizing(plant.lam, plant.W, plant.V, cfg.float("delta"), cfg.get("quantizer", "static"))
    k = cfg.int("k", q.k)
    if k < q.k:
        raise UsageError(f"stabilize: delta needs {q.k} label bits, config gives k={k}")
    q = QuantizerConfig(q.delta, q.L, k, q.mode)
    ch = _channel(cfg, bec_only=True)
    h = _code(cfg, steps) if "code" in cfg.values else sample_tz(CodeParams(cfg.int("n"), k, steps), cfg.float("p", 0.5), derive_seed(seed, 0))
    closed = closed_loop_sim(plant, q, h, ch, steps, derive_seed(seed, 2))
    opened = open_loop_sim(plant, steps)
    out = _out_dir(cfg)
    meta = {"L": q.L, "k": q.k, "delta": repr(q.delta)}
    write_csv(out / "trace_closed.csv", cfg, CONTROL_TRACE_COLUMNS, closed.rows(), meta)
    write_csv(out / "trace_open.csv", cfg, CONTROL_TRACE_COLUMNS, opened.rows(), meta)
    summary = {
        "L": q.L,
        "k": q.k,
        "sup_abs_x_closed": closed.sup_abs_x,
        "log2_sup_abs_x_open": float(np.log2(opened.sup_abs_x)) if opened.sup_abs_x > 0 else None,
        "clamped_steps": closed.clamped_count,
    }
    write_json(out / "stabilize.json", cfg, summary)
    print(f"closed loop sup|x| = {closed.sup_abs_x:.2f}; open loop log2 sup|x| = {summary['log2_sup_abs_x_open']}")
    return EXIT_OK


def cmd_perf_curve(cfg: Config) -> int:
    seed = cfg.int("seed")
    ks = [int(k) for k in cfg.get("k_values")]
    deltas = {int(k): float(v) for k, v in cfg.get("deltas", {}).items()}
    plant = _plant(cfg, 0)
    ch = _channel(cfg, bec_only=True)
    curves = performance_curve(
        ks, plant, ch, cfg.int("n"), cfg.int("T"), cfg.int("trials"), seed, deltas, cfg.float("p", 0.5), cfg.get("quantizer", "static")
    )
    threshold = cfg.float("threshold", 200.0)
    rows = [(k, (i + 1) / len(v), x) for k, v in curves.items() for i, x in enumerate(v)]
    out = _out_dir(cfg)
    write_csv(out / "perf_curve.csv", cfg, ("k", "quantile", "sup_x"), rows)
    fractions = {str(k): float(np.mean(v < threshold)) for k, v in curves.items()}
    write_json(out / "perf_curve.json", cfg, {"fraction_below_threshold": fractions, "threshold": threshold})
    for k, f in fractions.items():
        print(f"k={k}: fraction with sup|x| < {threshold:g} = {f:.3f}")
    return EXIT_OK


def cmd_decode_sim(cfg: Config) -> int:
    seed, steps, trials = cfg.int("seed"), cfg.int("T"), cfg.int("trials", 1)
    ch = _channel(cfg, bec_only=True)
    if cfg.get("certified", False):
        h, code_seed, cert = _certified_code(cfg, steps)
        extra = {"code_seed": code_seed, "certificate": cert.to_dict()}
    else:
        h, extra = _code(cfg, steps), {}
    g = derive_generator(h)
    logs, first_trace = [], None
    for i in range(trials):
        rng = make_rng(derive_seed(derive_seed(seed, 1), i))
        enc, dec = StreamEncoder(g), DecoderState(h, generator=g)
        for _ in range(steps):
            dec.step(transmit(ch, enc.push(rng.integers(0, 2, h.params.k)), rng))
        logs.append([row.complexity for row in dec.trace])
        if first_trace is None:
            first_trace = dec.trace
    arr = np.array(logs)
    half = steps // 2
    stats_all = complexity_stats(arr.ravel())
    summary = {
        "mean_complexity": stats_all.mean,
        "mean_first_half": float(arr[:, :half].mean()) if half else None,
        "mean_second_half": float(arr[:, half:].mean()),
        "tail": {str(d): v for d, v in stats_all.tail.items()},
        "steps": stats_all.steps,
        **extra,
    }
    out = _out_dir(cfg)
    write_csv(out / "decode_trace.csv", cfg, DECODE_TRACE_COLUMNS, first_trace)
    write_json(out / "decode_sim.json", cfg, summary)
    print(f"mean complexity {stats_all.mean:.3f} over {stats_all.steps} steps")
    return EXIT_OK


def cmd_random_walk(cfg: Config) -> int:
    seed, steps = cfg.int("seed"), cfg.int("T")
    ch = _channel(cfg, bec_only=True)
    params = CodeParams(cfg.int("n"), 1, steps)
    h = _code(cfg, steps) if "code" in cfg.values else sample_tz(params, cfg.float("p", 0.5), derive_seed(seed, 0))
    res = random_walk_demo(cfg.float("lambda"), h, ch, steps, derive_seed(seed, 1), cfg.int("trials", 1))
    rows = [(t, e, m) for t, (e, m) in enumerate(zip(res.squared_error, res.running_mean))]
    out = _out_dir(cfg)
    write_csv(out / "random_walk.csv", cfg, ("t", "squared_error", "running_mean"), rows)
    print(f"final running mean squared error {res.running_mean[-1]:.4g}")
    return EXIT_OK


COMMANDS: dict[str, Callable[[Config], int]] = {
    "sample-code": cmd_sample_code,
    "certify": cmd_certify,
    "exponent": cmd_exponent,
    "thresholds": cmd_thresholds,
    "region": cmd_region,
    "stabilize": cmd_stabilize,
    "perf-curve": cmd_perf_curve,
    "decode-sim": cmd_decode_sim,
    "random-walk": cmd_random_walk,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description="Anytime-reliable causal linear codes: experiments and figure data.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON file with the run parameters")
        p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    return parser


def load_config(name: str, args: argparse.Namespace) -> Config:
    values: dict = {}
    if args.config is not None:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config must be a JSON object")
    for key in ("seed", "trials"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if args.out is not None:
        values["out"] = str(args.out)
    seed = values.get("seed")
    if seed is None:
        raise UsageError(f"{name}: a seed is required (config 'seed' or --seed)")
    if not 0 <= int(seed) < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return Config(name, values)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificationFailed as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT_FAILED
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
