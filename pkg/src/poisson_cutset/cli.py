"""Command-line runner: bounds, sweeps, Figure-2 datasets, Monte Carlo and percolation.

Capacities are reported in bits/s (internal nats/s divided by ln 2).  Data
files are CSV with 17 significant digits; summaries are JSON whose only
run-dependent field is ``timestamp``.

Exit codes: 0 success, 1 validation error, 2 numerical error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import bound, montecarlo, percolation
from .config import D_CRITICAL, NetworkConfig
from .csvio import append_csv, format_value, write_csv
from .errors import (
    ExcludedAlphaError,
    NumericalError,
    ParameterError,
    RegimeAmbiguityError,
)

LN2 = math.log(2.0)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

FIGURE2_HEADER = ["p_over_nw", "bound_bits_s", "asymptote_case", "asymptote_bits_s", "s_long", "s_short", "regime"]
THRESHOLD_HEADER = ["x_scaled", "crossing_prob", "std_err", "trials"]
DECAY_HEADER = ["m", "prob", "std_err"]
BOUND_CSV_HEADER = [
    "p_over_nw", "nu", "R", "W", "alpha", "d",
    "quadrature_bits_s", "closed_form_bits_s", "asymptote_case", "asymptote_bits_s",
    "s_long", "s_short", "regime",
]

SWEEP_PARAMETERS = ("P_over_NW", "nu", "R", "alpha", "W")
SWEEP_OUTPUTS = ("quadrature", "closed_form", "asymptote", "snr_pair", "regime")

CANONICAL_FIGURE2 = {"nu": 1.0, "R": 100.0, "W": 1.0e3, "d": D_CRITICAL}
FIGURE2_GRID = {2.5: (1e-4, 1e4), 4.0: (1e-4, 1e8)}
FIGURE2_POINTS = 60
# With a unit dead band every grid point gets a definite regime label.
FIGURE2_DEAD_BAND = 1.0

# Acceptance windows reported as PASS/FAIL in summaries.
THRESHOLD_WINDOW = (1.10, 1.30)
DECAY_MIN_R2 = 0.9
VACANT_LOOP_MIN_PROB = 0.95
DEFAULT_VACANT_DELTA = 15.0


def to_bits(nats: Optional[float]) -> Optional[float]:
    return None if nats is None else nats / LN2


def timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


# --------------------------------------------------------------------------- config


# Config-file keys and the NetworkConfig/experiment names they map to.
_KEY_ALIASES = {
    "alpha": "alpha",
    "nu": "nu",
    "radius": "R",
    "r": "R",
    "power_over_nw": "p_over_nw",
    "p_over_nw": "p_over_nw",
    "bandwidth": "W",
    "w": "W",
    "noise": "N",
    "n": "N",
    "d": "d",
    "trials": "trials",
    "draws": "draws",
    "truncation": "truncation",
    "seed": "seed",
    "tol": "tol",
}

_NETWORK_DEFAULTS = {"nu": 1.0, "R": 100.0, "p_over_nw": 1.0, "W": 1.0e3, "N": 1.0, "alpha": 4.0, "d": D_CRITICAL}


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file (``#`` comments allowed) into typed values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc}") from exc
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ParameterError(f"config file {path}: {exc}") from exc
    out = {}
    for key, raw in parser["config"].items():
        name = _KEY_ALIASES.get(key.strip().lower().replace("-", "_"))
        if name is None:
            raise ParameterError(f"config file {path}: unknown key {key!r}")
        try:
            out[name] = int(raw) if name in ("trials", "draws", "seed") else float(raw)
        except ValueError:
            raise ParameterError(f"config file {path}: {key}: cannot parse {raw!r} as a number") from None
    return out


def merged_settings(args: argparse.Namespace, defaults: dict) -> dict:
    """Defaults, overridden by the config file, overridden by explicit flags."""
    settings = dict(defaults)
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    for flag, name in (
        ("alpha", "alpha"),
        ("nu", "nu"),
        ("radius", "R"),
        ("power_over_nw", "p_over_nw"),
        ("bandwidth", "W"),
        ("noise", "N"),
        ("d", "d"),
        ("trials", "trials"),
        ("draws", "draws"),
        ("truncation", "truncation"),
        ("seed", "seed"),
        ("tol", "tol"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            settings[name] = value
    return settings


def network_from_settings(s: dict) -> NetworkConfig:
    return NetworkConfig.from_snr(
        s["p_over_nw"], N=s["N"], W=s["W"], nu=s["nu"], R=s["R"], alpha=s["alpha"], d=s["d"]
    )


def config_echo(cfg: NetworkConfig) -> dict:
    out = cfg.as_dict()
    out["p_over_nw"] = cfg.p_over_nw
    return out


# --------------------------------------------------------------------------- bound


@dataclass
class RunRecord:
    command: str
    config: dict
    results: dict
    regime: Optional[dict]
    seed: Optional[int] = None
    units: dict = field(default_factory=lambda: {"capacity": "bits/s", "snr": "dimensionless"})
    timestamp: str = field(default_factory=timestamp)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "regime": self.regime,
            "seed": self.seed,
            "units": self.units,
            "timestamp": self.timestamp,
        }


def _regime_entry(cfg, threshold, dead_band):
    try:
        label = bound.classify_regime(cfg, threshold, dead_band)
    except RegimeAmbiguityError as exc:
        return None, {"case": None, "candidates": list(exc.candidates), "notice": str(exc)}
    return label, {"case": label.case.value, "description": label.case.description}


def _asymptote_entry(cfg, label, candidates, second_order):
    cases = [label.case] if label is not None else [bound.Regime(c) for c in candidates]
    out = {}
    for case in cases:
        try:
            out[case.value] = to_bits(bound.asymptote_value(cfg, case, second_order=second_order))
        except ParameterError as exc:
            out[case.value] = {"notice": str(exc)}
    return out


def evaluate_point(cfg: NetworkConfig, outputs=SWEEP_OUTPUTS, threshold=bound.DEFAULT_THRESHOLD,
                   dead_band=bound.DEFAULT_DEAD_BAND, second_order=False, tol=None) -> dict:
    """Evaluate the requested output kinds at one configuration (capacities in bits/s)."""
    res = {}
    label, regime = _regime_entry(cfg, threshold, dead_band)
    if "quadrature" in outputs:
        q = bound.cutset_bound_quadrature(cfg, abs_tol=None if tol is None else tol * LN2)
        res["quadrature"] = {"bits_s": to_bits(q.value), "abs_error_bits_s": to_bits(q.abs_error)}
    if "closed_form" in outputs:
        try:
            res["closed_form"] = {"bits_s": to_bits(bound.cutset_bound_closed_form(cfg).value)}
        except ExcludedAlphaError as exc:
            res["closed_form"] = {"bits_s": None, "notice": str(exc)}
    if "asymptote" in outputs:
        res["asymptote"] = _asymptote_entry(cfg, label, regime.get("candidates", ()), second_order)
    if "snr_pair" in outputs:
        s_short, s_long = bound.short_long_snr(cfg)
        res["snr_pair"] = {"s_short": s_short, "s_long": s_long}
    if "regime" in outputs:
        res["regime"] = regime
    return res


def run_bound(cfg: NetworkConfig, *, threshold=bound.DEFAULT_THRESHOLD, dead_band=bound.DEFAULT_DEAD_BAND,
              tol=None) -> RunRecord:
    res = evaluate_point(cfg, threshold=threshold, dead_band=dead_band, tol=tol)
    return RunRecord("bound", config_echo(cfg), res, res["regime"])


def _bound_csv_row(cfg, res):
    asym = res["asymptote"]
    case = next(iter(asym)) if len(asym) == 1 else ""
    asym_val = asym[case] if case and not isinstance(asym[case], dict) else None
    regime = res["regime"]["case"] or "|".join(res["regime"]["candidates"])
    return [
        cfg.p_over_nw, cfg.nu, cfg.R, cfg.W, cfg.alpha, cfg.d,
        res["quadrature"]["bits_s"], res["closed_form"]["bits_s"], case, asym_val,
        res["snr_pair"]["s_long"], res["snr_pair"]["s_short"], regime,
    ]


def append_bound_csv(path, cfg, record: RunRecord) -> None:
    append_csv(path, BOUND_CSV_HEADER, [_bound_csv_row(cfg, record.results)])


# --------------------------------------------------------------------------- sweep


@dataclass(frozen=True)
class SweepSpec:
    base: NetworkConfig
    swept_parameter: str
    grid: tuple
    outputs: tuple = SWEEP_OUTPUTS

    def __post_init__(self):
        if self.swept_parameter not in SWEEP_PARAMETERS:
            raise ParameterError(f"swept_parameter must be one of {SWEEP_PARAMETERS}, got {self.swept_parameter!r}")
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ParameterError("grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        bad = set(self.outputs) - set(SWEEP_OUTPUTS)
        if bad:
            raise ParameterError(f"unknown outputs {sorted(bad)}; choose from {SWEEP_OUTPUTS}")
        for i in range(len(grid)):
            self.config_at(i)

    def config_at(self, i: int) -> NetworkConfig:
        value = self.grid[i]
        if self.swept_parameter == "P_over_NW":
            return self.base.with_snr(value)
        # P stays fixed when W varies, so P/(NW) falls as W grows.
        return self.base.replace(**{self.swept_parameter: value})


def _sweep_worker(job):
    cfg, outputs = job
    return evaluate_point(cfg, outputs)


def _sweep_row(value, res, outputs):
    row = [value]
    if "quadrature" in outputs:
        row.append(res["quadrature"]["bits_s"])
    if "closed_form" in outputs:
        row.append(res["closed_form"]["bits_s"])
    if "asymptote" in outputs:
        asym = res["asymptote"]
        case = next(iter(asym)) if len(asym) == 1 else ""
        row += [case, asym[case] if case and not isinstance(asym[case], dict) else None]
    if "snr_pair" in outputs:
        row += [res["snr_pair"]["s_long"], res["snr_pair"]["s_short"]]
    if "regime" in outputs:
        reg = res["regime"]
        row.append(reg["case"] or "|".join(reg["candidates"]))
    return row


def sweep_header(spec: SweepSpec) -> list:
    header = [spec.swept_parameter.lower()]
    if "quadrature" in spec.outputs:
        header.append("quadrature_bits_s")
    if "closed_form" in spec.outputs:
        header.append("closed_form_bits_s")
    if "asymptote" in spec.outputs:
        header += ["asymptote_case", "asymptote_bits_s"]
    if "snr_pair" in spec.outputs:
        header += ["s_long", "s_short"]
    if "regime" in spec.outputs:
        header.append("regime")
    return header


def run_sweep(spec: SweepSpec, out_dir, jobs: int = 1) -> dict:
    """Evaluate every grid point (optionally in worker processes); rows keep grid order."""
    work = [(spec.config_at(i), spec.outputs) for i in range(len(spec.grid))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, work))
    else:
        results = [_sweep_worker(w) for w in work]
    rows = [_sweep_row(v, r, spec.outputs) for v, r in zip(spec.grid, results)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    write_csv(csv_path, sweep_header(spec), rows)
    summary = {
        "command": "sweep",
        "base_config": config_echo(spec.base),
        "swept_parameter": spec.swept_parameter,
        "grid_points": len(spec.grid),
        "outputs": list(spec.outputs),
        "files": {"sweep": csv_path.name},
        "timestamp": timestamp(),
    }
    _write_json(out_dir / "sweep_summary.json", summary)
    return summary


# --------------------------------------------------------------------------- figure 2


def figure2_grid(alpha: float, points: int = FIGURE2_POINTS, lo=None, hi=None) -> np.ndarray:
    default = FIGURE2_GRID.get(float(alpha), (1e-4, 1e8))
    lo = default[0] if lo is None else lo
    hi = default[1] if hi is None else hi
    if not (0 < lo < hi) or points < 2:
        raise ParameterError(f"figure2 grid needs 0 < start < stop and at least 2 points, got ({lo}, {hi}, {points})")
    return np.geomspace(lo, hi, points)


def figure2_rows(alpha: float, grid, base: Optional[NetworkConfig] = None, dead_band=FIGURE2_DEAD_BAND) -> list:
    """Bound, applicable asymptote and SNR pair at every P/(NW) of ``grid``."""
    base = base or NetworkConfig(alpha=alpha, **CANONICAL_FIGURE2)
    base = base.replace(alpha=alpha)
    rows = []
    for p in grid:
        cfg = base.with_snr(float(p))
        value = bound.cutset_bound_quadrature(cfg).value
        s_short, s_long = bound.short_long_snr(cfg)
        try:
            case = bound.classify_regime(cfg, bound.DEFAULT_THRESHOLD, dead_band).case
            # Case I is drawn with its second-order constant.
            asym = bound.asymptote_value(cfg, case, second_order=case is bound.Regime.I)
            case_name = case.value
        except RegimeAmbiguityError:
            case_name, asym = "", None
        rows.append([cfg.p_over_nw, to_bits(value), case_name, to_bits(asym), s_long, s_short, case_name])
    return rows


def regime_sequence(labels) -> list:
    """Collapse consecutive repeats: ``[IV, IV, III, I] -> [IV, III, I]``."""
    seq = []
    for lab in labels:
        if lab and (not seq or seq[-1] != lab):
            seq.append(lab)
    return seq


def run_figure2(alpha: float, out_dir, *, points: int = FIGURE2_POINTS, start=None, stop=None,
                base: Optional[NetworkConfig] = None, dead_band=FIGURE2_DEAD_BAND) -> dict:
    grid = figure2_grid(alpha, points, start, stop)
    base = base or NetworkConfig(alpha=alpha, **CANONICAL_FIGURE2)
    canonical = float(alpha) in FIGURE2_GRID and all(
        getattr(base, k) == v for k, v in CANONICAL_FIGURE2.items()
    )
    if not canonical:
        print(f"warning: non-canonical figure2 parameters (alpha={alpha})", file=sys.stderr)
    rows = figure2_rows(alpha, grid, base, dead_band)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"figure2_alpha{format_value(float(alpha))}"
    csv_path = out_dir / f"{stem}.csv"
    write_csv(csv_path, FIGURE2_HEADER, rows)
    transitions = []
    for prev, cur in zip(rows, rows[1:]):
        if prev[6] and cur[6] and prev[6] != cur[6]:
            transitions.append({"from": prev[6], "to": cur[6], "p_over_nw_lo": prev[0], "p_over_nw_hi": cur[0]})
    summary = {
        "command": "figure2",
        "alpha": float(alpha),
        "canonical": canonical,
        "config": config_echo(base.replace(alpha=alpha)),
        "grid": {"start": float(grid[0]), "stop": float(grid[-1]), "points": len(grid), "spacing": "log"},
        "dead_band": dead_band,
        "regime_sequence": regime_sequence(r[6] for r in rows),
        "transitions": transitions,
        "files": {"data": csv_path.name},
        "timestamp": timestamp(),
    }
    _write_json(out_dir / f"{stem}.json", summary)
    return summary


# --------------------------------------------------------------------------- Monte Carlo


def _check(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def run_montecarlo(cfg: NetworkConfig, trials: int, draws: int, truncation: float, seed: int, out_dir, *,
                   fading="rayleigh", max_tail_fraction=montecarlo.DEFAULT_MAX_TAIL_FRACTION) -> dict:
    est = montecarlo.estimate_expected_cutset(
        cfg, trials, draws, truncation, seed, montecarlo.FadingModel(fading), max_tail_fraction, keep_records=True
    )
    analytic = bound.cutset_bound_quadrature(cfg).value
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "montecarlo_trials.csv"
    montecarlo.write_records_csv(csv_path, est.records)

    def pooled(a, b):
        return 3.0 * math.hypot(a.std_error, b.std_error)

    checks = {
        "mimo_le_miso_per_draw": _check(est.hadamard_violations == 0),
        "mimo_le_miso_mean_3se": _check(est.mimo.mean <= est.miso.mean + pooled(est.mimo, est.miso)),
        "miso_le_jensen_3se": _check(est.miso.mean <= est.jensen.mean + pooled(est.miso, est.jensen)),
        "jensen_le_analytic_3se": _check(est.jensen.mean <= analytic + 3.0 * est.jensen.std_error),
    }
    summary = {
        "command": "montecarlo",
        "config": config_echo(cfg),
        "trials": trials,
        "draws": draws,
        "truncation_radius": truncation,
        "tail_fraction": est.tail_fraction,
        "fading": montecarlo.FadingModel(fading).value,
        "seed": seed,
        "mimo": _estimate_bits(est.mimo),
        "miso": _estimate_bits(est.miso),
        "jensen": _estimate_bits(est.jensen),
        "analytic_bound_bits_s": to_bits(analytic),
        "hadamard_violations": est.hadamard_violations,
        "checks": checks,
        "files": {"trials": csv_path.name},
        "timestamp": timestamp(),
    }
    _write_json(out_dir / "montecarlo_summary.json", summary)
    return summary


def _estimate_bits(e: montecarlo.CapacityEstimate) -> dict:
    return {"mean_bits_s": to_bits(e.mean), "std_error_bits_s": to_bits(e.std_error), "trials": e.trials}


# --------------------------------------------------------------------------- percolation


def run_threshold(nu: float, box_side_scaled: float, trials: int, tol: float, seed: int, out_dir) -> dict:
    est = percolation.estimate_critical_radius(nu, box_side_scaled / math.sqrt(nu), trials, tol, seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "threshold_scan.csv"
    write_csv(csv_path, THRESHOLD_HEADER, est.scan)
    lo, hi = THRESHOLD_WINDOW
    summary = {
        "command": "percolation threshold",
        "nu": nu,
        "box_side_scaled": box_side_scaled,
        "trials": trials,
        "tol": tol,
        "seed": seed,
        "d_estimate": est.d_estimate,
        "checks": {"d_estimate_in_window": _check(lo <= est.d_estimate <= hi)},
        "files": {"scan": csv_path.name},
        "timestamp": timestamp(),
    }
    _write_json(out_dir / "threshold_summary.json", summary)
    return summary


def vacant_loop_experiment(nu: float, R_scaled: float, k: float, delta: float, trials: int):
    if nu > 0:
        return percolation.CrossingExperiment.scaled(nu, R_scaled, k, delta, trials)
    # Without nodes there is no length scale; use the scaled values as meters.
    return percolation.CrossingExperiment(0.0, R_scaled, delta * math.log(R_scaled), k, trials)


def run_vacant_loop(nu: float, R_scaled: float, k: float, delta: float, trials: int, seed: int, out_dir) -> dict:
    exp = vacant_loop_experiment(nu, R_scaled, k, delta, trials)
    est = percolation.vacant_loop_probability(exp, seed)
    summary = {
        "command": "percolation vacant_loop",
        "nu": nu,
        "R_scaled": R_scaled,
        "k": k,
        "delta": delta,
        "annulus": {"R": exp.R, "m": exp.m, "x": exp.x},
        "trials": trials,
        "seed": seed,
        "vacant_loop_probability": est.probability,
        "std_error": est.std_error,
        "checks": {"vacant_loop_probability_min": _check(est.probability >= VACANT_LOOP_MIN_PROB)},
        "timestamp": timestamp(),
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "vacant_loop_summary.json", summary)
    return summary


def run_decay(nu: float, k: float, ms, trials: int, seed: int, out_dir) -> dict:
    x = k / math.sqrt(nu)
    scan = percolation.decay_scan(nu, x, ms, trials, seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "decay.csv"
    write_csv(csv_path, DECAY_HEADER, [(m, e.probability, e.std_error) for m, e in scan])
    # Zero-probability boxes carry no information for a log-linear fit.
    usable = [(m, e.probability) for m, e in scan if e.probability > 0]
    if len(usable) < 2:
        raise NumericalError("decay fit needs at least two box sizes with nonzero probability")
    fit = percolation.fit_log_linear([m for m, _ in usable], [p for _, p in usable])
    summary = {
        "command": "percolation decay",
        "nu": nu,
        "k": k,
        "m_values": [float(m) for m in ms],
        "trials": trials,
        "seed": seed,
        "supercritical": bool(scan[0][1].supercritical),
        "points_used": len(usable),
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "checks": {"negative_slope_good_fit": _check(fit.slope < 0 and fit.r_squared >= DECAY_MIN_R2)},
        "files": {"decay": csv_path.name},
        "timestamp": timestamp(),
    }
    _write_json(out_dir / "decay_summary.json", summary)
    return summary


# --------------------------------------------------------------------------- plumbing


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; here 2 means a numerical failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _network_flags(p):
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("--alpha", type=float, help="path-loss exponent (> 2)")
    p.add_argument("--nu", type=float, help="node density, nodes/m^2")
    p.add_argument("--radius", type=float, help="cut radius R, m")
    p.add_argument("--power-over-nw", type=float, help="SNR parameter P/(NW)")
    p.add_argument("--bandwidth", type=float, help="bandwidth W, Hz")
    p.add_argument("--noise", type=float, help="noise spectral density N, W/Hz")
    p.add_argument("--d", type=float, help="critical radius at unit density")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poisson-cutset", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", help="evaluate the bound at one configuration")
    _network_flags(p)
    p.add_argument("--tol", type=float, help="quadrature absolute tolerance, bits/s")
    p.add_argument("--threshold", type=float, default=bound.DEFAULT_THRESHOLD)
    p.add_argument("--dead-band", type=float, default=bound.DEFAULT_DEAD_BAND)
    p.add_argument("--out", help="CSV file to append the record to")

    p = sub.add_parser("sweep", help="evaluate the bound over a parameter grid")
    _network_flags(p)
    p.add_argument("--param", choices=SWEEP_PARAMETERS, default="P_over_NW")
    p.add_argument("--grid", type=_float_list, help="explicit comma-separated grid values")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--spacing", choices=("log", "linear"), default="log")
    p.add_argument("--outputs", default=",".join(SWEEP_OUTPUTS))
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", default="sweep_out", help="output directory")

    p = sub.add_parser("figure2", help="write the bound-vs-SNR dataset with asymptotes and SNR pair")
    _network_flags(p)
    p.add_argument("--points", type=int, default=FIGURE2_POINTS)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--dead-band", type=float, default=FIGURE2_DEAD_BAND)
    p.add_argument("--out", default="figure2_out", help="output directory")

    p = sub.add_parser("montecarlo", help="estimate E[mimo], E[miso], E[jensen] by simulation")
    _network_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--draws", type=int)
    p.add_argument("--truncation", type=float, help="outer radius of the transmitter annulus (default 10 R)")
    p.add_argument("--seed", type=int)
    p.add_argument("--fading", choices=[m.value for m in montecarlo.FadingModel], default="rayleigh")
    p.add_argument("--max-tail-fraction", type=float, default=montecarlo.DEFAULT_MAX_TAIL_FRACTION)
    p.add_argument("--out", default="montecarlo_out", help="output directory")

    p = sub.add_parser("percolation", help="Gilbert-graph percolation experiments")
    psub = p.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name, helptext in (
        ("threshold", "bisect the critical connection distance"),
        ("vacant_loop", "probability of a vacant loop in an annulus"),
        ("decay", "origin-to-box probability vs box size"),
    ):
        q = psub.add_parser(name, help=helptext)
        q.add_argument("--config", help="key = value file; flags override its entries")
        q.add_argument("--nu", type=float)
        q.add_argument("--trials", type=int)
        q.add_argument("--seed", type=int)
        q.add_argument("--out", default="percolation_out", help="output directory")
        if name == "threshold":
            q.add_argument("--box-side", type=float, default=200.0, help="box side in units of 1/sqrt(nu)")
            q.add_argument("--tol", type=float, help="bisection tolerance, m")
        else:
            q.add_argument("--k", type=float, default=0.9 * D_CRITICAL, help="x sqrt(nu)")
        if name == "vacant_loop":
            q.add_argument("--radius-scaled", type=float, default=200.0, help="R sqrt(nu)")
            q.add_argument("--delta", type=float, default=DEFAULT_VACANT_DELTA,
                           help="annulus width m = delta log(R sqrt(nu)) / sqrt(nu)")
        if name == "decay":
            q.add_argument("--m-values", type=_float_list, default=[2.0, 4.0, 6.0, 8.0, 10.0])
    return parser


def _grid_from_args(args) -> list:
    if args.grid:
        return args.grid
    if args.start is None or args.stop is None:
        raise ParameterError("sweep needs --grid or both --start and --stop")
    if args.points < 1:
        raise ParameterError("--points must be >= 1")
    if args.spacing == "log":
        if not (args.start > 0 and args.stop > 0):
            raise ParameterError("log spacing needs positive --start and --stop")
        return list(np.geomspace(args.start, args.stop, args.points))
    return list(np.linspace(args.start, args.stop, args.points))


def _dispatch(args) -> dict:
    if args.command == "bound":
        s = merged_settings(args, {**_NETWORK_DEFAULTS, "tol": None})
        cfg = network_from_settings(s)
        rec = run_bound(cfg, threshold=args.threshold, dead_band=args.dead_band, tol=s["tol"])
        if args.out:
            append_bound_csv(args.out, cfg, rec)
        return rec.to_dict()
    if args.command == "sweep":
        cfg = network_from_settings(merged_settings(args, _NETWORK_DEFAULTS))
        outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
        spec = SweepSpec(cfg, args.param, tuple(_grid_from_args(args)), outputs)
        if args.jobs < 1:
            raise ParameterError("--jobs must be >= 1")
        return run_sweep(spec, args.out, args.jobs)
    if args.command == "figure2":
        s = merged_settings(args, {**_NETWORK_DEFAULTS, **CANONICAL_FIGURE2})
        cfg = network_from_settings(s)
        return run_figure2(cfg.alpha, args.out, points=args.points, start=args.start, stop=args.stop,
                           base=cfg, dead_band=args.dead_band)
    if args.command == "montecarlo":
        defaults = {**_NETWORK_DEFAULTS, "R": 5.0, "trials": 100, "draws": 20, "truncation": None, "seed": 0}
        s = merged_settings(args, defaults)
        cfg = network_from_settings(s)
        truncation = s["truncation"] if s["truncation"] is not None else 10.0 * cfg.R
        return run_montecarlo(cfg, s["trials"], s["draws"], truncation, s["seed"], args.out,
                              fading=args.fading, max_tail_fraction=args.max_tail_fraction)
    # percolation
    if args.experiment == "threshold":
        s = merged_settings(args, {"nu": 1.0, "trials": 400, "seed": 0, "tol": 0.01})
        return run_threshold(s["nu"], args.box_side, s["trials"], s["tol"], s["seed"], args.out)
    if args.experiment == "vacant_loop":
        s = merged_settings(args, {"nu": 1.0, "trials": 200, "seed": 0})
        return run_vacant_loop(s["nu"], args.radius_scaled, args.k, args.delta, s["trials"], s["seed"], args.out)
    s = merged_settings(args, {"nu": 1.0, "trials": 2000, "seed": 0})
    if not s["nu"] > 0:
        raise ParameterError("decay experiment needs nu > 0")
    return run_decay(s["nu"], args.k, args.m_values, s["trials"], s["seed"], args.out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = _dispatch(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
