"""One-parameter sweeps over the analytic model, with optional grid oracle.

Configuration is an INI file::

    [scenario]
    kind = generic            ; or stern-gerlach
    eigenvalues = 1, -1
    pre = 0.8, 0.6
    post = 0.6, -0.8+0.1j

    [parameters]
    g = 1
    t = 1
    m = 1
    sigma = 1

    [sweep]
    parameter = g
    start = 1e-3
    stop = 1e3
    samples = 25
    spacing = log

    [output]
    quantities = F, re_AT, im_AT
    format = csv
    path = sweep.csv
    oracle = off

Stern-Gerlach scenarios take ``theta1, delta1, theta2, delta2`` in
``[scenario]`` and accept ``f`` as an alias of ``g``.

Precedence, lowest first: built-in defaults, the config file, the
``POINTER_DECOHERENCE_WORKERS`` environment variable (worker count only),
``--set section.key=value`` overrides, then the dedicated CLI flags.
"""
from __future__ import annotations

import configparser
import csv
import datetime as _dt
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import ConfigurationError, NumericalFailure, PointerDecoherenceError
from .grid import MAX_POINTS, auto_grid, numeric_moments, numeric_overlap, propagate_all, richardson
from .pointer import (
    MeasurementConfig,
    asymptotic_factor,
    log_decoherence_factor,
    printed_factor,
)
from .spectral import (
    SelectionState,
    SpectralObservable,
    conditional_expectation,
    expectation_value,
    weak_value,
)
from .stern_gerlach import SgScenario, sg_beta_sq, sg_printed_decoherence, sg_printed_shifts
from .transition import (
    limit_shifts,
    pairwise_factors,
    postselected_pointer_shifts,
    postselection_probability,
    shifts_from_transition_value,
    transition_value,
    transition_value_reading,
    WEAK_THRESHOLD,
    STRONG_THRESHOLD,
)

WORKERS_ENV = "POINTER_DECOHERENCE_WORKERS"
SWEEPABLE = ("g", "t", "m", "sigma", "theta1", "delta1", "theta2", "delta2")


@dataclass
class SweepConfig:
    scenario: str = "generic"
    eigenvalues: list = field(default_factory=lambda: [1.0, -1.0])
    pre: list = field(default_factory=lambda: [2**-0.5, 2**-0.5])
    post: list = field(default_factory=lambda: [2**-0.5, 2**-0.5])
    angles: dict = field(default_factory=lambda: {"theta1": math.pi / 4, "delta1": 0.0, "theta2": math.pi / 4, "delta2": 0.0})
    parameters: dict = field(default_factory=lambda: {"g": 1.0, "t": 1.0, "m": 1.0, "sigma": 1.0})
    sweep_parameter: str = "t"
    start: float = 0.0
    stop: float = 1.0
    samples: int = 11
    spacing: str = "linear"
    quantities: list = field(default_factory=lambda: ["F"])
    oracle: bool = False
    max_grid_points: int = MAX_POINTS
    adjudicate: bool = False
    workers: int = 1
    path: str = "sweep.csv"
    format: str = "csv"

    def validate(self) -> None:
        if self.scenario not in ("generic", "stern-gerlach"):
            raise ConfigurationError(f"unknown scenario kind {self.scenario!r}")
        if self.sweep_parameter not in SWEEPABLE:
            raise ConfigurationError(f"cannot sweep {self.sweep_parameter!r}; choose one of {SWEEPABLE}")
        if self.scenario == "generic" and self.sweep_parameter in ("theta1", "delta1", "theta2", "delta2"):
            raise ConfigurationError("angle sweeps need the stern-gerlach scenario")
        if self.samples < 1:
            raise ConfigurationError("an empty sweep produces no rows")
        if self.spacing not in ("linear", "log"):
            raise ConfigurationError(f"spacing must be linear or log, got {self.spacing!r}")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigurationError("log spacing needs positive bounds")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not self.quantities:
            raise ConfigurationError("no quantities requested")
        unknown = [q for q in self.quantities if q not in REGISTRY]
        if unknown:
            raise ConfigurationError(f"unknown quantities {unknown}; known: {sorted(REGISTRY)}")
        for q in self.quantities:
            if REGISTRY[q].scenario not in (None, self.scenario):
                raise ConfigurationError(f"quantity {q!r} requires the {REGISTRY[q].scenario} scenario")
            if REGISTRY[q].oracle and not self.oracle:
                raise ConfigurationError(f"quantity {q!r} needs oracle = on")
        if self.scenario == "generic" and not (len(self.eigenvalues) == len(self.pre) == len(self.post)):
            raise ConfigurationError("eigenvalues, pre and post must have equal length")
        # Trigger model-level validation on the fixed point.
        _Point.build(self, self.sweep_values()[0])

    def sweep_values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.samples)
        return np.linspace(self.start, self.stop, self.samples)


def _parse_complex_list(text: str) -> list:
    try:
        return [complex(tok.strip().replace(" ", "")) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse amplitude list {text!r}") from exc


def _parse_float_list(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse number list {text!r}") from exc


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigurationError(f"expected on/off, got {text!r}")


def load_config(path=None, overrides=(), workers=None, out=None, fmt=None) -> SweepConfig:
    """Build a validated :class:`SweepConfig` from file, env and CLI overrides."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, option = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigurationError(f"--set expects section.key=value, got {item!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, option, value.strip())

    cfg = SweepConfig()
    env_workers = os.environ.get(WORKERS_ENV)
    known = {
        "scenario": {"kind", "eigenvalues", "pre", "post", "theta1", "delta1", "theta2", "delta2"},
        "parameters": {"g", "f", "t", "m", "sigma"},
        "sweep": {"parameter", "start", "stop", "samples", "spacing"},
        "output": {"quantities", "format", "path", "oracle", "workers", "max_grid_points", "adjudicate"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigurationError(f"unknown config section [{section}]")
        extra = set(parser.options(section)) - known[section]
        if extra:
            raise ConfigurationError(f"unknown keys in [{section}]: {sorted(extra)}")
    try:
        if parser.has_section("scenario"):
            sc = parser["scenario"]
            cfg.scenario = sc.get("kind", cfg.scenario).strip()
            if "eigenvalues" in sc:
                cfg.eigenvalues = _parse_float_list(sc["eigenvalues"])
            if "pre" in sc:
                cfg.pre = _parse_complex_list(sc["pre"])
            if "post" in sc:
                cfg.post = _parse_complex_list(sc["post"])
            for k in ("theta1", "delta1", "theta2", "delta2"):
                if k in sc:
                    cfg.angles[k] = float(sc[k])
        if parser.has_section("parameters"):
            for k, v in parser["parameters"].items():
                cfg.parameters["g" if k == "f" else k] = float(v)
        if parser.has_section("sweep"):
            sw = parser["sweep"]
            p = sw.get("parameter", cfg.sweep_parameter).strip()
            cfg.sweep_parameter = "g" if p == "f" else p
            cfg.start = float(sw.get("start", cfg.start))
            cfg.stop = float(sw.get("stop", cfg.stop))
            cfg.samples = int(sw.get("samples", cfg.samples))
            cfg.spacing = sw.get("spacing", cfg.spacing).strip()
        if env_workers is not None:
            cfg.workers = int(env_workers)
        if parser.has_section("output"):
            o = parser["output"]
            if "quantities" in o:
                cfg.quantities = [q.strip() for q in o["quantities"].split(",") if q.strip()]
            cfg.format = o.get("format", cfg.format).strip()
            cfg.path = o.get("path", cfg.path).strip()
            if "oracle" in o:
                cfg.oracle = _bool(o["oracle"])
            if "adjudicate" in o:
                cfg.adjudicate = _bool(o["adjudicate"])
            if "workers" in o:
                cfg.workers = int(o["workers"])
            if "max_grid_points" in o:
                cfg.max_grid_points = int(o["max_grid_points"])
    except ValueError as exc:
        raise ConfigurationError(f"bad config value: {exc}") from exc
    if workers is not None:
        cfg.workers = int(workers)
    if out is not None:
        cfg.path = str(out)
    if fmt is not None:
        cfg.format = fmt
    cfg.validate()
    return cfg


class _Point:
    """Everything needed to evaluate quantities at one sweep value."""

    def __init__(self, obs, pre, post, mcfg, sg=None):
        self.obs, self.pre, self.post, self.cfg, self.sg = obs, pre, post, mcfg, sg
        self._cache = {}

    @classmethod
    def build(cls, scfg: SweepConfig, value: float) -> "_Point":
        params = dict(scfg.parameters)
        angles = dict(scfg.angles)
        if scfg.sweep_parameter in ("g", "t", "m", "sigma"):
            params[scfg.sweep_parameter] = float(value)
        else:
            angles[scfg.sweep_parameter] = float(value)
        mcfg = MeasurementConfig(**params)
        if scfg.scenario == "stern-gerlach":
            sg = SgScenario(f=mcfg.g, t=mcfg.t, m=mcfg.m, sigma=mcfg.sigma, **angles)
            return cls(sg.observable, sg.pre, sg.post, mcfg, sg)
        obs = SpectralObservable(scfg.eigenvalues)
        return cls(obs, SelectionState(scfg.pre), SelectionState(scfg.post), mcfg)

    def memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def a_t(self):
        return self.memo("a_t", lambda: transition_value(self.obs, self.pre, self.post, self.cfg))

    def shifts(self):
        return self.memo("shifts", lambda: postselected_pointer_shifts(self.obs, self.pre, self.post, self.cfg))

    def pair_factors(self):
        return self.memo("pf", lambda: pairwise_factors(self.obs, self.cfg))

    def extreme_pair(self):
        a = self.obs.eigenvalues
        return float(a.max()), float(a.min())

    def oracle(self, max_points):
        def run():
            a = self.obs.eigenvalues
            spec = auto_grid(self.cfg, a, max_points=max_points)
            results = []
            for s in (spec, spec.with_steps(2 * spec.n_steps)):
                bs = propagate_all(s, self.cfg, a)
                hi, lo = int(np.argmax(a)), int(np.argmin(a))
                ov = numeric_overlap(bs[hi], bs[lo])
                mom = numeric_moments(bs, self.pre, self.post)
                results.append([ov, mom.mean_x, mom.mean_p])
            ov, mx, mp = richardson(np.array(results[0]), np.array(results[1]))
            return abs(ov), mx.real, mp.real

        return self.memo("oracle", run)


@dataclass(frozen=True)
class Quantity:
    fn: Callable
    description: str
    scenario: str | None = None
    oracle: bool = False


def _dx_limit(limit):
    return lambda p, _: limit_shifts(p.obs, p.pre, p.post, p.cfg, limit)[0]


def _dp_limit(limit):
    return lambda p, _: limit_shifts(p.obs, p.pre, p.post, p.cfg, limit)[1]


REGISTRY: dict[str, Quantity] = {
    "F": Quantity(lambda p, _: float(p.pair_factors().max()) if p.pair_factors().size else 1.0,
                  "largest pairwise decoherence factor (exact overlap)"),
    "F_min": Quantity(lambda p, _: float(p.pair_factors().min()) if p.pair_factors().size else 1.0,
                      "smallest pairwise decoherence factor"),
    "log_F": Quantity(lambda p, _: log_decoherence_factor(p.cfg, *p.extreme_pair()),
                      "ln F between the extreme eigenvalues"),
    "F_five_eighths": Quantity(lambda p, _: printed_factor(p.cfg, *p.extreme_pair(), "five_eighths"),
                               "printed closed form with the 5/8 coefficient"),
    "F_one_eighth": Quantity(lambda p, _: printed_factor(p.cfg, *p.extreme_pair(), "one_eighth"),
                             "printed closed form with the 1/8 coefficient"),
    "F_long_time": Quantity(lambda p, _: asymptotic_factor(p.cfg, *p.extreme_pair(), "long_time").value,
                            "t >> m sigma^2 asymptote"),
    "F_short_time": Quantity(lambda p, _: asymptotic_factor(p.cfg, *p.extreme_pair(), "short_time").value,
                             "t << m sigma^2 Gaussian decay"),
    "regime_ratio": Quantity(lambda p, _: p.cfg.regime_ratio, "t / (m sigma^2)"),
    "sigma_t": Quantity(lambda p, _: p.cfg.sigma_t, "spread pointer width"),
    "expectation": Quantity(lambda p, _: expectation_value(p.obs, p.pre), "<A> in the pre-selected state"),
    "conditional": Quantity(lambda p, _: conditional_expectation(p.obs, p.pre, p.post), "conditional expectation <A>_c"),
    "re_weak": Quantity(lambda p, _: weak_value(p.obs, p.pre, p.post).real, "Re <A>_w"),
    "im_weak": Quantity(lambda p, _: weak_value(p.obs, p.pre, p.post).imag, "Im <A>_w"),
    "re_AT": Quantity(lambda p, _: p.a_t().real, "Re of the transition value"),
    "im_AT": Quantity(lambda p, _: p.a_t().imag, "Im of the transition value"),
    "re_AT_magnitude_reading": Quantity(
        lambda p, _: transition_value_reading(p.obs, p.pre, p.post, p.cfg, "magnitude").real,
        "Re A_T with overlaps replaced by their magnitudes"),
    "postselection_probability": Quantity(
        lambda p, _: postselection_probability(p.obs, p.pre, p.post, p.cfg), "<Xi|Xi>"),
    "dx": Quantity(lambda p, _: p.shifts()[0], "exact post-selected position shift"),
    "dp": Quantity(lambda p, _: p.shifts()[1], "exact post-selected momentum shift"),
    "dx_AT_form": Quantity(lambda p, _: shifts_from_transition_value(p.a_t(), p.cfg)[0], "position shift via A_T"),
    "dp_AT_form": Quantity(lambda p, _: shifts_from_transition_value(p.a_t(), p.cfg)[1], "momentum shift via A_T"),
    "dx_weak": Quantity(_dx_limit("weak_F1"), "F->1 position shift"),
    "dp_weak": Quantity(_dp_limit("weak_F1"), "F->1 momentum shift"),
    "dx_strong": Quantity(_dx_limit("strong_F0"), "F->0 position shift"),
    "dp_strong": Quantity(_dp_limit("strong_F0"), "F->0 momentum shift"),
    "dx_weak_minf": Quantity(_dx_limit("weak_F1_minf"), "F->1, m->inf position shift"),
    "dp_weak_minf": Quantity(_dp_limit("weak_F1_minf"), "F->1, m->inf momentum shift"),
    "dx_strong_minf": Quantity(_dx_limit("strong_F0_minf"), "F->0, m->inf position shift"),
    "dp_strong_minf": Quantity(_dp_limit("strong_F0_minf"), "F->0, m->inf momentum shift"),
    "near_weak": Quantity(lambda p, _: float(p.pair_factors().min() > WEAK_THRESHOLD) if p.pair_factors().size else 1.0,
                          "1 when every pairwise F exceeds the weak threshold"),
    "near_strong": Quantity(lambda p, _: float(p.pair_factors().max() < STRONG_THRESHOLD) if p.pair_factors().size else 0.0,
                            "1 when every pairwise F is below the strong threshold"),
    "F_sg_printed": Quantity(lambda p, _: sg_printed_decoherence(p.sg), "spin closed form for F'", "stern-gerlach"),
    "beta_sq": Quantity(lambda p, _: sg_beta_sq(p.sg), "spin post-selection normalization", "stern-gerlach"),
    "dx_sg_printed": Quantity(lambda p, _: sg_printed_shifts(p.sg)[0], "spin closed-form position shift", "stern-gerlach"),
    "dp_sg_printed": Quantity(lambda p, _: sg_printed_shifts(p.sg)[1], "spin closed-form momentum shift", "stern-gerlach"),
    "F_oracle": Quantity(lambda p, mp: p.oracle(mp)[0], "grid-propagated F between extreme eigenvalues", oracle=True),
    "dx_oracle": Quantity(lambda p, mp: p.oracle(mp)[1], "grid post-selected position shift", oracle=True),
    "dp_oracle": Quantity(lambda p, mp: p.oracle(mp)[2], "grid post-selected momentum shift", oracle=True),
}

# Pairs compared in the summary when the oracle runs.
_ORACLE_PAIRS = {"F_oracle": "F_exact_pair", "dx_oracle": "dx", "dp_oracle": "dp"}


def _exact_for(name, point):
    if name == "F_oracle":
        return math.exp(log_decoherence_factor(point.cfg, *point.extreme_pair()))
    return point.shifts()[0 if name == "dx_oracle" else 1]


def _evaluate(args):
    scfg, value = args
    row = {scfg.sweep_parameter: float(value)}
    errors = []
    try:
        point = _Point.build(scfg, value)
    except PointerDecoherenceError as exc:
        for q in scfg.quantities:
            row[q] = None
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row, {}
    deviations = {}
    for q in scfg.quantities:
        try:
            row[q] = float(REGISTRY[q].fn(point, scfg.max_grid_points))
        except (PointerDecoherenceError, ArithmeticError) as exc:
            row[q] = None
            msg = f"{q}: {type(exc).__name__}: {exc}"
            if msg not in errors:
                errors.append(msg)
        else:
            if q in _ORACLE_PAIRS:
                try:
                    deviations[q] = abs(row[q] - _exact_for(q, point))
                except PointerDecoherenceError:
                    pass
    try:
        f = point.pair_factors()
        flags = {
            "near_weak": bool(f.size == 0 or f.min() > WEAK_THRESHOLD),
            "near_strong": bool(f.size > 0 and f.max() < STRONG_THRESHOLD),
        }
    except PointerDecoherenceError:
        flags = {}
    row["error"] = "; ".join(errors)
    return row, {"deviations": deviations, "flags": flags}


def run_sweep(scfg: SweepConfig, write: bool = True):
    """Evaluate every sample point; returns ``(rows, summary)``.

    Rows are ordered by sweep value regardless of worker count.  When
    ``write`` is set the rows go to ``scfg.path`` and the summary to
    ``<path>.summary.json``.
    """
    scfg.validate()
    values = scfg.sweep_values()
    jobs = [(scfg, v) for v in values]
    if scfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=scfg.workers) as pool:
            results = list(pool.map(_evaluate, jobs))
    else:
        results = [_evaluate(j) for j in jobs]
    order = np.argsort(values, kind="stable")
    results = [results[i] for i in order]
    rows = [r for r, _ in results]
    summary = _summarize(scfg, results)
    if write:
        emit(scfg.format, rows, metadata(scfg), scfg.path)
        summary_path = Path(str(scfg.path) + ".summary.json")
        _write_text(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return rows, summary


def _summarize(scfg, results):
    max_dev = {}
    n_weak = n_strong = 0
    for _, info in results:
        for k, v in info.get("deviations", {}).items():
            max_dev[k] = max(max_dev.get(k, 0.0), v)
        n_weak += info.get("flags", {}).get("near_weak", False)
        n_strong += info.get("flags", {}).get("near_strong", False)
    first = results[0][1].get("flags", {})
    last = results[-1][1].get("flags", {})
    summary = {
        "rows": len(results),
        "failed_rows": sum(1 for r, _ in results if r.get("error")),
        "regime": {
            "near_weak_rows": int(n_weak),
            "near_strong_rows": int(n_strong),
            "first": first,
            "last": last,
            "weak_threshold": WEAK_THRESHOLD,
            "strong_threshold": STRONG_THRESHOLD,
        },
        "max_oracle_deviation": max_dev,
        "metadata": metadata(scfg),
    }
    if scfg.adjudicate:
        from .adjudication import adjudicate_coefficient

        summary["coefficient_adjudication"] = adjudicate_coefficient().as_dict()
    return summary


def metadata(scfg: SweepConfig) -> dict:
    cfg = asdict(scfg)
    cfg["pre"] = [str(c) for c in scfg.pre]
    cfg["post"] = [str(c) for c in scfg.post]
    return {
        "config": cfg,
        "version": __version__,
        "units": "hbar=1",
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def render_csv(rows) -> str:
    columns = list(rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(rows, meta) -> str:
    return json.dumps({"metadata": meta, "rows": rows}, indent=1, sort_keys=False) + "\n"


def emit(fmt: str, rows, meta, path) -> Path:
    """Write rows as CSV (17 significant digits) or JSON (rows + metadata)."""
    if not rows:
        raise ConfigurationError("refusing to emit an empty sweep")
    if fmt == "csv":
        text = render_csv(rows)
    elif fmt == "json":
        text = render_json(rows, meta)
    else:
        raise ConfigurationError(f"unknown format {fmt!r}")
    _write_text(path, text)
    return Path(path)


def read_csv(path) -> list[dict]:
    """Parse an emitted CSV back to floats (empty cells become ``None``)."""
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                if k == "error":
                    parsed[k] = v
                else:
                    parsed[k] = float(v) if v != "" else None
            out.append(parsed)
        return out
