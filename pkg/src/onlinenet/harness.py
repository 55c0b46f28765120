"""Experiment runner: generate, replay online, compare to an offline denominator.

Each trial is a pure function of ``(config, seed)``, so trials can run in
any order or in parallel and the merged rows are identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import oracle as orc
from .generators import InstanceSpec, generate
from .geometry import contains_many
from .interval_net import IntervalNetState, competitive_bound, interval_process
from .piercing_center import BoundParams, center_process, CenterPierceState, check_charge_bound
from .piercing_fat import FatPierceState, LayerTable, check_fat_bound, fat_process
from .rectnet.algorithm import (
    RectNetParams,
    RectNetState,
    check_validity,
    key_count_bound,
    rect_process,
    size_bound,
)

ORACLE_MODES = ("exact", "bounds", "paper_lower_bound")
CSV_COLUMNS = ("seed", "family", "eps_or_M", "alg_size", "opt_kind", "opt_value_or_lower",
               "ratio", "bound", "pass", "wall_ms")
DEFAULT_ALGORITHM = {
    "interval_net": "interval_net",
    "rect_net2": "rect_net",
    "box_net3": "rect_net",
    "pierce_box": "center",
    "pierce_ellipsoid": "center",
    "pierce_fat": "fat",
}
ALLOWED_ORACLES = {
    "interval_net": ("exact",),
    "rect_net2": ("exact", "paper_lower_bound"),
    "box_net3": ("paper_lower_bound",),
    "pierce_box": ("exact", "bounds"),
    "pierce_ellipsoid": ("bounds",),
    "pierce_fat": ("exact", "bounds"),
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    instance: InstanceSpec
    algorithm: str | None = None
    params: dict = field(default_factory=dict)
    trials: int = 1
    oracle: str = "exact"
    output: dict = field(default_factory=dict)
    record_timing: bool = True
    jobs: int = 1
    limits: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.instance, dict):
            try:
                self.instance = InstanceSpec.from_json(self.instance)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad instance spec: {e}") from e
        fam = self.instance.family
        if self.algorithm is None:
            self.algorithm = DEFAULT_ALGORITHM[fam]
        if self.algorithm != DEFAULT_ALGORITHM[fam]:
            raise ConfigError(f"algorithm {self.algorithm!r} does not handle family {fam!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if self.oracle not in ORACLE_MODES:
            raise ConfigError(f"oracle must be one of {ORACLE_MODES}")
        if self.oracle not in ALLOWED_ORACLES[fam]:
            raise ConfigError(f"oracle {self.oracle!r} is not available for {fam!r}")
        if fam in ("interval_net", "rect_net2", "box_net3") and self.instance.eps is None:
            raise ConfigError(f"{fam} needs eps")
        if fam.startswith("pierce") and self.instance.M is None:
            raise ConfigError(f"{fam} needs M")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("jobs must be a positive integer")

    def to_json(self) -> dict:
        d = asdict(self)
        d["instance"] = self.instance.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict) or "instance" not in d:
            raise ConfigError("config needs an 'instance' object")
        known = {"instance", "algorithm", "params", "trials", "oracle", "output",
                 "record_timing", "jobs", "limits"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
        return cls.from_json(data)


@dataclass
class TrialReport:
    seed: int
    family: str
    eps_or_M: str
    alg_size: int
    opt_kind: str
    opt_value_or_lower: float
    ratio: float
    bound: float
    passed: bool
    valid: bool
    wall_ms: float | None = None
    oracle: dict = field(default_factory=dict)
    charge_histogram: dict = field(default_factory=dict)
    max_charge: int | None = None
    extra: dict = field(default_factory=dict)

    def csv_row(self) -> list:
        return [
            str(self.seed),
            self.family,
            self.eps_or_M,
            str(self.alg_size),
            self.opt_kind,
            _fmt(self.opt_value_or_lower),
            _fmt(self.ratio),
            _fmt(self.bound),
            "true" if self.passed else "false",
            "" if self.wall_ms is None else f"{self.wall_ms:.3f}",
        ]

    def to_json(self) -> dict:
        d = asdict(self)
        d["charge_histogram"] = {str(k): v for k, v in self.charge_histogram.items()}
        return d

    @classmethod
    def from_json(cls, d: dict) -> "TrialReport":
        d = dict(d)
        d["charge_histogram"] = {int(k): v for k, v in d.get("charge_histogram", {}).items()}
        return cls(**d)


def _fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    # shortest repr round-trips exactly through float()
    return repr(x)


def parse_csv_row(row: dict) -> dict:
    """Typed view of one CSV row."""
    return {
        "seed": int(row["seed"]),
        "family": row["family"],
        "eps_or_M": row["eps_or_M"],
        "alg_size": int(row["alg_size"]),
        "opt_kind": row["opt_kind"],
        "opt_value_or_lower": float(row["opt_value_or_lower"]),
        "ratio": float(row["ratio"]),
        "bound": float(row["bound"]),
        "pass": row["pass"] == "true",
        "wall_ms": float(row["wall_ms"]) if row["wall_ms"] else None,
    }


def _histogram(charges: dict) -> dict:
    hist: dict = {}
    for v in charges.values():
        hist[v] = hist.get(v, 0) + 1
    return dict(sorted(hist.items()))


def _limits(config: ExperimentConfig) -> orc.Limits:
    return orc.Limits(**config.limits)


# --------------------------------------------------------------------------
# per-family trials
# --------------------------------------------------------------------------


def _trial_interval(config, inst, seed) -> TrialReport:
    X, eps = inst.ground, inst.spec.eps_fraction
    state = IntervalNetState(X, eps)
    valid = True
    for s in inst.shapes:
        interval_process(state, s)
        lo, hi = state.index_range(s)
        if hi - lo >= state.threshold and not state.is_hit(s):
            valid = False
    res = orc.opt_interval_net(X, eps, inst.shapes)
    opt = res.certificate
    xs = X.points[:, 0]
    charges = {i: 0 for i in opt}
    for tr in state.triggers:
        owner = min((i for i in opt if tr.interval.lo <= xs[i] <= tr.interval.hi), default=None)
        if owner is None:
            valid = False
            continue
        charges[owner] += len(tr.added)
    bound = competitive_bound(eps)
    alg = len(state.net)
    ratio = alg / res.value if res.value else 0.0
    max_charge = max(charges.values(), default=0)
    ok = valid and ratio <= bound and max_charge <= bound
    return TrialReport(seed, "interval_net", str(eps), alg, "exact", res.value, ratio, bound, ok,
                       valid, oracle=res.to_json(), charge_histogram=_histogram(charges),
                       max_charge=max_charge)


def _rect_params(config, eps, seed) -> RectNetParams:
    p = {k: v for k, v in config.params.items() if k in ("c1", "delta", "c_a", "gamma", "max_attempts")}
    return RectNetParams(eps, seed=seed, **p)


def paper_lower_bound(eps) -> float:
    """``(1/eps) * ln ln(1/eps)``: the analytic net-size lower bound used as a labelled denominator."""
    inv = 1.0 / float(Fraction(eps))
    return inv * math.log(math.log(inv))


def _trial_rect(config, inst, seed) -> TrialReport:
    X, eps = inst.ground, inst.spec.eps_fraction
    params = _rect_params(config, eps, seed)
    state = RectNetState(X, params)
    valid = True
    thr = state.threshold
    for s in inst.shapes:
        rect_process(state, s)
        inside = contains_many(s, X.points)
        if np.count_nonzero(inside) >= thr and not np.any(state._in_net[inside]):
            valid = False
    valid = valid and check_validity(state)
    alg = state.size
    fam = inst.spec.family
    extra = dict(state.summary())
    extra["hit_ratio_ok"] = all(t.clipped_count * t.weight >= t.y_count for t in state.triggers
                                if t.rect is not None)
    opt_kind, denom, oracle_json = "paper_lower_bound", paper_lower_bound(eps), {}
    if config.oracle == "exact":
        try:
            res = orc.opt_rect_net_exact(X, eps, inst.shapes, _limits(config))
            opt_kind, denom, oracle_json = "exact", res.value, res.to_json()
        except orc.OracleRefused:
            opt_kind = "bounds-only"
    ratio = alg / denom if denom else 0.0
    if fam == "rect_net2":
        bound = 10.0 * params.c_a * params.delta * math.log2(1.0 / float(eps))
        extra["size_bound"] = size_bound(eps, params)
        ok = valid and alg <= extra["size_bound"]
    else:
        bound = key_count_bound(state.P.size, eps)
        ok = valid and len(state.nets) <= bound
    return TrialReport(seed, fam, str(eps), alg, opt_kind, denom, ratio, bound, ok, valid,
                       oracle=oracle_json, extra=extra)


def _pierce_validity(state, shapes, process) -> bool:
    valid = True
    for s in shapes:
        process(state, s)
        if not state.pierced(s):
            valid = False
    return valid


def _pierce_oracle(config, shapes, exact_ok: bool):
    if config.oracle == "exact" and exact_ok:
        try:
            return orc.opt_piercing_boxes_exact(shapes, _limits(config)), "exact"
        except orc.OracleRefused:
            return orc.piercing_bounds(shapes, _limits(config)), "bounds-only"
    return orc.piercing_bounds(shapes, _limits(config)), "lower_bound"


def _trial_center(config, inst, seed) -> TrialReport:
    spec = inst.spec
    kind = "box" if spec.family == "pierce_box" else "ellipsoid"
    state = CenterPierceState(spec.d)
    valid = _pierce_validity(state, inst.shapes, center_process)
    res, opt_kind = _pierce_oracle(config, inst.shapes, kind == "box")
    valid = valid and orc.verify_piercing(inst.shapes, res.certificate)
    rep = check_charge_bound(state, res.certificate, BoundParams(spec.M, spec.C), kind)
    denom = res.lower
    ratio = len(state.N) / denom if denom else 0.0
    ok = valid and ratio <= rep.bound and rep.max_charge <= rep.bound
    return TrialReport(seed, spec.family, _fmt(spec.M), len(state.N), opt_kind, denom, ratio,
                       rep.bound, ok, valid, oracle=res.to_json(),
                       charge_histogram=_histogram(rep.charges), max_charge=rep.max_charge,
                       extra={"approximate": res.approximate})


def _trial_fat(config, inst, seed) -> TrialReport:
    spec = inst.spec
    scale = Fraction(config.params.get("scale", "1/4"))
    state = FatPierceState(LayerTable(spec.M, scale))
    valid = _pierce_validity(state, inst.shapes, fat_process)
    boxes_only = all(s.kind != "l2_ball" for s in inst.shapes)
    res, opt_kind = _pierce_oracle(config, inst.shapes, boxes_only)
    valid = valid and orc.verify_piercing(inst.shapes, res.certificate)
    alpha = Fraction(spec.alpha)
    rep = check_fat_bound(state, res.certificate, alpha, spec.d, spec.M)
    denom = res.lower
    ratio = len(state.N) / denom if denom else 0.0
    ok = valid and ratio <= rep.bound
    extra = {"layer_ok": rep.layer_ok, "max_layer_charge": rep.max_layer_charge,
             "per_layer_bound": rep.per_layer_bound,
             "layers": {str(k): v for k, v in state.layer_counts().items()}}
    return TrialReport(seed, spec.family, _fmt(spec.M), len(state.N), opt_kind, denom, ratio,
                       rep.bound, ok, valid, oracle=res.to_json(),
                       charge_histogram=_histogram(rep.charges), max_charge=max(rep.charges.values(), default=0),
                       extra=extra)


_TRIALS = {
    "interval_net": _trial_interval,
    "rect_net2": _trial_rect,
    "box_net3": _trial_rect,
    "pierce_box": _trial_center,
    "pierce_ellipsoid": _trial_center,
    "pierce_fat": _trial_fat,
}


def run_trial(config: ExperimentConfig, seed: int) -> TrialReport:
    t0 = time.perf_counter()
    inst = generate(config.instance.with_seed(seed))
    rep = _TRIALS[inst.spec.family](config, inst, seed)
    if config.record_timing:
        rep.wall_ms = (time.perf_counter() - t0) * 1000.0
    return rep


def _run_one(args):
    cfg_json, seed = args
    return run_trial(ExperimentConfig.from_json(cfg_json), seed)


def summarize(reports: list) -> dict:
    ratios = [r.ratio for r in reports]
    return {
        "trials": len(reports),
        "max_ratio": max(ratios, default=0.0),
        "mean_ratio": float(np.mean(ratios)) if ratios else 0.0,
        "mean_alg_size": float(np.mean([r.alg_size for r in reports])) if reports else 0.0,
        "all_valid": all(r.valid for r in reports),
        "all_pass": all(r.passed for r in reports),
        "bound": max((r.bound for r in reports), default=0.0),
        "opt_kinds": sorted({r.opt_kind for r in reports}),
    }


def run_experiment(config: ExperimentConfig) -> tuple:
    """Run every trial and return ``(reports sorted by seed, summary)``."""
    seeds = [config.instance.seed + t for t in range(config.trials)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            reports = list(pool.map(_run_one, [(config.to_json(), s) for s in seeds]))
    else:
        reports = [run_trial(config, s) for s in seeds]
    reports.sort(key=lambda r: r.seed)
    summary = summarize(reports)
    summary["family"] = config.instance.family
    summary["oracle"] = config.oracle
    return reports, summary


def reports_to_csv(reports: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def write_outputs(config: ExperimentConfig, reports: list, summary: dict):
    out = config.output
    if out.get("csv"):
        with open(out["csv"], "w", newline="") as fh:
            fh.write(reports_to_csv(reports))
    if out.get("json"):
        with open(out["json"], "w") as fh:
            json.dump({"config": config.to_json(), "summary": summary,
                       "trials": [r.to_json() for r in reports]}, fh, indent=2, sort_keys=True)


def aggregate_csv(paths) -> list:
    """Group rows of several CSV files by (family, eps_or_M)."""
    groups: dict = {}
    for p in paths:
        with open(p, newline="") as fh:
            for row in csv.DictReader(fh):
                r = parse_csv_row(row)
                groups.setdefault((r["family"], r["eps_or_M"]), []).append(r)
    out = []
    for (fam, em), rows in sorted(groups.items()):
        ratios = [r["ratio"] for r in rows]
        out.append({
            "family": fam,
            "eps_or_M": em,
            "trials": len(rows),
            "max_ratio": max(ratios),
            "mean_ratio": sum(ratios) / len(ratios),
            "mean_alg_size": sum(r["alg_size"] for r in rows) / len(rows),
            "bound": max(r["bound"] for r in rows),
            "all_pass": all(r["pass"] for r in rows),
        })
    return out
