"""Command-line entry point: gen, run, report, render, selftest.

Exit codes: 0 when everything passes, 1 on any bound or validity failure,
2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .generators import Instance, InstanceSpec, generate
from .harness import ConfigError, ExperimentConfig, aggregate_csv, run_experiment, write_outputs


def _usage_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="onlinenet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="materialise an instance to JSON")
    g.add_argument("--spec", help="InstanceSpec JSON file (flags below are ignored when given)")
    g.add_argument("--family")
    g.add_argument("--d", type=int, default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--length", type=int, default=None)
    g.add_argument("--eps")
    g.add_argument("--M", type=float)
    g.add_argument("--alpha")
    g.add_argument("--C", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--generator", default=None)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--csv", help="override the CSV output path")
    r.add_argument("--json", help="override the JSON report path")
    r.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for byte-stable CSVs")
    r.add_argument("--jobs", type=int)

    a = sub.add_parser("report", help="aggregate CSV files")
    a.add_argument("csv", nargs="+")

    v = sub.add_parser("render", help="replay an instance and draw it as SVG")
    v.add_argument("--instance", required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--no-opt", action="store_true", help="skip the offline optimum circles")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return p


def _spec_from_flags(ns) -> InstanceSpec:
    if ns.spec:
        with open(ns.spec) as fh:
            return InstanceSpec.from_json(json.load(fh))
    if not ns.family:
        raise ConfigError("gen needs --spec or --family")
    kw = {"family": ns.family, "seed": ns.seed}
    for name in ("d", "n", "length", "eps", "M", "alpha", "C", "generator"):
        val = getattr(ns, name)
        if val is not None:
            kw[name] = val
    return InstanceSpec(**kw)


def cmd_gen(ns) -> int:
    inst = generate(_spec_from_flags(ns))
    with open(ns.out, "w") as fh:
        json.dump(inst.to_json(), fh, indent=1, sort_keys=True)
    print(f"wrote {len(inst.shapes)} shapes to {ns.out}")
    return 0


def cmd_run(ns) -> int:
    cfg = ExperimentConfig.load(ns.config)
    if ns.csv:
        cfg.output["csv"] = ns.csv
    if ns.json:
        cfg.output["json"] = ns.json
    if ns.no_timing:
        cfg.record_timing = False
    if ns.jobs:
        cfg.jobs = ns.jobs
    reports, summary = run_experiment(cfg)
    write_outputs(cfg, reports, summary)
    print(json.dumps(summary, sort_keys=True))
    if not summary["all_valid"]:
        print("validity failure", file=sys.stderr)
    return 0 if summary["all_pass"] and summary["all_valid"] else 1


def cmd_report(ns) -> int:
    rows = aggregate_csv(ns.csv)
    cols = ("family", "eps_or_M", "trials", "max_ratio", "mean_ratio", "mean_alg_size", "bound", "all_pass")
    print("\t".join(cols))
    for r in rows:
        print("\t".join(f"{r[c]:.4f}" if isinstance(r[c], float) else str(r[c]) for c in cols))
    return 0 if all(r["all_pass"] for r in rows) else 1


def cmd_render(ns) -> int:
    from . import oracle as orc
    from .interval_net import interval_run
    from .piercing_center import center_run
    from .piercing_fat import fat_run
    from .rectnet import RectNetParams, rect_run
    from .render import write_svg

    with open(ns.instance) as fh:
        inst = Instance.from_json(json.load(fh))
    spec = inst.spec
    if spec.family == "box_net3" or spec.d >= 3:
        raise ConfigError("rendering supports only one- and two-dimensional instances")
    points, marks, opt = [], [], []
    if spec.family == "interval_net":
        st = interval_run(inst.ground, spec.eps_fraction, inst.shapes)
        points = [inst.ground.point(i) for i in range(inst.ground.n)]
        marks = [inst.ground.point(i) for i in st.net]
        if not ns.no_opt:
            opt = [inst.ground.point(i) for i in orc.opt_interval_net(inst.ground, spec.eps_fraction, inst.shapes).certificate]
    elif spec.family == "rect_net2":
        st = rect_run(inst.ground, RectNetParams(spec.eps_fraction, seed=spec.seed), inst.shapes)
        points = [inst.ground.point(i) for i in range(inst.ground.n)]
        marks = [inst.ground.point(i) for i in st.net_indices]
    elif spec.family == "pierce_fat":
        marks = fat_run(inst.shapes, spec.M).N
    else:
        marks = center_run(inst.shapes, spec.d).N
    if spec.family.startswith("pierce") and not ns.no_opt:
        try:
            opt = orc.opt_piercing_boxes_exact(inst.shapes).certificate
        except (orc.OracleRefused, TypeError):
            opt = orc.piercing_bounds(inst.shapes).certificate
    write_svg(ns.out, inst.shapes, points, marks, opt, title=f"{spec.family} seed {spec.seed}")
    print(f"wrote {ns.out}")
    return 0


def cmd_selftest(ns) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest() else 1


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "report": cmd_report, "render": cmd_render,
            "selftest": cmd_selftest}


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except _UsageError as e:
        return _usage_error(str(e))
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return COMMANDS[ns.cmd](ns)
    except (ConfigError, ValueError, KeyError, TypeError, OSError) as e:
        return _usage_error(str(e))


if __name__ == "__main__":
    sys.exit(main())
