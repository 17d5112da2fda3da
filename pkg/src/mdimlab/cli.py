"""Command line entry point: ``mdimlab <subcommand> [--config PATH] ...``.

Exit status 0 when every verdict passes (or the command has none), 1 on a
verdict failure or a numerical error, 2 on usage or config errors.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import replace

from .candidates import measure_name
from .errors import ConfigError, MdimError
from .estimators import EstimatorRecord, bk_profile, estimator_csv, katok_entropy, ps_entropy
from .harness import (PRESETS, ExperimentConfig, _g, _r, geometric_side, headline_table,
                      load_config, reproduce_example, run_vp_check)
from .information import rd_linf_curve, rdim_estimate
from .partitions import mrid_estimate

SUBCOMMANDS = ("mdim", "mrid", "rdist", "katok", "bk", "ps", "vp-check", "example")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI experiment config")
    common.add_argument("--preset", choices=sorted(PRESETS), help="bundled config (default finite-entropy)")
    common.add_argument("--seed", type=int, help="override the config seed (u64)")
    common.add_argument("--out", metavar="DIR", help="write files here instead of stdout")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    p = _Parser(prog="mdimlab", description="metric mean dimension laboratory")
    sub = p.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}",
                           parser_class=_Parser)
    helps = {"mdim": "separated counts and metric mean dimension",
             "mrid": "grid-partition entropy and information dimension per family member",
             "rdist": "L-infinity rate-distortion profile per family member",
             "katok": "Katok entropy per member and eps",
             "bk": "Brin-Katok local entropy per member and eps",
             "ps": "Pfister-Sullivan entropy per member and eps",
             "vp-check": "variational-principle comparison with verdicts",
             "example": "reproduce the [0,1]^Z shift example with a headline table"}
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        if args.preset is not None:
            raise ConfigError("--config and --preset are exclusive")
        cfg = load_config(args.config)
    else:
        cfg = PRESETS[args.preset or ("example-3-5" if args.command == "example" else "finite-entropy")]
    upd = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        upd["seed"] = args.seed
    if args.jobs is not None:
        upd["jobs"] = args.jobs
    return replace(cfg, **upd) if upd else cfg


# ---------------------------------------------------------------------------
# per-command runs: each returns ({filename: csv}, json-able dict, exit code)

def _records_out(name, records):
    text = estimator_csv(records)
    rows = [{"estimator": r.estimator, "mu": r.mu, "epsilon": _r(r.epsilon), "aux": _r(r.aux),
             "value": _r(r.value), "stderr": _r(r.stderr)} for r in records]
    return {f"{name}.csv": text}, {"records": rows}, 0


def cmd_mdim(cfg):
    geo, tables = geometric_side(cfg)
    buf = io.StringIO()
    buf.write("epsilon,n,levels,sep,span_lo,span_hi,mode\n")
    for m, t in tables:
        for eps, n, s, a, b, mode in t.rows():
            buf.write(f"{_g(eps)},{n},{m},{s},{a},{b},{mode}\n")
    dim = io.StringIO()
    dim.write("quantity,epsilon,value\n")
    for e, r in zip(geo["epsilons"], geo["rates"]):
        dim.write(f"rate,{_g(e)},{_g(r)}\n")
    for k in ("upper", "lower", "slope"):
        dim.write(f"{k},-,{_g(geo[k])}\n")
    js = {k: ([_r(x) for x in v] if isinstance(v, list) else _r(v)) for k, v in geo.items()}
    return {"counts.csv": buf.getvalue(), "mdim.csv": dim.getvalue()}, js, 0


def cmd_mrid(cfg):
    files, js = {}, {}
    buf = io.StringIO()
    buf.write("mu,epsilon,h,ratio,slope_running\n")
    summary = []
    for mu in cfg.measure_family().members:
        res = mrid_estimate(mu, cfg.epsilons, cfg.base, cfg.sided)
        for line in res.to_csv().splitlines()[1:]:
            buf.write(f"{measure_name(mu)},{line}\n")
        summary.append(EstimatorRecord("mrid-slope", measure_name(mu), min(cfg.epsilons), 0, res.slope))
    files["mrid.csv"] = buf.getvalue()
    f2, js, _ = _records_out("dimensions", summary)
    files.update(f2)
    return files, js, 0


def cmd_rdist(cfg):
    buf = io.StringIO()
    buf.write("mu,level,rate_nats,iters,residual,kind\n")
    summary = []
    for mu in cfg.measure_family().members:
        curve = rd_linf_curve(mu, cfg.epsilons, min(cfg.s_grid), cfg.rd_tol)
        for line in curve.to_csv().splitlines()[1:]:
            buf.write(f"{measure_name(mu)},{line}\n")
        summary.append(EstimatorRecord("rdim-slope", measure_name(mu), min(cfg.epsilons),
                                       min(cfg.s_grid), rdim_estimate(curve).slope))
    files, js, _ = _records_out("dimensions", summary)
    files["rd.csv"] = buf.getvalue()
    return files, js, 0


def cmd_katok(cfg):
    recs = []
    for mu in cfg.measure_family().members:
        for e in cfg.epsilons:
            k = katok_entropy(mu, e, cfg.deltas, cfg.katok_nlist, cfg.metric(), cfg.katok_samples, cfg.seed)
            recs += [EstimatorRecord("katok", measure_name(mu), e, d, v) for d, v in zip(k.deltas, k.rates)]
    return _records_out("katok", recs)


def cmd_bk(cfg):
    recs = []
    for mu in cfg.measure_family().members:
        for b in bk_profile(mu, cfg.epsilons, cfg.bk_n, cfg.bk_samples, cfg.seed, cfg.metric(), cfg.jobs):
            recs.append(EstimatorRecord("bk", measure_name(mu), b.eps, b.n, b.mean, b.stderr))
    return _records_out("bk", recs)


def cmd_ps(cfg):
    recs = []
    for mu in cfg.measure_family().members:
        for e in cfg.epsilons:
            r = ps_entropy(mu, e, cfg.ps_r, cfg.ps_nlist, metric=cfg.metric(), budget=cfg.budget,
                           seed=cfg.seed)
            recs.append(EstimatorRecord("ps", measure_name(mu), e, cfg.ps_r, r.rate))
    return _records_out("ps", recs)


def cmd_vp(cfg):
    rep = run_vp_check(cfg)
    return rep.csv_files(), rep.as_dict(), rep.exit_code


def cmd_example(cfg):
    rep = reproduce_example(cfg)
    files = rep.csv_files()
    files["headline.txt"] = headline_table(rep)
    return files, rep.as_dict(), rep.exit_code


COMMANDS = {"mdim": cmd_mdim, "mrid": cmd_mrid, "rdist": cmd_rdist, "katok": cmd_katok,
            "bk": cmd_bk, "ps": cmd_ps, "vp-check": cmd_vp, "example": cmd_example}
PRIMARY = {"mdim": "mdim.csv", "mrid": "mrid.csv", "rdist": "rd.csv", "katok": "katok.csv",
           "bk": "bk.csv", "ps": "ps.csv", "vp-check": "verdicts.csv", "example": "headline.txt"}


def emit(command, files, js, fmt, out_dir, stdout):
    js_text = json.dumps(js, indent=2, sort_keys=True) + "\n"
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for name, text in sorted(files.items()):
            with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(js_text)
    else:
        stdout.write(js_text if fmt == "json" else files[PRIMARY[command]])


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(stderr)
            return 2
        cfg = resolve_config(args)
    except ConfigError as exc:
        stderr.write(f"{exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 2
    try:
        files, js, code = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return 2
    except (MdimError, ValueError) as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    emit(args.command, files, js, args.format, args.out, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
