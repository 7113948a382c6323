"""Command-line entry point.

Exit codes: 0 success (or all checks passed), 1 a verification failed,
2 usage error.  Replicate i of any command uses RngStream(seed, i).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from . import bridge as br
from . import mappings as mp
from . import partitions as pt
from . import pointproc as pp
from .errors import ParameterError
from .parallel import replicate_map, resolve_threads
from .randkit.rng import RngStream
from .randkit.samplers import BROWNIAN, StableParams, gem_lengths, sample_stable, uniform_stick_breaking
from .statlab import reports_to_csv, reports_to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SAMPLE_WIDTH = 8


@dataclass
class RunConfig:
    command: str
    seed: int = 1
    n: int = 10
    reps: int = 1
    grid: int = 4096
    alpha: float = 0.5
    xi: float = 1.0
    theta: float = 0.5
    epsilon: str = "conditional"
    format: str = "csv"
    out: str | None = None
    suite: str | None = None
    threads: int | None = None
    dist: str | None = None
    what: str | None = None
    mode: str = "cycles-first"
    quick: bool = False

    def validate(self):
        for name in ("n", "reps", "grid"):
            if getattr(self, name) < 1:
                raise ParameterError(f"--{name} must be positive")
        for name in ("xi", "theta"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"--{name} must be positive")
        if not 0 < self.alpha < 1:
            raise ParameterError("--alpha must lie in (0, 1)")
        if self.seed < 0:
            raise ParameterError("--seed must be nonnegative")
        if self.threads is not None:
            resolve_threads(self.threads)
        return self


def _params(cfg: RunConfig) -> StableParams:
    # the Brownian constant c = sqrt 2 is kept for every alpha
    return StableParams(cfg.alpha, BROWNIAN.c)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json(cfg: RunConfig, payload: dict) -> str:
    return json.dumps({"config": asdict(cfg), **payload}, indent=1, default=_default) + "\n"


def _default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _tabular(cfg: RunConfig, header, rows, extra: dict | None = None) -> str:
    if cfg.format == "json":
        return _json(cfg, {"columns": list(header), "rows": [list(r) for r in rows], **(extra or {})})
    return _csv(header, rows)


def _padded(values, width=SAMPLE_WIDTH):
    v = list(values[:width])
    return v + [0.0] * (width - len(v))


def cmd_sample(cfg: RunConfig) -> int:
    p = _params(cfg)
    dist = cfg.dist or "gem"
    if dist == "gem":
        def row(g):
            seq = gem_lengths(cfg.theta, rng=g)
            return _padded(seq.values) + [1.0 - sum(seq.values[:SAMPLE_WIDTH])]
        header = [f"w{j + 1}" for j in range(SAMPLE_WIDTH)] + ["rest"]
    elif dist == "stick":
        def row(g):
            v = uniform_stick_breaking(rng=g)
            return _padded(v) + [1.0 - sum(v[:SAMPLE_WIDTH])]
        header = [f"u{j + 1}" for j in range(SAMPLE_WIDTH)] + ["rest"]
    elif dist == "stable":
        def row(g):
            x = float(sample_stable(p, 1.0, g))
            return [x, math.exp(-cfg.xi * x)]
        header = ["x", "exp_neg_xi_x"]
    elif dist == "points":
        sets = replicate_map(lambda g: pp.construct_points_D(cfg.xi, g, p), cfg.reps, cfg.seed, cfg.threads)
        rows = [(i, x, y, j) for i, s in enumerate(sets) for j, (x, y) in enumerate(zip(s.x, s.y))]
        _emit(cfg, _tabular(cfg, ["replicate", "x", "y", "order_index"], rows))
        return EXIT_OK
    else:
        raise ParameterError(f"unknown --dist {dist!r}; choose gem, stick, stable or points")
    vals = replicate_map(row, cfg.reps, cfg.seed, cfg.threads)
    rows = [[i] + list(v) for i, v in enumerate(vals)]
    _emit(cfg, _tabular(cfg, ["replicate"] + header, rows))
    return EXIT_OK


def cmd_walk(cfg: RunConfig) -> int:
    mode = mp.OrderingMode.parse(cfg.mode)
    g = RngStream(cfg.seed, 0).generator
    m = mp.sample_uniform_mapping(cfg.n, g)
    d = mp.analyze_digraph(m)
    w = mp.build_mapping_walk(d, m, mode)
    stats = mp.scaled_walk_statistics(w, d, mode)
    levels = w.levels
    if cfg.format == "json":
        _emit(cfg, _json(cfg, {"mapping": list(m.image), "steps": w.steps, "levels": levels,
                               "component_boundaries": list(w.component_boundaries),
                               "components": [list(c) for c in stats.components],
                               "scaled_max": stats.scaled_max}))
    else:
        rows = [(i, float(i) / (2 * cfg.n), int(levels[i]), float(levels[i]) / math.sqrt(cfg.n))
                for i in range(levels.size)]
        _emit(cfg, _csv(["index", "t", "level", "scaled_level"], rows))
    return EXIT_OK


def cmd_bridge(cfg: RunConfig) -> int:
    p = _params(cfg)
    what = cfg.what or "path"
    g = RngStream(cfg.seed, 0).generator
    if what in ("path", "pseudo-bridge", "motion"):
        if what == "path":
            x = br.simulate_bridge(cfg.grid, g)
        elif what == "motion":
            x = br.simulate_motion(cfg.grid, g)
        else:
            x = br.simulate_pseudo_bridge(cfg.grid + cfg.grid % 2, g, p=p)
        if cfg.format == "json":
            prof = br.local_time_profile(x, p=p)
            _emit(cfg, _json(cfg, {"t": x.times, "value": x.values, "local_time": prof.L}))
        else:
            _emit(cfg, br.path_to_csv(x))
        return EXIT_OK
    if what in ("d-partition", "t-partition"):
        x = br.simulate_bridge(cfg.grid, g)
        prof = br.local_time_profile(x, p=p)
        frags = br.d_partition(x, g, prof) if what == "d-partition" else br.t_partition(x, prof, g)
        if cfg.format == "json":
            _emit(cfg, _json(cfg, json.loads(br.fragments_to_json(frags, {"local_time_total": prof.total}))))
        else:
            rows = [(j, f.G, f.D, f.length, f.local_time) for j, f in enumerate(frags)]
            _emit(cfg, _csv(["index", "G", "D", "length", "local_time"], rows))
        return EXIT_OK
    if what == "summary":
        def row(gen):
            x = br.simulate_bridge(cfg.grid, gen)
            prof = br.local_time_profile(x, p=p)
            d = br.d_partition(x, gen, prof)
            t = br.t_partition(x, prof, gen)
            return [prof.total, d[0].length, t[0].D, br.tau_fraction(prof, 0.5),
                    max(f.length for f in d), max(f.length for f in t)]
        vals = replicate_map(row, cfg.reps, cfg.seed, cfg.threads)
        header = ["replicate", "L1", "lambda_D1", "T1", "tau_half", "top_D", "top_T"]
        _emit(cfg, _tabular(cfg, header, [[i] + v for i, v in enumerate(vals)]))
        return EXIT_OK
    raise ParameterError("--what must be path, motion, pseudo-bridge, d-partition, t-partition or summary")


def cmd_partition(cfg: RunConfig) -> int:
    rows = []
    for i in range(cfg.reps):
        g = RngStream(cfg.seed, i).generator
        lengths = gem_lengths(cfg.theta, rng=g).values
        top = np.sort(lengths)[::-1][:cfg.n]
        ip = pt.make_exchangeable(np.append(top, 1.0 - top.sum()) if top.sum() < 1 else top, g)
        d = pt.discrete_d_partition(ip, g)
        t = pt.discrete_t_partition(ip, g)
        for kind, cut in (("D", d), ("T", t)):
            rows.append((i, kind, cut.J, " ".join("{" + ",".join(map(str, b)) + "}" for b in cut.ordered_blocks)))
    if cfg.format == "json":
        _emit(cfg, _json(cfg, {"rows": [dict(zip(("replicate", "kind", "J", "blocks"), r)) for r in rows]}))
    else:
        _emit(cfg, _csv(["replicate", "kind", "J", "blocks"], rows))
    return EXIT_OK


def _frac_table(d: dict) -> dict:
    return {str(k): f"{v.numerator}/{v.denominator}" for k, v in sorted(d.items())}


def cmd_enumerate(cfg: RunConfig) -> int:
    what = cfg.what or "mapping-cycles"
    n = cfg.n
    if what in ("mapping-cycles", "mapping-tables"):
        if n > mp.MAX_ENUMERATE_N:
            raise ParameterError(f"mapping enumeration is limited to n <= {mp.MAX_ENUMERATE_N}")
        t = mp.enumerate_exact(n)
        payload = {"law": _frac_table(t.num_cycles)} if what == "mapping-cycles" else json.loads(t.to_json())
    elif what in ("stirling", "jd", "jt", "partition-blocks"):
        if n > 8:
            raise ParameterError("partition enumeration is limited to n <= 8")
        if what == "stirling":
            payload = {"law": _frac_table(pt.stirling_cycle_dist(n).probabilities)}
        elif what == "jt":
            payload = {"law": _frac_table(pt.jt_law(n).probabilities)}
        elif what == "jd":
            g = RngStream(cfg.seed, 0).generator
            x = [Fraction(int(v)) for v in g.integers(1, 10 ** 6, size=n)]
            s = sum(x)
            lengths = sorted((v / s for v in x), reverse=True)
            payload = {"lengths": [str(v) for v in lengths], "law": _frac_table(pt.jd_law(lengths).probabilities)}
        else:
            table = {"".join("{" + ",".join(map(str, b)) + "}" for b in blocks): pt.pt_form(blocks, n)
                     for blocks in pt.set_partitions(n)}
            payload = {"law": {k: f"{v.numerator}/{v.denominator}" for k, v in table.items()}}
    else:
        raise ParameterError("--what must be mapping-cycles, mapping-tables, stirling, jd, jt or partition-blocks")
    _emit(cfg, _json(cfg, payload))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from . import suites
    name = cfg.suite or "all"
    if name != "all" and name not in suites.SUITES:
        raise ParameterError(f"unknown suite {name!r}; choose from {', '.join(list(suites.SUITES) + ['all'])}")
    rows = suites.run_suite(name, seed=cfg.seed, quick=cfg.quick, threads=cfg.threads)
    for suite, r in rows:
        print(f"{suite}: {r.line()}")
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(reports_to_json([r for _, r in rows], asdict(cfg)))
        with open(os.path.join(cfg.out, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(reports_to_csv(rows))
    return EXIT_OK if all(r.passed for _, r in rows) else EXIT_FAIL


COMMANDS = {"sample": cmd_sample, "walk": cmd_walk, "bridge": cmd_bridge, "partition": cmd_partition,
            "enumerate": cmd_enumerate, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--n", type=int, default=10, help="mapping size or number of lengths")
    common.add_argument("--reps", type=int, default=1)
    common.add_argument("--grid", type=int, default=4096, help="bridge grid size m")
    common.add_argument("--alpha", type=float, default=0.5)
    common.add_argument("--xi", type=float, default=1.0)
    common.add_argument("--theta", type=float, default=0.5)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: $BRIDGECUT_THREADS or 1)")
    parser = argparse.ArgumentParser(prog="bridgecut", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bridgecut {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sample", parents=[common], help="raw samples: GEM, stick-breaking, stable, point sets")
    s.add_argument("--dist", choices=("gem", "stick", "stable", "points"), default="gem")
    w = sub.add_parser("walk", parents=[common], help="walk encoding of a uniform random mapping")
    w.add_argument("--mode", choices=("cycles-first", "basins-first"), default="cycles-first")
    b = sub.add_parser("bridge", parents=[common], help="bridge paths, partitions and summaries")
    b.add_argument("--what", default="path",
                   choices=("path", "motion", "pseudo-bridge", "d-partition", "t-partition", "summary"))
    sub.add_parser("partition", parents=[common], help="discrete D- and T-cuts of GEM lengths")
    e = sub.add_parser("enumerate", parents=[common], help="exact rational tables")
    e.add_argument("--what", default="mapping-cycles",
                   choices=("mapping-cycles", "mapping-tables", "stirling", "jd", "jt", "partition-blocks"))
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", default="all")
    v.add_argument("--quick", action="store_true", help="reduced sample sizes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    fields = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    if ns.command == "enumerate" and ns.format is None:
        fields["format"] = "json"
    try:
        cfg = RunConfig(**fields).validate()
        return COMMANDS[cfg.command](cfg)
    except ParameterError as exc:
        print(f"bridgecut: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bridgecut: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
