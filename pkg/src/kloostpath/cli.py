"""Command-line front end: ``kloostpath eval | path | experiment``.

Every flag can also come from a JSON or TOML file passed with ``--config``;
flags given on the command line win.  Experiments write a JSON report and
exit with status 1 when one of their checks fails (the report is written
either way).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import KloostpathError, ModulusError
from .export import FORMATS, export_path
from .klooster import (kloosterman_closed, kloosterman_naive, summand_census,
                       multiplicity_check)
from .modring import PrimePowerModulus
from .moments import (MomentSpec, ShiftMultiset, empirical_moment,
                      equidist_stat, sum_of_products)
from .paths import path_vertices, rearranged_vertices
from .randseries import (SeriesSpec, glued_second_moment, limit_second_moment,
                         mu_u_second_moment, sample_glued)
from .reports import Report, decreasing

NAIVE_LIMIT = 10**8
PATH_LIMIT = 10**8
EXPERIMENTS = ("equidist", "moments", "sumprod", "census", "series-compare")


@dataclass
class RunConfig:
    command: str = "eval"
    kind: str | None = None
    p: int = 3
    n: int = 2
    a: int = 1
    b: int = 1
    a1: int = 1
    b0: int = 1
    t: list[float] = field(default_factory=lambda: [0.5])
    H: int = 1000
    seed: int = 0
    out: str | None = None
    format: str | None = None
    variant: str = "standard"
    method: str = "both"
    n_grid: list[int] = field(default_factory=list)
    p_grid: list[int] = field(default_factory=list)
    mu: dict[str, int] = field(default_factory=lambda: {"0": 2})
    samples: int = 20000
    decimate: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise KloostpathError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, s: str) -> "RunConfig":
        return cls.from_dict(json.loads(s))


def load_config_file(path: str) -> dict:
    text = Path(path).read_bytes()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib
        d = tomllib.loads(text.decode())
    else:
        d = json.loads(text)
    return {k.replace("-", "_"): v for k, v in d.items()}


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _mu(s: str) -> dict[str, int]:
    out = {}
    for item in s.split(","):
        tau, k = item.split(":")
        out[str(int(tau))] = int(k)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or TOML file with default values for any flag")
    common.add_argument("-p", type=int)
    common.add_argument("-n", type=int)
    common.add_argument("-a", type=int)
    common.add_argument("-b", type=int)
    common.add_argument("--a1", type=int)
    common.add_argument("--b0", type=int)
    common.add_argument("--t", type=_floats, help="comma-separated times in [0, 1]")
    common.add_argument("--H", type=int, help="series truncation")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=FORMATS + ("text",))

    parser = argparse.ArgumentParser(prog="kloostpath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate Kl_{p^n}(a, b)")
    ev.add_argument("--method", choices=("both", "naive", "closed"))

    pa = sub.add_parser("path", parents=[common], help="write a Kloosterman path")
    pa.add_argument("--variant", choices=("standard", "rearranged"))
    pa.add_argument("--svg", action="store_const", const="svg", dest="format")
    pa.add_argument("--no-decimate", action="store_false", dest="decimate", default=None)

    ex = sub.add_parser("experiment", parents=[common], help="run an experiment and emit a JSON report")
    ex.add_argument("kind", choices=EXPERIMENTS)
    ex.add_argument("--n-grid", type=_ints)
    ex.add_argument("--p-grid", type=_ints)
    ex.add_argument("--mu", type=_mu, help="shift multiset, e.g. 0:2,3:1")
    ex.add_argument("--samples", type=int, help="Monte Carlo sample count")
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if ns.config:
        values.update(load_config_file(ns.config))
    for k, v in vars(ns).items():
        if k == "config" or v is None:
            continue
        values[k] = v
    values.setdefault("command", ns.command)
    if isinstance(values.get("t"), (int, float)):
        values["t"] = [float(values["t"])]
    return RunConfig.from_dict(values)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("KLOOSTPATH_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def ordered_map(fn: Callable, items: Sequence) -> list:
    """Map over ``items`` on a capped thread pool; results keep input order."""
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit(data: bytes | str, out: str | None) -> None:
    if isinstance(data, str):
        data = data.encode()
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


# -- commands -----------------------------------------------------------------

def cmd_eval(cfg: RunConfig) -> int:
    m = PrimePowerModulus(cfg.p, cfg.n)
    res: dict = {"p": m.p, "n": m.n, "a": cfg.a, "b": cfg.b}
    if cfg.method in ("both", "naive"):
        if m.q <= NAIVE_LIMIT:
            res["naive"] = kloosterman_naive(m, cfg.a, cfg.b).real
        else:
            res["naive"] = None
    if cfg.method in ("both", "closed") and m.n >= 2:
        res["closed"] = kloosterman_closed(m, cfg.a, cfg.b)
    status = 0
    if res.get("naive") is not None and res.get("closed") is not None:
        res["difference"] = abs(res["naive"] - res["closed"])
        if res["difference"] > 1e-6:
            status = 1
    if cfg.format == "json":
        _emit(json.dumps(res, sort_keys=True) + "\n", cfg.out)
    else:
        lines = [f"Kl_{{{m.p}^{m.n}}}({cfg.a}, {cfg.b})"]
        for key in ("naive", "closed", "difference"):
            if key in res:
                val = res[key]
                lines.append(f"  {key:<10} {'skipped (modulus too large)' if val is None else f'{val:.12g}'}")
        _emit("\n".join(lines) + "\n", cfg.out)
    if status:
        print(f"error: naive and closed forms differ by {res['difference']:.3g}", file=sys.stderr)
    return status


def cmd_path(cfg: RunConfig) -> int:
    m = PrimePowerModulus(cfg.p, cfg.n)
    if m.q > PATH_LIMIT:
        raise ModulusError(f"path export needs p^n <= {PATH_LIMIT}")
    if cfg.variant == "rearranged":
        path = rearranged_vertices(m, cfg.a, cfg.b)
    else:
        path = path_vertices(m, cfg.a, cfg.b)
    fmt = cfg.format or "csv"
    if fmt == "text":
        fmt = "csv"
    kw = {"decimate": cfg.decimate} if fmt == "svg" else {}
    _emit(export_path(path, fmt, **kw), cfg.out)
    return 0


def _exp_equidist(cfg: RunConfig, rep: Report) -> None:
    grid = cfg.n_grid or [8, 10, 12]
    results = ordered_map(lambda n: equidist_stat(cfg.p, n, cfg.a1, cfg.b0), grid)
    rep.n_grid = grid
    rep.series = [{"n": n, "ks": r.ks, "count": r.count, "degenerate": r.degenerate}
                  for n, r in zip(grid, results)]
    ks = [r.ks for r in results]
    rep.value = ks[-1]
    rep.check("ks decreasing (one inversion of at most 20% allowed)", decreasing(ks, inversions=1),
              ", ".join(f"{v:.3g}" for v in ks))
    if any(r.degenerate for r in results):
        rep.check("ensemble not degenerate", False, "(a1 b0 / p) = -1: every value is zero")


def _exp_moments(cfg: RunConfig, rep: Report) -> None:
    grid = cfg.n_grid or [6, 8, 10, 12]
    t = cfg.t[0]
    limit = limit_second_moment(t, cfg.a1, cfg.b0, cfg.p)

    def one(n):
        spec = MomentSpec(PrimePowerModulus(cfg.p, n), [t], [1], [1], cfg.a1, cfg.b0)
        return empirical_moment(spec)

    vals = ordered_map(one, grid)
    gaps = [abs(v - limit) for v in vals]
    rep.n_grid = grid
    rep.series = [{"n": n, "moment": v, "gap": g} for n, v, g in zip(grid, vals, gaps)]
    rep.value = vals[-1]
    rep.extra["limit"] = limit
    rep.check("gap to the limit decreasing (one inversion of at most 20% allowed)",
              decreasing(gaps, inversions=1), ", ".join(f"{g:.3g}" for g in gaps))


def _exp_sumprod(cfg: RunConfig, rep: Report) -> None:
    grid = cfg.n_grid or [6, 8, 10, 12]
    mu_map = {int(k): int(v) for k, v in cfg.mu.items()}

    def one(n):
        mu = ShiftMultiset(PrimePowerModulus(cfg.p, n), mu_map)
        return sum_of_products(mu, cfg.a1, cfg.b0), mu.main_term()

    res = ordered_map(one, grid)
    main = res[0][1]
    gaps = [abs(v - main) for v, _ in res]
    rep.n_grid = grid
    rep.series = [{"n": n, "value": v, "gap": g} for n, (v, _), g in zip(grid, res, gaps)]
    rep.value = res[-1][0]
    rep.extra["main_term"] = main
    rep.check("gap to the main term non-increasing", decreasing(gaps, atol=1e-12),
              ", ".join(f"{g:.3g}" for g in gaps))


def _exp_census(cfg: RunConfig, rep: Report) -> None:
    m = PrimePowerModulus(cfg.p, cfg.n)
    c = summand_census(m, cfg.a, cfg.b)
    rep.value = c.distinct
    rep.series = [{"u": u, "count": k} for u, k in sorted(c.counts.items())]
    rep.extra["distinct"] = c.distinct
    rep.check("counts sum to phi(p^n)", sum(c.counts.values()) == m.phi)
    kappas = [k for k in range(1, m.n) if 2 * k < m.n]
    for k in kappas:
        r = multiplicity_check(m, k, refined=True)
        rep.check(f"multiplicity 2p^{k} on the square classes (kappa={k})", r.passed,
                  f"{r.checked} values checked")


def _exp_series_compare(cfg: RunConfig, rep: Report) -> None:
    grid = cfg.p_grid or [11, 31, 101]
    t = cfg.t[0]
    target = mu_u_second_moment(t)

    def one(p):
        rng = np.random.default_rng([cfg.seed, p])
        _, vals = sample_glued(p, cfg.b0, t, rng, H=cfg.H, size=cfg.samples)
        x = np.abs(vals) ** 2
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))), glued_second_moment(p, cfg.b0, t)

    res = ordered_map(one, grid)
    rep.n_grid = grid
    rep.extra["target"] = target
    rep.series = [{"p": p, "mc": mc, "sigma": s, "mc_gap": abs(mc - target), "exact": ex,
                   "exact_gap": abs(ex - target)} for p, (mc, s, ex) in zip(grid, res)]
    ok = all(abs(b[0] - target) <= abs(a[0] - target) + 3 * math.hypot(a[1], b[1])
             for a, b in zip(res, res[1:]))
    rep.value = res[-1][0]
    rep.check("Monte Carlo gap decreasing within 3 sigma", ok,
              ", ".join(f"{abs(mc - target):.3g}+-{s:.2g}" for mc, s, _ in res))
    rep.check("exact gap decreasing", decreasing([abs(ex - target) for *_, ex in res]))


_EXPERIMENTS = {
    "equidist": _exp_equidist,
    "moments": _exp_moments,
    "sumprod": _exp_sumprod,
    "census": _exp_census,
    "series-compare": _exp_series_compare,
}


def run_experiment(cfg: RunConfig) -> Report:
    rep = Report(spec=json.loads(cfg.to_json()))
    _EXPERIMENTS[cfg.kind](cfg, rep)
    return rep


def cmd_experiment(cfg: RunConfig) -> int:
    rep = run_experiment(cfg)
    _emit(rep.to_json(), cfg.out)
    for c in rep.checks:
        if not c.passed:
            print(f"FAILED: {c.name} ({c.detail})", file=sys.stderr)
    return 0 if rep.passed else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        if cfg.command == "eval":
            return cmd_eval(cfg)
        if cfg.command == "path":
            return cmd_path(cfg)
        return cmd_experiment(cfg)
    except (KloostpathError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
