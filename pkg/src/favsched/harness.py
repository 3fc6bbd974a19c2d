"""Experiment runner: random instances, guarantee formulas, runs, sweeps and reports."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .adversaries import AdversaryError, build_adversary, small_jobs_prefix
from .algorithms import (
    ConfigError,
    S_STAR,
    TieBreak,
    algorithm_for,
    assign_u_rho,
    make_algorithm,
    parse_rescale_id,
    rescale_instance,
    run,
)
from .model import Instance, Job, ModelError, Number, SymmetricInstance, format_number, load_instance, parse_number
from .oracle import OracleBudgetExceeded, exact_opt, lb_general, ratio

CSV_COLUMNS = (
    "algorithm", "source", "param", "value", "rep", "m", "f", "s", "n",
    "online", "opt", "ratio", "bound", "bound_ok", "oracle",
)
ORACLE_MODES = ("auto", "exact", "witness", "lb-only")
SWEEP_PARAMS = ("s", "m", "f", "c", "gamma")


# ---------------------------------------------------------------- guarantees


def _q(x: Number) -> Number:
    return Fraction(x) if not isinstance(x, float) else x


def greedy_bound(m: int, f: int) -> Fraction:
    return Fraction(m + f - 1, f)


def greedy_symmetric_bound(f: int, s: Number) -> Number:
    s = _q(s)
    c = 2 - Fraction(1, f)
    return min(1 + c * s * s / (s + 1), s + c * s / (s + 1), 3 - Fraction(1, f))


def greedy_favorite_bound(f: int, s: Number) -> Number:
    return 2 - Fraction(1, f) + 1 / _q(s)


def ggf_bound(f: int, s: Number, s_star: float = S_STAR) -> Number:
    return greedy_symmetric_bound(f, s) if s <= s_star else greedy_favorite_bound(f, s)


def algorithm_bound(algo_id: str, instance: Instance, gamma: float = 2.0) -> Number | float | None:
    """Proven competitive ratio of ``algo_id`` for the model the instance belongs to.

    ``None`` when no guarantee applies (GreedyFavorite outside the symmetric model).
    """
    sym = instance.symmetric
    m, f = instance.m, instance.f
    if algo_id.startswith("rescale:"):
        c, inner = parse_rescale_id(algo_id)
        flat = rescale_instance(instance, c)
        inner_bound = algorithm_bound(inner, Instance(flat.m, flat.jobs), gamma)
        return None if inner_bound is None else _q(c) * inner_bound
    if algo_id == "greedy":
        return greedy_symmetric_bound(sym.f, sym.s) if sym else greedy_bound(m, f)
    if algo_id == "greedy-favorite":
        return greedy_favorite_bound(sym.f, sym.s) if sym else None
    if algo_id == "ggf":
        return ggf_bound(sym.f, sym.s) if sym else greedy_bound(m, f)
    if algo_id == "assign-u":
        return assign_u_rho(m, f, gamma)
    if algo_id == "assign-u-doubling":
        return 4 * assign_u_rho(m, f, gamma)
    raise ConfigError(f"unknown algorithm id {algo_id!r}")


# ---------------------------------------------------------------- random instances


@dataclass(frozen=True)
class RandomSpec:
    """Recipe for random instances.

    ``pmin`` is ``("uniform", lo, hi)`` or ``("discrete", v1, v2, ...)``.
    Uniform draws use a grid of ``1/resolution`` so instances stay exact.
    Favorite sets have size ``f`` half the time, otherwise a uniform size in
    ``f..m``.  Non-favorite times are ``pmin`` times a multiplier drawn from
    ``(inflation[0], inflation[1]]``.  With ``symmetric`` set, ``m = 2f`` and
    every job favors one whole group with non-favorite time ``s * pmin``.
    """

    m: int = 4
    f: int = 1
    n: int = 8
    pmin: tuple = ("uniform", 1, 10)
    inflation: tuple[Number, Number] = (1, 4)
    symmetric: bool = False
    s: Number | None = None
    resolution: int = 100

    def __post_init__(self) -> None:
        if self.symmetric:
            if self.s is None or self.s < 1:
                raise ConfigError("symmetric random instances need s >= 1")
        elif not 1 <= self.f <= self.m:
            raise ConfigError(f"need 1 <= f <= m (m={self.m}, f={self.f})")
        if self.n < 0:
            raise ConfigError("n must be non-negative")
        lo, hi = self.inflation
        if not 1 <= lo < hi:
            raise ConfigError("inflation range must satisfy 1 <= lo < hi")
        if self.pmin[0] not in ("uniform", "discrete"):
            raise ConfigError(f"unknown pmin distribution {self.pmin[0]!r}")

    def _draw_p(self, rng: random.Random) -> Number:
        kind, *args = self.pmin
        if kind == "discrete":
            return parse_number(rng.choice(args))
        lo, hi = (Fraction(parse_number(a)) for a in args)
        k = rng.randint(int(lo * self.resolution), int(hi * self.resolution))
        return Fraction(max(k, 1), self.resolution)

    def _draw_multiplier(self, rng: random.Random) -> Fraction:
        lo, hi = (Fraction(parse_number(x)) for x in self.inflation)
        steps = int((hi - lo) * self.resolution)
        return lo + Fraction(rng.randint(1, steps), self.resolution)

    def generate(self, rng: random.Random) -> Instance:
        if self.symmetric:
            sym = SymmetricInstance(
                self.f, parse_number(self.s),
                tuple((self._draw_p(rng), rng.randint(1, 2)) for _ in range(self.n)),
            )
            return sym.to_instance()
        jobs = []
        machines = list(range(1, self.m + 1))
        for _ in range(self.n):
            p = self._draw_p(rng)
            size = self.f if rng.random() < 0.5 else rng.randint(self.f, self.m)
            fav = frozenset(rng.sample(machines, size))
            jobs.append(Job(p, fav, {i: p * self._draw_multiplier(rng) for i in machines if i not in fav}))
        return Instance(self.m, tuple(jobs))


def clustered_instance(rng: random.Random, m: int, n: int, c: Number, resolution: int = 100) -> Instance:
    """Rows where some machines sit within factor ``c`` of the minimum and the rest well above it."""
    c = Fraction(parse_number(c))
    fine = 10 * resolution
    top = int((c - 1) * fine)  # largest near-minimum offset on the fine grid
    jobs = []
    for _ in range(n):
        p = Fraction(rng.randint(resolution, 10 * resolution), resolution)
        fav = frozenset(rng.sample(range(1, m + 1), rng.randint(1, m)))
        others = {}
        for i in range(1, m + 1):
            if i in fav:
                continue
            if top and rng.random() < 0.6:
                others[i] = p * (1 + Fraction(rng.randint(1, top), fine))
            else:
                others[i] = p * (c + Fraction(rng.randint(1, 3 * resolution), resolution))
        jobs.append(Job(p, fav, others))
    return Instance(m, tuple(jobs))


# ---------------------------------------------------------------- experiments


@dataclass
class ExperimentSpec:
    algorithms: tuple[str, ...] = ("greedy",)
    source: str = "random"  # "file" | "gen" | "random"
    instance_path: str | None = None
    gen_id: str | None = None
    gen_params: dict[str, Any] = field(default_factory=dict)
    random_spec: RandomSpec = field(default_factory=RandomSpec)
    oracle: str = "auto"
    reps: int = 1
    seed: int = 0
    fmt: str = "csv"
    gamma: float = 2.0
    tie_break: str = TieBreak.BAD_SMALLEST.value
    c: Number | None = None

    def __post_init__(self) -> None:
        if self.source not in ("file", "gen", "random"):
            raise ConfigError(f"unknown instance source {self.source!r}")
        if self.oracle not in ORACLE_MODES:
            raise ConfigError(f"unknown oracle mode {self.oracle!r}")
        if self.source == "file" and not self.instance_path:
            raise ConfigError("file source needs an instance path")
        if self.source == "gen" and not self.gen_id:
            raise ConfigError("generator source needs a generator id")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        make_algorithm("greedy", 1, gamma=self.gamma, tie_break=self.tie_break)
        if self.c is not None and parse_number(self.c) < 1:
            raise ConfigError("c must be at least 1")

    def algorithm_ids(self) -> list[str]:
        if self.c is None:
            return list(self.algorithms)
        c = format_number(parse_number(self.c))
        return [a if a.startswith("rescale:") else f"rescale:{c}:{a}" for a in self.algorithms]


def _source_label(spec: ExperimentSpec) -> str:
    if spec.source == "file":
        return f"file:{spec.instance_path}"
    if spec.source == "gen":
        return f"gen:{spec.gen_id}"
    return "random"


def _fmt(value) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return value
    if isinstance(value, Fraction):
        return format_number(value)
    return value


def _row(spec, algo_id, rep, instance, online, opt, oracle_label, bound, upper_only=False) -> dict:
    r = None if opt is None else ratio(online, opt)
    if r is None or bound is None:
        ok = None
    else:
        ok = float(r) <= float(bound) + 1e-9
        if upper_only and not ok:
            ok = None  # ratio is only an upper estimate, so a miss is inconclusive
    sym = instance.symmetric
    return {
        "algorithm": algo_id,
        "source": _source_label(spec),
        "param": "",
        "value": "",
        "rep": rep,
        "m": instance.m,
        "f": sym.f if sym else instance.f,
        "s": _fmt(sym.s) if sym else "",
        "n": instance.n,
        "online": _fmt(online),
        "opt": _fmt(opt),
        "ratio": "" if r is None else float(r),
        "bound": "" if bound is None else float(bound),
        "bound_ok": "" if ok is None else ok,
        "oracle": oracle_label,
    }


def _opt_for(instance: Instance, mode: str) -> tuple[Number | None, str, bool]:
    """``(opt, label, upper_only)``; exact failures are reported, not raised."""
    if mode == "lb-only":
        return (lb_general(instance) if instance.n else 0), "lb-only", True
    try:
        return exact_opt(instance).opt, "exact", False
    except OracleBudgetExceeded:
        return None, "exact-failed", False


def _algorithm_factory(algo_id: str, spec: ExperimentSpec):
    def factory(m: int, f: int, s):
        if algo_id == "assign-u":
            raise ConfigError("assign-u needs a known optimum; adversaries cannot supply one up front")
        return make_algorithm(
            algo_id, m, f=f, s=s, gamma=spec.gamma, tie_break=spec.tie_break, general_fallback=True,
        )
    return factory


def cli_run(spec: ExperimentSpec) -> list[dict]:
    """One report row per (algorithm, instance) pair."""
    rows: list[dict] = []
    for algo_id in spec.algorithm_ids():
        for rep in range(spec.reps):
            if spec.source == "gen":
                rows.append(_gen_row(spec, algo_id, rep))
                continue
            instance = _instance_for(spec, rep)
            rows.append(_instance_row(spec, algo_id, rep, instance))
    return sort_rows(rows)


def _instance_for(spec: ExperimentSpec, rep: int) -> Instance:
    if spec.source == "file":
        return load_instance(spec.instance_path)
    return spec.random_spec.generate(random.Random(spec.seed * 1_000_003 + rep))


def _instance_row(spec: ExperimentSpec, algo_id: str, rep: int, instance: Instance) -> dict:
    mode = "exact" if spec.oracle in ("auto", "witness") else spec.oracle
    opt, label, upper = _opt_for(instance, mode)
    kwargs: dict[str, Any] = {"gamma": spec.gamma, "tie_break": spec.tie_break}
    if algo_id in ("ggf",) or algo_id.endswith(":ggf"):
        kwargs["general_fallback"] = True
    if algo_id == "assign-u" or algo_id.endswith(":assign-u"):
        if opt is None or upper or opt == 0:
            return _row(spec, algo_id, rep, instance, "", None, label + " (assign-u needs OPT)", None)
        kwargs["opt_estimate"] = opt
    if instance.n == 0:
        online = 0
    else:
        online = run(algorithm_for(algo_id, instance, **kwargs), instance).makespan
    bound = algorithm_bound(algo_id, instance, spec.gamma)
    return _row(spec, algo_id, rep, instance, online, opt, label, bound, upper)


def _gen_row(spec: ExperimentSpec, algo_id: str, rep: int) -> dict:
    params = dict(spec.gen_params)
    if spec.gen_id == "small-jobs":
        f, s = params["f"], parse_number(params["s"])
        jobs = small_jobs_prefix(f, params["t"], params["epsilon"], s)
        instance = SymmetricInstance(f, s, tuple(jobs)).to_instance()
        return _instance_row(spec, algo_id, rep, instance)
    report = build_adversary(spec.gen_id, _algorithm_factory(algo_id, spec), **params)
    instance = report.instance
    label, opt, upper = "witness", report.opt, False
    if spec.oracle == "exact":
        opt, label, upper = _opt_for(instance, "exact")
    elif spec.oracle == "lb-only":
        opt, label, upper = _opt_for(instance, "lb-only")
    row = _row(spec, algo_id, rep, instance, report.online_cost, opt, label,
               algorithm_bound(algo_id, instance, spec.gamma), upper)
    return row


def sort_rows(rows: Iterable[dict]) -> list[dict]:
    def key(r):
        value = r["value"]
        try:
            numeric = float(Fraction(str(value))) if value != "" else 0.0
        except (ValueError, ZeroDivisionError):
            numeric = 0.0
        return (r["param"], numeric, str(value), r["algorithm"], r["source"], r["rep"])
    return sorted(rows, key=key)


def _with_param(spec: ExperimentSpec, param: str, value) -> ExperimentSpec:
    if param == "gamma":
        return replace(spec, gamma=float(value))
    if param == "c":
        return replace(spec, c=value)
    if spec.source == "gen":
        return replace(spec, gen_params={**spec.gen_params, param: value})
    if spec.source == "random":
        rs = spec.random_spec
        if param == "s":
            rs = replace(rs, s=value, symmetric=True)
        elif param == "f":
            rs = replace(rs, f=int(value), m=2 * int(value) if rs.symmetric else rs.m)
        else:
            rs = replace(rs, m=int(value))
        return replace(spec, random_spec=rs)
    raise ConfigError(f"cannot sweep {param} over a file instance")


def _check_grid(param: str, values: Sequence) -> None:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    if not values:
        raise ConfigError("empty sweep grid")
    for v in values:
        if param == "s" and v < 1:
            raise ConfigError(f"s must be >= 1, got {v}")
        if param == "c" and v < 1:
            raise ConfigError(f"c must be >= 1, got {v}")
        if param == "gamma" and not v > 1:
            raise ConfigError(f"gamma must exceed 1, got {v}")
        if param in ("m", "f") and (int(v) != v or v < 1):
            raise ConfigError(f"{param} must be a positive integer, got {v}")


def sweep(param: str, values: Sequence, spec: ExperimentSpec) -> list[dict]:
    """Rerun ``spec`` once per grid value; ``param``/``value`` columns tag the rows."""
    values = [parse_number(v) if isinstance(v, str) else v for v in values]
    _check_grid(param, values)
    rows = []
    for value in values:
        try:
            point = _with_param(spec, param, value)
            point_rows = cli_run(point)
        except (AdversaryError, ModelError) as exc:
            raise ConfigError(f"invalid grid point {param}={value}: {exc}") from None
        for r in point_rows:
            r["param"] = param
            r["value"] = _fmt(value)
        rows += point_rows
    return sort_rows(rows)


def parse_grid(text: str) -> list[Number]:
    """``"1,1.2,2"`` or ``"lo:hi:step"`` (inclusive, exact steps)."""
    text = text.strip()
    if not text:
        raise ConfigError("empty sweep grid")
    try:
        if text.count(":") == 2:
            lo, hi, step = (Fraction(parse_number(x)) for x in text.split(":"))
            if step <= 0 or hi < lo:
                raise ConfigError(f"bad range {text!r}")
            count = int((hi - lo) / step)
            return [_simplify(lo + k * step) for k in range(count + 1)]
        return [_simplify(parse_number(x)) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError, ModelError):
        raise ConfigError(f"cannot parse grid {text!r}") from None


def _simplify(x: Number) -> Number:
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


# ---------------------------------------------------------------- emission


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()


def rows_to_json(rows: Sequence[dict], extra: dict | None = None) -> str:
    payload = {"columns": list(CSV_COLUMNS), "rows": list(rows)}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"


def emit(rows: Sequence[dict], fmt: str) -> str:
    if fmt == "csv":
        return rows_to_csv(rows)
    if fmt == "json":
        return rows_to_json(rows)
    raise ConfigError(f"unknown output format {fmt!r}")
