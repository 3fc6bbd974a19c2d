"""Executable acceptance suite.

Each check returns a :class:`CriterionResult`; :func:`verify_all` runs them in
order and aggregates a machine-readable summary.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

from .adversaries import (
    greedy_lb_sequence,
    greedyfavorite_tight,
    halving_adversary,
    tight_symmetric,
    tight_symmetric_claim,
    two_machine_adversary,
    two_machine_bound,
)
from .algorithms import (
    GGF,
    AssignU,
    AssignUConfig,
    AssignUDoubling,
    Greedy,
    GreedyFavorite,
    TieBreak,
    assign_u_potential,
    assign_u_rho,
    make_algorithm,
    run,
)
from .harness import RandomSpec, clustered_instance, greedy_symmetric_bound
from .model import Instance
from .oracle import (
    brute_force_opt,
    exact_opt,
    group_totals,
    lb_balance,
    lb_general,
    lb_symmetric_from_schedule,
)

TOL = 1e-9


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    time_limit: float | None = None
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" / limit {self.time_limit:g} s" if self.time_limit else ""
        return f"{status} [{self.number:>2}] {self.title}: {self.detail} ({self.seconds:.2f} s{limit})"


@dataclass
class Settings:
    tie_break: str = TieBreak.BAD_SMALLEST.value
    gamma: float = 2.0
    seed: int = 2024


class _Check:
    """Collects failures; keeps only the first few messages."""

    def __init__(self) -> None:
        self.count = 0
        self.messages: list[str] = []

    def __call__(self, ok: bool, message: str) -> None:
        if not ok:
            self.count += 1
            if len(self.messages) < 5:
                self.messages.append(message)


def _prefix_totals(instance: Instance) -> list:
    totals = [0]
    for job in instance.jobs:
        totals.append(totals[-1] + job.pmin)
    return totals


def _random_small(rng: random.Random, m_max: int, n_max: int, n_min: int = 1) -> Instance:
    m = rng.randint(1, m_max)
    f = rng.randint(1, m)
    n = rng.randint(n_min, n_max)
    return RandomSpec(m=m, f=f, n=n).generate(rng)


def _random_symmetric(rng: random.Random, f_max: int, n_max: int) -> Instance:
    f = rng.randint(1, f_max)
    s = Fraction(rng.randint(100, 400), 100)
    return RandomSpec(f=f, m=2 * f, n=rng.randint(1, n_max), symmetric=True, s=s).generate(rng)


# ---------------------------------------------------------------- criteria


def c1_greedy_tightness(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    for m, f in [(4, 2), (6, 2), (6, 3), (8, 4), (3, 3)]:
        report = greedy_lb_sequence(m, f, algorithm=Greedy(m, cfg.tie_break))
        target = Fraction(m + f - 1, f)
        check(report.forced_ratio == target, f"(m={m}, f={f}) ratio {report.forced_ratio} != {target}")
        check(report.opt == 1, f"(m={m}, f={f}) witness makespan {report.opt}")
        if m <= 6:
            opt = exact_opt(report.instance).opt
            check(opt == 1, f"(m={m}, f={f}) exact optimum {opt}")
    return check.count == 0, "5 (m, f) pairs, exact ratio (m+f-1)/f", check.messages


def c2_greedy_invariant(cfg: Settings) -> tuple[bool, str, list[str]]:
    rng = random.Random(cfg.seed)
    check = _Check()
    for k in range(1000):
        instance = _random_small(rng, 8, 50, n_min=0)
        # Greedy is scale invariant, so integer times give identical decisions faster
        scaled, _ = instance.integer_scaled()
        schedule = run(Greedy(scaled.m, cfg.tie_break), scaled).schedule
        totals = _prefix_totals(scaled)
        f = scaled.f
        for j in range(scaled.n + 1):
            top = sum(sorted(schedule.prefix_loads[j], reverse=True)[:f])
            check(top <= totals[j], f"instance {k}, prefix {j}: {top} > {totals[j]}")
    return check.count == 0, f"1000 random instances, {check.count} violations", check.messages


def c3_halving(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    f = 2
    for m in (4, 8, 16):
        algorithms = [
            Greedy(m, cfg.tie_break),
            GreedyFavorite(m),
            AssignUDoubling(m, f, cfg.gamma),
            GGF(m, None, tie_break=cfg.tie_break, general_fallback=True),
        ]
        target = Fraction(1 + int(math.log2(m // f)) + 1, 2)
        for algorithm in algorithms:
            report = halving_adversary(m, f, algorithm)
            tag = f"m={m} {algorithm.name}"
            check(report.online_cost >= target, f"{tag}: online {report.online_cost} < {target}")
            check(report.opt == 1, f"{tag}: witness makespan {report.opt}")
            for i, avg in enumerate(report.extra["round_averages"], 1):
                check(avg >= (i - 1) / 2 - TOL, f"{tag}: round {i} average {avg}")
    return check.count == 0, "m in {4, 8, 16}, f=2, 4 algorithms", check.messages


def _assign_u_instances(seed: int):
    rng = random.Random(seed + 4)
    for _ in range(200):
        instance = _random_small(rng, 6, 10)
        yield instance, exact_opt(instance)


def c4_assign_u(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    worst = 0.0
    for k, (instance, result) in enumerate(_assign_u_instances(cfg.seed)):
        opt = result.opt
        config = AssignUConfig(cfg.gamma, opt)
        schedule = run(AssignU(instance.m, config), instance).schedule
        rho = assign_u_rho(instance.m, instance.f, cfg.gamma)
        worst = max(worst, float(schedule.makespan / opt))
        check(float(schedule.makespan) <= rho * float(opt) * (1 + TOL), f"instance {k}: makespan over rho*OPT")
        phis = [
            assign_u_potential(schedule.prefix_loads[j], result.witness.prefix_loads[j], config)
            for j in range(instance.n + 1)
        ]
        for j in range(1, len(phis)):
            check(phis[j] <= phis[j - 1] + TOL * max(1.0, abs(phis[j - 1])),
                  f"instance {k}: potential rises at job {j} ({phis[j - 1]} -> {phis[j]})")
    return check.count == 0, f"200 instances, worst ratio {worst:.3f}", check.messages


def c5_doubling(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    worst = 0.0
    for k, (instance, result) in enumerate(_assign_u_instances(cfg.seed)):
        algorithm = AssignUDoubling(instance.m, instance.f, cfg.gamma)
        makespan = run(algorithm, instance).makespan
        worst = max(worst, float(makespan / result.opt))
        check(float(makespan) <= 4 * algorithm.rho * float(result.opt) * (1 + TOL),
              f"instance {k}: makespan over 4*rho*OPT")
        est = algorithm.estimates
        check(est[0] == instance.jobs[0].pmin, f"instance {k}: first estimate {est[0]}")
        check(all(b == 2 * a for a, b in zip(est, est[1:])), f"instance {k}: estimates {est}")
    return check.count == 0, f"200 instances, worst ratio {worst:.3f}", check.messages


def c6_symmetric_greedy(cfg: Settings) -> tuple[bool, str, list[str]]:
    rng = random.Random(cfg.seed + 6)
    check = _Check()
    worst_gap = -math.inf
    for k in range(500):
        instance = _random_symmetric(rng, 3, 10)
        sym = instance.symmetric
        opt = exact_opt(instance).opt
        online = run(Greedy(instance.m, cfg.tie_break), instance).makespan
        bound = greedy_symmetric_bound(sym.f, sym.s)
        gap = float(online / opt) - float(bound)
        worst_gap = max(worst_gap, gap)
        check(gap <= TOL, f"instance {k} (f={sym.f}, s={sym.s}): ratio above bound by {gap}")
    return check.count == 0, f"500 instances, max(ratio - bound) = {worst_gap:.4f}", check.messages


def c7_gf_tight(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    for f, s in [(1, 1), (2, 2), (3, Fraction(3, 2))]:
        report = greedyfavorite_tight(f, s)
        target = 2 - Fraction(1, f) + 1 / Fraction(s)
        check(report.forced_ratio == target, f"(f={f}, s={s}) ratio {report.forced_ratio} != {target}")
        check(report.opt == 1, f"(f={f}, s={s}) witness makespan {report.opt}")
    return check.count == 0, "3 (f, s) pairs, exact ratio 2-1/f+1/s", check.messages


LADDER_CASES = [
    (2, 2, Fraction(6, 5), 8),
    (3, 3, Fraction(6, 5), 8),
    (4, 4, Fraction(3, 2), 9),
]
LADDER_EPSILON = Fraction(1, 10**4)


def c8_symmetric_tightness(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    for s in (1, Fraction(13, 10), 2):
        report = tight_symmetric(1, 1, s, algorithm=Greedy(2, cfg.tie_break))
        target = min(1 + Fraction(s) ** 2 / (s + 1), Fraction(2))
        check(report.forced_ratio == target, f"case 1 s={s}: {report.forced_ratio} != {target}")
    for f, s in [(2, 3), (3, 4)]:
        report = tight_symmetric(5, f, s, algorithm=Greedy(2 * f, cfg.tie_break))
        check(report.forced_ratio == 3 - Fraction(1, f), f"case 5 f={f}: {report.forced_ratio}")
    gaps = []
    for case, f, s, u in LADDER_CASES:
        report = tight_symmetric(case, f, s, u, LADDER_EPSILON, algorithm=Greedy(2 * f, cfg.tie_break))
        slack = 10 * float((s - 1) ** u) + 100 * float(LADDER_EPSILON)
        gap = abs(float(report.forced_ratio) - float(tight_symmetric_claim(case, f, s)))
        gaps.append(f"{gap:.1e}")
        check(gap <= slack, f"case {case}: gap {gap} exceeds slack {slack}")
    return check.count == 0, f"cases 1 and 5 exact; cases 2-4 gaps {', '.join(gaps)}", check.messages


TWO_MACHINE_GRID = (1, Fraction(6, 5), Fraction("1.4812"), 2, 3)


def _two_machine_algorithms(s, cfg: Settings):
    return [
        Greedy(2, cfg.tie_break),
        GreedyFavorite(2),
        GGF(2, s, tie_break=cfg.tie_break),
        AssignU(2, AssignUConfig(cfg.gamma, 1)),
        AssignUDoubling(2, 1, cfg.gamma),
        make_algorithm("rescale:11/10:greedy", 2, tie_break=cfg.tie_break),
    ]


def c9_two_machine(cfg: Settings) -> tuple[bool, str, list[str]]:
    check = _Check()
    ggf_ratios = []
    for s in TWO_MACHINE_GRID:
        bound = float(two_machine_bound(s))
        for algorithm in _two_machine_algorithms(s, cfg):
            report = two_machine_adversary(s, algorithm)
            forced = float(report.forced_ratio)
            check(forced >= bound - TOL, f"s={s} {algorithm.name}: forced {forced} < {bound}")
            if algorithm.name == "ggf":
                ggf_ratios.append(forced)
                check(abs(forced - bound) <= TOL, f"s={s} ggf: forced {forced} != bound {bound}")
    peak = max(ggf_ratios)
    check(peak <= 1.7549 + 1e-4, f"max GGF ratio {peak}")
    return check.count == 0, f"5 values of s, 6 algorithms, max GGF ratio {peak:.4f}", check.messages


def c10_rescaling(cfg: Settings) -> tuple[bool, str, list[str]]:
    rng = random.Random(cfg.seed + 10)
    check = _Check()
    for k in range(100):
        c = rng.choice([Fraction(1), Fraction(101, 100), Fraction(11, 10), Fraction(3, 2), Fraction(2)])
        instance = clustered_instance(rng, rng.randint(2, 5), rng.randint(1, 7), c)
        algorithm = make_algorithm(f"rescale:{c}:greedy", instance.m, tie_break=cfg.tie_break)
        makespan = run(algorithm, instance).makespan
        opt = exact_opt(instance).opt
        f_hat = algorithm.f_hat
        bound = c * Fraction(instance.m + f_hat - 1, f_hat)
        check(makespan / opt <= bound, f"instance {k} (c={c}, f_hat={f_hat}): ratio {makespan / opt} > {bound}")
    return check.count == 0, "100 clustered instances", check.messages


def c11_oracle(cfg: Settings) -> tuple[bool, str, list[str]]:
    rng = random.Random(cfg.seed + 11)
    check = _Check()
    for k in range(500):
        instance = _random_small(rng, 4, 8)
        a, b = brute_force_opt(instance), exact_opt(instance).opt
        check(a == b, f"instance {k}: enumeration {a} != search {b}")
    for k in range(1000):
        if k % 2:
            instance = _random_symmetric(rng, 2, 8)
        else:
            instance = _random_small(rng, 4, 8)
        opt = exact_opt(instance).opt
        check(lb_general(instance) <= opt, f"fuzz {k}: general bound above optimum")
        if instance.symmetric is not None:
            sym = instance.symmetric
            schedule = run(Greedy(instance.m, cfg.tie_break), instance).schedule
            check(lb_symmetric_from_schedule(instance, schedule) <= opt, f"fuzz {k}: trace bound above optimum")
            check(lb_balance(sym.f, sym.s, *group_totals(instance)) <= opt, f"fuzz {k}: balance bound above optimum")
    return check.count == 0, "500 oracle pairs, 1000 fuzzed bound checks", check.messages


CRITERIA: list[tuple[int, str, Callable, float | None]] = [
    (1, "Greedy tightness", c1_greedy_tightness, 1.0),
    (2, "Greedy prefix invariant", c2_greedy_invariant, 5.0),
    (3, "Halving adversary", c3_halving, 1.0),
    (4, "Assign-U with known optimum", c4_assign_u, 30.0),
    (5, "Assign-U with doubling", c5_doubling, 30.0),
    (6, "Symmetric Greedy bound", c6_symmetric_greedy, 60.0),
    (7, "GreedyFavorite tightness", c7_gf_tight, None),
    (8, "Symmetric Greedy tightness", c8_symmetric_tightness, 5.0),
    (9, "Two-machine optimality", c9_two_machine, None),
    (10, "Rescaling", c10_rescaling, None),
    (11, "Oracle soundness", c11_oracle, None),
]


def run_criterion(number: int, cfg: Settings | None = None) -> CriterionResult:
    cfg = cfg or Settings()
    for num, title, fn, limit in CRITERIA:
        if num == number:
            start = time.perf_counter()
            ok, detail, failures = fn(cfg)
            elapsed = time.perf_counter() - start
            if limit is not None and elapsed >= limit:
                ok = False
                failures = failures + [f"runtime {elapsed:.2f} s exceeds {limit} s"]
            return CriterionResult(num, title, ok, detail, elapsed, limit, failures)
    raise KeyError(f"no criterion {number}")


@dataclass
class Summary:
    results: list[CriterionResult]
    settings: Settings

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "settings": asdict(self.settings),
            "criteria": [
                {**asdict(r), "seconds": round(r.seconds, 3)} for r in self.results
            ],
        }


def verify_all(
    tie_break: str = TieBreak.BAD_SMALLEST.value,
    gamma: float = 2.0,
    seed: int = 2024,
    only: list[int] | None = None,
    on_result: Callable[[CriterionResult], None] | None = None,
) -> Summary:
    """Run every acceptance criterion; configuration errors abort before any work."""
    AssignUConfig(gamma)
    Greedy(1, tie_break)
    cfg = Settings(TieBreak(tie_break).value, gamma, seed)
    results = []
    for num, *_ in CRITERIA:
        if only and num not in only:
            continue
        result = run_criterion(num, cfg)
        results.append(result)
        if on_result:
            on_result(result)
    return Summary(results, cfg)
