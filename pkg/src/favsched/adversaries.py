"""Lower-bound instances and adaptive adversaries.

Oblivious generators build a fixed job sequence, run an algorithm on it and
pair the result with an explicit optimal (witness) schedule.  Adaptive
adversaries pick the next job after watching the algorithm's last decision.
Every generator returns an :class:`AdversaryReport`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .algorithms import (
    GGF,
    ContractViolation,
    Greedy,
    GreedyFavorite,
    OnlineAlgorithm,
    TieBreak,
    run,
)
from .model import Instance, Job, Number, Schedule, SymmetricInstance, format_number, parse_number
from .oracle import ratio


class AdversaryError(ValueError):
    """Parameters outside a construction's valid range."""


@dataclass
class AdversaryReport:
    name: str
    algorithm: str
    instance: Instance
    schedule: Schedule
    witness: Schedule
    claimed: Number | float
    bound_kind: str = "exact"  # "exact": forced ratio equals claimed; "lower": at least claimed
    slack: float = 0.0
    params: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def online_cost(self) -> Number:
        return self.schedule.makespan

    @property
    def opt(self) -> Number:
        return self.witness.makespan

    @property
    def forced_ratio(self) -> Number:
        return ratio(self.online_cost, self.opt)

    def holds(self, tol: float = 1e-9) -> bool:
        """Whether the forced ratio meets the claim (within ``slack + tol``)."""
        gap = float(self.forced_ratio) - float(self.claimed)
        if self.bound_kind == "lower":
            return gap >= -(self.slack + tol)
        return abs(gap) <= self.slack + tol

    def to_json(self, include_instance: bool = True) -> dict:
        data = {
            "adversary": self.name,
            "algorithm": self.algorithm,
            "params": {k: format_number(v) if isinstance(v, Fraction) else v for k, v in self.params.items()},
            "m": self.instance.m,
            "n": self.instance.n,
            "online": format_number(self.online_cost),
            "opt": format_number(self.opt),
            "forced_ratio": format_number(self.forced_ratio),
            "forced_ratio_float": float(self.forced_ratio),
            "claimed": format_number(self.claimed) if not isinstance(self.claimed, float) else self.claimed,
            "bound_kind": self.bound_kind,
            "slack": self.slack,
            "holds": self.holds(),
            "online_assignment": list(self.schedule.assignment),
            "witness": list(self.witness.assignment),
        }
        if include_instance:
            data["instance"] = self.instance.to_json()
        data.update({k: v for k, v in self.extra.items() if _jsonable(v)})
        return data


def _jsonable(value: Any) -> bool:
    return isinstance(value, (int, float, str, bool, list, dict, type(None)))


def _block(r: int, p: Number, favorites: frozenset[int], m: int, s: Number) -> list[Job]:
    others = {i: s * p for i in range(1, m + 1) if i not in favorites}
    return [Job(p, favorites, others)] * r


class Interaction:
    """Feeds jobs to an algorithm one at a time and keeps the true loads."""

    def __init__(self, algorithm: OnlineAlgorithm, m: int):
        if algorithm.m != m:
            raise AdversaryError(f"algorithm built for {algorithm.m} machines, adversary uses {m}")
        self.algorithm = algorithm
        self.m = m
        self.jobs: list[Job] = []
        self.assignment: list[int] = []
        self.loads: list[Number] = [0] * m

    def release(self, job: Job) -> int:
        machine = self.algorithm.place(job)
        if isinstance(machine, bool) or not isinstance(machine, int) or not 1 <= machine <= self.m:
            raise ContractViolation(f"{self.algorithm.name} returned {machine!r}")
        self.jobs.append(job)
        self.assignment.append(machine)
        self.loads[machine - 1] += job.time(machine)
        return machine

    def instance(self, symmetric: SymmetricInstance | None = None) -> Instance:
        if symmetric is not None:
            return symmetric.to_instance()
        return Instance(self.m, tuple(self.jobs))

    def schedule(self, instance: Instance) -> Schedule:
        return Schedule.from_assignment(instance, self.assignment)


# ---------------------------------------------------------------- general model


def default_lb_scale(m: int, f: int) -> int:
    """Smallest integer ``s`` above both ``m`` and ``m'-1+sqrt((m'-1)(m'-2))`` (plus one)."""
    k = m // f
    root = math.isqrt((k - 1) * (k - 2))
    if root * root < (k - 1) * (k - 2):
        root += 1
    return max(m, k - 1 + root) + 1


def greedy_lb_sequence(
    m: int,
    f: int,
    s: Number | None = None,
    algorithm: OnlineAlgorithm | None = None,
    tie_break: TieBreak | str = TieBreak.BAD_SMALLEST,
) -> AdversaryReport:
    """Two-phase sequence forcing Greedy to ``(m + f - 1) / f`` against optimum 1.

    Phase 1 pushes bad jobs of load ``i - 1`` onto each group ``M_i``; phase 2
    is the identical-machines ``2 - 1/f`` sequence on the last group.
    """
    if f < 1 or m < 1 or m % f:
        raise AdversaryError(f"f must divide m (m={m}, f={f})")
    k = m // f
    s = default_lb_scale(m, f) if s is None else parse_number(s)
    if k > 1 and not (s > m and s > k - 1 + math.sqrt((k - 1) * (k - 2))):
        raise AdversaryError(f"s={s} too small for m={m}, f={f}")
    groups = [frozenset(range(i * f + 1, i * f + f + 1)) for i in range(k)]
    jobs: list[Job] = []
    witness: list[int] = []
    for i in range(1, k):
        group = groups[i - 1]
        jobs += _block(f, 1 - Fraction(i) / s, group, m, s)
        jobs += _block(f, Fraction(i) / s, group, m, s)
        witness += sorted(group) * 2
    last = sorted(groups[-1])
    jobs += _block(f * (f - 1), Fraction(1, f), groups[-1], m, s)
    for machine in last[1:]:
        witness += [machine] * f
    jobs += _block(1, 1, groups[-1], m, s)
    witness.append(last[0])
    instance = Instance(m, tuple(jobs))
    algorithm = algorithm or Greedy(m, tie_break)
    result = run(algorithm, instance)
    return AdversaryReport(
        "greedy-lb",
        algorithm.name,
        instance,
        result.schedule,
        Schedule.from_assignment(instance, witness),
        Fraction(m + f - 1, f),
        params={"m": m, "f": f, "s": s},
        extra={"bad_jobs": result.bad_jobs},
    )


def halving_adversary(m: int, f: int, algorithm: OnlineAlgorithm) -> AdversaryReport:
    """Adaptive sequence forcing any algorithm to ``(u + 1) / 2`` with ``u = 1 + log2(m/f)``.

    Each round splits the surviving machines into groups of ``f``, releases
    ``f/2`` unit jobs per group and keeps the ``f/2`` most loaded machines of
    every group.  When ``m/f`` is not a power of two only the first
    ``f * 2**floor(log2(m/f))`` machines are used.
    """
    if f < 2 or f % 2:
        raise AdversaryError(f"halving needs an even f, got {f}")
    if m % f:
        raise AdversaryError(f"f must divide m (m={m}, f={f})")
    groups_total = m // f
    u = groups_total.bit_length()  # 1 + floor(log2(m/f))
    used = f * 2 ** (u - 1)
    big = m + 2
    talk = Interaction(algorithm, m)
    witness: list[int] = []
    current = list(range(1, used + 1))
    averages: list[Fraction] = []
    for i in range(1, u + 1):
        averages.append(Fraction(sum(talk.loads[x - 1] for x in current)) / len(current))
        if i == u:
            fav = frozenset(current)
            for machine in current:
                talk.release(Job(1, fav, {x: big for x in range(1, m + 1) if x not in fav}))
                witness.append(machine)
            break
        groups = [current[g:g + f] for g in range(0, len(current), f)]
        for group in groups:
            fav = frozenset(group)
            for _ in range(f // 2):
                talk.release(Job(1, fav, {x: big for x in range(1, m + 1) if x not in fav}))
        survivors = []
        for group in groups:
            ranked = sorted(group, key=lambda x: (-talk.loads[x - 1], x))
            keep = sorted(ranked[: f // 2])
            spare = sorted(set(group) - set(keep))
            witness += spare
            survivors += keep
        current = sorted(survivors)
    instance = talk.instance()
    return AdversaryReport(
        "halving",
        algorithm.name,
        instance,
        talk.schedule(instance),
        Schedule.from_assignment(instance, witness),
        Fraction(u + 1, 2),
        bound_kind="lower",
        params={"m": m, "f": f, "u": u, "machines_used": used},
        extra={"round_averages": [float(a) for a in averages]},
    )


# ---------------------------------------------------------------- symmetric model


# Decisions of these algorithms only compare sums of times, so they are unchanged
# when every time is multiplied by the same positive integer.
SCALE_FREE = (Greedy, GreedyFavorite, GGF)


def _run_exact(algorithm: OnlineAlgorithm, instance: Instance):
    """Run, switching to integer times for long exact instances (a large speedup over fractions)."""
    if instance.n > 1000 and isinstance(algorithm, SCALE_FREE) and instance.exact:
        scaled, _ = instance.integer_scaled()
        result = run(algorithm, scaled)
        return result, Schedule.from_assignment(instance, result.schedule.assignment)
    result = run(algorithm, instance)
    return result, result.schedule


def _symmetric_report(
    name: str,
    sym: SymmetricInstance,
    witness: Sequence[int],
    claimed,
    algorithm: OnlineAlgorithm,
    bound_kind: str = "exact",
    slack: float = 0.0,
    params: dict | None = None,
    extra: dict | None = None,
) -> AdversaryReport:
    instance = sym.to_instance()
    result, schedule = _run_exact(algorithm, instance)
    return AdversaryReport(
        name,
        algorithm.name,
        instance,
        schedule,
        Schedule.from_assignment(instance, witness),
        claimed,
        bound_kind=bound_kind,
        slack=slack,
        params=params or {},
        extra={"bad_jobs_count": len(result.bad_jobs), **(extra or {})},
    )


def greedyfavorite_tight(f: int, s: Number, algorithm: OnlineAlgorithm | None = None) -> AdversaryReport:
    """``f(f-1) x (1/f, M1), f x (1/s, M1), (1, M1)``: GreedyFavorite reaches ``2 - 1/f + 1/s``."""
    s = parse_number(s)
    if f < 1 or s < 1:
        raise AdversaryError("need f >= 1 and s >= 1")
    sym = SymmetricInstance(f, s)
    jobs = [(Fraction(1, f), 1)] * (f * (f - 1)) + [(1 / Fraction(s), 1)] * f + [(1, 1)]
    witness: list[int] = []
    for machine in range(2, f + 1):
        witness += [machine] * f
    witness += list(range(f + 1, 2 * f + 1))
    witness.append(1)
    return _symmetric_report(
        "gf-tight",
        sym.with_jobs(jobs),
        witness,
        2 - Fraction(1, f) + 1 / Fraction(s),
        algorithm or GreedyFavorite(2 * f),
        params={"f": f, "s": s},
    )


def two_machine_bound(s: Number) -> Number:
    """``min{1 + s^2/(s+1), 1 + 1/s}``."""
    s = Fraction(s) if not isinstance(s, float) else s
    return min(1 + s * s / (s + 1), 1 + 1 / s)


def two_machine_adversary(s: Number, algorithm: OnlineAlgorithm) -> AdversaryReport:
    """Adaptive three-job sequence on two machines (one per group).

    Job 1 is ``(1, M1)``.  Whichever machine ``A`` receives it, with load
    ``L`` (1 or ``s``), plays the role of "machine 1" from then on and later
    sizes are scaled by ``L``: job 2 is ``(s L, {A})``; if it also lands on
    ``A`` the sequence stops, otherwise job 3 is ``((s+1) L, other machine)``.
    """
    s = parse_number(s)
    if s < 1:
        raise AdversaryError("s must be at least 1")
    sym = SymmetricInstance(1, s)
    talk = Interaction(algorithm, 2)
    jobs = [(1, 1)]
    a = talk.release(sym.job(1, 1))
    load = talk.loads[a - 1]
    b_machine = 3 - a
    jobs.append((s * load, a))
    second = talk.release(sym.job(s * load, a))
    if second == a:
        witness = [b_machine, a]
    else:
        jobs.append(((s + 1) * load, b_machine))
        talk.release(sym.job((s + 1) * load, b_machine))
        witness = [a, a, b_machine]
    instance = sym.with_jobs(jobs).to_instance()
    return AdversaryReport(
        "two-machine",
        algorithm.name,
        instance,
        talk.schedule(instance),
        Schedule.from_assignment(instance, witness),
        two_machine_bound(s),
        bound_kind="lower",
        params={"s": s},
        extra={"first_machine": a, "first_load": format_number(load), "stopped_after": len(jobs)},
    )


def small_jobs_prefix(f: int, t: Number, epsilon: Number, s: Number) -> list[tuple[Number, int]]:
    """Tiny jobs after which Greedy has load ``t`` on one group and ``t - eps`` on the other.

    ``f x (eps, M1)`` then ``t/eps - 1`` alternating blocks of ``f x (2 eps/s, .)``
    favoring ``M1, M2, M1, ...``; all but the first ``f`` jobs end up bad.
    The group holding the last block ends at ``t``.
    """
    t, epsilon, s = parse_number(t), parse_number(epsilon), parse_number(s)
    if not 1 <= s < 2:
        raise AdversaryError(f"small jobs need 1 <= s < 2, got {s}")
    if epsilon <= 0 or t < 0:
        raise AdversaryError("need eps > 0 and t >= 0")
    blocks = Fraction(t) / Fraction(epsilon) if not isinstance(t, float) else t / epsilon
    if blocks != int(blocks):
        raise AdversaryError(f"t/eps must be an integer, got {blocks}")
    blocks = int(blocks)
    jobs: list[tuple[Number, int]] = []
    if blocks == 0:
        return jobs
    jobs += [(epsilon, 1)] * f
    small = 2 * Fraction(epsilon) / s
    for k in range(2, blocks + 1):
        jobs += [(small, 1 if k % 2 == 0 else 2)] * f
    return jobs


def prefix_high_group(blocks: int) -> int:
    """Group at load ``t`` after :func:`small_jobs_prefix` with the given block count."""
    return 1 if blocks % 2 else 2


def tight_symmetric(
    case: int,
    f: int,
    s: Number,
    u: int | None = None,
    epsilon: Number | None = None,
    algorithm: OnlineAlgorithm | None = None,
) -> AdversaryReport:
    """Sequences on which Greedy meets its symmetric-model guarantee.

    Cases 1 and 5 are exact.  Cases 2-4 use a geometric ladder of
    ``u`` job sizes ``(s-1)^k`` on top of tiny jobs of size about ``eps``;
    the online cost is exact while the witness optimum is ``1 + O(eps)``.
    """
    s = parse_number(s)
    if not isinstance(s, float):
        s = Fraction(s)
    algorithm = algorithm or Greedy(2 * f, TieBreak.BAD_SMALLEST)
    params = {"case": case, "f": f, "s": s}
    if case == 1:
        if f != 1:
            raise AdversaryError("case 1 needs f = 1")
        if s < 1:
            raise AdversaryError("s must be at least 1")
        if s * s - s - 1 <= 0:
            jobs = [(1 / (s + 1), 2), (s / (s + 1), 2), (1, 1)]
        else:
            jobs = [((s - 1) / s, 2), (1 / s, 2), (1, 1)]
        return _symmetric_report(
            "sym-tight:1", SymmetricInstance(1, s, jobs), [2, 2, 1],
            min(1 + s * s / (s + 1), 2), algorithm, params=params,
        )
    if case == 5:
        if not 2 <= f < s:
            raise AdversaryError(f"case 5 needs 2 <= f < s (f={f}, s={s})")
        jobs = [(1 - 1 / s, 2)] * f + [(1 / s, 2)] * f + [(Fraction(1, f), 1)] * (f * (f - 1)) + [(1, 1)]
        witness = list(range(f + 1, 2 * f + 1)) * 2
        for machine in range(2, f + 1):
            witness += [machine] * f
        witness.append(1)
        return _symmetric_report(
            "sym-tight:5", SymmetricInstance(f, s, jobs), witness,
            3 - Fraction(1, f), algorithm, params=params,
        )
    if case in (2, 3, 4):
        return _ladder_case(case, f, s, u, epsilon, algorithm, params)
    raise AdversaryError(f"unknown case {case}")


def _ladder_case(case, f, s, u, epsilon, algorithm, params) -> AdversaryReport:
    if isinstance(s, float):
        raise AdversaryError("cases 2-4 rely on exact ties; pass s as a rational")
    if not s > 1:
        raise AdversaryError("cases 2-4 need s > 1 (the ladder sizes are (s-1)^k)")
    if u is None:
        u = 8 if case in (2, 3) else 9
    epsilon = Fraction(parse_number(epsilon if epsilon is not None else Fraction(1, 10**4)))
    ladder = [(s - 1) ** k for k in range(u + 1)]  # ladder[k] = (s-1)^k
    a_u = ladder[u]
    total = sum(ladder[1:])
    cf = 2 - Fraction(1, f)
    if case in (2, 3):
        if u % 2 or u < 2:
            raise AdversaryError("cases 2 and 3 need an even u >= 2")
        if case == 2 and (f != 2 or s > Fraction("1.605")):
            raise AdversaryError("case 2 needs f = 2 and 1 < s <= 1.605")
        if case == 3 and not (3 <= f and s <= Fraction(3, 2) and f <= s / (s - 1 + (s + 1) * a_u)):
            raise AdversaryError("case 3 needs 3 <= f <= s/(s-1+(s+1)(s-1)^u) and s <= 1.5")
        level = cf * s * s / (s + 1)
        good_beta = (f + s - f * s) / (f * (s + 1))
        t = level - total - good_beta + a_u
        step2 = good_beta - a_u
        if t < 0 or step2 <= 0:
            raise AdversaryError(f"parameters give a negative initial load (t={float(t):.4g})")
        head = [(step2, 2)] * f + [(step2 / s, 2)] * f
        ladder_group = 2
        claimed = 1 + level
    else:
        if u % 2 == 0:
            raise AdversaryError("case 4 needs an odd u")
        margin = s - 1 - (s + 1) * a_u
        if not (s * s - s - 1 <= 0 and margin > 0 and f > s / margin):
            raise AdversaryError("case 4 needs s <= golden ratio and f > s/(s-1-(s+1)(s-1)^u)")
        good_alpha = (f * s - f - s) / (f * (s + 1))
        level = s + good_alpha
        t = level - total
        head = []
        ladder_group = 1
        claimed = s + cf * s / (s + 1)
    blocks = math.ceil(t / epsilon) if t > 0 else 0
    eps = t / blocks if blocks else epsilon
    prefix = small_jobs_prefix(f, t, eps, s) if blocks else []
    if blocks:
        # one more tiny block lands bad on the lagging group and levels both at t
        prefix += [(eps / s, prefix_high_group(blocks))] * f
    jobs = list(prefix) + head + [(a_u, ladder_group)] * f
    for k in range(u - 1, 0, -1):
        jobs += [(ladder[k], 1 if k % 2 == 0 else 2)] * f
    jobs.append((1, 1))
    sym = SymmetricInstance(f, s, jobs)
    witness = _ladder_witness(case, sym, len(prefix), u, ladder, head, s, eps)
    slack = 10 * float(a_u) + 100 * float(epsilon)
    params.update({"u": u, "epsilon": eps, "t": t, "prefix_jobs": len(prefix)})
    return _symmetric_report(
        f"sym-tight:{case}", sym, witness, claimed, algorithm, slack=slack, params=params,
    )


def _ladder_witness(case, sym, n_small, u, ladder, head, s, eps) -> list[int]:
    """Explicit near-optimal schedule: structured jobs placed by hand, tiny jobs list-scheduled."""
    f = sym.f
    n = sym.n
    g1, g2 = sorted(sym.group(1)), sorted(sym.group(2))
    witness = [0] * n
    loads = {i: Fraction(0) for i in range(1, 2 * f + 1)}

    def put(j: int, machine: int) -> None:
        witness[j] = machine
        loads[machine] += sym.proc_time(j + 1, machine)

    ladder_start = n_small + len(head)
    # ladder block k occupies f consecutive jobs; block index 0 is a_u
    blocks = {}
    for idx, k in enumerate([u] + list(range(u - 1, 0, -1))):
        blocks[k] = list(range(ladder_start + idx * f, ladder_start + (idx + 1) * f))
    last = n - 1
    put(last, g1[0])
    if case in (2, 3):
        # group 2: one copy of every head job and every group-2 ladder size per machine
        for r, machine in enumerate(g2):
            put(n_small + r, machine)
            put(n_small + f + r, machine)
            for k in blocks:
                if sym.jobs[blocks[k][0]][1] == 2:
                    put(blocks[k][r], machine)
        # group 1: pair up the copies of even ladder sizes
        even = [k for k in blocks if sym.jobs[blocks[k][0]][1] == 1]
        for r in range(f):
            machine = g1[1 + r // 2] if f > 1 else g1[0]
            for k in even:
                put(blocks[k][r], machine)
        moved_quota = Fraction(0)
    else:
        ones = [k for k in blocks if sym.jobs[blocks[k][0]][1] == 1]
        for r in range(f - 1):
            for k in ones:
                put(blocks[k][r], g1[1 + r])
        for k in ones:
            put(blocks[k][f - 1], g1[1] if k == 2 else g1[2])
        for r, machine in enumerate(g2):
            for k in blocks:
                if sym.jobs[blocks[k][0]][1] == 2:
                    put(blocks[k][r], machine)
        good_alpha = (f * s - f - s) / (f * (s + 1))
        moved_quota = f * (good_alpha - ladder[u]) / s
    # tiny jobs: some group-2 jobs may move to group 1, the rest stay home
    moved = Fraction(0)
    targets = []
    for j in range(n_small):
        p, g = sym.jobs[j]
        if g == 2 and moved + p <= moved_quota:
            moved += p
            targets.append((j, g1))
        else:
            targets.append((j, g1 if g == 1 else g2))
    for j, group in targets:
        machine = min(group, key=lambda i: (loads[i], i))
        put(j, machine)
    return witness


def tight_symmetric_claim(case: int, f: int, s: Number) -> Number:
    """Closed-form ratio each construction targets."""
    s = Fraction(s) if not isinstance(s, float) else s
    cf = 2 - Fraction(1, f)
    return {
        1: lambda: min(1 + s * s / (s + 1), 2),
        2: lambda: 1 + 3 * s * s / (2 * (s + 1)),
        3: lambda: 1 + cf * s * s / (s + 1),
        4: lambda: s + cf * s / (s + 1),
        5: lambda: 3 - Fraction(1, f),
    }[case]()


ADVERSARY_IDS = ("greedy-lb", "halving", "gf-tight", "two-machine", "sym-tight:<case>", "small-jobs")


def build_adversary(gen_id: str, algorithm_factory: Callable[[int, int, Number | None], OnlineAlgorithm] | None = None,
                    **params) -> AdversaryReport:
    """Dispatch a generator by CLI id.

    ``algorithm_factory(m, f, s)`` builds the algorithm under test; ``None``
    keeps each construction's own default.
    """
    make = algorithm_factory
    if gen_id == "greedy-lb":
        m, f = params["m"], params["f"]
        alg = make(m, f, None) if make else None
        return greedy_lb_sequence(m, f, params.get("s"), alg)
    if gen_id == "halving":
        m, f = params["m"], params["f"]
        alg = make(m, f, None) if make else Greedy(m)
        return halving_adversary(m, f, alg)
    if gen_id == "gf-tight":
        f, s = params["f"], params["s"]
        alg = make(2 * f, f, s) if make else None
        return greedyfavorite_tight(f, s, alg)
    if gen_id == "two-machine":
        s = params["s"]
        alg = make(2, 1, s) if make else Greedy(2)
        return two_machine_adversary(s, alg)
    if gen_id.startswith("sym-tight:"):
        case = int(gen_id.split(":", 1)[1])
        f, s = params["f"], params["s"]
        alg = make(2 * f, f, s) if make else None
        return tight_symmetric(case, f, s, params.get("u"), params.get("epsilon"), alg)
    raise AdversaryError(f"unknown adversary id {gen_id!r}")
