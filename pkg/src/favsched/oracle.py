"""Exact offline optimum and closed-form lower bounds on it."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .model import Instance, Number, Schedule, format_number

DEFAULT_NODE_BUDGET = 10**7


class OracleBudgetExceeded(RuntimeError):
    """The search hit its node cap before proving optimality."""


def node_budget() -> int:
    value = os.environ.get("FAVSCHED_NODE_BUDGET")
    return int(value) if value else DEFAULT_NODE_BUDGET


@dataclass(frozen=True)
class OptResult:
    opt: Number
    witness: Schedule
    nodes: int

    @property
    def per_prefix_witness_loads(self) -> tuple[tuple[Number, ...], ...]:
        return self.witness.prefix_loads

    def to_json(self) -> dict:
        return {"opt": format_number(self.opt), "witness": list(self.witness.assignment), "nodes": self.nodes}


def _numeric_rows(instance: Instance) -> tuple[list[list], Number]:
    """Rows as Python ints scaled by a common denominator when exact, else floats."""
    if instance.exact:
        scaled, scale = instance.integer_scaled()
        return [list(r) for r in scaled.rows()], scale
    return [[float(v) for v in r] for r in instance.rows()], 1


def _unscale(value, scale: int) -> Number:
    if isinstance(value, float):
        return value
    result = Fraction(value, scale)
    return result.numerator if result.denominator == 1 else result


def _machine_classes(rows: list[list], m: int) -> list[int]:
    """Class id per machine; machines with identical columns share a class."""
    seen: dict[tuple, int] = {}
    return [seen.setdefault(tuple(r[i] for r in rows), len(seen)) for i in range(m)]


def exact_opt(instance: Instance, budget: int | None = None) -> OptResult:
    """Minimum makespan by depth-first branch-and-bound.

    Jobs are branched largest-``pmin`` first.  A node is cut when
    ``max(current max load, (assigned + remaining pmin) / m, best completion of
    the next job)`` reaches the incumbent.  Machines with identical columns and
    equal current load are interchangeable, so only the first is tried.
    """
    budget = node_budget() if budget is None else budget
    m, n = instance.m, instance.n
    if n == 0:
        return OptResult(0, Schedule.from_assignment(instance, []), 0)
    rows, scale = _numeric_rows(instance)
    order = sorted(range(n), key=lambda j: (-min(rows[j]), j))
    mins = [min(rows[j]) for j in order]
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + mins[k]
    classes = _machine_classes(rows, m)
    times = [rows[j] for j in order]

    # incumbent: list scheduling in branching order
    loads = [0] * m
    best_assign = [0] * n
    for k, row in enumerate(times):
        i = min(range(m), key=lambda i: (loads[i] + row[i], i))
        loads[i] += row[i]
        best_assign[k] = i
    best = max(loads)
    integral = not isinstance(best, float)

    def average(total):
        # integer-scaled loads are integers, so the average bound rounds up
        return -(-total // m) if integral else total / m

    global_lb = max(average(suffix[0]), max(mins))

    loads = [0] * m
    assign = [0] * n
    nodes = 0

    def search(k: int, current_max, assigned_total) -> None:
        nonlocal best, best_assign, nodes
        nodes += 1
        if nodes > budget:
            raise OracleBudgetExceeded(f"exact_opt exceeded {budget} nodes (n={n}, m={m})")
        if k == n:
            if current_max < best:
                best = current_max
                best_assign = assign.copy()
            return
        row = times[k]
        avg = average(assigned_total + suffix[k])
        if max(current_max, avg) >= best:
            return
        tried = set()
        candidates = []
        for i in range(m):
            key = (classes[i], loads[i])
            if key in tried:
                continue
            tried.add(key)
            candidates.append((loads[i] + row[i], i))
        candidates.sort()
        if candidates[0][0] >= best:
            return
        for completion, i in candidates:
            if completion >= best:
                break
            loads[i] = completion
            assign[k] = i
            search(k + 1, max(current_max, completion), assigned_total + row[i])
            loads[i] = completion - row[i]
            if best <= global_lb:
                return

    if best > global_lb:
        search(0, 0, 0)
    assignment = [0] * n
    for k, j in enumerate(order):
        assignment[j] = best_assign[k] + 1
    witness = Schedule.from_assignment(instance, assignment)
    opt = _unscale(best, scale)
    assert witness.makespan == opt or isinstance(opt, float)
    return OptResult(witness.makespan, witness, nodes)


def brute_force_opt(instance: Instance) -> Number:
    """Minimum makespan by enumerating all ``m**n`` assignments (vectorised).

    Exact instances are scaled to integers, so the result is exact.
    """
    m, n = instance.m, instance.n
    if n == 0:
        return 0
    rows, scale = _numeric_rows(instance)
    dtype = object if any(isinstance(v, int) and abs(v) > 2**52 for r in rows for v in r) else None
    times = np.array(rows, dtype=dtype)  # n x m
    codes = np.arange(m**n)
    loads = np.zeros((m**n, m), dtype=times.dtype)
    idx = np.arange(m**n)
    for j in range(n):
        machine = (codes // m**j) % m
        loads[idx, machine] += times[j, machine]
    best = loads.max(axis=1).min()
    best = best.item() if hasattr(best, "item") else best
    return _unscale(best, scale)


def brute_force_opt_slow(instance: Instance) -> Number:
    """Plain ``itertools.product`` enumeration; only for tiny cross-checks."""
    if instance.n == 0:
        return 0
    rows = instance.rows()
    best = None
    for assignment in product(range(instance.m), repeat=instance.n):
        loads = [0] * instance.m
        for row, i in zip(rows, assignment):
            loads[i] += row[i]
        value = max(loads)
        if best is None or value < best:
            best = value
    return best


def lb_general(instance: Instance) -> Number:
    """``max(sum of pmin / m, largest pmin)``."""
    if instance.n == 0:
        return 0
    total = instance.total_pmin()
    avg = Fraction(total, instance.m) if isinstance(total, (int, Fraction)) else total / instance.m
    return max(avg, max(j.pmin for j in instance.jobs))


def _div(a: Number, b: Number) -> Number:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / b
    return a / b


def lb_symmetric(f: int, s: Number, l_alpha: Number, l_beta: Number, p_n: Number) -> Number:
    """Fractional lower bound from the state just before the final job.

    ``l_alpha``/``l_beta`` are the minimum loads on the final job's favorite
    group and on the other group; ``p_n`` is the final job's minimum time.
    """
    denom = f * s * s + f * s
    return max(
        _div(f * s * l_alpha + f * l_beta + s * p_n, denom),
        _div(f * l_alpha + f * s * l_beta + s * s * p_n, denom),
        p_n,
    )


def lb_balance(f: int, s: Number, p_alpha: Number, p_beta: Number) -> Number:
    """Equal-load fractional bound ``(s*P_hi + P_lo) / (f (s + 1))``."""
    hi, lo = (p_alpha, p_beta) if p_alpha >= p_beta else (p_beta, p_alpha)
    return _div(s * hi + lo, f * (s + 1))


def group_totals(instance: Instance) -> tuple[Number, Number]:
    """Total ``pmin`` of jobs favoring group 1 and group 2 of a symmetric instance."""
    sym = instance.symmetric
    if sym is None:
        raise ValueError("group totals need a symmetric instance")
    totals = [0, 0]
    for p, g in sym.jobs:
        totals[g - 1] += p
    return totals[0], totals[1]


def lb_symmetric_from_schedule(instance: Instance, schedule: Schedule) -> Number:
    """:func:`lb_symmetric` with its inputs read from a schedule's state before the last job."""
    sym = instance.symmetric
    if sym is None or instance.n == 0:
        raise ValueError("need a non-empty symmetric instance")
    p_n, g = sym.jobs[-1]
    before = schedule.loads_after(instance.n - 1)
    alpha = min(before[i - 1] for i in sym.group(g))
    beta = min(before[i - 1] for i in sym.group(3 - g))
    return lb_symmetric(sym.f, sym.s, alpha, beta, p_n)


def ratio(online: Number, opt: Number) -> Number:
    """``online / opt``; an empty instance (both zero) has ratio 1 by convention."""
    if opt == 0:
        if online == 0:
            return 1
        raise ZeroDivisionError("positive online cost with zero optimum")
    return _div(online, opt)


def competitive_ratio(
    algorithm_id: str,
    instance: Instance,
    *,
    witness: Schedule | None = None,
    budget: int | None = None,
    **algo_kwargs,
) -> tuple[Number, Number, Number]:
    """``(online makespan, optimum, ratio)`` for one algorithm on one instance.

    The optimum comes from :func:`exact_opt` unless a witness schedule is
    supplied (its makespan is then trusted as the optimum).  ``assign-u`` is
    given the exact optimum as its estimate when none is passed.
    """
    from .algorithms import algorithm_for, run

    if witness is not None:
        opt = witness.makespan
    else:
        opt = exact_opt(instance, budget).opt
    if algorithm_id == "assign-u" and "opt_estimate" not in algo_kwargs:
        algo_kwargs["opt_estimate"] = opt
    online = run(algorithm_for(algorithm_id, instance, **algo_kwargs), instance).makespan
    return online, opt, ratio(online, opt)


def verify_witness(instance: Instance, assignment: Sequence[int]) -> Number:
    """Makespan of a candidate witness after checking it is a full assignment."""
    return Schedule.from_assignment(instance, assignment).makespan
