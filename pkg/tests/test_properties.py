"""Randomised invariants for the model, the algorithms and the oracle."""

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from favsched.algorithms import (
    GGF,
    S_STAR,
    AssignU,
    AssignUConfig,
    AssignUDoubling,
    Greedy,
    GreedyFavorite,
    TieBreak,
    assign_u_potential,
    make_algorithm,
    rescale_job,
    run,
)
from favsched.harness import greedy_favorite_bound, greedy_symmetric_bound
from favsched.model import Instance, Job, Schedule, SymmetricInstance, sorted_loads
from favsched.oracle import (
    brute_force_opt,
    exact_opt,
    group_totals,
    lb_balance,
    lb_general,
    lb_symmetric_from_schedule,
)

quarters = st.integers(1, 40).map(lambda k: Fraction(k, 4))


@st.composite
def instances(draw, max_m=4, max_n=7, min_n=0):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(min_n, max_n))
    jobs = []
    for _ in range(n):
        p = draw(quarters)
        fav = draw(st.sets(st.integers(1, m), min_size=1, max_size=m))
        others = {i: p * (1 + Fraction(draw(st.integers(1, 12)), 4)) for i in range(1, m + 1) if i not in fav}
        jobs.append(Job(p, frozenset(fav), others))
    return Instance(m, tuple(jobs))


@st.composite
def symmetric_instances(draw, max_f=2, max_n=7, min_n=1):
    f = draw(st.integers(1, max_f))
    s = Fraction(draw(st.integers(4, 16)), 4)
    jobs = tuple((draw(quarters), draw(st.sampled_from((1, 2)))) for _ in range(draw(st.integers(min_n, max_n))))
    return SymmetricInstance(f, s, jobs)


ALGORITHMS = [
    lambda inst: Greedy(inst.m),
    lambda inst: Greedy(inst.m, TieBreak.SMALLEST),
    lambda inst: GreedyFavorite(inst.m),
    lambda inst: AssignU(inst.m, AssignUConfig(2.0, 3)),
    lambda inst: AssignUDoubling(inst.m, max(inst.f, 1)),
    lambda inst: make_algorithm("rescale:3/2:greedy", inst.m),
]


# ---------------------------------------------------------------- model


@given(instances())
def test_proc_time_at_least_pmin(inst):
    for j, job in enumerate(inst.jobs, 1):
        for i in range(1, inst.m + 1):
            t = inst.proc_time(j, i)
            assert t >= job.pmin
            assert (t == job.pmin) == (i in job.favorites)


@given(instances(), st.data())
def test_prefix_load_steps(inst, data):
    assignment = [data.draw(st.integers(1, inst.m)) for _ in range(inst.n)]
    sched = Schedule.from_assignment(inst, assignment)
    for j in range(1, inst.n + 1):
        before, after = sched.prefix_loads[j - 1], sched.prefix_loads[j]
        for i in range(inst.m):
            step = after[i] - before[i]
            assert step in (0, inst.proc_time(j, i + 1))
            assert (step != 0) == (assignment[j - 1] == i + 1)
    assert sched.makespan == max(sched.final_loads, default=0)


@given(instances(), st.data())
def test_sorted_loads_permutation(inst, data):
    assignment = [data.draw(st.integers(1, inst.m)) for _ in range(inst.n)]
    sched = Schedule.from_assignment(inst, assignment)
    for j in range(inst.n + 1):
        values = sorted_loads(sched, j)
        assert sorted(values) == sorted(sched.loads_after(j))
        assert list(values) == sorted(values, reverse=True)
        assert tuple(sorted(values, reverse=True)) == values


@given(symmetric_instances())
def test_symmetric_conversion(sym):
    inst = sym.to_instance()
    for j, (p, g) in enumerate(sym.jobs, 1):
        for i in range(1, inst.m + 1):
            expected = p if sym.group_of(i) == g else sym.s * p
            assert inst.proc_time(j, i) == expected == sym.proc_time(j, i)


# ---------------------------------------------------------------- algorithms


@settings(max_examples=60)
@given(instances(min_n=1), st.integers(0, 6), st.sampled_from(range(len(ALGORITHMS))))
def test_online_property(inst, cut, which):
    cut = min(cut, inst.n)
    full = run(ALGORITHMS[which](inst), inst).schedule.assignment
    prefix = run(ALGORITHMS[which](inst), inst.prefix(cut)).schedule.assignment
    assert full[:cut] == prefix


@given(instances(max_m=6, max_n=12))
def test_greedy_top_f_loads_bounded_by_work(inst):
    sched = run(Greedy(inst.m), inst).schedule
    total = 0
    for j in range(inst.n + 1):
        if j:
            total += inst.jobs[j - 1].pmin
        assert sum(sorted_loads(sched, j)[: inst.f]) <= total


@settings(max_examples=60)
@given(instances(min_n=1))
def test_algorithms_versus_optimum(inst):
    opt = exact_opt(inst).opt
    greedy = run(Greedy(inst.m), inst).makespan
    assert greedy <= Fraction(inst.m + inst.f - 1, inst.f) * opt
    for factory in ALGORITHMS:
        assert run(factory(inst), inst).makespan >= opt


@settings(max_examples=60)
@given(instances(min_n=1))
def test_assign_u_known_optimum(inst):
    result = exact_opt(inst)
    config = AssignUConfig(2.0, result.opt)
    sched = run(AssignU(inst.m, config), inst).schedule
    phis = [assign_u_potential(sched.prefix_loads[j], result.witness.prefix_loads[j], config)
            for j in range(inst.n + 1)]
    for a, b in zip(phis, phis[1:]):
        assert b <= a + 1e-9 * max(1.0, abs(a))
    # when the last job sets the makespan, it finished no later than the f-th largest earlier load plus its pmin
    last = sched.assignment[-1]
    if sched.final_loads[last - 1] == sched.makespan:
        assert sched.makespan <= sorted_loads(sched, inst.n - 1)[inst.f - 1] + inst.jobs[-1].pmin


@given(symmetric_instances())
def test_ggf_is_greedy_or_greedy_favorite(sym):
    inst = sym.to_instance()
    reference = Greedy(inst.m) if sym.s <= S_STAR else GreedyFavorite(inst.m)
    assert run(GGF(inst.m, sym.s), inst).schedule.assignment == run(reference, inst).schedule.assignment


@given(instances(min_n=1), st.integers(4, 12))
def test_rescaled_times_sandwich(inst, c4):
    c = Fraction(c4, 4)
    for job in inst.jobs:
        flat = rescale_job(job, c)
        for i in range(1, inst.m + 1):
            assert flat.time(i) <= job.time(i) <= c * flat.time(i)


@given(instances(min_n=1))
def test_greedy_scale_invariant(inst):
    scaled, _ = inst.integer_scaled()
    assert run(Greedy(inst.m), inst).schedule.assignment == run(Greedy(inst.m), scaled).schedule.assignment


# ---------------------------------------------------------------- symmetric guarantees


@settings(max_examples=60)
@given(symmetric_instances())
def test_symmetric_guarantees(sym):
    inst = sym.to_instance()
    opt = exact_opt(inst).opt
    greedy = run(Greedy(inst.m), inst).schedule
    assert greedy.makespan / opt <= greedy_symmetric_bound(sym.f, sym.s)
    assert run(GreedyFavorite(inst.m), inst).makespan / opt <= greedy_favorite_bound(sym.f, sym.s)
    assert lb_symmetric_from_schedule(inst, greedy) <= opt
    assert lb_balance(sym.f, sym.s, *group_totals(inst)) <= opt


# ---------------------------------------------------------------- oracle


@settings(max_examples=80)
@given(instances(max_m=3, max_n=6))
def test_oracles_agree(inst):
    result = exact_opt(inst)
    assert result.opt == brute_force_opt(inst)
    assert result.witness.makespan == result.opt
    assert lb_general(inst) <= result.opt
