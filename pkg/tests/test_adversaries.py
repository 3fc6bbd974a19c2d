import json
from fractions import Fraction

import pytest

from favsched.adversaries import (
    AdversaryError,
    build_adversary,
    default_lb_scale,
    greedy_lb_sequence,
    greedyfavorite_tight,
    halving_adversary,
    prefix_high_group,
    small_jobs_prefix,
    tight_symmetric,
    tight_symmetric_claim,
    two_machine_adversary,
    two_machine_bound,
)
from favsched.algorithms import (
    GGF,
    AssignU,
    AssignUConfig,
    AssignUDoubling,
    Greedy,
    GreedyFavorite,
    OnlineAlgorithm,
    TieBreak,
    run,
)
from favsched.model import SymmetricInstance
from favsched.oracle import exact_opt

F = Fraction


def jobs_of(report):
    return [(j.pmin, tuple(sorted(j.favorites))) for j in report.instance.jobs]


# ---------------------------------------------------------------- greedy lower bound


def test_greedy_lb_example_sequence():
    report = greedy_lb_sequence(4, 2, s=5)
    assert jobs_of(report) == [
        (F(4, 5), (1, 2)), (F(4, 5), (1, 2)),
        (F(1, 5), (1, 2)), (F(1, 5), (1, 2)),
        (F(1, 2), (3, 4)), (F(1, 2), (3, 4)),
        (1, (3, 4)),
    ]
    assert report.online_cost == F(5, 2)
    assert report.opt == 1
    assert exact_opt(report.instance).opt == 1


def test_greedy_lb_phase_one_small_jobs_are_bad():
    report = greedy_lb_sequence(4, 2, s=5)
    result = run(Greedy(4), report.instance)
    assert result.bad_jobs == [3, 4]


def test_greedy_lb_default_scale():
    assert default_lb_scale(4, 2) == 5
    assert default_lb_scale(3, 3) == 4


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_greedy_lb_identical_machines(m):
    report = greedy_lb_sequence(m, m)
    assert report.forced_ratio == 2 - F(1, m)


def test_greedy_lb_parameter_errors():
    with pytest.raises(AdversaryError):
        greedy_lb_sequence(5, 2)
    with pytest.raises(AdversaryError):
        greedy_lb_sequence(6, 2, s=3)


def test_greedy_lb_needs_the_bad_job_tie_rule():
    report = greedy_lb_sequence(4, 2, algorithm=Greedy(4, TieBreak.SMALLEST))
    assert report.forced_ratio < F(5, 2)


# ---------------------------------------------------------------- halving


def test_halving_small_example_against_greedy():
    report = halving_adversary(4, 2, Greedy(4))
    assert report.params["u"] == 2
    jobs = jobs_of(report)
    assert jobs[:2] == [(1, (1, 2)), (1, (3, 4))]
    assert len(jobs) == 4 and jobs[2][1] == jobs[3][1]
    assert report.online_cost >= F(3, 2)
    assert report.opt == 1


def test_halving_against_doubling_sixteen_machines():
    report = halving_adversary(16, 2, AssignUDoubling(16, 2))
    assert report.online_cost >= F(5, 2)
    assert report.opt == 1


@pytest.mark.parametrize("factory", [
    lambda m: Greedy(m), lambda m: GreedyFavorite(m), lambda m: AssignUDoubling(m, 4),
    lambda m: AssignU(m, AssignUConfig(2.0, 1)),
])
def test_halving_round_averages(factory):
    report = halving_adversary(16, 4, factory(16))
    for i, avg in enumerate(report.extra["round_averages"], 1):
        assert avg >= (i - 1) / 2
    assert report.holds()


def test_halving_trims_to_power_of_two():
    report = halving_adversary(6, 2, Greedy(6))
    assert report.params["machines_used"] == 4
    assert report.params["u"] == 2


def test_halving_rejects_odd_f():
    with pytest.raises(AdversaryError):
        halving_adversary(6, 3, Greedy(6))


def test_halving_witness_is_optimal_small():
    report = halving_adversary(8, 2, Greedy(8))
    assert exact_opt(report.instance).opt == report.opt == 1


# ---------------------------------------------------------------- GreedyFavorite tight


@pytest.mark.parametrize("f, s", [(1, 1), (2, 2), (3, F(3, 2)), (2, F(7, 3))])
def test_gf_tight_ratio(f, s):
    report = greedyfavorite_tight(f, s)
    assert report.forced_ratio == 2 - F(1, f) + 1 / F(s)
    assert report.opt == 1


def test_gf_tight_smallest_case_jobs():
    report = greedyfavorite_tight(1, 1)
    assert [(j.pmin, j.preferred) for j in report.instance.jobs] == [(1, {1}), (1, {1})]


@pytest.mark.parametrize("f, s", [(1, 2), (2, 2), (3, F(3, 2))])
def test_gf_tight_witness_is_optimal(f, s):
    assert exact_opt(greedyfavorite_tight(f, s).instance).opt == 1


# ---------------------------------------------------------------- two machines


def test_two_machine_greedy_s2():
    report = two_machine_adversary(2, Greedy(2))
    assert report.schedule.assignment == (1, 1)
    assert (report.online_cost, report.opt, report.forced_ratio) == (3, 2, F(3, 2))


def test_two_machine_gf_s2():
    report = two_machine_adversary(2, GreedyFavorite(2))
    assert report.schedule.assignment[1] == 1
    assert report.forced_ratio == F(3, 2)


@pytest.mark.parametrize("alg", [Greedy(2), GreedyFavorite(2), AssignUDoubling(2)])
def test_two_machine_s1(alg):
    assert two_machine_adversary(1, alg).forced_ratio >= F(3, 2)


class AlwaysLast(OnlineAlgorithm):
    name = "always-last"

    def choose(self, job):
        return self.m


def test_two_machine_relabels_after_a_bad_first_job():
    report = two_machine_adversary(2, AlwaysLast(2))
    assert report.extra["first_machine"] == 2
    assert report.extra["first_load"] == 2
    assert report.forced_ratio >= two_machine_bound(2)


@pytest.mark.parametrize("s", [1, F(6, 5), F(13, 10), F(3, 2), 2, 3])
def test_two_machine_ggf_meets_bound_exactly(s):
    report = two_machine_adversary(s, GGF(2, s, s_star=1.3247179572447460))
    assert report.forced_ratio == two_machine_bound(s)


def test_ggf_default_switch_point_is_late_for_single_favorite():
    # With one favorite machine the two guarantees cross at the root of s^3 = s + 1
    # (about 1.3247); between that root and the default switch point GGF runs Greedy
    # and the two-machine adversary pushes it above min{1 + s^2/(s+1), 1 + 1/s}.
    s = F(7, 5)
    default = two_machine_adversary(s, GGF(2, s)).forced_ratio
    early = two_machine_adversary(s, GGF(2, s, s_star=1.3247179572447460)).forced_ratio
    assert default == 1 + s * s / (s + 1) > two_machine_bound(s)
    assert early == two_machine_bound(s)


# ---------------------------------------------------------------- small jobs


def test_small_jobs_two_blocks():
    eps = F(1, 1000)
    jobs = small_jobs_prefix(1, 2 * eps, eps, F(3, 2))
    assert jobs == [(eps, 1), (F(4, 3) * eps, 1)]
    loads = run(Greedy(2), SymmetricInstance(1, F(3, 2), tuple(jobs)).to_instance()).schedule.final_loads
    assert sorted(loads) == [eps, 2 * eps]
    assert loads[prefix_high_group(2) - 1] == 2 * eps


@pytest.mark.parametrize("f, blocks", [(1, 7), (2, 10), (3, 5)])
def test_small_jobs_loads_t_and_t_minus_eps(f, blocks):
    s, eps = F(7, 5), F(1, 200)
    t = blocks * eps
    sym = SymmetricInstance(f, s, tuple(small_jobs_prefix(f, t, eps, s)))
    loads = run(Greedy(2 * f), sym.to_instance()).schedule.final_loads
    high = prefix_high_group(blocks)
    for i in sym.group(high):
        assert loads[i - 1] == t
    for i in sym.group(3 - high):
        assert loads[i - 1] == t - eps


def test_small_jobs_errors():
    with pytest.raises(AdversaryError):
        small_jobs_prefix(1, F(3, 1000), F(2, 1000), F(3, 2))
    with pytest.raises(AdversaryError):
        small_jobs_prefix(1, F(1, 10), F(1, 100), 2)


# ---------------------------------------------------------------- symmetric tightness


def test_case5_example():
    report = tight_symmetric(5, 2, 3)
    sym = report.instance.symmetric
    assert list(sym.jobs) == [(F(2, 3), 2)] * 2 + [(F(1, 3), 2)] * 2 + [(F(1, 2), 1)] * 2 + [(1, 1)]
    assert report.online_cost == F(5, 2) and report.opt == 1
    assert exact_opt(report.instance).opt == 1


def test_case1_s_one():
    report = tight_symmetric(1, 1, 1)
    assert list(report.instance.symmetric.jobs) == [(F(1, 2), 2), (F(1, 2), 2), (1, 1)]
    assert report.forced_ratio == F(3, 2)


@pytest.mark.parametrize("s", [1, F(13, 10), F(8, 5), 2, 3])
def test_case1_ratio_and_witness(s):
    report = tight_symmetric(1, 1, s)
    assert report.forced_ratio == tight_symmetric_claim(1, 1, s)
    assert exact_opt(report.instance).opt == 1


def test_case2_small_parameters():
    s, u, eps = F(6, 5), 6, F(1, 1000)
    report = tight_symmetric(2, 2, s, u, eps)
    claim = 1 + 3 * s * s / (2 * (s + 1))
    assert report.online_cost == claim  # the online side is exact; only the witness carries slack
    assert abs(float(report.forced_ratio) - float(claim)) <= 5 * float((s - 1) ** u) + 10 * float(eps)


@pytest.mark.parametrize("case, f, s, u", [(3, 3, F(6, 5), 6), (4, 4, F(3, 2), 7), (4, 6, F(8, 5), 9)])
def test_ladder_cases_online_cost_exact(case, f, s, u):
    report = tight_symmetric(case, f, s, u, F(1, 500))
    level = tight_symmetric_claim(case, f, s)
    assert report.online_cost == level
    assert report.opt >= 1
    assert report.holds()


def test_ladder_equalising_block_matters():
    # without the last tiny block the two groups differ by eps and the cascade breaks
    s, f, u, eps = F(6, 5), 2, 6, F(1, 1000)
    full = tight_symmetric(2, f, s, u, eps)
    n_small = full.params["prefix_jobs"]
    trimmed = SymmetricInstance(f, s, full.instance.symmetric.jobs[: n_small - f] + full.instance.symmetric.jobs[n_small:])
    assert run(Greedy(4), trimmed.to_instance()).makespan < full.online_cost


@pytest.mark.parametrize("case, f, s, u", [
    (1, 2, 2, None), (2, 3, F(6, 5), 8), (2, 2, F(6, 5), 7), (3, 2, F(6, 5), 8),
    (4, 2, F(3, 2), 9), (4, 4, F(3, 2), 8), (5, 3, 2, None), (5, 1, 3, None), (2, 2, 1, 8), (7, 1, 2, None),
])
def test_tight_symmetric_parameter_errors(case, f, s, u):
    with pytest.raises(AdversaryError):
        tight_symmetric(case, f, s, u)


# ---------------------------------------------------------------- reports


def test_report_json_round_trip():
    report = greedy_lb_sequence(4, 2)
    data = json.loads(json.dumps(report.to_json()))
    assert data["forced_ratio"] == "5/2"
    assert data["witness"] == list(report.witness.assignment)
    assert data["instance"]["m"] == 4


def test_build_adversary_dispatch():
    assert build_adversary("greedy-lb", m=4, f=2).forced_ratio == F(5, 2)
    assert build_adversary("sym-tight:5", f=2, s=3).forced_ratio == F(5, 2)
    assert build_adversary("two-machine", s=2).forced_ratio == F(3, 2)
    with pytest.raises(AdversaryError):
        build_adversary("nope")
