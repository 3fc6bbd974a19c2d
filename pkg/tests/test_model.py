import json
from fractions import Fraction

import pytest

from favsched.model import (
    Instance,
    Job,
    ModelError,
    Schedule,
    SymmetricInstance,
    dump_instance,
    load_instance,
    makespan,
    parse_number,
    proc_time,
    sorted_loads,
    to_instance,
)


def test_proc_time_favorite_and_stored():
    inst = Instance(2, (Job(1, frozenset({1}), {2: 3}),))
    assert proc_time(inst, 1, 1) == 1
    assert proc_time(inst, 1, 2) == 3


def test_proc_time_symmetric_non_favorite_group():
    sym = SymmetricInstance(2, 3, ((2, 1),))
    assert proc_time(sym, 1, 3) == 6
    assert proc_time(sym.to_instance(), 1, 4) == 6


def test_proc_time_out_of_range():
    inst = Instance(2, (Job(1, frozenset({1}), {2: 3}),))
    with pytest.raises(IndexError):
        proc_time(inst, 2, 1)
    with pytest.raises(IndexError):
        proc_time(inst, 1, 3)


def test_job_validation():
    with pytest.raises(ModelError):
        Job(0, frozenset({1}), {})
    with pytest.raises(ModelError):
        Job(1, frozenset(), {1: 2})
    with pytest.raises(ModelError):
        Job(1, frozenset({1}), {2: 1})  # non-favorite must be strictly slower
    with pytest.raises(ModelError):
        Job(1, frozenset({1}), {2: float("inf")})


def test_instance_rejects_uncovered_machine():
    with pytest.raises(ModelError):
        Instance(3, (Job(1, frozenset({1}), {2: 2}),))


def test_from_rows_derives_favorites_and_f():
    inst = Instance.from_rows([(2, 3), (3, 2), (4, 1)])
    assert inst.m == 2 and inst.n == 3 and inst.f == 1
    assert inst.jobs[0].favorites == {1}
    assert inst.jobs[2].others == {1: 4}
    assert Instance.from_rows([(1, 1, 2)]).f == 2


def test_to_instance_rows():
    assert to_instance(SymmetricInstance(1, 2, ((1, 1),))).rows() == [(1, 2)]
    inst = to_instance(SymmetricInstance(2, 2, ((1, 2),)))
    assert inst.m == 4 and inst.rows() == [(2, 2, 1, 1)]
    assert inst.f == 2


def test_symmetric_s_one_is_identical_machines():
    inst = SymmetricInstance(1, 1, ((1, 1), (1, 2))).to_instance()
    assert inst.f == inst.m == 2
    assert inst.rows() == [(1, 1), (1, 1)]
    # the job still remembers which group it was released for
    assert inst.jobs[1].preferred == {2}


def test_symmetric_validation():
    with pytest.raises(ModelError):
        SymmetricInstance(1, Fraction(1, 2))
    with pytest.raises(ModelError):
        SymmetricInstance(0, 2)
    with pytest.raises(ModelError):
        SymmetricInstance(1, 2, ((1, 3),))


@pytest.mark.parametrize(
    "loads, expected",
    [((1, 3, 2), (3, 2, 1)), ((0, 0), (0, 0)), ((2, 2, 5), (5, 2, 2))],
)
def test_sorted_loads(loads, expected):
    m = len(loads)
    rows = [tuple(v if i == k else v + 100 for i in range(m)) for k, v in enumerate(loads) if v]
    inst = Instance.from_rows(rows) if rows else Instance(m)
    assignment = [k + 1 for k, v in enumerate(loads) if v]
    sched = Schedule.from_assignment(inst, assignment)
    assert sorted_loads(sched, inst.n) == expected
    assert sorted_loads(sched, 0) == (0,) * m


def test_sorted_loads_prefix_out_of_range():
    sched = Schedule.from_assignment(Instance(2), [])
    with pytest.raises(IndexError):
        sorted_loads(sched, 1)


def test_makespan_examples():
    inst = Instance.from_rows([(2, 5), (5, 3)])
    assert makespan(Schedule.from_assignment(inst, [1, 2])) == 3
    assert makespan(Schedule.from_assignment(Instance(3), [])) == 0
    tie = Instance.from_rows([(2.5, 3.0), (3.0, 2.5)])
    assert makespan(Schedule.from_assignment(tie, [1, 2])) == 2.5


def test_schedule_prefix_loads_and_validation():
    inst = Instance.from_rows([(1, 2), (3, 1)])
    sched = Schedule.from_assignment(inst, [1, 1])
    assert sched.prefix_loads == ((0, 0), (1, 0), (4, 0))
    assert sched.final_loads == (4, 0)
    with pytest.raises(ModelError):
        Schedule.from_assignment(inst, [1])
    with pytest.raises(ModelError):
        Schedule.from_assignment(inst, [1, 3])


def test_parse_number_exact_forms():
    assert parse_number("4/5") == Fraction(4, 5)
    assert parse_number("0.2") == Fraction(1, 5)
    assert isinstance(parse_number(0.5), float)
    assert parse_number(3) == 3


def test_json_round_trip_general(tmp_path):
    inst = Instance.from_rows([(Fraction(4, 5), 4), (1, Fraction(1, 2))])
    path = tmp_path / "inst.json"
    dump_instance(inst, path)
    again = load_instance(path)
    assert again.rows() == inst.rows()


def test_json_decimal_strings_parse_exactly(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps({"m": 2, "jobs": [{"p": "0.1", "favorites": [1], "others": {"2": 0.3}}]}))
    inst = load_instance(path)
    assert inst.jobs[0].pmin == Fraction(1, 10)
    assert inst.jobs[0].others[2] == Fraction(3, 10)


def test_json_round_trip_symmetric(tmp_path):
    sym = SymmetricInstance(2, Fraction(3, 2), ((1, 1), (Fraction(1, 3), 2)))
    path = tmp_path / "sym.json"
    dump_instance(sym.to_instance(), path)
    data = json.loads(path.read_text())
    assert data["f"] == 2 and data["s"] == "3/2"
    again = load_instance(path)
    assert again.symmetric == sym
    assert again.rows() == sym.to_instance().rows()


def test_integer_scaling_preserves_ratios():
    inst = Instance.from_rows([(Fraction(1, 3), Fraction(1, 2)), (Fraction(5, 6), 1)])
    scaled, k = inst.integer_scaled()
    assert k == 6
    assert scaled.rows() == [(2, 3), (5, 6)]
