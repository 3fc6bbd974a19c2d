"""Instances, schedules and load bookkeeping for the favorite-machines model.

Machines are numbered ``1..m`` and jobs ``1..n`` in arrival order.  Processing
times are exact rationals (:class:`fractions.Fraction` or ``int``) unless the
caller explicitly hands in floats, in which case all arithmetic stays in
floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Iterable, Mapping, Sequence, Union

Number = Union[int, Fraction, float]


class ModelError(ValueError):
    """Raised when an instance, job or schedule violates the model."""


def parse_number(value: Any) -> Number:
    """Parse ints, floats, ``Fraction`` objects and strings like ``"4/5"`` or ``"0.2"``.

    Strings always become exact rationals; floats are kept as floats.
    """
    if isinstance(value, bool):
        raise ModelError(f"not a number: {value!r}")
    if isinstance(value, (int, Fraction, float)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"cannot parse number {value!r}") from exc
    raise ModelError(f"not a number: {value!r}")


def format_number(value: Number) -> Any:
    """JSON-friendly rendering: ints stay ints, rationals become ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    return value


def is_exact(value: Number) -> bool:
    return isinstance(value, (int, Fraction))


@dataclass(frozen=True, eq=True)
class Job:
    """One job: minimum time ``pmin`` on its favorite machines, larger times elsewhere.

    ``home`` is the declared favorite group of a job coming from a symmetric
    instance.  It differs from ``favorites`` only when ``s = 1`` (where every
    machine achieves the minimum time) and is what GreedyFavorite restricts to.
    """

    pmin: Number
    favorites: frozenset[int]
    others: Mapping[int, Number] = field(default_factory=dict)
    home: frozenset[int] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "favorites", frozenset(self.favorites))
        object.__setattr__(self, "others", dict(self.others))
        if self.home is not None:
            object.__setattr__(self, "home", frozenset(self.home))
        if not self.pmin > 0:
            raise ModelError(f"pmin must be positive, got {self.pmin}")
        if not self.favorites:
            raise ModelError("a job needs at least one favorite machine")
        if min(self.favorites) < 1:
            raise ModelError("machine indices start at 1")
        for machine, t in self.others.items():
            if machine in self.favorites:
                raise ModelError(f"machine {machine} is both favorite and non-favorite")
            if machine < 1:
                raise ModelError("machine indices start at 1")
            if t == float("inf") or t != t:
                raise ModelError("non-favorite times must be finite")
            if not t > self.pmin:
                raise ModelError(
                    f"non-favorite time {t} on machine {machine} must exceed pmin {self.pmin}"
                )

    @classmethod
    def from_row(cls, row: Sequence[Number]) -> "Job":
        """Build a job from its full processing-time row; favorites are the argmin set."""
        values = [parse_number(v) for v in row]
        pmin = min(values)
        favorites = frozenset(i for i, v in enumerate(values, 1) if v == pmin)
        others = {i: v for i, v in enumerate(values, 1) if v != pmin}
        return cls(pmin, favorites, others)

    def time(self, machine: int) -> Number:
        if machine in self.favorites:
            return self.pmin
        try:
            return self.others[machine]
        except KeyError:
            raise IndexError(f"job has no processing time on machine {machine}") from None

    def is_favorite(self, machine: int) -> bool:
        return machine in self.favorites

    def row(self, m: int) -> tuple[Number, ...]:
        return tuple(self.time(i) for i in range(1, m + 1))

    @property
    def preferred(self) -> frozenset[int]:
        """Machines GreedyFavorite may use."""
        return self.home if self.home is not None else self.favorites


@dataclass(frozen=True)
class SymmetricInstance:
    """Two groups ``M1 = {1..f}`` and ``M2 = {f+1..2f}``; jobs are ``(pmin, group)``."""

    f: int
    s: Number
    jobs: tuple[tuple[Number, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "jobs", tuple((parse_number(p), int(g)) for p, g in self.jobs))
        object.__setattr__(self, "s", parse_number(self.s))
        if self.f < 1:
            raise ModelError("group size f must be at least 1")
        if self.s < 1:
            raise ModelError("scaling factor s must be at least 1")
        for p, g in self.jobs:
            if g not in (1, 2):
                raise ModelError(f"group must be 1 or 2, got {g}")
            if not p > 0:
                raise ModelError(f"pmin must be positive, got {p}")

    @property
    def m(self) -> int:
        return 2 * self.f

    @property
    def n(self) -> int:
        return len(self.jobs)

    def group(self, g: int) -> frozenset[int]:
        start = 1 if g == 1 else self.f + 1
        return frozenset(range(start, start + self.f))

    def group_of(self, machine: int) -> int:
        if not 1 <= machine <= self.m:
            raise IndexError(f"machine {machine} out of range 1..{self.m}")
        return 1 if machine <= self.f else 2

    def proc_time(self, job_id: int, machine: int) -> Number:
        if not 1 <= job_id <= self.n:
            raise IndexError(f"job {job_id} out of range 1..{self.n}")
        p, g = self.jobs[job_id - 1]
        return p if self.group_of(machine) == g else self.s * p

    def job(self, p: Number, g: int) -> Job:
        home = self.group(g)
        if self.s == 1:
            return Job(p, frozenset(range(1, self.m + 1)), {}, home=home)
        other = self.group(3 - g)
        return Job(p, home, {i: self.s * p for i in other}, home=home)

    def to_instance(self) -> "Instance":
        cache: dict[tuple[Number, int], Job] = {}
        jobs = []
        for p, g in self.jobs:
            key = (p, g)
            if key not in cache:
                cache[key] = self.job(p, g)
            jobs.append(cache[key])
        return Instance(self.m, tuple(jobs), symmetric=self)

    def with_jobs(self, jobs: Iterable[tuple[Number, int]]) -> "SymmetricInstance":
        return SymmetricInstance(self.f, self.s, tuple(jobs))

    def to_json(self) -> dict:
        return {
            "f": self.f,
            "s": format_number(self.s),
            "jobs": [{"p": format_number(p), "group": g} for p, g in self.jobs],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SymmetricInstance":
        return cls(
            int(data["f"]),
            parse_number(data["s"]),
            tuple((parse_number(j["p"]), int(j["group"])) for j in data["jobs"]),
        )


@dataclass(frozen=True)
class Instance:
    """An ordered job list over ``m`` machines."""

    m: int
    jobs: tuple[Job, ...] = ()
    symmetric: SymmetricInstance | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "jobs", tuple(self.jobs))
        if self.m < 1:
            raise ModelError("need at least one machine")
        machines = set(range(1, self.m + 1))
        for j, job in enumerate(self.jobs, 1):
            covered = set(job.favorites) | set(job.others)
            if covered != machines:
                raise ModelError(
                    f"job {j} must define a time on every machine 1..{self.m}"
                )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[Number]]) -> "Instance":
        rows = [tuple(r) for r in rows]
        if not rows:
            raise ModelError("from_rows needs at least one row; use Instance(m) for empty")
        if len({len(r) for r in rows}) != 1:
            raise ModelError("all rows must have the same length")
        return cls(len(rows[0]), tuple(Job.from_row(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def f(self) -> int:
        """Minimum favorite-set size; ``m`` for an empty instance."""
        return min((len(j.favorites) for j in self.jobs), default=self.m)

    @property
    def s(self) -> Number | None:
        return None if self.symmetric is None else self.symmetric.s

    def job(self, job_id: int) -> Job:
        if not 1 <= job_id <= self.n:
            raise IndexError(f"job {job_id} out of range 1..{self.n}")
        return self.jobs[job_id - 1]

    def proc_time(self, job_id: int, machine: int) -> Number:
        if not 1 <= machine <= self.m:
            raise IndexError(f"machine {machine} out of range 1..{self.m}")
        return self.job(job_id).time(machine)

    def rows(self) -> list[tuple[Number, ...]]:
        return [job.row(self.m) for job in self.jobs]

    def total_pmin(self) -> Number:
        return sum((j.pmin for j in self.jobs), 0)

    def prefix(self, n: int) -> "Instance":
        return Instance(self.m, self.jobs[:n], symmetric=self._symmetric_prefix(n))

    def _symmetric_prefix(self, n: int) -> SymmetricInstance | None:
        if self.symmetric is None:
            return None
        return self.symmetric.with_jobs(self.symmetric.jobs[:n])

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for row in self.rows() for v in row)

    def to_float(self) -> "Instance":
        jobs = tuple(
            Job(float(j.pmin), j.favorites, {i: float(t) for i, t in j.others.items()}, j.home)
            for j in self.jobs
        )
        return Instance(self.m, jobs)

    def integer_scaled(self) -> tuple["Instance", int]:
        """Multiply every time by the common denominator; returns ``(instance, scale)``."""
        if not self.exact:
            raise ModelError("integer scaling needs exact processing times")
        distinct = {id(j): j for j in self.jobs}
        scale = 1
        for j in distinct.values():
            for v in (j.pmin, *j.others.values()):
                scale = lcm(scale, Fraction(v).denominator)
        scaled = {
            key: Job(int(j.pmin * scale), j.favorites, {i: int(t * scale) for i, t in j.others.items()}, j.home)
            for key, j in distinct.items()
        }
        jobs = tuple(scaled[id(j)] for j in self.jobs)
        return Instance(self.m, jobs), scale

    def to_json(self) -> dict:
        if self.symmetric is not None:
            return self.symmetric.to_json()
        return {
            "m": self.m,
            "jobs": [
                {
                    "p": format_number(j.pmin),
                    "favorites": sorted(j.favorites),
                    "others": {str(i): format_number(t) for i, t in sorted(j.others.items())},
                }
                for j in self.jobs
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Instance":
        """Load either the general schema or the symmetric ``{"f", "s", "jobs"}`` schema."""
        if "f" in data and "s" in data and "m" not in data:
            return SymmetricInstance.from_json(data).to_instance()
        jobs = []
        for entry in data["jobs"]:
            others = {int(k): parse_number(v) for k, v in entry.get("others", {}).items()}
            jobs.append(Job(parse_number(entry["p"]), frozenset(entry["favorites"]), others))
        return cls(int(data["m"]), tuple(jobs))


def load_instance(path) -> Instance:
    """Read an instance file; JSON float literals are parsed as exact decimals."""
    with open(path) as fh:
        data = json.load(fh, parse_float=Fraction)
    return Instance.from_json(data)


def dump_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance.to_json(), fh, indent=2)
        fh.write("\n")


def proc_time(instance: Instance | SymmetricInstance, job_id: int, machine: int) -> Number:
    return instance.proc_time(job_id, machine)


def to_instance(symmetric: SymmetricInstance) -> Instance:
    return symmetric.to_instance()


@dataclass(frozen=True)
class Schedule:
    """An irrevocable job-to-machine assignment with per-prefix loads.

    ``prefix_loads[j]`` is the load vector after the first ``j`` jobs, so it
    has ``n + 1`` entries and starts at all zeros.
    """

    m: int
    assignment: tuple[int, ...]
    prefix_loads: tuple[tuple[Number, ...], ...]

    @classmethod
    def from_assignment(cls, instance: Instance, assignment: Sequence[int]) -> "Schedule":
        if len(assignment) != instance.n:
            raise ModelError(
                f"assignment covers {len(assignment)} jobs, instance has {instance.n}"
            )
        loads: list[Number] = [0] * instance.m
        history = [tuple(loads)]
        for job, machine in zip(instance.jobs, assignment):
            if not 1 <= machine <= instance.m:
                raise ModelError(f"machine {machine} out of range 1..{instance.m}")
            loads[machine - 1] += job.time(machine)
            history.append(tuple(loads))
        return cls(instance.m, tuple(int(a) for a in assignment), tuple(history))

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def final_loads(self) -> tuple[Number, ...]:
        return self.prefix_loads[-1]

    @property
    def makespan(self) -> Number:
        return max(self.final_loads, default=0)

    def loads_after(self, j: int) -> tuple[Number, ...]:
        if not 0 <= j <= self.n:
            raise IndexError(f"prefix {j} out of range 0..{self.n}")
        return self.prefix_loads[j]

    def sorted_loads(self, j: int | None = None) -> tuple[Number, ...]:
        return sorted_loads(self, self.n if j is None else j)


def sorted_loads(schedule: Schedule, prefix_j: int) -> tuple[Number, ...]:
    """Loads after the first ``prefix_j`` jobs, highest first."""
    return tuple(sorted(schedule.loads_after(prefix_j), reverse=True))


def makespan(schedule: Schedule) -> Number:
    return schedule.makespan
