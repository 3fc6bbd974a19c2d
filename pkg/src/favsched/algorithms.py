"""Online algorithms for the favorite-machines model.

Every algorithm follows the same protocol: it is created knowing the number of
machines, receives jobs one at a time through :meth:`OnlineAlgorithm.place`
and answers with a 1-based machine index.  Decisions are final.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .model import Instance, Job, ModelError, Number, Schedule, SymmetricInstance, parse_number


class ConfigError(ValueError):
    """Invalid algorithm parameters (gamma <= 1, c < 1, missing estimate, ...)."""


class ContractViolation(RuntimeError):
    """An algorithm returned something that is not a machine index."""


class TieBreak(str, Enum):
    SMALLEST = "smallest"
    BAD_SMALLEST = "bad-smallest"


def _tie_break(value: TieBreak | str) -> TieBreak:
    try:
        return TieBreak(value)
    except ValueError:
        raise ConfigError(f"unknown tie-break policy {value!r}") from None


def greedy_step(loads: Sequence[Number], job: Job, tie_break: TieBreak | str = TieBreak.BAD_SMALLEST) -> int:
    """Machine minimising the job's completion time ``loads[i] + p_ij``.

    With ``bad-smallest`` a tie prefers non-favorite machines, then the
    smallest index.
    """
    tie_break = _tie_break(tie_break)
    completion = [load + job.time(i) for i, load in enumerate(loads, 1)]
    best = min(completion)
    candidates = [i for i, c in enumerate(completion, 1) if c == best]
    if tie_break is TieBreak.BAD_SMALLEST:
        bad = [i for i in candidates if not job.is_favorite(i)]
        if bad:
            return bad[0]
    return candidates[0]


def greedy_favorite_step(loads: Sequence[Number], job: Job) -> int:
    """Least loaded machine among the job's favorites, smallest index on ties."""
    return min(sorted(job.preferred), key=lambda i: loads[i - 1])


@dataclass(frozen=True)
class AssignUConfig:
    gamma: float = 2.0
    opt_estimate: Number = 1

    def __post_init__(self) -> None:
        if not self.gamma > 1:
            raise ConfigError(f"gamma must exceed 1, got {self.gamma}")
        if not self.opt_estimate > 0:
            raise ConfigError(f"opt_estimate must be positive, got {self.opt_estimate}")

    @property
    def a(self) -> float:
        return 1 + 1 / self.gamma


def assign_u_rho(m: int, f: int, gamma: float = 2.0) -> float:
    """Known-optimum guarantee ``log_a(gamma/(gamma-1) * m/f) + 1`` with ``a = 1 + 1/gamma``."""
    if not gamma > 1:
        raise ConfigError(f"gamma must exceed 1, got {gamma}")
    a = 1 + 1 / gamma
    return math.log(gamma / (gamma - 1) * m / f, a) + 1


def _log_increment(load: Number, p: Number, lam: float, log_a: float) -> float:
    # log(a^((l+p)/lam) - a^(l/lam)), finite for any size ratio
    x = float(load) / lam * log_a
    y = float(p) / lam * log_a
    return x + y + math.log1p(-math.exp(-y))


def assign_u_deltas(loads: Sequence[Number], job: Job, config: AssignUConfig) -> list[float]:
    """The exponential cost increments ``a^((l_i+p_ij)/L) - a^(l_i/L)`` per machine."""
    lam = float(config.opt_estimate)
    return [
        config.a ** ((float(l) + float(job.time(i))) / lam) - config.a ** (float(l) / lam)
        for i, l in enumerate(loads, 1)
    ]


def assign_u_step(loads: Sequence[Number], job: Job, config: AssignUConfig) -> int:
    """Machine with the smallest exponential cost increment; smallest index on ties.

    Increments are compared in log space so huge load/estimate ratios do not
    overflow.
    """
    lam = float(config.opt_estimate)
    log_a = math.log(config.a)
    scores = [_log_increment(l, job.time(i), lam, log_a) for i, l in enumerate(loads, 1)]
    best = min(scores)
    return scores.index(best) + 1


def assign_u_potential(loads: Sequence[Number], witness_loads: Sequence[Number], config: AssignUConfig) -> float:
    """``sum_i a^(l_i/L) * (gamma - o_i/L)`` for online loads ``l`` and reference loads ``o``."""
    lam = float(config.opt_estimate)
    return sum(
        config.a ** (float(l) / lam) * (config.gamma - float(o) / lam)
        for l, o in zip(loads, witness_loads)
    )


class OnlineAlgorithm:
    """Base class: keeps the loads it has produced so far."""

    name = "online"

    def __init__(self, m: int):
        if m < 1:
            raise ConfigError("need at least one machine")
        self.m = m
        self.loads: list[Number] = [0] * m

    def choose(self, job: Job) -> int:
        raise NotImplementedError

    def place(self, job: Job) -> int:
        machine = self.choose(job)
        if isinstance(machine, bool) or not isinstance(machine, int) or not 1 <= machine <= self.m:
            raise ContractViolation(f"{self.name} returned {machine!r}, expected a machine in 1..{self.m}")
        self.loads[machine - 1] += job.time(machine)
        return machine


class Greedy(OnlineAlgorithm):
    name = "greedy"

    def __init__(self, m: int, tie_break: TieBreak | str = TieBreak.BAD_SMALLEST):
        super().__init__(m)
        self.tie_break = _tie_break(tie_break)

    def choose(self, job: Job) -> int:
        return greedy_step(self.loads, job, self.tie_break)


class GreedyFavorite(OnlineAlgorithm):
    name = "greedy-favorite"

    def choose(self, job: Job) -> int:
        return greedy_favorite_step(self.loads, job)


def _crossover(s: float) -> float:
    # Greedy guarantee minus GreedyFavorite guarantee, both at f -> infinity
    return (s * s + s - 2) / (s + 1) - 1 / s


def ggf_threshold(tol: float = 1e-12) -> float:
    """Real root of ``s^3 + s^2 - 3s - 1`` where ``2 + (s^2+s-2)/(s+1) = 2 + 1/s``."""
    lo, hi = 1.0, 2.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _crossover(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


S_STAR = ggf_threshold()


class GGF(OnlineAlgorithm):
    """Greedy when ``s <= s_star``, GreedyFavorite otherwise.

    The choice needs the scaling factor ``s``.  Without it, ``general_fallback``
    selects plain Greedy (the only sensible reading outside the symmetric model);
    otherwise a :class:`ModelError` is raised.
    """

    name = "ggf"

    def __init__(
        self,
        m: int,
        s: Number | None,
        s_star: float = S_STAR,
        tie_break: TieBreak | str = TieBreak.BAD_SMALLEST,
        general_fallback: bool = False,
    ):
        super().__init__(m)
        if not s_star > 1:
            raise ConfigError(f"s_star must exceed 1, got {s_star}")
        if s is None and not general_fallback:
            raise ModelError("GGF needs the scaling factor s of a symmetric instance")
        self.s = s
        self.s_star = s_star
        self.uses_greedy = s is None or s <= s_star
        self.inner = Greedy(m, tie_break) if self.uses_greedy else GreedyFavorite(m)
        self.loads = self.inner.loads

    def choose(self, job: Job) -> int:
        return self.inner.choose(job)


class AssignU(OnlineAlgorithm):
    """Exponential-cost assignment with a known optimum estimate."""

    name = "assign-u"

    def __init__(self, m: int, config: AssignUConfig):
        super().__init__(m)
        self.config = config

    def choose(self, job: Job) -> int:
        return assign_u_step(self.loads, job, self.config)


@dataclass
class Phase:
    estimate: Number
    jobs: list[int] = field(default_factory=list)


class AssignUDoubling(OnlineAlgorithm):
    """Assign-U run in phases with doubling optimum estimates.

    Phase ``i`` uses estimate ``L_i`` and only sees the loads created within the
    phase.  A job whose placement would lift the phase makespan above
    ``rho * L_i`` closes the phase; it is then placed in the next phase with
    estimate ``2 L_i`` (repeating if it still does not fit).
    """

    name = "assign-u-doubling"

    def __init__(self, m: int, f: int = 1, gamma: float = 2.0):
        super().__init__(m)
        if not 1 <= f <= m:
            raise ConfigError(f"f must lie in 1..{m}, got {f}")
        self.gamma = gamma
        self.rho = assign_u_rho(m, f, gamma)
        self.phases: list[Phase] = []
        self.phase_loads: list[Number] = [0] * m
        self._count = 0

    @property
    def estimates(self) -> list[Number]:
        return [p.estimate for p in self.phases]

    def _open_phase(self, estimate: Number) -> None:
        self.phases.append(Phase(estimate))
        self.phase_loads = [0] * self.m

    def choose(self, job: Job) -> int:
        if not self.phases:
            self._open_phase(job.pmin)
        while True:
            phase = self.phases[-1]
            config = AssignUConfig(self.gamma, phase.estimate)
            machine = assign_u_step(self.phase_loads, job, config)
            after = self.phase_loads[machine - 1] + job.time(machine)
            if max(after, *self.phase_loads) <= self.rho * float(phase.estimate):
                break
            self._open_phase(2 * phase.estimate)
        self.phase_loads[machine - 1] = after
        self._count += 1
        phase.jobs.append(self._count)
        return machine


def rescale_job(job: Job, c: Number) -> Job:
    """Treat every machine within factor ``c`` of the minimum as a favorite."""
    if c < 1:
        raise ConfigError(f"rescale factor must be at least 1, got {c}")
    near = {i for i, t in job.others.items() if t <= c * job.pmin}
    return Job(
        job.pmin,
        job.favorites | near,
        {i: t for i, t in job.others.items() if i not in near},
        job.home,
    )


def rescale_instance(instance: Instance, c: Number) -> Instance:
    return Instance(instance.m, tuple(rescale_job(j, c) for j in instance.jobs))


class Rescaled(OnlineAlgorithm):
    """Runs ``inner`` on rescaled times; the real loads use the original times.

    ``f_hat`` is the smallest rescaled favorite-set size seen so far.
    """

    def __init__(self, inner: OnlineAlgorithm, c: Number):
        super().__init__(inner.m)
        if c < 1:
            raise ConfigError(f"rescale factor must be at least 1, got {c}")
        self.inner = inner
        self.c = c
        self.name = f"rescale:{c}:{inner.name}"
        self.f_hat: int | None = None

    def choose(self, job: Job) -> int:
        flat = rescale_job(job, self.c)
        size = len(flat.favorites)
        self.f_hat = size if self.f_hat is None else min(self.f_hat, size)
        return self.inner.place(flat)


@dataclass(frozen=True)
class Step:
    job: int
    machine: int
    good: bool


@dataclass(frozen=True)
class RunResult:
    schedule: Schedule
    steps: tuple[Step, ...]

    @property
    def makespan(self) -> Number:
        return self.schedule.makespan

    @property
    def bad_jobs(self) -> list[int]:
        return [s.job for s in self.steps if not s.good]


def run(algorithm: OnlineAlgorithm, instance: Instance) -> RunResult:
    """Feed the instance's jobs in order and record every decision."""
    if algorithm.m != instance.m:
        raise ConfigError(f"algorithm built for {algorithm.m} machines, instance has {instance.m}")
    assignment = []
    steps = []
    for j, job in enumerate(instance.jobs, 1):
        machine = algorithm.place(job)
        if isinstance(machine, bool) or not isinstance(machine, int) or not 1 <= machine <= instance.m:
            raise ContractViolation(f"{algorithm.name} returned {machine!r} for job {j}")
        assignment.append(machine)
        steps.append(Step(j, machine, job.is_favorite(machine)))
    return RunResult(Schedule.from_assignment(instance, assignment), tuple(steps))


def ggf(symmetric: SymmetricInstance | Instance, s_star: float = S_STAR,
        tie_break: TieBreak | str = TieBreak.BAD_SMALLEST) -> Schedule:
    """Run GGF on a symmetric instance and return its schedule."""
    if isinstance(symmetric, Instance):
        if symmetric.symmetric is None:
            raise ModelError("GGF needs a symmetric instance (it branches on s)")
        symmetric = symmetric.symmetric
    instance = symmetric.to_instance()
    return run(GGF(instance.m, symmetric.s, s_star, tie_break), instance).schedule


def rescale_wrapper(instance: Instance, c: Number, inner: Callable[[Instance], OnlineAlgorithm]) -> Schedule:
    """Run the algorithm built by ``inner`` (given the rescaled instance) under rescaling."""
    rescaled = rescale_instance(instance, c)
    return run(Rescaled(inner(rescaled), c), instance).schedule


ALGORITHM_IDS = ("greedy", "greedy-favorite", "ggf", "assign-u", "assign-u-doubling")


def parse_rescale_id(algo_id: str) -> tuple[Number, str]:
    try:
        _, c_text, inner_id = algo_id.split(":", 2)
        c = parse_number(c_text)
    except (ValueError, ModelError):
        raise ConfigError(f"malformed rescale id {algo_id!r}") from None
    if c < 1:
        raise ConfigError(f"rescale factor must be at least 1, got {c}")
    return c, inner_id


def make_algorithm(
    algo_id: str,
    m: int,
    *,
    f: int = 1,
    s: Number | None = None,
    tie_break: TieBreak | str = TieBreak.BAD_SMALLEST,
    gamma: float = 2.0,
    opt_estimate: Number | None = None,
    s_star: float = S_STAR,
    general_fallback: bool = False,
    f_hat: int | None = None,
) -> OnlineAlgorithm:
    """Build an algorithm from its string id.

    ``m``, ``f`` and ``s`` are the model parameters an online algorithm may
    know in advance.  ``rescale:<c>:<inner-id>`` wraps another id; its inner
    algorithm is told ``f_hat`` (defaults to ``f``).
    """
    AssignUConfig(gamma)
    if algo_id.startswith("rescale:"):
        c, inner_id = parse_rescale_id(algo_id)
        inner = make_algorithm(
            inner_id, m, f=f_hat or f, s=s, tie_break=tie_break, gamma=gamma,
            opt_estimate=opt_estimate, s_star=s_star, general_fallback=general_fallback,
        )
        return Rescaled(inner, c)
    if algo_id == "greedy":
        return Greedy(m, tie_break)
    if algo_id == "greedy-favorite":
        return GreedyFavorite(m)
    if algo_id == "ggf":
        return GGF(m, s, s_star, tie_break, general_fallback)
    if algo_id == "assign-u":
        if opt_estimate is None:
            raise ConfigError("assign-u needs an optimum estimate")
        return AssignU(m, AssignUConfig(gamma, opt_estimate))
    if algo_id == "assign-u-doubling":
        return AssignUDoubling(m, f, gamma)
    raise ConfigError(f"unknown algorithm id {algo_id!r}")


def algorithm_for(algo_id: str, instance: Instance, **kwargs) -> OnlineAlgorithm:
    """:func:`make_algorithm` with ``m``, ``f``, ``s`` (and ``f_hat``) read off the instance."""
    f_hat = None
    if algo_id.startswith("rescale:"):
        c, _ = parse_rescale_id(algo_id)
        f_hat = rescale_instance(instance, c).f
    return make_algorithm(
        algo_id, instance.m, f=instance.f, s=instance.s, f_hat=f_hat, **kwargs
    )
