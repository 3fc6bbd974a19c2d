"""Command line interface: ``favsched run|sweep|adversary|oracle|verify``."""

from __future__ import annotations

import functools
import json
import sys

import click

from .adversaries import AdversaryError, build_adversary, small_jobs_prefix
from .algorithms import ConfigError, TieBreak, make_algorithm, run
from .harness import ORACLE_MODES, ExperimentSpec, RandomSpec, cli_run, emit, parse_grid, sweep
from .model import ModelError, SymmetricInstance, format_number, load_instance, parse_number
from .oracle import (
    OracleBudgetExceeded,
    exact_opt,
    group_totals,
    lb_balance,
    lb_general,
)

NUMBER = click.STRING  # parsed with parse_number so "4/5" stays exact


def _number(value):
    return None if value is None else parse_number(value)


def clean_errors(fn):
    """Report configuration and model errors as one line and exit with status 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ModelError, AdversaryError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OracleBudgetExceeded as exc:
            click.echo(f"oracle failed: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def common_options(fn):
    options = [
        click.option("--algo", "algos", multiple=True, default=("greedy",), show_default=True,
                     help="Algorithm id (repeatable): greedy, greedy-favorite, ggf, assign-u, "
                          "assign-u-doubling, rescale:<c>:<inner>."),
        click.option("--instance", "instance_path", type=click.Path(exists=True, dir_okay=False),
                     help="Instance JSON file."),
        click.option("--gen", "gen_id", help="Generator id: greedy-lb, halving, gf-tight, two-machine, "
                                             "sym-tight:<case>, small-jobs."),
        click.option("--m", type=int, help="Number of machines."),
        click.option("--f", type=int, help="Favorite-set size (group size when symmetric)."),
        click.option("--s", type=NUMBER, help="Symmetric scaling factor; makes random instances symmetric."),
        click.option("--n", type=int, default=8, show_default=True, help="Jobs per random instance."),
        click.option("--u", type=int, help="Ladder length for sym-tight cases 2-4."),
        click.option("--epsilon", type=NUMBER, help="Tiny-job size for sym-tight cases 2-4 and small-jobs."),
        click.option("--t", "t_load", type=NUMBER, help="Target load for small-jobs."),
        click.option("--reps", type=int, default=1, show_default=True, help="Random instances per algorithm."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--gamma", type=float, default=2.0, show_default=True, help="Assign-U gamma (> 1)."),
        click.option("--c", type=NUMBER, help="Wrap every algorithm in rescale:<c>:..."),
        click.option("--tie-break", type=click.Choice([t.value for t in TieBreak]),
                     default=TieBreak.BAD_SMALLEST.value, show_default=True),
        click.option("--oracle", type=click.Choice(ORACLE_MODES), default="auto", show_default=True,
                     help="auto uses adversary witnesses for --gen and the exact search otherwise."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
        click.option("--out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _gen_params(m, f, s, u, epsilon, t_load) -> dict:
    params = {"m": m, "f": f, "s": _number(s), "u": u, "epsilon": _number(epsilon), "t": _number(t_load)}
    return {k: v for k, v in params.items() if v is not None}


def _spec(algos, instance_path, gen_id, m, f, s, n, u, epsilon, t_load, reps, seed, gamma, c,
          tie_break, oracle, fmt) -> ExperimentSpec:
    if instance_path and gen_id:
        raise ConfigError("use either --instance or --gen, not both")
    source = "file" if instance_path else "gen" if gen_id else "random"
    random_spec = RandomSpec()
    if source == "random":
        s_value = _number(s)
        if s_value is not None:
            group = f or 1
            random_spec = RandomSpec(m=2 * group, f=group, n=n, symmetric=True, s=s_value)
        else:
            machines = m or 4
            random_spec = RandomSpec(m=machines, f=f or 1, n=n)
    return ExperimentSpec(
        algorithms=tuple(algos),
        source=source,
        instance_path=instance_path,
        gen_id=gen_id,
        gen_params=_gen_params(m, f, s, u, epsilon, t_load),
        random_spec=random_spec,
        oracle=oracle,
        reps=reps,
        seed=seed,
        fmt=fmt,
        gamma=gamma,
        tie_break=tie_break,
        c=_number(c),
    )


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Online scheduling with favorite machines: algorithms, adversaries and an exact oracle."""


@main.command("run")
@common_options
@clean_errors
def run_cmd(algos, instance_path, gen_id, m, f, s, n, u, epsilon, t_load, reps, seed, gamma, c,
            tie_break, oracle, fmt, out):
    """Run algorithms on an instance file, a generator or random instances."""
    spec = _spec(algos, instance_path, gen_id, m, f, s, n, u, epsilon, t_load, reps, seed, gamma, c,
                 tie_break, oracle, fmt)
    _write(emit(cli_run(spec), fmt), out)


@main.command("sweep")
@click.option("--param", required=True, type=click.Choice(["s", "m", "f", "c", "gamma"]))
@click.option("--values", "grid", required=True, help='Grid as "v1,v2,..." or "lo:hi:step".')
@common_options
@clean_errors
def sweep_cmd(param, grid, algos, instance_path, gen_id, m, f, s, n, u, epsilon, t_load, reps, seed,
              gamma, c, tie_break, oracle, fmt, out):
    """Repeat a run over a grid of one parameter."""
    values = parse_grid(grid)
    if param == "s" and s is None and not gen_id and not instance_path:
        s = str(values[0])  # sweeping s implies symmetric random instances
    spec = _spec(algos, instance_path, gen_id, m, f, s, n, u, epsilon, t_load, reps, seed, gamma, c,
                 tie_break, oracle, fmt)
    _write(emit(sweep(param, values, spec), fmt), out)


@main.command("adversary")
@click.argument("gen_id")
@click.option("--algo", default="greedy", show_default=True, help="Algorithm facing the adversary.")
@click.option("--m", type=int)
@click.option("--f", type=int)
@click.option("--s", type=NUMBER)
@click.option("--u", type=int)
@click.option("--epsilon", type=NUMBER)
@click.option("--t", "t_load", type=NUMBER)
@click.option("--gamma", type=float, default=2.0, show_default=True)
@click.option("--tie-break", type=click.Choice([t.value for t in TieBreak]),
              default=TieBreak.BAD_SMALLEST.value, show_default=True)
@click.option("--no-instance", is_flag=True, help="Omit the job list from the JSON report.")
@click.option("--out", type=click.Path(dir_okay=False))
@clean_errors
def adversary_cmd(gen_id, algo, m, f, s, u, epsilon, t_load, gamma, tie_break, no_instance, out):
    """Play a lower-bound construction against one algorithm and print its JSON report."""
    params = _gen_params(m, f, s, u, epsilon, t_load)
    if gen_id == "small-jobs":
        for key in ("f", "s", "t", "epsilon"):
            if key not in params:
                raise ConfigError(f"small-jobs needs --{key}")
        jobs = small_jobs_prefix(params["f"], params["t"], params["epsilon"], params["s"])
        instance = SymmetricInstance(params["f"], params["s"], tuple(jobs)).to_instance()
        algorithm = make_algorithm(algo, instance.m, f=instance.f, s=instance.s, gamma=gamma,
                                   tie_break=tie_break, general_fallback=True)
        schedule = run(algorithm, instance).schedule
        payload = {
            "adversary": "small-jobs",
            "algorithm": algorithm.name,
            "n": instance.n,
            "final_loads": [format_number(x) for x in schedule.final_loads],
        }
        if not no_instance:
            payload["instance"] = instance.to_json()
        _write(json.dumps(payload, indent=2) + "\n", out)
        return

    def factory(machines, group, scale):
        return make_algorithm(algo, machines, f=group, s=scale, gamma=gamma, tie_break=tie_break,
                              general_fallback=True)

    report = build_adversary(gen_id, factory, **params)
    _write(json.dumps(report.to_json(include_instance=not no_instance), indent=2) + "\n", out)


@main.command("oracle")
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@clean_errors
def oracle_cmd(instance_path, out):
    """Exact optimum, witness and closed-form lower bounds for an instance file."""
    instance = load_instance(instance_path)
    result = exact_opt(instance)
    payload = result.to_json()
    payload["lb_general"] = format_number(lb_general(instance))
    if instance.symmetric is not None:
        sym = instance.symmetric
        payload["lb_balance"] = format_number(lb_balance(sym.f, sym.s, *group_totals(instance)))
    _write(json.dumps(payload, indent=2) + "\n", out)


@main.command("verify")
@click.option("--tie-break", type=click.Choice([t.value for t in TieBreak]),
              default=TieBreak.BAD_SMALLEST.value, show_default=True)
@click.option("--gamma", type=float, default=2.0, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--only", multiple=True, type=int, help="Run only these criterion numbers.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Also write the JSON summary here.")
@clean_errors
def verify_cmd(tie_break, gamma, seed, only, fmt, out):
    """Run the acceptance suite; exit status 1 if any criterion fails."""
    from .acceptance import verify_all

    def show(result):
        if fmt == "text":
            click.echo(result.line())
            for failure in result.failures:
                click.echo(f"       {failure}")

    summary = verify_all(tie_break=tie_break, gamma=gamma, seed=seed, only=list(only) or None, on_result=show)
    data = json.dumps(summary.to_json(), indent=2) + "\n"
    if fmt == "json":
        click.echo(data, nl=False)
    else:
        passed = sum(r.passed for r in summary.results)
        click.echo(f"{passed}/{len(summary.results)} criteria passed")
    if out:
        with open(out, "w") as fh:
            fh.write(data)
    sys.exit(0 if summary.passed else 1)


if __name__ == "__main__":
    main()
