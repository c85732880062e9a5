"""Command-line front end.

Subcommands: generate | run | learn | oracle | cost.  All artifacts are
versioned JSON; a report embeds the exact configuration and master seed
that produced it, so rerunning with the same flags reproduces it byte
for byte.  The master seed comes from --seed, falling back to the
QFIT_SEED environment variable, then to 0.

Failures exit nonzero after printing a machine-readable error object
{"error": ..., "message": ...} to stderr.
"""

from __future__ import annotations

import json
import sys

import click

from .algorithms import (
    RunSettings,
    VARIANT_FUSED,
    VARIANT_THREE_STAGE,
    estimate_fit_quality,
    fit_report_to_json,
    learn_report_to_json,
    learn_sparse_fit,
)
from .cost import ALGORITHM_ALIASES, CostQuery, cost_model, cost_report_to_json
from .exceptions import QfitError
from .problems import (
    ProblemSpec,
    classical_fit,
    denormalized_solution,
    generate_problem,
    load_problem,
    problem_to_json,
    save_problem,
)
from .seeding import STREAM_SWAP, derive_seed
from .sim import WINDOW_SINE, WINDOW_UNIFORM, SwapTestPlan
from .linalg import vector_to_json

MASTER_SEED_ENV = "QFIT_SEED"


def _fail(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(2)


def _write_json(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    import os

    env = os.environ.get(MASTER_SEED_ENV)
    return int(env) if env else 0


def _parse_auto(value: str, name: str) -> float | None:
    if value == "auto":
        return None
    try:
        return float(value)
    except ValueError as exc:
        raise click.BadParameter(f"{name} must be a number or 'auto'") from exc


@click.group()
def main():
    """Least-squares fitting on a dense state-vector simulator."""


@main.command()
@click.option("--kind", type=click.Choice(["identity", "poly", "fourier", "random"]),
              default="random", show_default=True)
@click.option("--n", type=int, required=True, help="Number of data points.")
@click.option("--m", type=int, required=True, help="Number of fit functions.")
@click.option("--seed", type=int, default=None, help="Master seed (default: QFIT_SEED or 0).")
@click.option("--planted", default=None,
              help="Comma-separated support indices for a planted solution.")
@click.option("--mass", type=float, default=0.95, show_default=True,
              help="Squared-norm fraction planted on the support.")
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="Additive complex-Gaussian noise amplitude on y.")
@click.option("--condition-target", type=float, default=None,
              help="Target condition number (random kind) or feasibility cap.")
@click.option("--out", required=True, help="Output problem file ('-' for stdout).")
def generate(kind, n, m, seed, planted, mass, noise, condition_target, out):
    """Generate a reproducible synthetic fit problem."""
    try:
        support = None
        if planted:
            support = tuple(int(tok) for tok in planted.split(","))
        spec = ProblemSpec(
            n=n,
            m=m,
            kind=kind,
            planted_support=support,
            planted_mass=mass if support else None,
            condition_target=condition_target,
            noise=noise,
        )
        problem = generate_problem(spec, _resolve_seed(seed))
        if out == "-":
            _write_json(problem_to_json(problem), None)
        else:
            save_problem(problem, out)
    except (QfitError, OSError, ValueError) as exc:
        _fail(exc)


@main.command()
@click.option("--problem", "problem_path", required=True, help="Problem file to solve.")
@click.option("--out", default=None, help="Output file (default stdout).")
def oracle(problem_path, out):
    """Classical Moore-Penrose reference solution."""
    try:
        problem = load_problem(problem_path)
        sol = classical_fit(problem)
        orig = denormalized_solution(problem, sol)
        _write_json(
            {
                "schemaVersion": 1,
                "kind": "fit-solution",
                "lambda": vector_to_json(sol.lambda_),
                "residualEnergy": sol.residual_energy,
                "fittedVector": vector_to_json(sol.fitted),
                "original": {
                    "lambda": vector_to_json(orig.lambda_),
                    "residualEnergy": orig.residual_energy,
                },
            },
            out,
        )
    except (QfitError, OSError) as exc:
        _fail(exc)


def _run_settings(t, t0, c, variant, window, epsilon) -> RunSettings:
    return RunSettings(
        clock_size=t,
        t0=_parse_auto(t0, "--t0"),
        rotation_scale=_parse_auto(c, "--c"),
        variant=variant,
        window=window,
        epsilon=epsilon,
    )


_COMMON_RUN_OPTIONS = [
    click.option("--problem", "problem_path", required=True, help="Problem file."),
    click.option("-T", "--clock-size", "t", type=int, default=1024, show_default=True,
                 help="Clock register size (power of two)."),
    click.option("--t0", default="auto", show_default=True,
                 help="Total evolution time, or 'auto'."),
    click.option("--c", default="auto", show_default=True,
                 help="Rotation constant C, or 'auto' for the mode default."),
    click.option("--variant", type=click.Choice([VARIANT_THREE_STAGE, VARIANT_FUSED]),
                 default=VARIANT_THREE_STAGE, show_default=True),
    click.option("--window", type=click.Choice([WINDOW_UNIFORM, WINDOW_SINE]),
                 default=WINDOW_UNIFORM, show_default=True),
    click.option("--shots", type=int, default=10000, show_default=True),
    click.option("--delta", type=float, default=0.1, show_default=True,
                 help="Swap-test accuracy target."),
    click.option("--epsilon", type=float, default=0.01, show_default=True,
                 help="Phase-estimation accuracy target (drives auto t0)."),
    click.option("--seed", type=int, default=None,
                 help="Master seed (default: QFIT_SEED or 0)."),
    click.option("--out", default=None, help="Output file (default stdout)."),
]


def _with_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func

    return wrap


def _config_echo(problem_path, t, t0, c, variant, window, shots, delta, epsilon, seed):
    return {
        "problem": problem_path,
        "T": t,
        "t0": t0,
        "C": c,
        "variant": variant,
        "window": window,
        "shots": shots,
        "delta": delta,
        "epsilon": epsilon,
        "seed": seed,
    }


@main.command()
@_with_options(_COMMON_RUN_OPTIONS)
def run(problem_path, t, t0, c, variant, window, shots, delta, epsilon, seed, out):
    """Prepare the fit state and estimate fit quality by swap test."""
    try:
        problem = load_problem(problem_path)
        master = _resolve_seed(seed)
        settings = _run_settings(t, t0, c, variant, window, epsilon)
        plan = SwapTestPlan(shots=shots, delta=delta, seed=derive_seed(master, STREAM_SWAP))
        report = estimate_fit_quality(problem, settings, plan)
        obj = fit_report_to_json(
            report,
            extra={
                "config": _config_echo(
                    problem_path, t, t0, c, variant, window, shots, delta, epsilon, master
                ),
                "masterSeed": master,
            },
        )
        _write_json(obj, out)
    except (QfitError, OSError) as exc:
        _fail(exc)


@main.command()
@_with_options(_COMMON_RUN_OPTIONS)
@click.option("--m-prime", type=int, required=True,
              help="Maximum number of fit functions kept.")
@click.option("--alpha", type=float, default=20.0, show_default=True,
              help="Support-sampling shot multiplier.")
@click.option("--tom-epsilon", type=float, default=0.05, show_default=True,
              help="Tomography reconstruction accuracy target.")
def learn(problem_path, t, t0, c, variant, window, shots, delta, epsilon, seed, out,
          m_prime, alpha, tom_epsilon):
    """Learn a sparse parameter vector by support sampling and tomography."""
    try:
        problem = load_problem(problem_path)
        master = _resolve_seed(seed)
        settings = _run_settings(t, t0, c, variant, window, epsilon)
        plan = SwapTestPlan(shots=shots, delta=delta, seed=derive_seed(master, STREAM_SWAP))
        report = learn_sparse_fit(
            problem,
            m_prime,
            settings,
            plan,
            master,
            alpha=alpha,
            tomography_epsilon=tom_epsilon,
        )
        config = _config_echo(
            problem_path, t, t0, c, variant, window, shots, delta, epsilon, master
        )
        config.update({"mPrime": m_prime, "alpha": alpha, "tomEpsilon": tom_epsilon})
        obj = learn_report_to_json(report, extra={"config": config, "masterSeed": master})
        _write_json(obj, out)
    except (QfitError, OSError) as exc:
        _fail(exc)


def _cost_csv(report_obj: dict) -> str:
    query = report_obj["query"]
    reps = report_obj["repetitions"]
    header = ["n", "s", "kappa", "epsilon", "delta", "mPrime", "algorithm",
              "amplitudeAmplification", "queries", "perMultiply", "perInvert",
              "chainPlain", "chainAmplified"]
    row = [query["n"], query["s"], query["kappa"], query["epsilon"], query["delta"],
           query["mPrime"], query["algorithm"], query["amplitudeAmplification"],
           report_obj["queries"], reps["perMultiply"], reps["perInvert"],
           reps["chainPlain"], reps["chainAmplified"]]
    return ",".join(header) + "\n" + ",".join(str(v) for v in row) + "\n"


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--s", type=int, required=True)
@click.option("--kappa", type=float, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--m-prime", type=int, default=1, show_default=True)
@click.option("--alg", type=click.Choice(sorted(ALGORITHM_ALIASES)), default="eq3",
              show_default=True, help="Cost formula variant.")
@click.option("--amplified/--no-amplified", default=True, show_default=True,
              help="Assume amplitude amplification where it helps.")
@click.option("--csv", "as_csv", is_flag=True, default=False,
              help="Emit a CSV header and row instead of JSON (sweep-friendly).")
@click.option("--out", default=None, help="Output file (default stdout).")
def cost(n, s, kappa, eps, delta, m_prime, alg, amplified, as_csv, out):
    """Evaluate the analytic query-cost model."""
    try:
        query = CostQuery(
            n=n,
            s=s,
            kappa=kappa,
            epsilon=eps,
            delta=delta,
            m_prime=m_prime,
            algorithm=alg,
            amplitude_amplification=amplified,
        )
        obj = cost_report_to_json(cost_model(query))
        if as_csv:
            text = _cost_csv(obj)
            if out is None or out == "-":
                click.echo(text, nl=False)
            else:
                with open(out, "w") as fh:
                    fh.write(text)
        else:
            _write_json(obj, out)
    except QfitError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
