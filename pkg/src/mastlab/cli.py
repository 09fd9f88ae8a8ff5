"""Command line interface: ``mastlab <command> ...``

Exit status is 0 on success, 1 on data errors (bad trees, violated
preconditions, failed checks) and 2 on usage errors.
"""

from __future__ import annotations

import csv
import math
import sys
from pathlib import Path

import click

from . import bounds, sim
from .blobify import comb_leaf_count, greedy_blobification, greedy_comb_scaffold
from .mast import mast
from .random_trees import RngSeed, SameShape, Uniform, Yule, sample_tree
from .tree_core import parse_newick


class DataError(click.ClickException):
    exit_code = 1


def _read_tree(path: str):
    try:
        return parse_newick(Path(path).read_text())
    except ValueError as err:
        raise DataError(f"{path}: {err}") from err


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Maximum agreement subtrees, blobification and bound experiments."""


@cli.command()
@click.option("--model", type=click.Choice(["uniform", "yule", "same-shape"]), default="uniform")
@click.option("--n", "n", type=int, help="leaf count (uniform, yule)")
@click.option("--base", type=click.Path(exists=True, dir_okay=False), help="Newick file (same-shape)")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--count", type=int, default=1, show_default=True)
def gen(model, n, base, seed, count):
    """Print random trees in Newick format, one per line."""
    if model == "same-shape":
        if base is None:
            raise click.UsageError("--base is required for --model same-shape")
        spec = SameShape(_read_tree(base))
    else:
        if n is None:
            raise click.UsageError("--n is required")
        if n < 1:
            raise DataError("--n must be at least 1")
        spec = Uniform(n) if model == "uniform" else Yule(n)
    for i in range(count):
        click.echo(sample_tree(spec, RngSeed(seed, i)).newick)


@cli.command("mast")
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--witness", is_flag=True, help="also print a maximum agreement set")
def mast_cmd(first, second, witness):
    """Print the MAST size of two trees on the same labels."""
    t1, t2 = _read_tree(first), _read_tree(second)
    try:
        result = mast(t1, t2)
    except ValueError as err:
        raise DataError(str(err)) from err
    click.echo(result.size)
    if witness:
        click.echo(",".join(map(str, sorted(result.witness))))


@cli.command()
@click.option("--k", type=int, help="blob size parameter (default ceil(sqrt(n)))")
@click.argument("tree", type=click.Path(exists=True, dir_okay=False))
def blobify(k, tree):
    """Print the greedy k-blobification report of a tree."""
    t = _read_tree(tree)
    k = k if k is not None else max(2, math.ceil(math.sqrt(t.leaf_count)))
    try:
        click.echo(greedy_blobification(t, k).report(), nl=False)
    except ValueError as err:
        raise DataError(str(err)) from err


@cli.command()
@click.option("--k", type=int, help="blob size threshold (default ceil(sqrt(n)))")
@click.argument("tree", type=click.Path(exists=True, dir_okay=False))
def comb(k, tree):
    """Print the greedy comb scaffold vector and its leaf counts."""
    t = _read_tree(tree)
    k = k if k is not None else math.ceil(math.sqrt(t.leaf_count))
    v = greedy_comb_scaffold(t, k)
    full, conservative = comb_leaf_count(v, k)
    click.echo(f"v\t{','.join(map(str, v))}")
    click.echo(f"full\t{full}")
    click.echo(f"conservative\t{conservative}")


@cli.command("bounds")
@click.option("--n", "n", type=int, required=True)
@click.option("--s", "s", type=int, required=True)
@click.option("--lambda", "lam", type=float, default=4.0, show_default=True)
@click.option("--psi-model", type=click.Choice(["uniform"]), default=None,
              help="also report psi for this tree model")
@click.option("--format", "fmt", type=click.Choice(["csv", "table"]), default="csv", show_default=True)
def bounds_cmd(n, s, lam, psi_model, fmt):
    """Report phi(n, s), optional psi, and the lower/upper MAST bounds."""
    try:
        report = bounds.bound_report(n, s, lam, psi_model)
    except ValueError as err:
        raise DataError(str(err)) from err
    if fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(bounds.BoundReport.FIELDS)
        writer.writerow(report.row())
    else:
        for name, value in zip(bounds.BoundReport.FIELDS, report.row()):
            click.echo(f"{name:<13}{value or '-'}")


@cli.command()
@click.argument("experiment", type=click.Choice(sorted(sim.EXPERIMENTS)))
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--reps", type=int, default=None, help="replicates per leaf count")
@click.option("--n", "n_values", type=int, multiple=True, help="leaf count (repeatable)")
@click.option("--k", type=int, default=None, help="fixed k instead of ceil(sqrt(n))")
@click.option("--lambda", "lam", type=float, default=4.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="record CSV; the summary goes next to it as <stem>.summary.csv")
def exp(experiment, seed, reps, n_values, k, lam, out):
    """Run a seeded Monte Carlo experiment."""
    runner, grid = sim.EXPERIMENTS[experiment]
    defaults = {"comb-slope": 1000, "mast-sandwich": 500, "blob-intersect": 500}
    try:
        config = sim.ExperimentConfig(
            name=experiment,
            n_values=tuple(n_values) or grid,
            replicates=reps if reps is not None else defaults[experiment],
            seed=seed,
            k=k,
            lam=lam,
        )
        result = runner(config)
    except ValueError as err:
        raise DataError(str(err)) from err
    records = sim.records_csv(result.records)
    summary = sim.summary_csv(result.summary)
    if out is None:
        click.echo(records, nl=False)
        click.echo(summary, nl=False)
    else:
        path = Path(out)
        path.write_text(records, encoding="utf-8", newline="\n")
        path.with_name(path.stem + ".summary.csv").write_text(summary, encoding="utf-8", newline="\n")
        click.echo(summary, nl=False)
    if result.fit is not None:
        fit = result.fit
        click.echo(f"intercept={fit.intercept!r}")
        click.echo(f"r_squared={fit.r_squared!r}")
        click.echo(f"slope={fit.slope!r}")


@cli.command()
@click.option("--suite", type=click.Choice(["small-n"]), required=True)
@click.option("--max-n", type=int, default=6, show_default=True)
def verify(suite, max_n):
    """Run the exhaustive exact checks of the probability bounds."""
    try:
        checks, violations = bounds.exact_sweep(max_n)
    except ValueError as err:
        raise DataError(str(err)) from err
    for line in violations:
        click.echo(f"VIOLATION {line}")
    click.echo(f"checks={checks} violations={len(violations)}")
    if violations:
        sys.exit(1)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="mastlab", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
