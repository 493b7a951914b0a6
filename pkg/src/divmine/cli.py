"""Command-line entry point: mine, sample, simulate, serve."""
from __future__ import annotations

import sys
from dataclasses import replace

import click
import numpy as np

from .data import load_database
from .diversity import History, enumerate_closed
from .server import resolve_theta
from .session import (
    SessionConfig,
    count_frequent,
    records_to_csv,
    run_experiment,
)
from .xor import cdflexics_draw

VARIANTS = {
    # (discriminating-pattern pipeline, diversity-aware sampler)
    "letsip": (False, False),
    "disc": (True, False),
    "cdf": (False, True),
    "disc-cdf": (True, True),
}


@click.group()
def main():
    """Interactive diverse itemset mining toolkit."""


def _load(dataset: str):
    try:
        return load_database(dataset)
    except OSError as exc:
        raise click.ClickException(str(exc))


def _theta(value: float, db) -> int:
    try:
        theta = resolve_theta(value, db)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if theta > db.n_transactions:
        raise click.UsageError(
            f"theta {theta} exceeds the transaction count {db.n_transactions}"
        )
    return theta


def _emit_patterns(patterns, out):
    for p in patterns:
        out.write(" ".join(map(str, p.items)) + f"\t{p.support}\n")


@main.command("mine")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--theta", type=float, required=True, help="Support threshold (absolute, or relative in (0,1)).")
@click.option("--jmax", type=float, default=None, help="Diversity ceiling; implies closed enumeration with a greedy history.")
@click.option("--closed", is_flag=True, help="Enumerate closed itemsets instead of all frequent ones.")
@click.option("--limit", type=int, default=None, help="Stop after this many patterns.")
@click.option("--out", type=click.File("w"), default="-")
def cmd_mine(dataset, theta, jmax, closed, limit, out):
    """Stream frequent patterns as `items<TAB>support` lines."""
    db = _load(dataset)
    theta = _theta(theta, db)
    if jmax is not None and not 0.0 <= jmax <= 1.0:
        raise click.UsageError("jmax must lie in [0, 1]")
    if jmax is not None or closed:
        history = History() if jmax is not None else None
        patterns = enumerate_closed(
            db, theta, history=history, jmax=jmax if jmax is not None else 1.0, cap=limit
        )
        _emit_patterns(patterns, out)
    else:
        emitted = 0

        def expand(prefix, cover, start):
            nonlocal emitted
            for i in range(start, db.n_items):
                c = cover & db.cols[i]
                if c.bit_count() >= theta:
                    prefix.append(i)
                    out.write(" ".join(map(str, prefix)) + f"\t{c.bit_count()}\n")
                    emitted += 1
                    if limit is not None and emitted >= limit:
                        prefix.pop()
                        return True
                    if expand(prefix, c, i + 1):
                        prefix.pop()
                        return True
                    prefix.pop()
            return False

        expand([], db.full_cover, 0)


@main.command("sample")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--theta", type=float, required=True)
@click.option("--jmax", type=float, default=1.0)
@click.option("--n", type=int, required=True, help="Number of patterns to sample.")
@click.option("--kappa", type=float, default=0.9)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.File("w"), default="-")
def cmd_sample(dataset, theta, jmax, n, kappa, seed, out):
    """Draw n diverse patterns via XOR-cell sampling (uniform quality)."""
    db = _load(dataset)
    theta = _theta(theta, db)
    patterns = []
    m_hint = 0
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, i)))
        try:
            p, _, m_hint = cdflexics_draw(
                db, theta, jmax, lambda _: 1.0, kappa, rng, m_start=m_hint
            )
        except RuntimeError as exc:
            raise click.ClickException(f"draw {i}: {exc}")
        patterns.append(p)
    _emit_patterns(patterns, out)


@main.command("simulate")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--theta", type=float, required=True)
@click.option("--jmax", type=float, default=0.05, help="Diversity ceiling for the cdf variants.")
@click.option("--k", type=int, default=10)
@click.option("--ell", type=int, default=1)
@click.option("--eta", type=float, default=0.13)
@click.option("--agg", type=click.Choice(["linear", "exponential"]), default="exponential")
@click.option("--features", default="ITLF")
@click.option("--measure", type=click.Choice(["freq", "surp"]), default="freq")
@click.option("--iterations", type=int, default=100)
@click.option("--reps", type=int, default=10)
@click.option("--variant", type=click.Choice(sorted(VARIANTS)), default="disc-cdf")
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.File("w"), default="-")
@click.option("--plot", type=click.Path(), default=None, help="Also render regret curves to this image file.")
def cmd_simulate(dataset, theta, jmax, k, ell, eta, agg, features, measure,
                 iterations, reps, variant, seed, out, plot):
    """Run a simulated-user experiment and emit a per-iteration regret CSV."""
    db = _load(dataset)
    theta = _theta(theta, db)
    disc_enabled, diverse = VARIANTS[variant]
    cfg = SessionConfig(
        theta=theta,
        jmax=jmax if diverse else 1.0,
        k=k,
        ell=ell,
        eta=eta,
        agg_kind=agg,
        features=features,
        measure=measure,
        iterations=iterations,
        seed=seed,
        disc_enabled=disc_enabled,
    )
    try:
        records = run_experiment(db, cfg, repetitions=reps)
    except RuntimeError as exc:
        raise click.ClickException(str(exc))
    out.write(records_to_csv(records))
    if plot is not None:
        from .plotting import render_regret_figure

        render_regret_figure(records, plot, title=f"{variant} on {dataset}")


@main.command("serve")
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--dataset-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory holding dataset files (default: $DIVMINE_DATA or cwd).")
def cmd_serve(port, host, dataset_dir):
    """Serve the interactive session HTTP API."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(dataset_dir), host=host, port=port)


def entry() -> int:  # pragma: no cover - thin wrapper
    try:
        main.main(standalone_mode=True)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(entry())
