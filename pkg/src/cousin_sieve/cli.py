"""Command-line interface for cousin-sieve."""

import functools
import os
import sys
from pathlib import Path
from typing import Optional, Tuple

import click
import structlog
from pydantic import ValidationError

from .config.logging import configure_logging
from .config.settings import CONFIG_FILE_ENV, get_settings
from .core.bounds import (
    bounds_from_w,
    descent_chain,
    figure_series,
    tl2_check,
    w_recurrence_check,
    w_sequence,
)
from .core.errors import CousinSieveError
from .core.lemmas import run_suite, unconditional_failures
from .core.operators import d_total, expansion_check, reconcile_range
from .core.primes import count_cousin_pairs, list_cousin_pairs, sieve_odd_bitmap
from .models.schemas import SCHEMA_VERSION, LemmaId, OutputFormat
from .storage.prime_cache import PrimeCache, reset_prime_cache
from .utils.figure import write_figure
from .utils.formatting import render, render_json

logger = structlog.get_logger(__name__)

SWEEP_COLUMNS = ("lemma_id", "kind", "instances_checked", "out_of_domain", "failures", "range")


def handle_errors(func):
    """Turn library errors into ``Error: ...`` on stderr and exit status 2."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CousinSieveError, ValidationError) as e:
            logger.debug("Command failed", error=str(e))
            click.echo(f"Error: {e}", err=True)
            sys.exit(2)

    return wrapper


def _emit(ctx: click.Context, records, columns=None) -> None:
    click.echo(render(records, ctx.obj["format"], columns))


@click.group()
@click.option("--format", "output_format",
              type=click.Choice([f.value for f in OutputFormat]),
              default=None, help="Output format (default: from configuration)")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key=value configuration file")
@click.option("--cache", "cache_path", type=click.Path(dir_okay=False),
              help="Prime-cache file to read, or to write with 'cache build'")
@click.option("--workers", type=int, default=None, help="Worker processes for sweeps")
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.pass_context
def cli(ctx: click.Context, output_format: Optional[str], config_path: Optional[str],
        cache_path: Optional[str], workers: Optional[int], debug: bool):
    """Cousin-prime sieve: counting, formula reconciliation and lemma sweeps."""
    if config_path:
        os.environ[CONFIG_FILE_ENV] = config_path
    if cache_path:
        os.environ["CACHE_PATH"] = cache_path
    if debug:
        os.environ["DEBUG"] = "true"
    get_settings.cache_clear()
    reset_prime_cache()

    try:
        settings = get_settings()
    except ValidationError as e:
        click.echo(f"Error: invalid configuration: {e}", err=True)
        sys.exit(2)

    configure_logging()
    ctx.obj = {
        "format": output_format or settings.output_format,
        "workers": workers or settings.max_workers,
    }


@cli.command()
@click.argument("n", type=int)
@click.option("--oracle-only", is_flag=True, help="Print only the sieve count")
@click.option("--reconcile", is_flag=True, help="Exit 1 unless the formula matches the oracle")
@click.option("--all-pairs", is_flag=True, help="Count (3, 7) too (with --oracle-only)")
@click.pass_context
@handle_errors
def count(ctx: click.Context, n: int, oracle_only: bool, reconcile: bool, all_pairs: bool):
    """Count cousin pairs up to N and compare with the D(n) formula."""
    if all_pairs and not oracle_only:
        raise click.UsageError("--all-pairs only applies with --oracle-only")

    if oracle_only:
        value = count_cousin_pairs(n, exclude_3_7=not all_pairs)
        _emit(ctx, {
            "schema_version": SCHEMA_VERSION,
            "n": n,
            "exclude_3_7": not all_pairs,
            "d_oracle": value,
        })
        return

    report = d_total(n)
    _emit(ctx, report)
    if reconcile and not report.reconciled:
        click.echo(f"Not reconciled at n={n}", err=True)
        sys.exit(1)


@cli.command()
@click.argument("n", type=int)
@click.option("--all-pairs", is_flag=True, help="Include (3, 7)")
@click.pass_context
@handle_errors
def pairs(ctx: click.Context, n: int, all_pairs: bool):
    """List cousin pairs whose lower member is at most N."""
    found = list_cousin_pairs(n, exclude_3_7=not all_pairs)
    if ctx.obj["format"] == "json":
        click.echo(render_json({
            "schema_version": SCHEMA_VERSION,
            "n": n,
            "count": len(found),
            "pairs": [p.model_dump() for p in found],
        }))
    else:
        _emit(ctx, found, ("lo", "hi"))


def _parse_lemma_ids(ids: Tuple[str, ...]) -> list:
    if not ids or any(i.lower() == "all" for i in ids):
        return list(LemmaId)
    try:
        return [LemmaId(i.upper()) for i in ids]
    except ValueError as e:
        valid = ", ".join(lid.value for lid in LemmaId)
        raise click.BadParameter(f"{e}; choose from {valid} or all")


@cli.command()
@click.argument("lemma_ids", nargs=-1)
@click.option("--m-max", type=int, help="Override the m range of the selected sweeps")
@click.option("--p-max", type=int, help="Override the prime range of the selected sweeps")
@click.option("--factor", type=int, help="Override the m <= factor * p^2 range")
@click.option("--json-out", type=click.Path(dir_okay=False), help="Write the full report here")
@click.pass_context
@handle_errors
def verify(ctx: click.Context, lemma_ids: Tuple[str, ...], m_max: Optional[int],
           p_max: Optional[int], factor: Optional[int], json_out: Optional[str]):
    """Sweep properties and lemmas (P1-P6, L1, L3, L32, L4, L5 or all)."""
    ids = _parse_lemma_ids(lemma_ids)
    flags = {"m_max": m_max, "p_max": p_max, "factor": factor}
    flags = {k: v for k, v in flags.items() if v is not None}
    overrides = {lid.value: flags for lid in ids} if flags else None

    reports = run_suite(ids, overrides, ctx.obj["workers"])

    if json_out:
        Path(json_out).write_text(render_json(reports) + "\n", encoding="utf-8")
        logger.info("Wrote sweep report", path=json_out)

    if ctx.obj["format"] == "json":
        click.echo(render_json(reports))
    else:
        rows = [
            {
                "lemma_id": r.lemma_id.value,
                "kind": "unconditional" if r.unconditional else "claim",
                "instances_checked": r.instances_checked,
                "out_of_domain": r.out_of_domain,
                "failures": len(r.failures),
                "range": r.range_description,
            }
            for r in reports
        ]
        _emit(ctx, rows, SWEEP_COLUMNS)

    for r in reports:
        if not r.unconditional and not r.ok:
            click.echo(
                f"WARNING: claim {r.lemma_id.value} has {len(r.failures)} counterexample(s)",
                err=True,
            )

    broken = unconditional_failures(reports)
    if broken:
        names = ", ".join(r.lemma_id.value for r in broken)
        click.echo(f"FAILED: unconditional properties {names}", err=True)
        sys.exit(1)


@cli.command()
@click.argument("v_max", type=int)
@click.pass_context
@handle_errors
def bound(ctx: click.Context, v_max: int):
    """Print W(v), D'(v) and the recurrence check for v = 4..V_MAX."""
    rows = []
    for v, w in w_sequence(v_max):
        d_lower_floor, d_prime = bounds_from_w(w)
        rows.append({
            "schema_version": SCHEMA_VERSION,
            "v": v,
            "w": f"{w.numerator}/{w.denominator}",
            "w_num": w.numerator,
            "w_den": w.denominator,
            "d_prime": d_prime,
            "d_lower_floor": d_lower_floor,
            "recurrence_ok": w_recurrence_check(v).passed,
        })
    _emit(ctx, rows, None if ctx.obj["format"] == "json" else
          ("v", "w", "d_prime", "d_lower_floor", "recurrence_ok"))


@cli.command()
@click.argument("n", type=int)
@click.pass_context
@handle_errors
def tl2(ctx: click.Context, n: int):
    """Check the floor lower bound and descent chain at N."""
    check = tl2_check(n)
    _emit(ctx, check)
    if ctx.obj["format"] == "table":
        chain = descent_chain(n)
        steps = " -> ".join(f"{m} (p={p})" for p, m in chain.steps)
        click.echo(f"\nchain: {n} -> {steps}; floor/6 = {chain.d0_lower}")
    if not check.passed:
        click.echo(f"WARNING: bound exceeds the oracle count at n={n}", err=True)


@cli.command()
@click.option("--vmax", "v_max", type=int, required=True, help="Largest prime index")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default="cousin_figure.csv",
              show_default=True)
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default="cousin_figure.svg",
              show_default=True)
@click.pass_context
@handle_errors
def figure(ctx: click.Context, v_max: int, csv_path: str, svg_path: str):
    """Write the actual-count versus D' series as CSV and SVG."""
    points = figure_series(v_max)
    written = write_figure(points, Path(csv_path), Path(svg_path))
    click.echo(f"Wrote {len(points)} rows to {', '.join(str(p) for p in written)}")

    below = [p.v for p in points if p.d_actual < p.d_prime]
    if below:
        click.echo(f"WARNING: actual count below D' at v={below}", err=True)


@cli.group()
def cache():
    """Build or inspect the binary prime cache."""


def _cache_file() -> PrimeCache:
    path = get_settings().cache_path
    if path is None:
        raise click.UsageError("no cache path: pass --cache or set CACHE_PATH")
    return PrimeCache(path)


@cache.command("build")
@click.option("--limit", type=int, default=None, help="Inclusive bound (default: sieve_limit)")
@handle_errors
def cache_build(limit: Optional[int]):
    """Sieve up to LIMIT and write the cache file."""
    limit = limit or get_settings().sieve_limit
    store = _cache_file()
    size = store.write(limit, sieve_odd_bitmap(limit, use_cache=False))
    reset_prime_cache()
    click.echo(f"Wrote {store.path} (limit {limit}, {size} bytes)")


@cache.command("info")
@click.pass_context
@handle_errors
def cache_info(ctx: click.Context):
    """Describe the cache file."""
    info = _cache_file().info()
    _emit(ctx, {"schema_version": SCHEMA_VERSION, **info})


@cli.command()
@click.argument("lo", type=int)
@click.argument("hi", type=int)
@click.pass_context
@handle_errors
def reconcile(ctx: click.Context, lo: int, hi: int):
    """Check d_formula = d_oracle for every n in LO..HI."""
    checked, mismatches = reconcile_range(lo, hi)
    click.echo(f"checked {checked} values of n, {len(mismatches)} mismatch(es)", err=True)
    if mismatches:
        _emit(ctx, mismatches)
        sys.exit(1)


@cli.command("expansion-check")
@click.argument("lo", type=int)
@click.argument("hi", type=int)
@click.pass_context
@handle_errors
def expansion_check_cmd(ctx: click.Context, lo: int, hi: int):
    """Check expansion d0 = simulated d0 for every n in LO..HI."""
    checked, mismatches = expansion_check(lo, hi)
    click.echo(f"checked {checked} values of n, {len(mismatches)} mismatch(es)", err=True)
    if mismatches:
        rows = [{"n": n, "expansion": e, "simulation": s} for n, e, s in mismatches]
        if ctx.obj["format"] == "json":
            click.echo(render_json({"schema_version": SCHEMA_VERSION, "mismatches": rows}))
        else:
            _emit(ctx, rows)
        sys.exit(1)


def main():
    """Main entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
