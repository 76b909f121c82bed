"""Command line entry points.

Every command accepts --config with a JSON file of request fields; explicit
flags override the file. Request validation is shared with the HTTP service,
so a typo in a config key fails the same way in both places.
"""

from __future__ import annotations

import json
import sys

import click
from pydantic import ValidationError

from . import __version__
from .errors import DegenerateFitError, InvalidSpecError
from .harness import ALGORITHMS, NOISE_PRESETS, fit_power_law, final_regrets, load_traces
from .service import (
    ReportRequest,
    RunRequest,
    SweepRequest,
    do_report,
    do_run,
    do_sweep,
)

_ALGO_CHOICES = click.Choice(ALGORITHMS)
_NOISE_CHOICES = click.Choice(NOISE_PRESETS)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise click.ClickException(f"config file {path} must hold a JSON object")
    return data


def _merged(config_path: str | None, flags: dict) -> dict:
    merged = _load_config(config_path)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def _fail(exc: Exception) -> None:
    raise click.ClickException(str(exc))


def _parse_horizons(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise click.ClickException(f"bad --horizons value {text!r}: {exc}") from exc


@click.group()
@click.version_option(version=__version__, prog_name="pricing-lab")
def main() -> None:
    """Simulation lab for contextual pricing under atomic demand noise."""


@main.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON file of request fields")
@click.option("--algo", type=_ALGO_CHOICES, default=None)
@click.option("--noise", type=_NOISE_CHOICES, default=None)
@click.option("--d", type=int, default=None)
@click.option("--horizon", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--master-seed", type=int, default=None)
@click.option("--fixed-price", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write the full trace JSON here")
def run(config, algo, noise, d, horizon, seed, master_seed, fixed_price, out) -> None:
    """One episode; prints the trace as JSON."""
    fields = _merged(
        config,
        {
            "algo": algo,
            "noise": noise,
            "d": d,
            "horizon": horizon,
            "seed": seed,
            "master_seed": master_seed,
            "fixed_price": fixed_price,
        },
    )
    if "algo" not in fields:
        raise click.ClickException("an algorithm is required (--algo or config)")
    try:
        resp = do_run(RunRequest(**fields))
    except (ValidationError, InvalidSpecError) as exc:
        _fail(exc)
    payload = resp.model_dump()
    if out:
        with open(out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        click.echo(f"{resp.key} final_regret={resp.final_regret!r} -> {out}")
    else:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))


@main.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON file of request fields")
@click.option("--algo", "algos", type=_ALGO_CHOICES, multiple=True, help="repeatable")
@click.option("--noise", "noises", type=_NOISE_CHOICES, multiple=True, help="repeatable")
@click.option("--horizons", type=str, default=None, help="comma-separated, e.g. 500,1000,2000")
@click.option("--seeds", type=int, default=None, help="seed count, runs seeds 0..n-1")
@click.option("--d", type=int, default=None)
@click.option("--master-seed", type=int, default=None)
@click.option("--fixed-price", type=float, default=None)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--workers", type=int, default=None)
def sweep(config, algos, noises, horizons, seeds, d, master_seed, fixed_price, out, workers) -> None:
    """Horizons x seeds grid; resumable, writes manifest and traces.csv."""
    fields = _merged(
        config,
        {
            "algos": list(algos) or None,
            "noises": list(noises) or None,
            "horizons": _parse_horizons(horizons) if horizons else None,
            "seeds": seeds,
            "d": d,
            "master_seed": master_seed,
            "fixed_price": fixed_price,
            "workers": workers,
        },
    )
    fields["out"] = out
    try:
        resp = do_sweep(SweepRequest(**fields))
    except (ValidationError, InvalidSpecError) as exc:
        _fail(exc)
    done = sum(1 for v in resp.manifest["runs"].values() if v["status"] == "done")
    click.echo(f"{done}/{resp.n_runs} runs done -> {resp.traces_csv}")


@main.command()
@click.option("--input", "input_csv", type=click.Path(exists=True, dir_okay=False), required=True, help="traces.csv from a sweep")
@click.option("--algo", type=_ALGO_CHOICES, default=None, help="fit only this algorithm")
@click.option("--noise", type=_NOISE_CHOICES, default=None, help="fit only this noise")
def fit(input_csv, algo, noise) -> None:
    """Power-law fits of mean final regret against horizon, printed as JSON."""
    try:
        rows = load_traces(input_csv)
    except InvalidSpecError as exc:
        _fail(exc)
    groups = final_regrets(rows)
    selected = {
        key: by_t
        for key, by_t in sorted(groups.items())
        if (algo is None or key[0] == algo) and (noise is None or key[1] == noise)
    }
    if not selected:
        raise click.ClickException(f"no matching runs in {input_csv}")
    fits = {}
    for (a, nz), by_t in selected.items():
        means = [(t, sum(vals) / len(vals)) for t, vals in sorted(by_t.items())]
        try:
            f = fit_power_law(means)
            fits[f"{a}/{nz}"] = {
                "alpha": f.alpha,
                "c_coef": f.c_coef,
                "stderr": f.stderr,
                "n_points": f.n_points,
            }
        except DegenerateFitError as exc:
            fits[f"{a}/{nz}"] = {"error": str(exc)}
    click.echo(json.dumps(fits, indent=2, sort_keys=True))
    if all("error" in f for f in fits.values()):
        sys.exit(1)


@main.command()
@click.option("--input", "input_csv", type=click.Path(exists=True, dir_okay=False), required=True, help="traces.csv from a sweep")
@click.option("--out", type=click.Path(file_okay=False), required=True)
def report(input_csv, out) -> None:
    """Summary and figure-input CSVs for a finished sweep."""
    try:
        resp = do_report(ReportRequest(traces_csv=input_csv, out=out))
    except (ValidationError, InvalidSpecError) as exc:
        _fail(exc)
    for name, f in sorted(resp.fits.items()):
        if f is None:
            click.echo(f"{name}: no fit (single horizon or zero regret)")
        else:
            click.echo(f"{name}: regret ~ {f['c_coef']:.3g} * T^{f['alpha']:.3f} (stderr {f['stderr']:.3f})")
    click.echo(f"summary -> {resp.summary_csv}")
    click.echo(f"figure input -> {resp.figure_input_csv}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Expose the lab over HTTP (endpoints /run /sweep /fit /report)."""
    import uvicorn

    uvicorn.run("pricing_lab.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
