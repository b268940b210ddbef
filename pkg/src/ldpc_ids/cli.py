"""Command-line front end for the simulation harness and the analyzer.

Exit codes: 0 success, 1 configuration error, 2 numeric failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys

import click

from .codes import CodeError, build_tanner, graph_stats, load_code
from .gade import EnsembleSpec, verify_properties
from .schedules import SCHEDULE_KINDS, ScheduleConfig
from .sim import (Campaign, mc_j_gamma, report_counters, run_convergence,
                  run_fer_sweep, write_records)

EXIT_CONFIG = 1
EXIT_NUMERIC = 2


def _parse_grid(text):
    """Parse "a,b,c" lists or "start:stop:step" ranges of floats."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = parts
        if step <= 0:
            raise ValueError("range step must be positive")
        vals = []
        v = start
        while v <= stop + 1e-9:
            vals.append(round(v, 10))
            v += step
        return vals
    return [float(p) for p in text.split(",") if p.strip()]


def _load_config_file(path):
    kv = {}
    with open(path) as fh:
        for i, ln in enumerate(fh):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise ValueError(f"config line {i + 1}: expected 'key = value'")
            k, v = (s.strip() for s in ln.split("=", 1))
            kv[k.replace("-", "_")] = v
    return kv


def _merged(config_path, **flags):
    merged = dict(_load_config_file(config_path)) if config_path else {}
    for k, v in flags.items():
        if v is not None:
            merged[k] = v
    return merged


def _schedule_from(merged):
    return ScheduleConfig(
        kind=str(merged.get("schedule", "flooding")),
        gamma=float(merged.get("gamma", 0.1)),
        n_p=int(merged.get("np", 1)),
        n_g=int(merged.get("ng", 16)),
        i_max=int(merged.get("imax", 3)),
        kernel=str(merged.get("kernel", "exact")),
        selection_seed=int(merged.get("seed", 0)),
    )


def _campaign_from(merged):
    snr = merged.get("snr")
    if snr is None:
        raise ValueError("an SNR grid is required (--snr)")
    grid = _parse_grid(snr) if isinstance(snr, str) else list(snr)
    return Campaign(
        code=merged.get("code", "w1944"),
        schedules=[_schedule_from(merged)],
        snr_grid=grid,
        min_frame_errors=int(merged.get("min_errors", 100)),
        max_frames=int(merged.get("max_frames", 10 ** 6)),
        master_seed=int(merged.get("seed", 0)),
        workers=int(merged.get("workers", 1)),
        out_path=merged.get("out"),
        out_format=str(merged.get("format", "csv")),
    )


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _run(fn):
    try:
        fn()
    except (CodeError, ValueError, OSError, click.ClickException) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (ArithmeticError, FloatingPointError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)


def _common_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True),
                     default=None, help="key = value config file"),
        click.option("--code", default=None,
                     help="builtin code name or manifest path"),
        click.option("--schedule", default=None,
                     type=click.Choice(SCHEDULE_KINDS)),
        click.option("--gamma", default=None, type=float),
        click.option("--np", "np_", default=None, type=int,
                     help="parallel VN count for me_* schedules"),
        click.option("--ng", default=None, type=int,
                     help="group count for me_* schedules"),
        click.option("--imax", default=None, type=int),
        click.option("--snr", default=None,
                     help="Eb/N0 list 'a,b,c' or range 'start:stop:step'"),
        click.option("--seed", default=None, type=int),
        click.option("--workers", default=None, type=int),
        click.option("--min-errors", "min_errors", default=None, type=int),
        click.option("--max-frames", "max_frames", default=None, type=int),
        click.option("--kernel", default=None,
                     type=click.Choice(["exact", "minsum"])),
        click.option("--out", default=None, type=click.Path()),
        click.option("--format", "format_", default=None,
                     type=click.Choice(["csv", "jsonl"])),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _gather(config_path, code, schedule, gamma, np_, ng, imax, snr, seed,
            workers, min_errors, max_frames, kernel, out, format_):
    return _merged(config_path, code=code, schedule=schedule, gamma=gamma,
                   np=np_, ng=ng, imax=imax, snr=snr, seed=seed,
                   workers=workers, min_errors=min_errors,
                   max_frames=max_frames, kernel=kernel, out=out,
                   format=format_)


@click.group()
def main():
    """LDPC dynamic-schedule decoding toolkit."""


@main.command()
@_common_options
def sweep(**kw):
    """FER/BER versus SNR."""
    def body():
        campaign = _campaign_from(_gather(**kw))
        records = run_fer_sweep(campaign)
        text = write_records(records, campaign)
        if not campaign.out_path:
            click.echo(text, nl=False)
    _run(body)


@main.command()
@_common_options
def converge(**kw):
    """Per-iteration FER/BER at a fixed SNR."""
    def body():
        campaign = _campaign_from(_gather(**kw))
        _, rows = run_convergence(campaign)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["code", "schedule", "gamma",
                                                 "snr_db", "iteration",
                                                 "fer", "ber"],
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        _emit(buf.getvalue(), campaign.out_path)
    _run(body)


@main.command()
@_common_options
@click.option("--gammas", default="0.05:0.9:0.05",
              help="gamma grid, list or range")
@click.option("--frames", default=1000, type=int)
def jgamma(gammas, frames, **kw):
    """Monte Carlo J(gamma) per iteration."""
    def body():
        merged = _gather(**kw)
        merged.setdefault("snr", "2.0")
        campaign = _campaign_from(merged)
        grid = _parse_grid(gammas)
        result = mc_j_gamma(campaign.code, campaign.schedules[0],
                            campaign.snr_grid[0], grid, frames,
                            master_seed=campaign.master_seed,
                            workers=campaign.workers)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "gamma", "J_value", "n_ge_correct",
                         "n_ge_wrong"])
        for k in range(result["j"].shape[0]):
            for gi, g in enumerate(result["gammas"]):
                jv = result["j"][k, gi]
                writer.writerow([k, g,
                                 "nan" if math.isnan(jv)
                                 else format(jv, ".12g"),
                                 int(result["counts"][k, gi, 0]),
                                 int(result["counts"][k, gi, 1])])
        _emit(buf.getvalue(), campaign.out_path)
    _run(body)


@main.command()
@click.option("--dv", default=4, type=int)
@click.option("--dc", default=8, type=int)
@click.option("--snr", default="2.0", help="Eb/N0 in dB (rate 1 - dv/dc)")
@click.option("--iters", default=3, type=int)
@click.option("--gammas", default="0.05:0.9:0.05")
@click.option("--no-jacobian", is_flag=True, default=False,
              help="use the literal density without the change-of-variables "
                   "factor")
@click.option("--out", default=None, type=click.Path())
def gade(dv, dc, snr, iters, gammas, no_jacobian, out):
    """Density-evolution curves and property checks."""
    def body():
        rate = 1.0 - dv / dc
        if rate <= 0:
            raise ValueError("dv/dc imply a non-positive rate")
        ebn0 = float(_parse_grid(snr)[0])
        sigma = math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0 / 10.0)))
        report = verify_properties(EnsembleSpec(d_v=dv, d_c=dc, sigma=sigma),
                                   _parse_grid(gammas), iters,
                                   jacobian=not no_jacobian)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["iteration", "gamma",
                                                 "J_value", "F_value", "mu_v",
                                                 "mu_c", "mu_l", "mu_delta"],
                                lineterminator="\n")
        writer.writeheader()
        for row in report["rows"]:
            writer.writerow({k: format(v, ".12g") if isinstance(v, float)
                             else v for k, v in row.items()})
        _emit(buf.getvalue(), out)
        for msg in report["not_applicable"]:
            click.echo(f"note: {msg}", err=True)
        for msg in report["violations"]:
            click.echo(f"violation: {msg}", err=True)
    _run(body)


@main.command()
@_common_options
def counters(**kw):
    """Measured complexity counters versus the closed-form predictions."""
    def body():
        merged = _gather(**kw)
        merged.setdefault("min_errors", 10 ** 9)
        merged.setdefault("max_frames", 20)
        campaign = _campaign_from(merged)
        records = run_fer_sweep(campaign)
        rows = report_counters(records, campaign.code)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["schedule", "metric",
                                                 "measured", "predicted",
                                                 "deterministic", "ok"],
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format(v, ".12g") if isinstance(v, float)
                             else v for k, v in row.items()})
        _emit(buf.getvalue(), campaign.out_path)
    _run(body)


@main.command()
@click.option("--code", default="w1944")
def stats(code):
    """Graph statistics of a code."""
    def body():
        spec = load_code(code)
        info = graph_stats(build_tanner(spec.h))
        info["label"] = spec.label
        info["n_vars"] = spec.h.n_cols
        info["n_checks"] = spec.h.m_rows
        info["punctured"] = len(spec.punctured)
        info["k_info"] = spec.k_info
        info["rate_tx"] = spec.rate_tx
        click.echo(json.dumps(info, indent=2, sort_keys=True))
    _run(body)


if __name__ == "__main__":
    main()
