"""
Command-line front end.

Every subcommand validates its inputs before computing, then writes one
artifact atomically (CSV or JSON) that starts with a metadata header: tool
version, the request echo and the displacement strategy used.

Usage:
    bhd single --r 0.085 --alpha-sweep 0:3:0.01
    bhd multicopy --r 0.085 --n-list 1,10,20,21 --objective success
    bhd overhead --r 0.085 --targets 0.6,0.7,0.8,0.9
    bhd ideal --r 0.085 --n-list 1,10,100,1000
    bhd link --loss-db 40 --squeezing-db 6 --target-error 1e-2
    bhd montecarlo --variance 0.8437 --count 1000000 --seed 1 --out sqz.bin
    bhd ingest --in sqz.bin --summary
    bhd trace --coh-seed 1 --sqz-seed 2 --r 0.085 --alpha 1.501 --checkpoints 1,10,100
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import click

from . import __version__
from .exceptions import BHDError, ConvergenceError, NonFiniteError, SampleFormatError, ValidationError
from .ideal import ALPHA_STRATEGY, ideal_avg_posterior, ideal_error_prob, overhead
from .link import LinkScenario, acquisition_time, effective_hypotheses, error_curve, log_grid, required_samples
from .multicopy import optimize_multicopy_posterior, optimize_multicopy_success
from .samples import (
    default_checkpoints,
    generate_samples,
    ingest,
    posterior_trace,
    quantize,
    summarize,
    write_samples,
)
from .single import (
    optimal_displacement_success,
    optimize_single_posterior,
    single_report,
    single_success,
)
from .states import variance_of_r

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3
EXIT_IO = 4


# ------------------------------------------------------------------- parsing

def parse_sweep(text: str, field: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a single number."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ValidationError(f"{field}: expected start:stop:step, got {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) != 3:
        raise ValidationError(f"{field}: expected start:stop:step, got {text!r}")
    start, stop, step = nums
    if not (step > 0 and stop >= start) or not all(map(math.isfinite, nums)):
        raise ValidationError(f"{field}: need finite start <= stop and step > 0, got {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n > 10**6:
        raise ValidationError(f"{field}: sweep of {n} points is too large")
    return [round(start + i * step, 12) for i in range(n)]


def parse_float_list(text: str, field: str) -> list[float]:
    try:
        out = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"{field}: expected comma-separated numbers, got {text!r}") from None
    if not out or not all(map(math.isfinite, out)):
        raise ValidationError(f"{field}: expected finite comma-separated numbers, got {text!r}")
    return out


def parse_int_list(text: str, field: str) -> list[int]:
    if ":" in text:
        vals = parse_sweep(text, field)
    else:
        vals = parse_float_list(text, field)
    if any(v != int(v) or v < 1 for v in vals):
        raise ValidationError(f"{field}: expected positive integers, got {text!r}")
    return [int(v) for v in vals]


def _require_r(r: float, field: str = "--r") -> float:
    if not (math.isfinite(r) and r >= 0):
        raise ValidationError(f"{field}: squeezing parameter must be finite and >= 0, got {r}")
    return r


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    cfg = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"--config: cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"--config: line {lineno} is not key = value: {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key] = value
    return cfg


# -------------------------------------------------------------------- output

def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(fmt: str, meta: dict, columns: list[str], rows: list[list], record: dict | None = None) -> str:
    if fmt == "json":
        data = record if record is not None else [
            {c: _jsonable(v) for c, v in zip(columns, row)} for row in rows
        ]
        return json.dumps({"meta": meta, "data": data}, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_atomic(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    if not path.parent.is_dir():
        raise OSError(f"--out: directory {path.parent} does not exist")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def make_meta(ctx: click.Context, alpha_strategy: str, **extra) -> dict:
    params = {k: v for k, v in sorted(ctx.params.items()) if k not in ("out", "fmt")}
    meta = {
        "tool": "binary_homodyne",
        "version": __version__,
        "subcommand": ctx.info_name,
        "request": params,
        "alpha_strategy": alpha_strategy,
    }
    meta.update(extra)
    return meta


def out_options(default_format: str = "csv"):
    def deco(f):
        f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=default_format,
                         show_default=True, help="Output format.")(f)
        f = click.option("--out", default="-", show_default=True, help="Output file, '-' for stdout.")(f)
        return f
    return deco


# ------------------------------------------------------------------ commands

@click.group()
@click.version_option(__version__, prog_name="bhd")
def cli():
    """Binary homodyne detection of squeezing: discrimination, baselines, link budgets."""


@cli.command()
@click.option("--r", "r", type=float, help="Squeezing parameter r (variance e^-2r).")
@click.option("--r-sweep", help="start:stop:step sweep of r with optimized displacements.")
@click.option("--alpha-sweep", help="start:stop:step sweep of the displacement.")
@click.option("--alpha", type=float, help="Single displacement value.")
@out_options()
@click.pass_context
def single(ctx, r, r_sweep, alpha_sweep, alpha, out, fmt):
    """Single-copy statistics vs displacement, or optimal values vs r."""
    if r_sweep is not None:
        if r is not None or alpha_sweep or alpha is not None:
            raise ValidationError("--r-sweep excludes --r, --alpha and --alpha-sweep")
        rs = [_require_r(x, "--r-sweep") for x in parse_sweep(r_sweep, "--r-sweep")]
        cols = ["r", "alpha_posterior", "avg_posterior", "alpha_success", "success", "alpha_success_closed_form"]
        rows = []
        for x in rs:
            a_post, post = optimize_single_posterior(x)
            succ, a_succ = single_success(x)
            rows.append([x, a_post, post, a_succ, succ, optimal_displacement_success(x)])
        meta = make_meta(ctx, "optimized per r (posterior and success separately)")
        write_atomic(out, render(fmt, meta, cols, rows))
        return

    if r is None:
        raise ValidationError("--r is required")
    _require_r(r)
    if alpha_sweep and alpha is not None:
        raise ValidationError("--alpha and --alpha-sweep are mutually exclusive")
    if alpha_sweep:
        alphas = parse_sweep(alpha_sweep, "--alpha-sweep")
        strategy = "fixed sweep"
    elif alpha is not None:
        alphas = [alpha]
        strategy = "fixed"
    else:
        alphas = [optimize_single_posterior(r)[0]]
        strategy = "posterior-optimal"
    if any(a < 0 for a in alphas):
        raise ValidationError("--alpha: displacement must be >= 0")

    a_post, post = optimize_single_posterior(r)
    succ, a_succ = single_success(r)
    cols = ["alpha", "p_plus_coh", "p_plus_sqz", "delta_pi", "avg_posterior", "success"]
    rows = []
    for a in alphas:
        rep = single_report(r, a)
        rows.append([rep.alpha, rep.p_plus_coh, rep.p_plus_sqz, rep.delta_pi, rep.avg_posterior, rep.success_prob])
    meta = make_meta(
        ctx, strategy,
        optimum={"alpha_posterior": a_post, "avg_posterior": post, "alpha_success": a_succ,
                 "success": succ, "alpha_success_closed_form": optimal_displacement_success(r)},
    )
    write_atomic(out, render(fmt, meta, cols, rows))


@cli.command()
@click.option("--r", "r", type=float, required=True)
@click.option("--n-list", required=True, help="Comma list (or start:stop:step) of copy numbers N.")
@click.option("--objective", type=click.Choice(["posterior", "success"]), default="posterior", show_default=True)
@out_options()
@click.pass_context
def multicopy(ctx, r, n_list, objective, out, fmt):
    """Optimized multi-copy posterior or success probability per N."""
    _require_r(r)
    ns = parse_int_list(n_list, "--n-list")
    rows = []
    if objective == "posterior":
        cols = ["N", "alpha", "avg_posterior"]
        for n in ns:
            a, p = optimize_multicopy_posterior(n, r)
            rows.append([n, a, p])
        strategy = "per-N posterior-optimal displacement"
    else:
        cols = ["N", "alpha", "tau", "accept_min_k", "success", "error"]
        for n in ns:
            a, tau, p = optimize_multicopy_success(n, r)
            rows.append([n, a, tau, tau + 1, p, 1.0 - p])
        strategy = "per-N jointly optimal (displacement, threshold); squeezed iff k > tau"
    write_atomic(out, render(fmt, make_meta(ctx, strategy), cols, rows))


@cli.command(name="overhead")
@click.option("--r", "r", required=True, help="Squeezing parameter(s), comma list.")
@click.option("--targets", required=True, help="Comma list of target average posteriors.")
@out_options(default_format="json")
@click.pass_context
def overhead_cmd(ctx, r, targets, out, fmt):
    """Binary-vs-ideal sample overhead needed to reach the same posterior."""
    rs = [_require_r(x) for x in parse_float_list(r, "--r")]
    ts = parse_float_list(targets, "--targets")
    for x in rs:
        if x <= 0:
            raise ValidationError("--r: overhead needs r > 0")
    for t in ts:
        if not 0.55 < t < 0.999:
            raise ValidationError(f"--targets: {t} outside the supported range (0.55, 0.999)")
    cols = ["r", "target_posterior", "n_bhd", "n_ideal", "ratio"]
    rows = []
    for x in rs:
        for t in ts:
            res = overhead(t, x)
            rows.append([x, t, res.n_bhd, res.n_ideal, res.ratio])
    write_atomic(out, render(fmt, make_meta(ctx, ALPHA_STRATEGY), cols, rows))


@cli.command()
@click.option("--r", "r", type=float, required=True)
@click.option("--n-list", required=True, help="Comma list (or start:stop:step) of sample numbers N.")
@out_options()
@click.pass_context
def ideal(ctx, r, n_list, out, fmt):
    """Ideal homodyne posterior and success next to the optimized binary detector."""
    _require_r(r)
    ns = parse_int_list(n_list, "--n-list")
    cols = ["N", "ideal_avg_posterior", "ideal_success", "bhd_alpha_posterior", "bhd_avg_posterior",
            "bhd_alpha_success", "bhd_success"]
    rows = []
    for n in ns:
        a_p, p = optimize_multicopy_posterior(n, r)
        a_s, _, s = optimize_multicopy_success(n, r)
        rows.append([n, ideal_avg_posterior(n, r), 1.0 - ideal_error_prob(n, r), a_p, p, a_s, s])
    strategy = "BHD: per-N posterior-optimal and per-N success-optimal displacement"
    write_atomic(out, render(fmt, make_meta(ctx, strategy), cols, rows))


@cli.command()
@click.option("--config", "config", help="Flat key = value scenario file; flags override it.")
@click.option("--loss-db", type=float)
@click.option("--squeezing-db", type=float)
@click.option("--target-error", type=float)
@click.option("--rate-hz", type=float)
@click.option("--link-time-s", type=float)
@click.option("--curve-points", type=int, default=0, show_default=True,
              help="Also emit the error-vs-N curve with this many points per decade.")
@out_options(default_format="json")
@click.pass_context
def link(ctx, config, loss_db, squeezing_db, target_error, rate_hz, link_time_s, curve_points, out, fmt):
    """Samples needed to certify squeezing through a lossy link."""
    cfg: dict[str, object] = dict(read_config(config)) if config else {}
    for key, value in (("loss_db", loss_db), ("squeezing_db_in", squeezing_db), ("target_error", target_error),
                       ("sample_rate_hz", rate_hz), ("link_time_s", link_time_s)):
        if value is not None:
            cfg[key] = value
    scenario = LinkScenario.from_mapping(cfg)
    if curve_points < 0:
        raise ValidationError("--curve-points must be >= 0")

    vc, vs = effective_hypotheses(scenario)
    n = required_samples(scenario)
    t, fits = acquisition_time(n, scenario)
    record = {
        "scenario": scenario.as_dict(),
        "coh_variance": vc,
        "sqz_variance": vs,
        "required_samples": n,
        "acquisition_time_s": t,
        "fits_link": fits,
    }
    curve = []
    if curve_points:
        grid = log_grid(1, max(10, 10 * n), curve_points)
        curve = [[m, e] for m, e in error_curve(scenario, grid)]
        record["curve"] = [{"N": m, "error": e} for m, e in curve]
    meta = make_meta(ctx, "jointly optimal (displacement, threshold) minimum-error rule")
    if fmt == "json":
        text = render(fmt, meta, [], [], record=record)
    else:
        meta["result"] = {k: v for k, v in record.items() if k != "curve"}
        text = render(fmt, meta, ["N", "error"], curve)
    write_atomic(out, text)


@cli.command()
@click.option("--variance", type=float, required=True)
@click.option("--count", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--quantize-scale", type=float, help="Store as 16-bit counts with this many counts per unit.")
@click.option("--out", required=True, help="Payload path; the sidecar goes to <out>.json.")
@click.pass_context
def montecarlo(ctx, variance, count, seed, quantize_scale, out):
    """Generate a reproducible synthetic sample file."""
    if not variance > 0:
        raise ValidationError("--variance must be > 0")
    if count < 1:
        raise ValidationError("--count must be >= 1")
    if quantize_scale is not None and not quantize_scale > 0:
        raise ValidationError("--quantize-scale must be > 0")
    path = Path(out)
    if not path.parent.is_dir():
        raise OSError(f"--out: directory {path.parent} does not exist")
    s = generate_samples(variance, count, seed)
    if quantize_scale is not None:
        s = quantize(s, quantize_scale, 16)
    desc = f"bhd {__version__} montecarlo variance={variance!r} count={count} seed={seed}"
    write_samples(s, path, description=desc)


@cli.command(name="ingest")
@click.option("--in", "in_path", required=True, help="Payload path (sidecar at <in>.json).")
@click.option("--summary/--samples", default=True, show_default=True,
              help="Emit summary statistics or the samples themselves.")
@out_options(default_format="json")
@click.pass_context
def ingest_cmd(ctx, in_path, summary, out, fmt):
    """Read a sample file and report it in shot-noise units."""
    s = ingest(in_path)
    meta = make_meta(ctx, "none")
    if summary:
        info = summarize(s)
        text = render(fmt, meta, list(info), [list(info.values())],
                      record=info if fmt == "json" else None)
    else:
        text = render(fmt, meta, ["index", "x"], [[i, float(x)] for i, x in enumerate(s.samples)])
    write_atomic(out, text)


@cli.command()
@click.option("--coh-file")
@click.option("--coh-seed", type=int)
@click.option("--sqz-file")
@click.option("--sqz-seed", type=int)
@click.option("--r", "r", type=float, required=True)
@click.option("--alpha", type=float, required=True)
@click.option("--checkpoints", help="Comma list of N; default 1,2,5,... up to --count.")
@click.option("--count", type=int, default=10**6, show_default=True,
              help="Samples to synthesize per seeded set.")
@out_options()
@click.pass_context
def trace(ctx, coh_file, coh_seed, sqz_file, sqz_seed, r, alpha, checkpoints, count, out, fmt):
    """Posterior of the true hypothesis vs number of binarized samples."""
    _require_r(r)
    if (coh_file is None) == (coh_seed is None):
        raise ValidationError("give exactly one of --coh-file, --coh-seed")
    if (sqz_file is None) == (sqz_seed is None):
        raise ValidationError("give exactly one of --sqz-file, --sqz-seed")
    if checkpoints:
        cps = parse_int_list(checkpoints, "--checkpoints")
    else:
        if count < 1:
            raise ValidationError("--count must be >= 1")
        cps = default_checkpoints(count)
    n_need = max(cps)
    coh = ingest(coh_file) if coh_file else generate_samples(1.0, n_need, coh_seed)
    sqz = ingest(sqz_file) if sqz_file else generate_samples(variance_of_r(r), n_need, sqz_seed)
    t_coh, t_sqz = posterior_trace(coh, sqz, r, alpha, cps)
    cols = ["N", "posterior_coh_trace", "posterior_sqz_trace"]
    rows = [[n, pc, ps] for n, pc, ps in zip(t_coh.N, t_coh.posterior, t_sqz.posterior)]
    write_atomic(out, render(fmt, make_meta(ctx, "fixed"), cols, rows))


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="bhd", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        exc.show()
        return EXIT_VALIDATION
    except (ValidationError, SampleFormatError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except (ConvergenceError, NonFiniteError, ArithmeticError, BHDError) as exc:
        click.echo(f"computation failed: {exc}", err=True)
        return EXIT_COMPUTATION
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_IO
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
