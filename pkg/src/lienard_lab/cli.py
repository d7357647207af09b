"""Command-line frontend.

Exit codes: 0 ok, 1 usage/parse error, 2 invalid model (omega^2 <= 0),
3 integrator failure, 4 unsupported truncation template, 5 no boundary
sign change.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click
import numpy as np

from . import lienard, models, rg, sim, sweep, vecfield

EXIT_USAGE = 1
EXIT_INVALID_MODEL = 2
EXIT_INTEGRATOR = 3
EXIT_UNSUPPORTED = 4
EXIT_NO_BOUNDARY = 5


def _fail(code, msg):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _parse_params(pairs):
    out = {}
    for pair in pairs:
        if "=" not in pair:
            _fail(EXIT_USAGE, f"--param expects k=v, got {pair!r}")
        key, _, val = pair.partition("=")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            _fail(EXIT_USAGE, f"--param {key}: {val!r} is not a number")
    return out


def _load_model(model, file, params):
    """Returns (field, transform_or_None, closed_or_None, name)."""
    if (model is None) == (file is None):
        _fail(EXIT_USAGE, "exactly one of --model / --file is required")
    if model is not None:
        try:
            field, transform, closed = models.build(model, **params)
        except models.InvalidParams as exc:
            _fail(EXIT_USAGE, str(exc))
        return field, transform, closed, model
    try:
        field = vecfield.parse_model(Path(file).read_text())
    except OSError as exc:
        _fail(EXIT_USAGE, f"cannot read {file}: {exc}")
    except vecfield.ParseError as exc:
        _fail(EXIT_USAGE, str(exc))
    if params:
        _fail(EXIT_USAGE, "--param applies to --model presets only")
    return field, None, None, field.name or Path(file).stem


def _reduce_user_field(field):
    """Pick a transform for a user-supplied field: z = x, u follows dx."""
    a0, a1, a2 = field.linear_x
    f = field.nonlinear_x
    if not f and a2 != 0.0:
        # dx is linear: z = x works, u = dx
        return lienard.make_transform(field, alpha=(a0, a1, a2), beta=(0.0, 1.0, 0.0))
    b0, b1, b2 = field.linear_y
    if not field.nonlinear_y and b1 != 0.0:
        return lienard.make_transform(field, alpha=(b0, b1, b2), beta=(0.0, 0.0, 1.0))
    # last resort: z = x + y if the nonlinearities cancel
    lin = (a0 + b0, a1 + b1, a2 + b2)
    return lienard.make_transform(field, alpha=lin, beta=(0.0, 1.0, 1.0))


def _classified(field, transform, closed):
    lf = lienard.reduce(field, transform)
    roots = lienard.steady_states(lf)
    if closed is not None:
        z_s = min(roots, key=lambda z: abs(z - closed.z_s))
    else:
        z_s = roots[0]
    return lf, z_s, lienard.classify(lf, z_s)


@click.group()
def main():
    """Lienard reduction, classification and numerical verification of
    planar polynomial kinetic systems."""


@main.command("models")
def cmd_models():
    """List the built-in model catalog with parameter schemas."""
    for name, schema in models.catalog().items():
        pretty = ", ".join(f"{k}={v}" for k, v in schema.items())
        click.echo(f"{name}: {pretty}")


@main.command("classify")
@click.option("--model", default=None, help="catalog preset name")
@click.option("--file", default=None, type=click.Path(), help="model file path")
@click.option("--param", multiple=True, help="preset parameter override k=v (repeatable)")
@click.option("--confirm", is_flag=True, help="also run the numeric cycle detector")
@click.option("--tol", default=1e-9, show_default=True, help="integrator relative tolerance for --confirm")
def cmd_classify(model, file, param, confirm, tol):
    """Reduce to Lienard form and print the A table, F(0,0) and verdict."""
    params = _parse_params(param)
    field, transform, closed, name = _load_model(model, file, params)
    try:
        if transform is None:
            transform = _reduce_user_field(field)
        lf, z_s, cls = _classified(field, transform, closed)
    except (lienard.TransformError, lienard.NoRealRoot) as exc:
        _fail(EXIT_INVALID_MODEL, str(exc))
    click.echo(lienard.report(lf, cls), nl=False)
    if confirm:
        fp = closed.fixed_point if closed is not None else None
        if fp is None:
            fps = vecfield.find_fixed_points(field, (-10, 10, -10, 10), grid=9)
            if not fps:
                _fail(EXIT_INTEGRATOR, "no fixed point found for --confirm")
            fp = (fps[0].x, fps[0].y)
        amp = 0.1 * (1.0 + abs(fp[0]) + abs(fp[1]))
        seeds = [(fp[0] + 0.5 * amp, fp[1]), (fp[0] + 1.5 * amp, fp[1])]
        try:
            report = sim.detect_cycle(
                field, fp, seeds, sim.IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-2)
            )
        except sim.IntegrationError as exc:
            _fail(EXIT_INTEGRATOR, str(exc))
        click.echo(report.to_text(), nl=False)
    if cls.verdict is lienard.Verdict.INVALID:
        sys.exit(EXIT_INVALID_MODEL)


@main.command("simulate")
@click.option("--model", default=None)
@click.option("--file", default=None, type=click.Path())
@click.option("--param", multiple=True)
@click.option("--seed", default=None, help="initial state x,y")
@click.option("--t-end", default=100.0, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--out", default=".", type=click.Path(), show_default=True)
@click.option("--format", "fmt", default="csv",
              type=click.Choice(["csv", "svg", "both"]), show_default=True)
def cmd_simulate(model, file, param, seed, t_end, tol, out, fmt):
    """Integrate a trajectory; write CSV and/or an SVG phase portrait."""
    params = _parse_params(param)
    field, transform, closed, name = _load_model(model, file, params)
    if seed is None:
        if closed is not None:
            x0, y0 = models.seed_at_amplitude(name, closed, 0.5)
        else:
            x0, y0 = 1.0, 0.0
    else:
        try:
            x0, y0 = (float(v) for v in seed.split(","))
        except ValueError:
            _fail(EXIT_USAGE, f"--seed expects x,y; got {seed!r}")
    cfg = sim.IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-2, t_end=t_end)
    try:
        traj = sim.integrate(field, x0, y0, cfg)
    except sim.IntegrationError as exc:
        _fail(EXIT_INTEGRATOR, str(exc))
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        path = outdir / f"{name}_trajectory.csv"
        traj.to_csv(path)
        written.append(str(path))
    if fmt in ("svg", "both"):
        path = outdir / f"{name}_phase.svg"
        path.write_text(_phase_svg(traj, name))
        written.append(str(path))
    summary = "n/a"
    if closed is not None:
        fp = closed.fixed_point
        amps = [c[2] for c in _safe_crossings(traj, fp)]
        if amps:
            seeds = [(fp[0], fp[1] + 0.5 * amps[-1]), (fp[0], fp[1] + 1.5 * amps[-1])]
            if name == "vanderpol":
                seeds = [(0.5 * amps[-1], 0.0), (1.5 * amps[-1], 0.0)]
            report = sim.detect_cycle(field, fp, seeds, cfg)
            summary = report.kind.value
    click.echo(f"wrote {', '.join(written)}; cycle check: {summary}")


def _safe_crossings(traj, fp):
    try:
        return sim.poincare_crossings(traj, fp)
    except sim.NoCrossings:
        return []


def _phase_svg(traj, title):
    xs, ys = traj.states[:, 0], traj.states[:, 1]
    pad_x = 0.05 * (xs.max() - xs.min() + 1e-12)
    pad_y = 0.05 * (ys.max() - ys.min() + 1e-12)
    ax1 = sweep.Axis("x", xs.min() - pad_x, xs.max() + pad_x, 2)
    ax2 = sweep.Axis("y", ys.min() - pad_y, ys.max() + pad_y, 2)
    pts = " ".join(
        "{:.2f},{:.2f}".format(*sweep._to_px(ax1, ax2, x, y)) for x, y in zip(xs, ys)
    )
    return (
        sweep._SVG_HEAD
        + sweep._svg_axes(ax1, ax2, f"{title}: phase portrait")
        + f'<polyline class="bnd" points="{pts}"/>\n</svg>\n'
    )


@main.command("rg")
@click.option("--model", default=None)
@click.option("--file", default=None, type=click.Path())
@click.option("--param", multiple=True)
@click.option("--lam", default=0.05, show_default=True, help="book-keeping lambda")
@click.option("--compare", is_flag=True,
              help="table of RG-series vs numeric error over 5 periods")
@click.option("--amplitude", default=0.1, show_default=True)
def cmd_rg(model, file, param, lam, compare, amplitude):
    """Print the amplitude/phase flow for a supported truncation."""
    params = _parse_params(param)
    field, transform, closed, name = _load_model(model, file, params)
    try:
        if transform is None:
            transform = _reduce_user_field(field)
        lf, z_s, _ = _classified(field, transform, closed)
        te = rg.truncate(lf, z_s, lam=lam)
    except rg.UnsupportedTruncation as exc:
        _fail(EXIT_UNSUPPORTED, str(exc))
    except (lienard.TransformError, lienard.NoRealRoot) as exc:
        _fail(EXIT_INVALID_MODEL, str(exc))
    fl = rg.flow(te)
    click.echo(rg.flow_report(te, fl), nl=False)
    if compare:
        tfield = rg.truncated_field(te)
        period = 2.0 * np.pi / te.omega
        cfg = sim.IntegratorConfig(t_end=5.0 * period)
        traj = sim.integrate(tfield, amplitude, 0.0, cfg)
        ts = np.linspace(0.0, 5.0 * period, 201)
        errs = [
            abs(rg.rg_solution(te, amplitude, 0.0, t) - traj(t)[0]) for t in ts
        ]
        click.echo("t_over_T,abs_error")
        for t, e in zip(ts[::20], errs[::20]):
            click.echo(f"{t / period:.2f},{e:.6e}")
        click.echo(f"max_error = {max(errs):.6e}")


def _parse_axes(spec):
    try:
        parts = spec.split(",")
        axes = []
        for part in parts:
            name, lo, hi, n = part.split(":")
            axes.append(sweep.Axis(name, float(lo), float(hi), int(n)))
        if len(axes) != 2:
            raise ValueError
        return axes
    except ValueError:
        _fail(EXIT_USAGE, f"--axes expects p1:lo:hi:n,p2:lo:hi:n; got {spec!r}")


@main.command("sweep")
@click.option("--model", required=True)
@click.option("--param", multiple=True, help="fixed parameter k=v")
@click.option("--axes", required=True, help="p1:lo:hi:n,p2:lo:hi:n")
@click.option("--out", default=".", type=click.Path(), show_default=True)
@click.option("--format", "fmt", default="both",
              type=click.Choice(["csv", "svg", "both"]), show_default=True)
def cmd_sweep(model, param, axes, out, fmt):
    """Grid scan + boundary trace of F(0,0) over a parameter plane."""
    fixed = _parse_params(param)
    axis1, axis2 = _parse_axes(axes)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        grid = sweep.grid_scan(model, fixed, axis1, axis2)
        curve = sweep.trace_boundary(model, fixed, axis1, axis2)
    except sweep.UnknownParameter as exc:
        _fail(EXIT_USAGE, str(exc))
    except sweep.NoSignChange as exc:
        _fail(EXIT_NO_BOUNDARY, str(exc))
    written = []
    formats = ["csv", "svg"] if fmt == "both" else [fmt]
    for f in formats:
        written.append(sweep.export(grid, f, outdir / f"{model}_grid.{f}"))
        written.append(sweep.export(curve, f, outdir / f"{model}_boundary.{f}"))
    click.echo(
        f"wrote {', '.join(str(w) for w in written)}; "
        f"boundary points: {len(curve.points)}"
    )


def _config_path(fig):
    return resources.files("lienard_lab") / "configs" / f"{fig}.json"


@main.command("reproduce")
@click.option("--fig", default=None, help="figure config name (e.g. fig2)")
@click.option("--all", "run_all", is_flag=True, help="run every shipped config")
@click.option("--out", default="figures", type=click.Path(), show_default=True)
@click.pass_context
def cmd_reproduce(ctx, fig, run_all, out):
    """Re-run the checked-in figure reproduction configs."""
    cfg_dir = resources.files("lienard_lab") / "configs"
    names = sorted(p.name[:-5] for p in cfg_dir.iterdir() if p.name.endswith(".json"))
    if run_all:
        targets = names
    elif fig is not None:
        if fig not in names:
            _fail(EXIT_USAGE, f"unknown figure {fig!r}; known: {names}")
        targets = [fig]
    else:
        _fail(EXIT_USAGE, "pass --fig <name> or --all; known: " + ", ".join(names))
    for name in targets:
        spec = json.loads((cfg_dir / f"{name}.json").read_text())
        outdir = str(Path(out) / name)
        click.echo(f"[{name}] {spec['description']}")
        args = dict(spec["args"])
        args["out"] = outdir
        cmd = {"simulate": cmd_simulate, "sweep": cmd_sweep}[spec["command"]]
        ctx.invoke(cmd, **args)


if __name__ == "__main__":
    main()
