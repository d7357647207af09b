"""Parameter-plane scans and F(0,0) = 0 boundary tracing.

Scans evaluate the closed-form F00 of a catalog model on a grid (vectorized
fast path) and classify each cell; a deterministic 1% sample of cells is
re-checked through the generic reduction as a consistency audit. Boundary
tracing runs scanline root-finding along the second axis.
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import lienard, models

BOUNDARY_TOL = 1e-10
VERDICT_NAMES = {0: "Invalid", 1: "LimitCycleCandidate",
                 2: "IsochronousCentreCandidate", 3: "StableFocusCandidate"}


class UnknownParameter(Exception):
    pass


class NoSignChange(Exception):
    pass


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int

    def values(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class SweepGrid:
    model: str
    axis1: Axis
    axis2: Axis
    F00: np.ndarray  # (n1, n2), NaN on invalid cells
    verdict: np.ndarray  # (n1, n2) int8 codes per VERDICT_NAMES
    audit_max_rel_err: float

    def to_csv(self, path):
        v1 = self.axis1.values()
        v2 = self.axis2.values()
        with open(path, "w") as fh:
            fh.write("p1,p2,F00,verdict\n")
            for i, p1 in enumerate(v1):
                for j, p2 in enumerate(v2):
                    fh.write(
                        f"{p1:.17g},{p2:.17g},{self.F00[i, j]:.17g},"
                        f"{VERDICT_NAMES[int(self.verdict[i, j])]}\n"
                    )


@dataclass
class BoundaryCurve:
    model: str
    axis1: Axis
    axis2: Axis
    points: list  # ordered (p1, p2) on F00 = 0
    residuals: list  # |F00| at each point

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("p1,p2,F00_residual\n")
            for (p1, p2), res in zip(self.points, self.residuals):
                fh.write(f"{p1:.17g},{p2:.17g},{res:.17g}\n")


def _check_params(model, names):
    schema = models.catalog()
    if model not in schema:
        raise UnknownParameter(f"unknown model {model!r}")
    for n in names:
        if n not in schema[model]:
            raise UnknownParameter(f"{n!r} is not a parameter of {model}; "
                                   f"known: {sorted(schema[model])}")


def closed_form_F00(model, params):
    """Vectorized closed-form F00; returns (F00, valid) arrays.

    params maps parameter name -> scalar or broadcastable array.
    """
    p = {k: np.asarray(v, dtype=float) for k, v in params.items()}
    if model == "brusselator":
        mu, a, beta = p["mu"], p["a"], p["beta"]
        alpha, b = p["alpha"], p["b"]
        a1 = mu * (1.0 - beta) * a + mu * beta
        with np.errstate(all="ignore"):
            F00 = -b + a1**2 / alpha**2 + alpha
            bound = np.where(beta != 1.0, beta / (1.0 - beta), np.inf)
            consistent = np.where(mu > 0, a < bound, a > bound)
            valid = (a1 > 0) & (alpha > 0) & (b > 0) & consistent
    elif model == "glycolytic":
        a, b = p["a"], p["b"]
        with np.errstate(all="ignore"):
            w2 = a + b**2
            F00 = w2 + (a - b**2) / w2
            valid = (a >= 0) & (b > 0) & (w2 > 0)
    elif model == "vanderpol":
        eps, a, omega = p["epsilon"], p["a"], p["omega"]
        F00 = -eps * a**2
        valid = np.isfinite(eps) & (omega > 0)
    else:
        raise UnknownParameter(f"unknown model {model!r}")
    F00 = np.where(valid, F00, np.nan)
    return F00, valid


def _cell_params(model, fixed_params, axis1, axis2, p1, p2):
    params = dict(models.catalog()[model])
    params.update(fixed_params)
    params[axis1.name] = p1
    params[axis2.name] = p2
    return params


def _classify_F00(F00, valid, band=lienard.DEFAULT_BAND):
    verdict = np.full(F00.shape, 0, dtype=np.int8)
    verdict[valid & (F00 < -band)] = 1
    verdict[valid & (np.abs(F00) <= band)] = 2
    verdict[valid & (F00 > band)] = 3
    return verdict


def grid_scan(model, fixed_params, axis1, axis2, audit_fraction=0.01,
              audit_cap=400, workers=None):
    """Classify every cell of the (axis1, axis2) plane.

    Cells violating model invariants are marked Invalid. A deterministic
    pseudo-random sample of valid cells is re-derived via the generic
    reduction and compared against the closed form.
    """
    for ax in (axis1, axis2):
        if ax.count < 2:
            raise ValueError(f"axis {ax.name}: resolution must be >= 2")
        if ax.count > 4096:
            raise ValueError(f"axis {ax.name}: resolution must be <= 4096")
    _check_params(model, [axis1.name, axis2.name] + list(fixed_params))
    v1 = axis1.values()
    v2 = axis2.values()
    P1, P2 = np.meshgrid(v1, v2, indexing="ij")
    params = dict(models.catalog()[model])
    params.update(fixed_params)
    params[axis1.name] = P1
    params[axis2.name] = P2

    n_workers = workers or int(os.environ.get("LIENARD_LAB_THREADS", "0")) or 1
    if n_workers > 1:
        chunks = np.array_split(np.arange(axis1.count), n_workers)
        F00 = np.empty_like(P1)
        valid = np.empty(P1.shape, dtype=bool)

        def run(rows):
            sub = {
                k: (v[rows] if isinstance(v, np.ndarray) and v.shape == P1.shape else v)
                for k, v in params.items()
            }
            return rows, closed_form_F00(model, sub)

        with concurrent.futures.ThreadPoolExecutor(n_workers) as pool:
            for rows, (f, va) in pool.map(run, [c for c in chunks if len(c)]):
                F00[rows] = f
                valid[rows] = va
    else:
        F00, valid = closed_form_F00(model, params)

    verdict = _classify_F00(F00, valid)

    # consistency audit through the generic reduction
    rng = np.random.default_rng(20260823)
    flat_valid = np.flatnonzero(valid.ravel())
    n_audit = min(max(1, int(audit_fraction * flat_valid.size)), audit_cap)
    max_err = 0.0
    if flat_valid.size:
        picks = rng.choice(flat_valid, size=min(n_audit, flat_valid.size), replace=False)
        for flat in np.sort(picks):
            i, j = divmod(int(flat), axis2.count)
            cell = _cell_params(model, fixed_params, axis1, axis2, v1[i], v2[j])
            try:
                field, transform, closed = models.build(model, **cell)
            except models.InvalidParams:
                continue
            lf = lienard.reduce(field, transform)
            roots = lienard.steady_states(lf)
            z_s = min(roots, key=lambda z: abs(z - closed.z_s))
            got, _, _, _ = lienard.damping_and_restoring(lf, z_s)
            err = abs(got - F00[i, j]) / (1.0 + abs(F00[i, j]))
            max_err = max(max_err, err)
        if max_err > 1e-9:
            raise RuntimeError(
                f"audit failed: generic reduction disagrees with closed form "
                f"(max rel err {max_err:g})"
            )
    return SweepGrid(model=model, axis1=axis1, axis2=axis2, F00=F00,
                     verdict=verdict, audit_max_rel_err=max_err)


def trace_boundary(model, fixed_params, axis1, axis2):
    """Scanline roots of F00 = 0: for each axis1 sample, bracket sign changes
    along axis2 and refine each to BOUNDARY_TOL. Points ordered by
    (axis1, axis2)."""
    _check_params(model, [axis1.name, axis2.name] + list(fixed_params))
    points = []
    residuals = []
    for p1 in axis1.values():
        samples = axis2.values()

        def f(p2):
            cell = _cell_params(model, fixed_params, axis1, axis2, p1, p2)
            val, ok = closed_form_F00(model, cell)
            return float(val) if ok else np.nan

        vals = np.array([f(s) for s in samples])
        for j in range(len(samples) - 1):
            va, vb = vals[j], vals[j + 1]
            if np.isnan(va) or np.isnan(vb) or va == 0.0 or va * vb > 0:
                continue
            root = brentq(f, samples[j], samples[j + 1], xtol=1e-14, rtol=8.9e-16)
            res = abs(f(root))
            if res <= BOUNDARY_TOL:
                points.append((float(p1), float(root)))
                residuals.append(res)
        # endpoint exactly zero
        for j, s in enumerate(samples):
            if vals[j] == 0.0:
                points.append((float(p1), float(s)))
                residuals.append(0.0)
    if not points:
        raise NoSignChange(
            f"F00 does not change sign along {axis2.name} anywhere in the box"
        )
    order = np.lexsort(([p[1] for p in points], [p[0] for p in points]))
    points = [points[i] for i in order]
    residuals = [residuals[i] for i in order]
    return BoundaryCurve(model=model, axis1=axis1, axis2=axis2,
                         points=points, residuals=residuals)


# --- deterministic SVG rendering --------------------------------------------

_SVG_HEAD = (
    '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" '
    'width="800" height="600">\n'
    "<style>.lc{fill:#9ecae1}.ic{fill:#ffffbf}.sf{fill:#fdae6b}"
    ".inv{fill:#eeeeee}.bnd{fill:none;stroke:#d62728;stroke-width:2}"
    ".axis{stroke:#000;stroke-width:1}.lbl{font:12px monospace}</style>\n"
)
_MARGIN = 60.0
_PLOT_W = 800.0 - 2 * _MARGIN
_PLOT_H = 600.0 - 2 * _MARGIN


def _to_px(axis1, axis2, p1, p2):
    fx = (p1 - axis1.lo) / (axis1.hi - axis1.lo)
    fy = (p2 - axis2.lo) / (axis2.hi - axis2.lo)
    return _MARGIN + fx * _PLOT_W, 600.0 - _MARGIN - fy * _PLOT_H


def _svg_axes(axis1, axis2, title):
    parts = [
        f'<line class="axis" x1="{_MARGIN:g}" y1="{600 - _MARGIN:g}" '
        f'x2="{800 - _MARGIN:g}" y2="{600 - _MARGIN:g}"/>\n',
        f'<line class="axis" x1="{_MARGIN:g}" y1="{_MARGIN:g}" '
        f'x2="{_MARGIN:g}" y2="{600 - _MARGIN:g}"/>\n',
        f'<text class="lbl" x="400" y="592">{axis1.name} '
        f"[{axis1.lo:g}, {axis1.hi:g}]</text>\n",
        f'<text class="lbl" x="8" y="300">{axis2.name} '
        f"[{axis2.lo:g}, {axis2.hi:g}]</text>\n",
        f'<text class="lbl" x="{_MARGIN:g}" y="40">{title}</text>\n',
    ]
    return "".join(parts)


def grid_to_svg(grid):
    cls = {0: "inv", 1: "lc", 2: "ic", 3: "sf"}
    v1 = grid.axis1.values()
    v2 = grid.axis2.values()
    w = _PLOT_W / (len(v1) - 1)
    h = _PLOT_H / (len(v2) - 1)
    parts = [_SVG_HEAD, _svg_axes(grid.axis1, grid.axis2, f"{grid.model}: F(0,0) sign map")]
    for i, p1 in enumerate(v1):
        for j, p2 in enumerate(v2):
            x, y = _to_px(grid.axis1, grid.axis2, p1, p2)
            parts.append(
                f'<rect class="{cls[int(grid.verdict[i, j])]}" '
                f'x="{x - w / 2:.2f}" y="{y - h / 2:.2f}" '
                f'width="{w:.2f}" height="{h:.2f}"/>\n'
            )
    parts.append("</svg>\n")
    return "".join(parts)


def curve_to_svg(curve):
    parts = [_SVG_HEAD, _svg_axes(curve.axis1, curve.axis2,
                                  f"{curve.model}: F(0,0) = 0 boundary")]
    pts = " ".join(
        "{:.2f},{:.2f}".format(*_to_px(curve.axis1, curve.axis2, p1, p2))
        for p1, p2 in curve.points
    )
    parts.append(f'<polyline class="bnd" points="{pts}"/>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def export(payload, fmt, path):
    """Write a SweepGrid or BoundaryCurve as csv or svg."""
    if fmt == "csv":
        payload.to_csv(path)
    elif fmt == "svg":
        text = grid_to_svg(payload) if isinstance(payload, SweepGrid) else curve_to_svg(payload)
        with open(path, "w") as fh:
            fh.write(text)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path
