"""Numerical oracle: trajectories, Poincare sections, cycle detection,
period measurement and the isochronicity test.

Everything here is independent of the analytic classification path; verdicts
come from measured crossing amplitudes of the integrated flow only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .vecfield import evaluate, jacobian_at


class IntegrationError(Exception):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


class NoCrossings(Exception):
    pass


class CycleKind(enum.Enum):
    LIMIT_CYCLE = "LimitCycle"
    SPIRAL_IN = "SpiralIn"
    SPIRAL_OUT = "SpiralOut"
    CENTRE_LIKE = "CentreLike"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    t_end: float = None  # None lets detect_cycle pick from the local frequency
    dense_output: bool = True

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1e-3:
            raise ValueError(f"rel_tol must be in (0, 1e-3), got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")


@dataclass
class Trajectory:
    times: np.ndarray  # strictly increasing accepted-step times
    states: np.ndarray  # (n+1, 2)
    dense: np.ndarray  # (n, 5, 2) interpolant coefficients

    @property
    def t0(self):
        return self.times[0]

    @property
    def t_end(self):
        return self.times[-1]

    def __call__(self, t):
        """Dense-output state at scalar or array time(s) in [t0, t_end]."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(
            np.searchsorted(self.times, t_arr, side="right") - 1,
            0,
            len(self.times) - 2,
        )
        h = self.times[idx + 1] - self.times[idx]
        theta = (t_arr - self.times[idx]) / h
        d = self.dense[idx]  # (k, 5, 2)
        th = theta[:, None]
        out = d[:, 0] + th * (
            d[:, 1] + (1.0 - th) * (d[:, 2] + th * (d[:, 3] + (1.0 - th) * d[:, 4]))
        )
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def to_csv(self, path):
        """header t,x,y; one row per accepted step, 17 significant digits."""
        with open(path, "w") as fh:
            fh.write("t,x,y\n")
            for t, (x, y) in zip(self.times, self.states):
                fh.write(f"{t:.17g},{x:.17g},{y:.17g}\n")


@dataclass(frozen=True)
class CycleReport:
    kind: CycleKind
    period: float = None
    amplitude: float = None
    convergence_ratio: float = None
    crossings_used: int = 0
    seed_amplitudes: tuple = ()  # converged r* per seed (None where not converged)
    detail: str = ""

    def to_text(self):
        lines = [f"kind = {self.kind.value}"]
        lines.append(f"period = {self.period!r}")
        lines.append(f"amplitude = {self.amplitude!r}")
        lines.append(f"convergence_ratio = {self.convergence_ratio!r}")
        lines.append(f"crossings_used = {self.crossings_used}")
        lines.append(f"seed_amplitudes = {list(self.seed_amplitudes)}")
        if self.detail:
            lines.append(f"detail = {self.detail}")
        return "\n".join(lines) + "\n"


def _compile_field(field):
    """Monomial tables as flat arrays for the stepping kernel."""
    def flatten(table):
        keys = sorted(table)
        c = np.array([table[k] for k in keys], dtype=float)
        n = np.array([k[0] for k in keys], dtype=np.int64)
        m = np.array([k[1] for k in keys], dtype=np.int64)
        return c, n, m

    tx = {k: v for k, v in field.monomials_x().items() if v != 0.0}
    ty = {k: v for k, v in field.monomials_y().items() if v != 0.0}
    if not tx:
        tx = {(0, 0): 0.0}
    if not ty:
        ty = {(0, 0): 0.0}
    return (*flatten(tx), *flatten(ty))


def integrate(field, x0, y0, cfg, t0=0.0, max_steps=5_000_000):
    """Adaptive DP54 trajectory of the field from (x0, y0) over [t0, t_end]."""
    if cfg.t_end is None or not cfg.t_end > 0:
        raise ValueError("cfg.t_end must be a positive time span")
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise NonFiniteState("initial state must be finite")
    cx, nx, mx, cy, ny, my = _compile_field(field)
    max_step = cfg.max_step if math.isfinite(cfg.max_step) else cfg.t_end
    ts, ys, dense, n, status = _kernels.integrate_dp54(
        cx, nx, mx, cy, ny, my,
        float(x0), float(y0), float(t0), float(t0 + cfg.t_end),
        cfg.rel_tol, cfg.abs_tol, float(max_step), max_steps,
        _kernels._A, _kernels._B, _kernels._E, _kernels._D,
    )
    if status == _kernels.STATUS_UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t = {ts[-1]:g}")
    if status == _kernels.STATUS_NONFINITE:
        raise NonFiniteState(f"state became non-finite near t = {ts[-1]:g}")
    if status == _kernels.STATUS_MAXSTEPS:
        raise IntegrationError(f"exceeded {max_steps} steps at t = {ts[-1]:g}")
    return Trajectory(times=ts.copy(), states=ys.copy(), dense=dense.copy())


def poincare_crossings(traj, fixed_point, direction=(1.0, 0.0)):
    """Transversal crossings of the ray from fixed_point along direction.

    Returns [(t, (x, y), distance)] with a single consistent crossing
    orientation (that of the first transversal crossing). Crossing times are
    root-refined on the dense interpolant.
    """
    fpx, fpy = fixed_point
    dx, dy = direction
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise ValueError("direction must be a nonzero vector")
    dx, dy = dx / norm, dy / norm

    rel = traj.states - np.array([fpx, fpy])
    s = -dy * rel[:, 0] + dx * rel[:, 1]  # perpendicular coordinate
    along = dx * rel[:, 0] + dy * rel[:, 1]

    def s_of_t(t):
        x, y = traj(t)
        return -dy * (x - fpx) + dx * (y - fpy)

    out = []
    orientation = 0
    tol = 1e-10 * max(traj.t_end - traj.t0, 1.0)
    for i in range(len(s) - 1):
        if s[i] == 0.0 or s[i] * s[i + 1] > 0.0:
            continue
        a, b = traj.times[i], traj.times[i + 1]
        try:
            tc = brentq(s_of_t, a, b, xtol=tol, rtol=1e-15)
        except ValueError:
            continue
        x, y = traj(tc)
        dist = dx * (x - fpx) + dy * (y - fpy)
        if dist <= 0.0:
            continue
        sign = 1 if s[i + 1] > s[i] else -1
        if orientation == 0:
            orientation = sign
        if sign != orientation:
            continue
        out.append((tc, (x, y), dist))
    if not out:
        raise NoCrossings("trajectory never crosses the section ray")
    return out


def _period_guess(field, fixed_point):
    j = jacobian_at(field, *fixed_point)
    eig = np.linalg.eigvals(j)
    im = max(abs(eig[0].imag), abs(eig[1].imag))
    if im > 1e-12:
        return 2.0 * math.pi / im
    det = eig[0].real * eig[1].real
    if det > 0:
        return 2.0 * math.pi / math.sqrt(det)
    return None


def _crossing_series(field, seed, fixed_point, cfg, direction, need, max_tries=3):
    """Integrate until the section is crossed at least `need` times."""
    t_guess = _period_guess(field, fixed_point)
    if cfg.t_end is not None:
        t_end = cfg.t_end
    elif t_guess is not None:
        t_end = 1.5 * need * t_guess
    else:
        t_end = 100.0
    last_exc = None
    for _ in range(max_tries):
        traj = integrate(
            field, seed[0], seed[1],
            IntegratorConfig(
                rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                max_step=cfg.max_step, t_end=t_end,
            ),
        )
        try:
            crossings = poincare_crossings(traj, fixed_point, direction)
        except NoCrossings as exc:
            last_exc = exc
            crossings = []
        if len(crossings) >= need:
            return traj, crossings
        t_end *= 2.0
    if last_exc is not None and not crossings:
        raise last_exc
    return traj, crossings


def _observe_seed(field, seed, fixed_point, cfg, direction,
                  cycle_tol, centre_band, window, discard, max_doublings=4):
    """Crossing-amplitude statistics for one seed.

    The observation horizon doubles until the amplitude series has either
    converged, settled into a steady drift (a genuine spiral), or the
    attempt budget runs out. Returns None when crossings are unavailable.
    """
    need = discard + window + 2
    stats = None
    prev_rho = None
    for _ in range(max_doublings + 1):
        try:
            _, crossings = _crossing_series(
                field, seed, fixed_point, cfg, direction, need
            )
        except (NoCrossings, IntegrationError):
            return None
        if len(crossings) < need:
            return None
        r = np.array([c[2] for c in crossings])
        t = np.array([c[0] for c in crossings])
        rw = r[-window:]
        rstar = float(np.mean(rw))
        converged = bool(np.max(np.abs(rw - rstar)) <= cycle_tol * rstar)
        ratios = r[-window:] / r[-window - 1: -1]
        rho = float(np.median(ratios))
        stats = {
            "rstar": rstar,
            "converged": converged,
            "rho": rho,
            "period": float(np.mean(np.diff(t[-window - 1:]))),
            "n_crossings": len(crossings),
            "r0": float(r[0]),
        }
        if converged:
            break
        steady_drift = (
            abs(rho - 1.0) > centre_band
            and prev_rho is not None
            and abs(rho - 1.0) >= 0.8 * abs(prev_rho - 1.0)
        )
        if steady_drift:
            break
        prev_rho = rho
        need *= 2
    return stats


def detect_cycle(
    field,
    fixed_point,
    seeds,
    cfg=IntegratorConfig(),
    direction=(1.0, 0.0),
    cycle_tol=1e-3,
    centre_band=2e-3,
    window=10,
    discard=10,
):
    """Classify the flow near fixed_point from the crossing-amplitude series.

    Each seed is integrated until the section ray has been crossed
    discard + window times; the verdict uses the last `window` crossing
    distances r_k. Inconclusive is returned in-band, never raised.
    """
    per_seed = [
        _observe_seed(field, seed, fixed_point, cfg, direction,
                      cycle_tol, centre_band, window, discard)
        for seed in seeds
    ]

    if any(p is None for p in per_seed) or not per_seed:
        return CycleReport(
            kind=CycleKind.INCONCLUSIVE,
            detail="insufficient crossings for at least one seed",
            seed_amplitudes=tuple(p["rstar"] if p else None for p in per_seed),
        )

    rstars = np.array([p["rstar"] for p in per_seed])
    rhos = np.array([p["rho"] for p in per_seed])
    mean_rho = float(np.mean(rhos))
    crossings_used = int(sum(p["n_crossings"] for p in per_seed))
    mean_period = float(np.mean([p["period"] for p in per_seed]))
    spread = float((rstars.max() - rstars.min()) / np.mean(rstars))

    all_converged = all(p["converged"] for p in per_seed)
    common_rstar = spread <= 2.0 * cycle_tol
    ratio_flat = bool(np.max(np.abs(rhos - 1.0)) <= centre_band)

    if all_converged and common_rstar and len(per_seed) >= 2:
        return CycleReport(
            kind=CycleKind.LIMIT_CYCLE,
            period=mean_period,
            amplitude=float(np.mean(rstars)),
            convergence_ratio=mean_rho,
            crossings_used=crossings_used,
            seed_amplitudes=tuple(rstars),
        )
    if ratio_flat and not common_rstar:
        return CycleReport(
            kind=CycleKind.CENTRE_LIKE,
            period=mean_period,
            convergence_ratio=mean_rho,
            crossings_used=crossings_used,
            seed_amplitudes=tuple(rstars),
            detail="seed-dependent steady amplitude",
        )
    if mean_rho < 1.0 - centre_band:
        kind = CycleKind.SPIRAL_IN
    elif mean_rho > 1.0 + centre_band:
        kind = CycleKind.SPIRAL_OUT
    else:
        return CycleReport(
            kind=CycleKind.INCONCLUSIVE,
            convergence_ratio=mean_rho,
            crossings_used=crossings_used,
            seed_amplitudes=tuple(rstars),
            detail="ratio in centre band but amplitudes neither common nor seed-split",
        )
    return CycleReport(
        kind=kind,
        period=mean_period,
        convergence_ratio=mean_rho,
        crossings_used=crossings_used,
        seed_amplitudes=tuple(rstars),
    )


def detect_cycle_robust(field, fixed_point, seeds, cfg=IntegratorConfig(), **kwargs):
    """detect_cycle at cfg tolerances and at 100x tighter; (report, tight, robust)."""
    report = detect_cycle(field, fixed_point, seeds, cfg, **kwargs)
    tight_cfg = IntegratorConfig(
        rel_tol=cfg.rel_tol / 100.0,
        abs_tol=cfg.abs_tol / 100.0,
        max_step=cfg.max_step,
        t_end=cfg.t_end,
    )
    tight = detect_cycle(field, fixed_point, seeds, tight_cfg, **kwargs)
    return report, tight, report.kind == tight.kind


def measure_period(field, seed, fixed_point, cfg=IntegratorConfig(),
                   direction=(1.0, 0.0), window=10, discard=5):
    """(period, standard_error) from the last `window` crossing intervals."""
    need = discard + window + 1
    _, crossings = _crossing_series(field, seed, fixed_point, cfg, direction, need)
    if len(crossings) < window + 1:
        raise NoCrossings(
            f"only {len(crossings)} crossings, need {window + 1}"
        )
    t = np.array([c[0] for c in crossings])
    intervals = np.diff(t)[-window:]
    period = float(np.mean(intervals))
    stderr = float(np.std(intervals, ddof=1) / math.sqrt(len(intervals)))
    return period, stderr


def isochronicity_test(field, fixed_point, amplitudes, cfg=IntegratorConfig(),
                       direction=(1.0, 0.0), iso_tol=0.01, seed_fn=None):
    """Measure T(A) over the amplitude list and its halved copy.

    Isochronous iff the relative period spread is <= iso_tol AND halving all
    amplitudes shrinks the spread (first-order phase flow is amplitude-free).
    Returns (table, verdict) with table rows (A, T, stderr) for both passes.
    """
    if len(amplitudes) < 3:
        raise ValueError("need at least 3 amplitudes")
    fpx, fpy = fixed_point
    if seed_fn is None:
        def seed_fn(amp):
            return (fpx + amp * direction[0], fpy + amp * direction[1])

    def spread_of(amps):
        rows = []
        for amp in amps:
            period, stderr = measure_period(field, seed_fn(amp), fixed_point, cfg, direction)
            rows.append((amp, period, stderr))
        periods = np.array([r[1] for r in rows])
        return rows, float((periods.max() - periods.min()) / periods.mean())

    table, spread = spread_of(amplitudes)
    table_half, spread_half = spread_of([0.5 * amp for amp in amplitudes])
    isochronous = spread <= iso_tol and spread_half < spread
    return {
        "table": table,
        "table_halved": table_half,
        "spread": spread,
        "spread_halved": spread_half,
        "isochronous": isochronous,
    }
