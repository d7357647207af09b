"""Built-in oscillator catalog with closed-form reductions.

Each constructor returns (field, transform_or_None, ClosedForm). The closed
forms double as golden references for the generic reduction pipeline
(verify_reduction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import lienard
from .lienard import make_transform
from .vecfield import PolyVectorField


class InvalidParams(Exception):
    pass


class MismatchBeyondTolerance(Exception):
    def __init__(self, quantity, rel_err):
        self.quantity = quantity
        self.rel_err = rel_err
        super().__init__(f"{quantity}: relative error {rel_err:g} > 1e-12")


@dataclass(frozen=True)
class BrusselatorParams:
    mu: float = 1.0
    a: float = 1.0
    beta: float = 0.6
    alpha: float = 2.0
    b: float = 2.5

    @property
    def a1(self):
        return self.mu * (1.0 - self.beta) * self.a + self.mu * self.beta


@dataclass(frozen=True)
class GlycolyticParams:
    a: float = 0.11  # rate of non-catalyzed side steps
    b: float = 0.6  # ATP influx


@dataclass(frozen=True)
class VdPParams:
    epsilon: float = 0.1
    a: float = 0.5
    omega: float = 1.0


@dataclass(frozen=True)
class ClosedForm:
    z_s: float
    F00: float
    omega_sq: float
    lc_condition: bool
    radius: float = None  # RG cycle radius where available
    fixed_point: tuple = None  # (x_s, y_s)
    hopf_boundary: float = None  # residual of the boundary identity


def brusselator(p):
    """dx = a1 + x^2*y - (alpha + b)*x, dy = b*x - x^2*y.

    Transform z = x + y, u = a1 - alpha*x. Closed forms:
    z_s = (alpha/a1^2)(b*a1 + a1^3/alpha^2), F00 = -b + a1^2/alpha^2 + alpha,
    omega^2 = a1^2/alpha; limit-cycle condition a1^2 < (b - alpha)*alpha^2.
    """
    if isinstance(p, dict):
        p = BrusselatorParams(**p)
    a1 = p.a1
    if not a1 > 0:
        raise InvalidParams(f"a1 = mu*(1-beta)*a + mu*beta must be > 0, got {a1}")
    if not (p.alpha > 0 and p.b > 0):
        raise InvalidParams("alpha and b must be > 0")
    if p.beta != 1.0:
        bound = p.beta / (1.0 - p.beta)
        if p.mu > 0 and not p.a < bound:
            raise InvalidParams(
                f"mu > 0 requires a < beta/(1-beta) = {bound:g}, got a = {p.a}"
            )
        if p.mu < 0 and not p.a > bound:
            raise InvalidParams(
                f"mu < 0 requires a > beta/(1-beta) = {bound:g}, got a = {p.a}"
            )
    field = PolyVectorField(
        linear_x=(a1, -(p.alpha + p.b), 0.0),
        linear_y=(0.0, p.b, 0.0),
        nonlinear_x={(2, 1): 1.0},
        nonlinear_y={(2, 1): -1.0},
        max_degree=4,
        name="brusselator",
    )
    transform = make_transform(field, alpha=(a1, -p.alpha, 0.0), beta=(0.0, 1.0, 1.0))
    z_s = (p.alpha / a1**2) * (p.b * a1 + a1**3 / p.alpha**2)
    F00 = -p.b + a1**2 / p.alpha**2 + p.alpha
    omega_sq = a1**2 / p.alpha
    x_s = a1 / p.alpha
    closed = ClosedForm(
        z_s=z_s,
        F00=F00,
        omega_sq=omega_sq,
        lc_condition=a1**2 < (p.b - p.alpha) * p.alpha**2,
        fixed_point=(x_s, p.b / x_s),
        hopf_boundary=a1**2 - (p.b - p.alpha) * p.alpha**2,
    )
    return field, transform, closed


def glycolytic(p):
    """dx = -x + (a + x^2)*y, dy = b - (a + x^2)*y.

    Transform z = x + y, u = b - x. Closed forms: z_s = b + b/(a + b^2),
    F00 = (a + b^2) + (a - b^2)/(a + b^2), omega^2 = a + b^2. The fixed point
    is (b, b/(a + b^2)) - forced by the steady-state algebra.
    """
    if isinstance(p, dict):
        p = GlycolyticParams(**p)
    if not p.a >= 0:
        raise InvalidParams(f"a must be >= 0, got {p.a}")
    if not p.b > 0:
        raise InvalidParams(f"b must be > 0, got {p.b}")
    field = PolyVectorField(
        linear_x=(0.0, -1.0, p.a),
        linear_y=(p.b, 0.0, -p.a),
        nonlinear_x={(2, 1): 1.0},
        nonlinear_y={(2, 1): -1.0},
        max_degree=4,
        name="glycolytic",
    )
    transform = make_transform(field, alpha=(p.b, -1.0, 0.0), beta=(0.0, 1.0, 1.0))
    w2 = p.a + p.b**2
    closed = ClosedForm(
        z_s=p.b + p.b / w2,
        F00=w2 + (p.a - p.b**2) / w2,
        omega_sq=w2,
        lc_condition=w2 + (p.a - p.b**2) / w2 < 0,
        fixed_point=(p.b, p.b / w2),
        hopf_boundary=w2**2 + (p.a - p.b**2),
    )
    return field, transform, closed


def vanderpol(p):
    """dx = y, dy = -eps*y*(x^2 - a^2) - omega^2*x.

    Already of second-order form with z = x, u = y; F00 = -eps*a^2 and the
    first-order flow predicts cycle radius 2|a|.
    """
    if isinstance(p, dict):
        p = VdPParams(**p)
    if not p.omega > 0:
        raise InvalidParams(f"omega must be > 0, got {p.omega}")
    if not math.isfinite(p.epsilon):
        raise InvalidParams("epsilon must be finite")
    field = PolyVectorField(
        linear_x=(0.0, 0.0, 1.0),
        linear_y=(0.0, -p.omega**2, p.epsilon * p.a**2),
        nonlinear_x={},
        nonlinear_y={(2, 1): -p.epsilon},
        max_degree=4,
        name="vanderpol",
    )
    transform = make_transform(field, alpha=(0.0, 0.0, 1.0), beta=(0.0, 1.0, 0.0))
    closed = ClosedForm(
        z_s=0.0,
        F00=-p.epsilon * p.a**2,
        omega_sq=p.omega**2,
        lc_condition=p.epsilon > 0 and p.a != 0.0,
        radius=2.0 * abs(p.a),
        fixed_point=(0.0, 0.0),
    )
    return field, transform, closed


_CATALOG = {
    "brusselator": (brusselator, BrusselatorParams),
    "glycolytic": (glycolytic, GlycolyticParams),
    "vanderpol": (vanderpol, VdPParams),
}


def catalog():
    """Model name -> parameter schema (name -> default)."""
    out = {}
    for name, (_, cls) in _CATALOG.items():
        out[name] = {f: getattr(cls(), f) for f in cls.__dataclass_fields__}
    return out


def build(name, **params):
    """Construct a catalog model by name with keyword parameter overrides."""
    if name not in _CATALOG:
        raise InvalidParams(f"unknown model {name!r}; known: {sorted(_CATALOG)}")
    ctor, cls = _CATALOG[name]
    unknown = set(params) - set(cls.__dataclass_fields__)
    if unknown:
        raise InvalidParams(f"unknown parameter(s) {sorted(unknown)} for {name}")
    return ctor(cls(**params))


def seed_at_amplitude(name, closed, amplitude):
    """Initial (x, y) with xi = amplitude, xi' = 0 in the reduced coordinate.

    For the transformed models this is (x_s, y_s + amplitude); for the van
    der Pol field it is (amplitude, 0).
    """
    x_s, y_s = closed.fixed_point
    if name == "vanderpol":
        return (x_s + amplitude, y_s)
    return (x_s, y_s + amplitude)


def verify_reduction(name, **params):
    """Diff the generic reduction against the closed form.

    Returns {"z_s": err, "F00": err, "omega_sq": err, "max": err} of relative
    errors; raises MismatchBeyondTolerance above 1e-12.
    """
    field, transform, closed = build(name, **params)
    lf = lienard.reduce(field, transform)
    roots = lienard.steady_states(lf)
    z_s = min(roots, key=lambda z: abs(z - closed.z_s))
    F00, omega_sq, _, _ = lienard.damping_and_restoring(lf, z_s)

    def rel(got, want):
        return abs(got - want) / (1.0 + abs(want))

    errs = {
        "z_s": rel(z_s, closed.z_s),
        "F00": rel(F00, closed.F00),
        "omega_sq": rel(omega_sq, closed.omega_sq),
    }
    errs["max"] = max(errs.values())
    for quantity, err in errs.items():
        if err > 1e-12:
            raise MismatchBeyondTolerance(quantity, err)
    return errs
