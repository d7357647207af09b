"""First-order amplitude/phase flow for the two supported truncations.

QuadraticCentre: xi'' + w^2 xi = lam*(C_zz xi^2 + C_vv xi'^2 + C_zv xi xi')
    (the shifted form at a zero-damping point, quadratic terms only).
VdPCubic:       x'' + w^2 x = -eps*x'*(x^2 - a^2).

Both flows are known in closed form: the quadratic centre renormalizes to
dA/dtau = 0, dtheta/dtau = 0; the cubic case gives
dA/dtau = (eps*A/2)(a^2 - A^2/4) with radius 2|a|.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .lienard import Verdict, classify, damping_and_restoring
from .vecfield import PolyVectorField


class UnsupportedTruncation(Exception):
    """Carries, per template, the A entries that block it."""

    def __init__(self, msg, blockers):
        self.blockers = blockers
        super().__init__(f"{msg}: {blockers}")


class Template(enum.Enum):
    QUADRATIC_CENTRE = "QuadraticCentre"
    VDP_CUBIC = "VdPCubic"


class FlowVerdict(enum.Enum):
    ISOCHRONOUS_CENTRE = "IsochronousCentre"
    LIMIT_CYCLE_WITH_RADIUS = "LimitCycleWithRadius"
    DECAY_TO_CENTRE_POINT = "DecayToCentrePoint"


@dataclass(frozen=True)
class TruncatedEq:
    template: Template
    omega: float
    lam: float
    coeffs: tuple
    # QuadraticCentre: (C_zz, C_vv, C_zv) with
    #   C_zz = A20, C_vv = A02 + A12*z_s + A22*z_s^2, C_zv = A11 + 2*A21*z_s
    # VdPCubic: (epsilon, a)
    z_s: float = 0.0

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must be in (0, 1), got {self.lam}")


@dataclass(frozen=True)
class RGFlow:
    p: object  # callable A -> dA/dtau
    q: object  # callable A -> dtheta/dtau
    radius_roots: tuple
    verdict: FlowVerdict
    p_text: str


def truncate(lf, z_s, lam=0.05):
    """Match a LienardForm at z_s against the two templates.

    QuadraticCentre needs F(0,0) = 0 at z_s (band from classify); VdPCubic
    needs the cubic van der Pol damping pattern with linear restoring force.
    Raises UnsupportedTruncation listing the blockers of each template.
    """
    F00, omega_sq, _, _ = damping_and_restoring(lf, z_s)
    blockers = {}

    # VdPCubic: nonzero entries within {A10 < 0, A01, A21 <= 0}, z_s = 0
    vdp_bad = {}
    for (n, m), c in lf.A.items():
        if (n, m) in ((1, 0), (0, 1), (2, 1)):
            continue
        if abs(c) > 1e-12:
            vdp_bad[(n, m)] = c
    if abs(z_s) > 1e-12:
        vdp_bad["z_s"] = z_s
    A10 = lf.coeff(1, 0)
    A21 = lf.coeff(2, 1)
    A01 = lf.coeff(0, 1)
    if A10 >= 0:
        vdp_bad.setdefault((1, 0), A10)
    if not vdp_bad:
        eps = -A21
        if eps == 0.0:
            vdp_bad[(2, 1)] = 0.0
        elif A01 / eps < 0:
            vdp_bad[(0, 1)] = A01  # would need imaginary a
    if not vdp_bad:
        eps = -A21
        a = math.sqrt(A01 / eps)
        omega = math.sqrt(-A10)
        return TruncatedEq(
            template=Template.VDP_CUBIC, omega=omega, lam=lam,
            coeffs=(eps, a), z_s=0.0,
        )
    blockers["VdPCubic"] = vdp_bad

    cls = classify(lf, z_s)
    qc_bad = {}
    if cls.verdict is not Verdict.ISOCHRONOUS_CENTRE_CANDIDATE:
        qc_bad["F00"] = F00
    if omega_sq <= 0.0:
        qc_bad["omega_sq"] = omega_sq
    if not qc_bad:
        c_zz = lf.coeff(2, 0)
        c_vv = lf.coeff(0, 2) + lf.coeff(1, 2) * z_s + lf.coeff(2, 2) * z_s**2
        c_zv = lf.coeff(1, 1) + 2.0 * lf.coeff(2, 1) * z_s
        return TruncatedEq(
            template=Template.QUADRATIC_CENTRE, omega=math.sqrt(omega_sq),
            lam=lam, coeffs=(c_zz, c_vv, c_zv), z_s=z_s,
        )
    blockers["QuadraticCentre"] = qc_bad
    raise UnsupportedTruncation("form fits neither template", blockers)


def flow(te):
    """Closed-form amplitude/phase flow for a TruncatedEq."""
    if te.template is Template.QUADRATIC_CENTRE:
        return RGFlow(
            p=lambda A: 0.0,
            q=lambda A: 0.0,
            radius_roots=(),
            verdict=FlowVerdict.ISOCHRONOUS_CENTRE,
            p_text="0",
        )
    eps, a = te.coeffs

    def p(A):
        return 0.5 * eps * A * (a * a - 0.25 * A * A)

    if a != 0.0:
        roots = (2.0 * abs(a),)
        verdict = (
            FlowVerdict.LIMIT_CYCLE_WITH_RADIUS
            if eps > 0
            else FlowVerdict.DECAY_TO_CENTRE_POINT
        )
        p_text = f"({eps!r}*A/2)*({a * a!r} - A^2/4)"
    else:
        roots = ()
        verdict = FlowVerdict.DECAY_TO_CENTRE_POINT
        p_text = f"-{eps!r}*A^3/8"
    return RGFlow(p=p, q=lambda A: 0.0, radius_roots=roots, verdict=verdict, p_text=p_text)


def rg_solution(te, A, theta0, t, t0=0.0):
    """First-order approximate solution xi(t) for the template.

    The VdPCubic series keeps its secular (t - t0)*cos term verbatim; it is
    only meaningful over a few periods.
    """
    if A < 0:
        raise ValueError("amplitude must be >= 0")
    w = te.omega
    lam = te.lam
    ph = w * t + theta0
    if te.template is Template.QUADRATIC_CENTRE:
        c_zz, c_vv, c_zv = te.coeffs
        xi = A * math.cos(ph)
        xi -= lam * (A * A * c_zz / (3 * w * w) + 2.0 * A * A * c_vv / 3.0) * math.cos(ph)
        xi -= lam * A * A * c_zv * math.sin(ph) / (3 * w)
        xi += lam * (A * A * c_zz / 2.0) * (1.0 / w**2 - math.cos(2 * ph) / (3 * w**2))
        xi += lam * (c_vv * w * w * A * A / 2.0) * (1.0 / w**2 + math.cos(2 * ph) / (3 * w**2))
        xi += lam * A * A * c_zv * math.sin(2 * ph) / (6 * w)
        return xi
    eps, a = te.coeffs
    x = A * math.cos(ph)
    x += eps * (7 * A**3 - 16 * A * a * a) / (32 * w) * math.sin(ph)
    x -= eps * (A**3 - 4 * A * a * a) / 8.0 * (t - t0) * math.cos(ph)
    x -= eps * A**3 / (32 * w) * math.sin(3 * ph)
    return x


def truncated_field(te):
    """The truncated equation as a first-order planar field in (xi, v).

    Serves as the right-hand side for the numeric comparison oracle.
    """
    w2 = te.omega**2
    lam = te.lam
    if te.template is Template.QUADRATIC_CENTRE:
        c_zz, c_vv, c_zv = te.coeffs
        return PolyVectorField(
            linear_x=(0.0, 0.0, 1.0),
            linear_y=(0.0, -w2, 0.0),
            nonlinear_x={},
            nonlinear_y={(2, 0): lam * c_zz, (0, 2): lam * c_vv, (1, 1): lam * c_zv},
            max_degree=4,
            name="truncated-quadratic",
        )
    eps, a = te.coeffs
    return PolyVectorField(
        linear_x=(0.0, 0.0, 1.0),
        linear_y=(0.0, -w2, eps * a * a),
        nonlinear_x={},
        nonlinear_y={(2, 1): -eps},
        max_degree=4,
        name="truncated-vdp",
    )


def flow_report(te, fl):
    return (
        f"template={te.template.value}, p(A)={fl.p_text}, q(A)=0, "
        f"radius_roots={list(fl.radius_roots)}, verdict={fl.verdict.value}\n"
    )
