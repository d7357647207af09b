"""Reduction of a planar polynomial field to a second-order equation
z'' = sum A[n][m] z^n z'^m and the sign test on the damping at the origin.

The change of variables is u = alpha0 + alpha1*x + alpha2*y,
z = beta0 + beta1*x + beta2*y with dz/dt = u. Inverting the linear map gives
x = c1*z + c2*z' + cL and y = c3*z + c4*z' + cM; the reduction substitutes
these into z'' = alpha1*P + alpha2*Q and expands exactly.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .vecfield import PolyVectorField, evaluate

DET_TOL = 1e-12
EXPANSION_DEGREE_CAP = 12
DEFAULT_BAND = 1e-9
CLM_WARN_FACTOR = 1e-6


class TransformError(Exception):
    pass


class SingularTransform(TransformError):
    pass


class InconsistentChoice(TransformError):
    """dz/dt != u for the chosen (alpha, beta); carries the residual terms."""

    def __init__(self, msg, residual):
        self.residual = residual
        super().__init__(f"{msg}: residual {residual}")


class DegreeOverflow(TransformError):
    pass


class NoRealRoot(Exception):
    pass


class Verdict(enum.Enum):
    LIMIT_CYCLE_CANDIDATE = "LimitCycleCandidate"
    ISOCHRONOUS_CENTRE_CANDIDATE = "IsochronousCentreCandidate"
    STABLE_FOCUS_CANDIDATE = "StableFocusCandidate"
    INVALID = "Invalid"


@dataclass(frozen=True)
class TransformSpec:
    alpha: tuple  # (alpha0, alpha1, alpha2)
    beta: tuple  # (beta0, beta1, beta2)
    c1: float
    c2: float
    c3: float
    c4: float
    cL: float
    cM: float
    det: float  # alpha1*beta2 - alpha2*beta1


@dataclass(frozen=True)
class LienardForm:
    A: dict  # (n, m) -> coeff of z^n z'^m
    degree: int
    transform: TransformSpec
    dropped_cL_cM: tuple  # (dropped: bool, |cL|, |cM|)

    def coeff(self, n, m):
        return self.A.get((n, m), 0.0)


@dataclass(frozen=True)
class Classification:
    z_s: float
    F00: float
    omega_sq: float
    verdict: Verdict
    boundary_band: float


def make_transform(field, alpha, beta, cLM_tol=None):
    """Build the (z, u) transform and verify dz/dt = u for the given field.

    The check is symbolic: beta1*P + beta2*Q must reproduce
    alpha0 + alpha1*x + alpha2*y term by term (nonlinear parts must cancel).
    """
    a0_, a1_, a2_ = alpha
    b0_, b1_, b2_ = beta
    det = a1_ * b2_ - a2_ * b1_
    if abs(det) <= DET_TOL:
        raise SingularTransform(f"|alpha1*beta2 - alpha2*beta1| = {abs(det):g} too small")

    # dz/dt = beta1*P + beta2*Q as a monomial table
    residual = {}
    for (n, m), c in field.monomials_x().items():
        residual[(n, m)] = residual.get((n, m), 0.0) + b1_ * c
    for (n, m), c in field.monomials_y().items():
        residual[(n, m)] = residual.get((n, m), 0.0) + b2_ * c
    # subtract u
    for key, val in (((0, 0), a0_), ((1, 0), a1_), ((0, 1), a2_)):
        residual[key] = residual.get(key, 0.0) - val
    bad = {k: v for k, v in residual.items() if abs(v) > 1e-12}
    if bad:
        raise InconsistentChoice("dz/dt != u for this (alpha, beta)", bad)

    c1 = -a2_ / det
    c2 = b2_ / det
    c3 = a1_ / det
    c4 = -b1_ / det
    cL = (a2_ * b0_ - a0_ * b2_) / det
    cM = (a0_ * b1_ - a1_ * b0_) / det
    return TransformSpec(
        alpha=tuple(float(v) for v in alpha),
        beta=tuple(float(v) for v in beta),
        c1=c1, c2=c2, c3=c3, c4=c4, cL=cL, cM=cM, det=det,
    )


def offsets_small(transform, cLM_tol=None):
    """Whether |cL|, |cM| are negligible relative to the transform scale."""
    t = transform
    scale = 1.0 + max(abs(v) for v in t.alpha) + max(abs(v) for v in t.beta)
    tol = CLM_WARN_FACTOR * scale if cLM_tol is None else cLM_tol
    return max(abs(t.cL), abs(t.cM)) <= tol


# --- bivariate polynomial helpers: dict (n, m) -> coeff in (z, v) ------------


def _pmul(p, q, cap=EXPANSION_DEGREE_CAP):
    out = {}
    for (n1, m1), c1 in p.items():
        for (n2, m2), c2 in q.items():
            n, m = n1 + n2, m1 + m2
            if n + m > cap:
                raise DegreeOverflow(
                    f"exact expansion needs total degree {n + m} > cap {cap}"
                )
            key = (n, m)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def _padd(p, q, scale=1.0):
    out = dict(p)
    for key, c in q.items():
        out[key] = out.get(key, 0.0) + scale * c
    return out


def _ppow(p, k, cap=EXPANSION_DEGREE_CAP):
    out = {(0, 0): 1.0}
    for _ in range(k):
        out = _pmul(out, p, cap)
    return out


def reduce(field, transform, degree=None, drop_offsets=False):
    """Exact polynomial reduction to the A[n][m] table.

    Substitutes x = c1*z + c2*v + cL, y = c3*z + c4*v + cM (v = z') into
    z'' = alpha1*P + alpha2*Q and expands. Terms of total degree > degree are
    truncated from the returned table. drop_offsets=True substitutes with
    cL = cM = 0 instead (the offsets' magnitudes are recorded either way).
    """
    if degree is None:
        degree = field.max_degree
    if degree < 2:
        raise TransformError("degree must be >= 2")
    t = transform
    cL = 0.0 if drop_offsets else t.cL
    cM = 0.0 if drop_offsets else t.cM
    if drop_offsets and not offsets_small(t):
        warnings.warn(
            f"dropping transform offsets that are not small "
            f"(|cL|={abs(t.cL):g}, |cM|={abs(t.cM):g}); the A table will not "
            "reproduce the exact dynamics",
            stacklevel=2,
        )
    Lpoly = {(1, 0): t.c1, (0, 1): t.c2, (0, 0): cL}
    Mpoly = {(1, 0): t.c3, (0, 1): t.c4, (0, 0): cM}

    a1_, a2_ = t.alpha[1], t.alpha[2]
    out = {}

    def accumulate(weight, table):
        nonlocal out
        if weight == 0.0:
            return
        for (n, m), c in table.items():
            if c == 0.0:
                continue
            term = _pmul(_ppow(Lpoly, n), _ppow(Mpoly, m))
            out = _padd(out, term, scale=weight * c)
    accumulate(a1_, field.monomials_x())
    accumulate(a2_, field.monomials_y())

    A = {k: v for k, v in out.items() if k[0] + k[1] <= degree}
    for key in ((0, 0), (1, 0), (0, 1)):
        A.setdefault(key, 0.0)
    A = {k: v for k, v in sorted(A.items())}
    dropped = (drop_offsets, abs(t.cL), abs(t.cM))
    return LienardForm(A=A, degree=degree, transform=t, dropped_cL_cM=dropped)


def steady_states(lf):
    """Real roots of A00 + A10*z + sum_{n>1} An0*z^n, ascending.

    Companion-matrix roots polished by Newton; raises NoRealRoot if none.
    """
    max_n = max((n for (n, m) in lf.A if m == 0), default=0)
    coeffs = [lf.coeff(n, 0) for n in range(max_n, -1, -1)]  # highest first
    while coeffs and coeffs[0] == 0.0:
        coeffs = coeffs[1:]
    if len(coeffs) <= 1:
        raise NoRealRoot("steady-state polynomial is constant")
    scale = max(abs(c) for c in coeffs)
    roots = np.roots(coeffs)

    def poly(z):
        return sum(c * z**n for n, c in enumerate(reversed(coeffs)))

    def dpoly(z):
        return sum(n * c * z ** (n - 1) for n, c in enumerate(reversed(coeffs)) if n > 0)

    out = []
    for r in roots:
        if abs(r.imag) > 1e-8 * (1.0 + abs(r.real)):
            continue
        z = r.real
        for _ in range(50):
            fz = poly(z)
            if abs(fz) <= 1e-14 * (1.0 + scale):
                break
            dz = dpoly(z)
            if dz == 0.0:
                break
            z -= fz / dz
        if abs(poly(z)) <= 1e-10 * (1.0 + scale):
            if not any(abs(z - prev) <= 1e-9 * (1.0 + abs(z)) for prev in out):
                out.append(float(z))
    if not out:
        raise NoRealRoot("no real steady state")
    return sorted(out)


def damping_and_restoring(lf, z_s):
    """Shifted damping F(xi, xi') and restoring G(xi) about z_s.

    Returns (F00, omega_sq, F_poly, G_poly) where the polynomials are
    monomial tables; F is in (xi, xi'), G in xi alone with G(0) = 0 exactly.
    omega_sq = dG/dxi at 0, which for tables quadratic in z equals
    -2*A20*z_s - A10.
    """
    from math import comb

    # F(xi, v) = -[A01 + sum_{m>1} A0m v^(m-1) + sum_{n,m>=1} Anm (xi+z_s)^n v^(m-1)]
    F = {}
    for (n, m), c in lf.A.items():
        if m == 0 or c == 0.0:
            continue
        for k in range(n + 1):
            key = (k, m - 1)
            F[key] = F.get(key, 0.0) - c * comb(n, k) * z_s ** (n - k)
    # G(xi) = -[A00 + sum_{n>=1} An0 (xi+z_s)^n], constant part removed exactly
    G = {}
    for (n, m), c in lf.A.items():
        if m != 0 or c == 0.0:
            continue
        for k in range(1, n + 1):
            G[k] = G.get(k, 0.0) - c * comb(n, k) * z_s ** (n - k)
    F00 = F.get((0, 0), 0.0)
    omega_sq = G.get(1, 0.0)
    return F00, omega_sq, F, G


def classify(lf, z_s, band=DEFAULT_BAND):
    F00, omega_sq, _, _ = damping_and_restoring(lf, z_s)
    if omega_sq <= 0.0 or not math.isfinite(omega_sq):
        verdict = Verdict.INVALID
    elif F00 < -band:
        verdict = Verdict.LIMIT_CYCLE_CANDIDATE
    elif F00 > band:
        verdict = Verdict.STABLE_FOCUS_CANDIDATE
    else:
        verdict = Verdict.ISOCHRONOUS_CENTRE_CANDIDATE
    return Classification(
        z_s=z_s, F00=F00, omega_sq=omega_sq, verdict=verdict, boundary_band=band
    )


def report(lf, classification):
    """Structured-text report with stable (n, then m) ordering."""
    lines = []
    for (n, m) in sorted(lf.A):
        lines.append(f"A[{n}][{m}] = {lf.A[n, m]!r}")
    c = classification
    lines.append(f"z_s = {c.z_s!r}")
    lines.append(f"F00 = {c.F00!r}")
    lines.append(f"omega_sq = {c.omega_sq!r}")
    lines.append(f"verdict = {c.verdict.value}")
    return "\n".join(lines) + "\n"


def second_derivative(lf, z, v):
    """z'' from the A table at (z, z'); used by the reconstruction check."""
    total = 0.0
    for (n, m), c in lf.A.items():
        total += c * z**n * v**m
    return total


def reconstruction_residual(field, lf, x, y):
    """|z'' from the A table - (alpha1*P + alpha2*Q)| at a state of the field.

    Zero (to rounding) whenever the exact expansion was not truncated.
    """
    t = lf.transform
    z = t.beta[0] + t.beta[1] * x + t.beta[2] * y
    u = t.alpha[0] + t.alpha[1] * x + t.alpha[2] * y
    dx, dy = evaluate(field, x, y)
    zdd_direct = t.alpha[1] * dx + t.alpha[2] * dy
    return abs(second_derivative(lf, z, u) - zdd_direct)
