"""Planar polynomial vector fields: parsing, evaluation, fixed points.

A field is dx/dt = P(x, y), dy/dt = Q(x, y) with P, Q real polynomials.
The linear part is kept separate from the nonlinear monomials (total degree
>= 2) because the Lienard reduction treats them differently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

FP_TOL = 1e-10
DEDUP_TOL = 1e-8


class ModelError(Exception):
    """Base class for model-definition problems."""


class ParseError(ModelError):
    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        loc = ""
        if line is not None:
            loc = f" at line {line}" + (f", column {col}" if col is not None else "")
        super().__init__(msg + loc)


class DegreeBoundError(ParseError):
    pass


class DuplicateMonomialError(ParseError):
    pass


class EigenKind(enum.Enum):
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_FOCUS = "UnstableFocus"
    CENTRE = "Centre"
    STABLE_NODE = "StableNode"
    UNSTABLE_NODE = "UnstableNode"
    SADDLE = "Saddle"


@dataclass(frozen=True)
class PolyVectorField:
    linear_x: tuple  # (a0, a1, a2): dx = a0 + a1*x + a2*y + f(x, y)
    linear_y: tuple  # (b0, b1, b2): dy = b0 + b1*x + b2*y + g(x, y)
    nonlinear_x: dict  # (n, m) -> coeff of x^n y^m, n + m >= 2
    nonlinear_y: dict
    max_degree: int = 4
    name: str = ""

    def __post_init__(self):
        if self.max_degree < 2:
            raise ModelError(f"max_degree must be >= 2, got {self.max_degree}")
        for label, coeffs in (("linear_x", self.linear_x), ("linear_y", self.linear_y)):
            if len(coeffs) != 3 or not all(math.isfinite(c) for c in coeffs):
                raise ModelError(f"{label} must be 3 finite reals")
        for label, table in (
            ("nonlinear_x", self.nonlinear_x),
            ("nonlinear_y", self.nonlinear_y),
        ):
            for (n, m), c in table.items():
                if n < 0 or m < 0 or n + m < 2:
                    raise ModelError(f"{label}[{n},{m}]: total degree must be >= 2")
                if n + m > self.max_degree:
                    raise DegreeBoundError(
                        f"{label}[{n},{m}] exceeds degree bound {self.max_degree}"
                    )
                if not math.isfinite(c):
                    raise ModelError(f"{label}[{n},{m}] is not finite")

    def monomials_x(self):
        """All (n, m) -> coeff pairs of P, linear part included."""
        a0, a1, a2 = self.linear_x
        table = {(0, 0): a0, (1, 0): a1, (0, 1): a2}
        table.update(self.nonlinear_x)
        return table

    def monomials_y(self):
        b0, b1, b2 = self.linear_y
        table = {(0, 0): b0, (1, 0): b1, (0, 1): b2}
        table.update(self.nonlinear_y)
        return table


@dataclass(frozen=True)
class FixedPoint:
    x: float
    y: float
    jacobian: tuple  # ((J11, J12), (J21, J22))
    eigen_kind: EigenKind
    residual: float


def evaluate(field, x, y):
    """(P(x, y), Q(x, y)) by direct monomial summation."""
    a0, a1, a2 = field.linear_x
    b0, b1, b2 = field.linear_y
    dx = a0 + a1 * x + a2 * y
    dy = b0 + b1 * x + b2 * y
    for (n, m), c in field.nonlinear_x.items():
        dx += c * x**n * y**m
    for (n, m), c in field.nonlinear_y.items():
        dy += c * x**n * y**m
    return dx, dy


def jacobian_at(field, x, y):
    """Exact partial derivatives of (P, Q) at (x, y), as a 2x2 numpy array."""
    _, a1, a2 = field.linear_x
    _, b1, b2 = field.linear_y
    j = np.array([[a1, a2], [b1, b2]], dtype=float)
    for (n, m), c in field.nonlinear_x.items():
        if n > 0:
            j[0, 0] += c * n * x ** (n - 1) * y**m
        if m > 0:
            j[0, 1] += c * m * x**n * y ** (m - 1)
    for (n, m), c in field.nonlinear_y.items():
        if n > 0:
            j[1, 0] += c * n * x ** (n - 1) * y**m
        if m > 0:
            j[1, 1] += c * m * x**n * y ** (m - 1)
    return j


def classify_jacobian(j):
    """Eigenvalue class from trace/determinant/discriminant signs.

    A degeneracy band around trace = 0 (det > 0) is reported as CENTRE: the
    boundary cases are exactly the interesting ones here.
    """
    tr = j[0, 0] + j[1, 1]
    det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    disc = tr * tr - 4.0 * det
    if det < 0:
        return EigenKind.SADDLE
    band = 1e-12 * (1.0 + tr * tr + abs(det))
    if abs(tr) <= band:
        return EigenKind.CENTRE
    if disc < -band:
        return EigenKind.STABLE_FOCUS if tr < 0 else EigenKind.UNSTABLE_FOCUS
    return EigenKind.STABLE_NODE if tr < 0 else EigenKind.UNSTABLE_NODE


def _newton_refine(field, x, y, max_iter=100, max_halvings=40):
    """Damped Newton from one seed. Returns (x, y, residual) or None."""
    fx, fy = evaluate(field, x, y)
    res = max(abs(fx), abs(fy))
    for _ in range(max_iter):
        if res <= FP_TOL:
            return x, y, res
        j = jacobian_at(field, x, y)
        try:
            step = np.linalg.solve(j, [-fx, -fy])
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        t = 1.0
        for _ in range(max_halvings):
            xn, yn = x + t * step[0], y + t * step[1]
            fxn, fyn = evaluate(field, xn, yn)
            rn = max(abs(fxn), abs(fyn))
            if math.isfinite(rn) and rn < res:
                x, y, fx, fy, res = xn, yn, fxn, fyn, rn
                break
            t *= 0.5
        else:
            return None
    return (x, y, res) if res <= FP_TOL else None


def find_fixed_points(field, box, grid=11):
    """All fixed points in box = (xmin, xmax, ymin, ymax) from grid seeds.

    Seeds that fail to converge are skipped (not fatal). Results are
    de-duplicated within 1e-8 and sorted lexicographically.
    """
    xmin, xmax, ymin, ymax = box
    if not (xmax > xmin and ymax > ymin):
        raise ModelError("box must be non-degenerate")
    if grid < 2:
        raise ModelError("grid must be >= 2")
    margin_x = 1e-7 * (1.0 + abs(xmax) + abs(xmin))
    margin_y = 1e-7 * (1.0 + abs(ymax) + abs(ymin))
    found = []
    for xs in np.linspace(xmin, xmax, grid):
        for ys in np.linspace(ymin, ymax, grid):
            hit = _newton_refine(field, xs, ys)
            if hit is None:
                continue
            x, y, res = hit
            if not (xmin - margin_x <= x <= xmax + margin_x):
                continue
            if not (ymin - margin_y <= y <= ymax + margin_y):
                continue
            if any(abs(x - p[0]) <= DEDUP_TOL and abs(y - p[1]) <= DEDUP_TOL for p in found):
                continue
            found.append((x, y, res))
    found.sort(key=lambda p: (p[0], p[1]))
    out = []
    for x, y, res in found:
        j = jacobian_at(field, x, y)
        out.append(
            FixedPoint(
                x=x,
                y=y,
                jacobian=((j[0, 0], j[0, 1]), (j[1, 0], j[1, 1])),
                eigen_kind=classify_jacobian(j),
                residual=res,
            )
        )
    return out


# --- model-file parser -------------------------------------------------------
#
# Line-oriented grammar:
#   name = <identifier>          (optional)
#   degree = <int>               (optional, default 4)
#   dx = <polynomial in x, y>
#   dy = <polynomial in x, y>
# polynomial := term (('+'|'-') term)*
# term       := factor ('*' factor)*
# factor     := number | 'x' ['^' int] | 'y' ['^' int]
# '#' starts a comment; whitespace is insignificant.


def _tokenize(text, lineno):
    tokens = []  # (kind, value, col)
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = i + 1
        if ch in "+-*^":
            tokens.append((ch, ch, col))
            i += 1
        elif ch in "xy":
            tokens.append(("var", ch, col))
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE" or
                             (text[j] in "+-" and j > i and text[j - 1] in "eE")):
                j += 1
            try:
                val = float(text[i:j])
            except ValueError:
                raise ParseError(f"bad number {text[i:j]!r}", lineno, col)
            tokens.append(("num", val, col))
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}", lineno, col)
    return tokens


def _parse_poly(text, lineno, col_offset):
    """Parse a polynomial RHS into a dict (n, m) -> coeff."""
    tokens = _tokenize(text, lineno)
    if not tokens:
        raise ParseError("empty polynomial", lineno, col_offset)
    table = {}
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None, None)

    while pos < len(tokens):
        sign = 1.0
        kind, _, col = peek()
        while kind in ("+", "-"):
            if kind == "-":
                sign = -sign
            pos += 1
            kind, _, col = peek()
        # one term: factors separated by '*'
        coeff = sign
        n = m = 0
        expect_factor = True
        while True:
            kind, val, col = peek()
            if kind is None:
                if expect_factor:
                    raise ParseError("dangling operator", lineno, col_offset)
                break
            if expect_factor:
                if kind == "num":
                    coeff *= val
                    pos += 1
                elif kind == "var":
                    pos += 1
                    power = 1
                    if peek()[0] == "^":
                        pos += 1
                        pk, pv, pc = peek()
                        if pk != "num" or pv != int(pv):
                            raise ParseError("exponent must be an integer", lineno, pc or col)
                        power = int(pv)
                        pos += 1
                    if val == "x":
                        n += power
                    else:
                        m += power
                else:
                    raise ParseError(f"expected a factor, got {kind!r}", lineno, col)
                expect_factor = False
            else:
                if kind == "*":
                    pos += 1
                    expect_factor = True
                elif kind in ("+", "-"):
                    break
                else:
                    raise ParseError(f"expected '*', '+' or '-', got {kind!r}", lineno, col)
        key = (n, m)
        if key in table:
            raise DuplicateMonomialError(
                f"duplicate monomial x^{n}*y^{m}", lineno, col_offset
            )
        table[key] = coeff
    return table


def parse_model(text):
    """Parse a model-file definition into a PolyVectorField."""
    name = ""
    degree = 4
    polys = {}
    poly_lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected '<key> = <value>'", lineno, 1)
        key, _, rhs = line.partition("=")
        key = key.strip()
        col = line.index("=") + 2
        if key == "name":
            name = rhs.strip()
        elif key == "degree":
            try:
                degree = int(rhs.strip())
            except ValueError:
                raise ParseError(f"degree must be an integer, got {rhs.strip()!r}", lineno, col)
            if degree < 2:
                raise ParseError("degree must be >= 2", lineno, col)
        elif key in ("dx", "dy"):
            if key in polys:
                raise ParseError(f"duplicate {key} line", lineno, 1)
            polys[key] = rhs
            poly_lines[key] = (lineno, col)
        else:
            raise ParseError(f"unknown key {key!r}", lineno, 1)
    for want in ("dx", "dy"):
        if want not in polys:
            raise ParseError(f"missing {want} line", len(text.splitlines()) or 1, 1)

    linear = {}
    nonlinear = {}
    for key in ("dx", "dy"):
        lineno, col = poly_lines[key]
        table = _parse_poly(polys[key], lineno, col)
        lin = [0.0, 0.0, 0.0]
        nl = {}
        for (n, m), c in table.items():
            if n + m > degree:
                raise DegreeBoundError(
                    f"monomial x^{n}*y^{m} exceeds degree bound {degree}", lineno, col
                )
            if n + m <= 1:
                lin[0 if (n, m) == (0, 0) else (1 if (n, m) == (1, 0) else 2)] = c
            else:
                nl[(n, m)] = c
        linear[key] = tuple(lin)
        nonlinear[key] = nl
    return PolyVectorField(
        linear_x=linear["dx"],
        linear_y=linear["dy"],
        nonlinear_x=nonlinear["dx"],
        nonlinear_y=nonlinear["dy"],
        max_degree=degree,
        name=name,
    )


def _format_poly(table):
    def mono_str(n, m, c):
        parts = []
        if c != 1.0 or (n == 0 and m == 0):
            parts.append(repr(abs(c)) if abs(c) != 1.0 or (n == 0 and m == 0) else "1")
        if n:
            parts.append("x" if n == 1 else f"x^{n}")
        if m:
            parts.append("y" if m == 1 else f"y^{m}")
        return "*".join(parts)

    items = [((n + m, n, m), (n, m, c)) for (n, m), c in table.items() if c != 0.0]
    if not items:
        return "0"
    items.sort()
    out = []
    for i, (_, (n, m, c)) in enumerate(items):
        if i == 0:
            head = "-" if c < 0 else ""
        else:
            head = " - " if c < 0 else " + "
        out.append(head + mono_str(n, m, c))
    return "".join(out)


def to_text(field):
    """Canonical model-file serialization; parse_model round-trips it."""
    lines = []
    if field.name:
        lines.append(f"name = {field.name}")
    lines.append(f"degree = {field.max_degree}")
    lines.append(f"dx = {_format_poly(field.monomials_x())}")
    lines.append(f"dy = {_format_poly(field.monomials_y())}")
    return "\n".join(lines) + "\n"
