import math

import numpy as np
import pytest

from lienard_lab import lienard, models, rg, sim
from lienard_lab.rg import (
    FlowVerdict,
    Template,
    TruncatedEq,
    UnsupportedTruncation,
    flow,
    flow_report,
    rg_solution,
    truncate,
    truncated_field,
)


def _reduced(name, **kw):
    field, transform, closed = models.build(name, **kw)
    lf = lienard.reduce(field, transform)
    z_s = min(lienard.steady_states(lf), key=lambda z: abs(z - closed.z_s))
    return lf, z_s


# --- truncation --------------------------------------------------------------


def test_truncate_quadratic_kinetics_centre():
    lf, z_s = _reduced("brusselator", b=2.25)
    te = truncate(lf, z_s)
    assert te.template is Template.QUADRATIC_CENTRE
    c_zz, c_vv, c_zv = te.coeffs
    assert c_zz == pytest.approx(0.0, abs=1e-12)
    assert c_vv == pytest.approx(-1.75, abs=1e-12)  # 2*a1/alpha^2 - b/a1
    assert c_zv == pytest.approx(1.0, abs=1e-12)  # 2*a1/alpha
    assert te.omega == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_truncate_substrate_depletion_centre():
    lf, z_s = _reduced("glycolytic", a=0.0, b=1.0)
    te = truncate(lf, z_s)
    assert te.template is Template.QUADRATIC_CENTRE
    c_zz, c_vv, c_zv = te.coeffs
    assert c_zz == pytest.approx(0.0, abs=1e-12)
    assert c_vv == pytest.approx(1.0, abs=1e-12)  # 3*b - z_s
    assert c_zv == pytest.approx(2.0, abs=1e-12)  # 2*b
    assert te.omega == pytest.approx(1.0, abs=1e-12)


def test_truncate_cubic_damping_template():
    lf, z_s = _reduced("vanderpol", epsilon=0.1, a=0.5)
    te = truncate(lf, z_s)
    assert te.template is Template.VDP_CUBIC
    eps, a = te.coeffs
    assert eps == pytest.approx(0.1, abs=1e-15)
    assert a == pytest.approx(0.5, abs=1e-12)
    assert te.omega == pytest.approx(1.0, abs=1e-12)


def test_truncate_rejects_nonzero_damping_quadratic_form():
    lf, z_s = _reduced("brusselator", b=2.5)  # F00 = -0.25, not a centre
    with pytest.raises(UnsupportedTruncation) as err:
        truncate(lf, z_s)
    assert "F00" in err.value.blockers["QuadraticCentre"]
    assert err.value.blockers["VdPCubic"]  # quadratic terms block the cubic fit


def test_truncated_eq_validation():
    with pytest.raises(ValueError):
        TruncatedEq(Template.VDP_CUBIC, omega=0.0, lam=0.05, coeffs=(0.1, 0.5))
    with pytest.raises(ValueError):
        TruncatedEq(Template.VDP_CUBIC, omega=1.0, lam=1.5, coeffs=(0.1, 0.5))


# --- flow --------------------------------------------------------------------


def test_flow_quadratic_centre_is_flat():
    lf, z_s = _reduced("glycolytic", a=0.0, b=1.0)
    fl = flow(truncate(lf, z_s))
    assert fl.verdict is FlowVerdict.ISOCHRONOUS_CENTRE
    assert fl.radius_roots == ()
    for A in (0.0, 0.1, 1.0):
        assert fl.p(A) == 0.0
        assert fl.q(A) == 0.0


def test_flow_cubic_damping_radius():
    te = TruncatedEq(Template.VDP_CUBIC, omega=1.0, lam=0.05, coeffs=(0.1, 0.5))
    fl = flow(te)
    assert fl.verdict is FlowVerdict.LIMIT_CYCLE_WITH_RADIUS
    assert fl.radius_roots == (1.0,)
    assert fl.p(1.0) == pytest.approx(0.0, abs=1e-15)  # fixed point of the flow
    assert fl.p(0.5) > 0.0 and fl.p(1.5) < 0.0  # attracting from both sides


def test_flow_cubic_damping_zero_offset_decays():
    te = TruncatedEq(Template.VDP_CUBIC, omega=1.0, lam=0.05, coeffs=(0.1, 0.0))
    fl = flow(te)
    assert fl.verdict is FlowVerdict.DECAY_TO_CENTRE_POINT
    assert fl.radius_roots == ()
    assert fl.p(0.2) == pytest.approx(-0.1 * 0.2**3 / 8.0, abs=1e-15)


def test_flow_cubic_negative_damping_decays():
    te = TruncatedEq(Template.VDP_CUBIC, omega=1.0, lam=0.05, coeffs=(-0.1, 0.5))
    assert flow(te).verdict is FlowVerdict.DECAY_TO_CENTRE_POINT


def test_flow_report_text():
    te = TruncatedEq(Template.VDP_CUBIC, omega=1.0, lam=0.05, coeffs=(0.1, 0.5))
    text = flow_report(te, flow(te))
    assert "template=VdPCubic" in text
    assert "radius_roots=[1.0]" in text
    assert "verdict=LimitCycleWithRadius" in text


# --- approximate solution ----------------------------------------------------


def test_solution_zero_amplitude():
    te = TruncatedEq(Template.QUADRATIC_CENTRE, omega=1.0, lam=0.05,
                     coeffs=(0.3, -0.2, 0.7), z_s=2.0)
    for t in (0.0, 1.3, 10.0):
        assert rg_solution(te, 0.0, 0.0, t) == 0.0


def test_solution_reduces_to_cosine_without_coupling():
    te = TruncatedEq(Template.QUADRATIC_CENTRE, omega=1.0, lam=0.05,
                     coeffs=(0.0, 0.0, 0.0))
    assert rg_solution(te, 1.0, 0.0, math.pi / 2) == pytest.approx(0.0, abs=1e-12)
    assert rg_solution(te, 1.0, 0.0, math.pi) == pytest.approx(-1.0, abs=1e-12)


def test_solution_rejects_negative_amplitude():
    te = TruncatedEq(Template.QUADRATIC_CENTRE, omega=1.0, lam=0.05,
                     coeffs=(0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        rg_solution(te, -0.1, 0.0, 0.0)


def _max_series_error(te, A0, periods=5.0, samples=801):
    """Max |series - numeric| over the horizon, oracle = adaptive integration
    of the truncated second-order equation from (A0, 0)."""
    T = 2.0 * math.pi / te.omega
    traj = sim.integrate(truncated_field(te), A0, 0.0,
                         sim.IntegratorConfig(t_end=periods * T))
    ts = np.linspace(0.0, periods * T, samples)
    return max(abs(rg_solution(te, A0, 0.0, t) - traj(t)[0]) for t in ts)


def test_solution_accuracy_quadratic_centre():
    lf, z_s = _reduced("brusselator", b=2.25)
    te = truncate(lf, z_s, lam=0.05)
    err = _max_series_error(te, 0.1, periods=2.0)
    assert err <= 5.0 * te.lam**2 * 0.1


def test_solution_accuracy_order_in_lambda():
    lf, z_s = _reduced("glycolytic", a=0.0, b=1.0)
    errs = [
        _max_series_error(truncate(lf, z_s, lam=lam), 0.1)
        for lam in (0.1, 0.05, 0.025)
    ]
    for big, small in zip(errs, errs[1:]):
        assert 3.0 <= big / small <= 5.0  # first-order series: O(lam^2) residual


def test_solution_short_horizon_cubic_template():
    te = TruncatedEq(Template.VDP_CUBIC, omega=1.0, lam=0.05, coeffs=(0.05, 0.0))
    # secular series stays close to the numeric solution for a couple of periods
    err = _max_series_error(te, 0.2, periods=2.0)
    assert err <= 5e-3


# --- numeric field oracle -----------------------------------------------------


def test_truncated_field_matches_template_rhs():
    te = TruncatedEq(Template.QUADRATIC_CENTRE, omega=2.0, lam=0.1,
                     coeffs=(0.3, -0.2, 0.7))
    field = truncated_field(te)
    from lienard_lab.vecfield import evaluate

    xi, v = 0.3, -0.4
    dxi, dv = evaluate(field, xi, v)
    assert dxi == pytest.approx(v)
    want = -4.0 * xi + 0.1 * (0.3 * xi**2 - 0.2 * v**2 + 0.7 * xi * v)
    assert dv == pytest.approx(want, abs=1e-14)
