"""Lienard reduction, limit-cycle / isochronous-centre classification and
numerical verification for planar polynomial kinetic systems."""

from .lienard import (
    Classification,
    LienardForm,
    TransformSpec,
    Verdict,
    classify,
    damping_and_restoring,
    make_transform,
    reduce,
    steady_states,
)
from .models import (
    BrusselatorParams,
    GlycolyticParams,
    VdPParams,
    brusselator,
    glycolytic,
    vanderpol,
    verify_reduction,
)
from .rg import FlowVerdict, RGFlow, Template, TruncatedEq, flow, rg_solution, truncate
from .sim import (
    CycleKind,
    CycleReport,
    IntegratorConfig,
    Trajectory,
    detect_cycle,
    integrate,
    isochronicity_test,
    measure_period,
    poincare_crossings,
)
from .sweep import Axis, BoundaryCurve, SweepGrid, grid_scan, trace_boundary
from .vecfield import (
    EigenKind,
    FixedPoint,
    PolyVectorField,
    evaluate,
    find_fixed_points,
    jacobian_at,
    parse_model,
    to_text,
)

__version__ = "0.1.0"
