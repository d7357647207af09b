"""Shared fixtures: warm the compiled integrator kernel once per session so
wall-clock assertions in the acceptance tests measure work, not compilation."""

import pytest

from lienard_lab import sim
from lienard_lab.vecfield import PolyVectorField


def harmonic_field():
    return PolyVectorField(
        linear_x=(0.0, 0.0, 1.0),
        linear_y=(0.0, -1.0, 0.0),
        nonlinear_x={},
        nonlinear_y={},
        name="harmonic",
    )


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    sim.integrate(harmonic_field(), 1.0, 0.0, sim.IntegratorConfig(t_end=1.0))
