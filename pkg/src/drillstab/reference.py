"""Field-calibrated reference values for a 5 km drill string.

These are the published least-squares estimates of the four torque laws
for one field campaign, plus the matching column geometry and the
equivalent 1-DOF modal parameters. They seed default CLI runs, prior
construction, and the synthetic data generator.
"""

from __future__ import annotations

from .bitrock import BitRockModel, WobRatio
from .dynamics import LumpedDrillString
from .fem import DrillStringGeometry

W_REF_KN = 244.2

REFERENCE_PARAMS: dict[int, tuple[float, ...]] = {
    1: (5.67, 0.48, 8.79, 4.56),
    2: (13.0, 6.5, 0.3),
    3: (2.72, 1.0, 0.09, 9.52, 4.0, 0.08),
    4: (11.8, -0.93, 0.057, -1.2e-3),
}

REFERENCE_GEOMETRY = DrillStringGeometry(
    shear_modulus=85e9,
    density=7.80e3,
    l_dp=4733.0,
    l_bha=467.0,
    d_dp_outer=0.140,
    d_dp_inner=0.119,
    d_bha_outer=0.161,
    d_bha_inner=0.073,
)

# equivalent 1-DOF model for the same column
REFERENCE_INERTIA = 383.33      # kg m^2
REFERENCE_OMEGA_N = 0.85        # rad/s
REFERENCE_XI = 0.25


def reference_model(kind: int) -> BitRockModel:
    return BitRockModel(kind=kind, params=REFERENCE_PARAMS[kind])


def reference_plant() -> LumpedDrillString:
    return LumpedDrillString.from_modal(REFERENCE_INERTIA, REFERENCE_OMEGA_N,
                                        REFERENCE_XI)


def reference_wob(r: float = 1.0) -> WobRatio:
    return WobRatio.from_ratio(r, W_REF_KN)
