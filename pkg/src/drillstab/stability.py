"""Torsional stability maps over the (Omega, W) operational plane.

A point is classified by the sign of the rightmost eigenvalue of the
linearized system (1-DOF closed form or the FE block Jacobian): stable
when every real part is below -1e-10; ties count as unstable. Maps scan a
rectangular grid and extract the stable/unstable interface by per-column
bisection in W. Stochastic maps score each cell with the fraction of
posterior particles classified unstable and trace the contour where that
probability crosses a percentile; mixture maps combine per-model
probability fields with weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bitrock import (BitRockModel, PARAM_COUNTS, WobRatio,
                      torque_derivative_batch, torque_derivative_eval)
from .dynamics import KNM_TO_NM, LumpedDrillString, OperatingPoint, jacobian_1dof
from .errors import DomainError, InsufficientSamplesError
from .fem import FemTorsionalModel, eigenvalues_general, jacobian_fem

RAD_S_TO_RPM = 30.0 / math.pi

STABLE_TIE_TOL = 1e-10

DEFAULT_OMEGA_RANGE = (1.0, 20.0)
DEFAULT_WOB_FRACTIONS = (0.2, 3.0)
DEFAULT_RESOLUTION = (80, 80)
DEFAULT_REFINE = 10


@dataclass(frozen=True)
class StabilityGrid:
    """Rectangular classification grid.

    ``stable[i, j]`` refers to (omega_axis[i], wob_axis[j]). Stochastic
    maps also carry ``p_unstable`` with the per-cell instability
    probability (None for deterministic maps).
    """

    omega_axis: np.ndarray
    wob_axis: np.ndarray
    stable: np.ndarray
    p_unstable: np.ndarray | None
    source: str

    def __post_init__(self):
        if (np.diff(self.omega_axis) <= 0).any() or (np.diff(self.wob_axis) <= 0).any():
            raise DomainError("grid axes must be strictly increasing")
        shape = (len(self.omega_axis), len(self.wob_axis))
        if self.stable.shape != shape:
            raise DomainError(f"classification must have shape {shape}")

    @property
    def cell_sizes(self) -> tuple[float, float]:
        return (float(self.omega_axis[1] - self.omega_axis[0]),
                float(self.wob_axis[1] - self.wob_axis[0]))


@dataclass(frozen=True)
class BoundaryCurve:
    """Stable/unstable interface as (Omega, W) points, ascending Omega.

    ``single_valued`` is False when some column crossed more than once (the
    points then form a raw contour); ``monotone`` flags whether W increases
    along Omega.
    """

    points: np.ndarray
    single_valued: bool = True

    @property
    def monotone(self) -> bool:
        if len(self.points) < 2:
            return True
        return bool((np.diff(self.points[:, 1]) > 0).all())

    def __len__(self) -> int:
        return len(self.points)


def _max_real_eig(a: np.ndarray) -> float:
    return float(eigenvalues_general(a).real.max())


def classify(model: BitRockModel, plant, op: OperatingPoint,
             w_ref: float) -> bool:
    """True when the linearized system at (Omega, W) is strictly stable.

    ``plant`` is either a LumpedDrillString or a FemTorsionalModel.
    """
    r = WobRatio(op.wob, w_ref)
    if isinstance(plant, LumpedDrillString):
        a = jacobian_1dof(model, r, plant, op)
    elif isinstance(plant, FemTorsionalModel):
        a = jacobian_fem(plant, model, r, op)
    else:
        raise DomainError(f"unsupported plant type {type(plant).__name__}")
    return _max_real_eig(a) < -STABLE_TIE_TOL


def classify_trace(model: BitRockModel, plant: LumpedDrillString,
                   op: OperatingPoint, w_ref: float) -> bool:
    """Independent 1-DOF route: rightmost eigenvalue from the closed-form
    quadratic (trace/determinant), same tie rule as ``classify``."""
    r = WobRatio(op.wob, w_ref)
    d_nm = KNM_TO_NM * torque_derivative_eval(model.kind, model.params, r, op.omega)
    wn = plant.omega_n
    tau = -2.0 * wn * plant.xi - d_nm / plant.i_eq
    disc = tau * tau - 4.0 * wn * wn
    mu = 0.5 * tau if disc < 0 else 0.5 * (tau + math.sqrt(disc))
    return mu < -STABLE_TIE_TOL


def _axes(omega_range, wob_range, resolution):
    n_om, n_w = resolution
    if n_om < 2 or n_w < 2:
        raise DomainError("resolution must be at least 2 per axis")
    if not (0 < omega_range[0] < omega_range[1]):
        raise DomainError(f"bad omega range {omega_range}")
    if not (0 < wob_range[0] < wob_range[1]):
        raise DomainError(f"bad wob range {wob_range}")
    return (np.linspace(omega_range[0], omega_range[1], n_om),
            np.linspace(wob_range[0], wob_range[1], n_w))


def _extract_boundary(omega_axis, wob_axis, stable_grid, stable_at,
                      refine: int) -> BoundaryCurve:
    """Per-column bisection between straddling cells.

    ``stable_at(omega, wob)`` re-classifies a point during refinement.
    """
    points = []
    single = True
    for i, om in enumerate(omega_axis):
        col = stable_grid[i]
        flips = np.flatnonzero(col[:-1] != col[1:])
        if len(flips) == 0:
            continue
        if len(flips) > 1 or not col[0]:
            single = False
        for j in flips:
            lo, hi = float(wob_axis[j]), float(wob_axis[j + 1])
            lo_state = bool(col[j])
            for _ in range(refine):
                mid = 0.5 * (lo + hi)
                if stable_at(om, mid) == lo_state:
                    lo = mid
                else:
                    hi = mid
            points.append((float(om), 0.5 * (lo + hi)))
    pts = np.array(points) if points else np.empty((0, 2))
    return BoundaryCurve(points=pts, single_valued=single)


def map_deterministic(model: BitRockModel, plant, w_ref: float,
                      omega_range=DEFAULT_OMEGA_RANGE, wob_range=None,
                      resolution=DEFAULT_RESOLUTION,
                      refine: int = DEFAULT_REFINE
                      ) -> tuple[StabilityGrid, BoundaryCurve]:
    """Classify a dense grid for one parameter vector and extract the
    boundary. ``wob_range`` defaults to (0.2, 3.0) times ``w_ref``."""
    if wob_range is None:
        wob_range = (DEFAULT_WOB_FRACTIONS[0] * w_ref,
                     DEFAULT_WOB_FRACTIONS[1] * w_ref)
    omega_axis, wob_axis = _axes(omega_range, wob_range, resolution)

    def stable_at(om, w):
        return classify(model, plant, OperatingPoint(omega=om, wob=w), w_ref)

    stable = np.empty((len(omega_axis), len(wob_axis)), dtype=bool)
    for i, om in enumerate(omega_axis):
        for j, w in enumerate(wob_axis):
            stable[i, j] = stable_at(om, w)
    grid = StabilityGrid(omega_axis=omega_axis, wob_axis=wob_axis,
                         stable=stable, p_unstable=None,
                         source=f"deterministic:m{model.kind}")
    curve = _extract_boundary(omega_axis, wob_axis, stable, stable_at, refine)
    return grid, curve


def _mu_lumped_batch(kind: int, phis: np.ndarray, plant: LumpedDrillString,
                     omega: float, r_values: np.ndarray) -> np.ndarray:
    """Rightmost eigenvalue of the 1-DOF closed form for a particle batch
    at one Omega and many r values; returns shape (m, len(r_values))."""
    d1 = KNM_TO_NM * torque_derivative_batch(kind, phis, 1.0,
                                             np.array([omega]))[:, 0]
    tau = (-2.0 * plant.omega_n * plant.xi
           - np.outer(d1, r_values) / plant.i_eq)
    disc = tau * tau - 4.0 * plant.omega_n ** 2
    with np.errstate(invalid="ignore"):
        real_branch = 0.5 * (tau + np.sqrt(np.maximum(disc, 0.0)))
    return np.where(disc < 0, 0.5 * tau, real_branch)


def _unstable_fraction_fn(kind: int, phis: np.ndarray, plant, w_ref: float):
    """Returns p(omega, wob_values) giving per-point instability fractions.

    Lumped plants vectorize the closed-form eigenvalue over particles; FE
    plants fall back to per-particle eigendecompositions.
    """
    if isinstance(plant, LumpedDrillString):
        def frac(omega: float, wobs: np.ndarray) -> np.ndarray:
            r_vals = np.asarray(wobs, dtype=float) / w_ref
            mu = _mu_lumped_batch(kind, phis, plant, omega, r_vals)
            return (mu >= -STABLE_TIE_TOL).mean(axis=0)
        return frac
    if isinstance(plant, FemTorsionalModel):
        # particles come from independent prior boxes and may violate a
        # law's joint sign constraints, so classify raw parameter vectors;
        # only the last damping entry varies, so precompute the fixed blocks
        n = plant.n_el
        a = np.zeros((2 * n, 2 * n))
        a[:n, n:] = np.eye(n)
        a[n:, :n] = -np.linalg.solve(plant.mass, plant.stiffness)
        minv_c = np.linalg.solve(plant.mass, plant.damping)
        minv_last = np.linalg.solve(plant.mass, np.eye(n)[:, -1])

        def max_real(kind_, phi, r_val, omega):
            d_nm = KNM_TO_NM * torque_derivative_eval(kind_, tuple(phi),
                                                      r_val, omega)
            m = a.copy()
            m[n:, n:] = -minv_c
            m[n:, n:][:, -1] -= d_nm * minv_last
            return float(eigenvalues_general(m).real.max())

        def frac(omega: float, wobs: np.ndarray) -> np.ndarray:
            out = np.empty(len(wobs))
            for j, w in enumerate(np.asarray(wobs, dtype=float)):
                r_val = float(w) / w_ref
                unstable = sum(
                    1 for phi in phis
                    if max_real(kind, phi, r_val, omega) >= -STABLE_TIE_TOL)
                out[j] = unstable / len(phis)
            return out
        return frac
    raise DomainError(f"unsupported plant type {type(plant).__name__}")


def _probability_map(fields, weights, omega_axis, wob_axis, percentile,
                     refine, source):
    """Shared stochastic/mixture map body.

    ``fields`` is a list of per-component ``frac(omega, wobs)`` callables;
    the combined instability probability is their weighted sum.
    """
    def p_at(om, wobs):
        return sum(w * f(om, np.atleast_1d(wobs))
                   for w, f in zip(weights, fields))

    p = np.empty((len(omega_axis), len(wob_axis)))
    for i, om in enumerate(omega_axis):
        p[i] = p_at(float(om), wob_axis)
    stable = p < percentile

    def stable_at(om, w):
        return bool(p_at(float(om), np.array([w]))[0] < percentile)

    grid = StabilityGrid(omega_axis=omega_axis, wob_axis=wob_axis,
                         stable=stable, p_unstable=p, source=source)
    curve = _extract_boundary(omega_axis, wob_axis, stable, stable_at, refine)
    return grid, curve


def map_stochastic(kind: int, phis: np.ndarray, plant, w_ref: float,
                   omega_range=DEFAULT_OMEGA_RANGE, wob_range=None,
                   resolution=DEFAULT_RESOLUTION, percentile: float = 0.02,
                   refine: int = DEFAULT_REFINE, min_particles: int = 100
                   ) -> tuple[StabilityGrid, BoundaryCurve]:
    """Instability-probability field over a posterior particle set plus the
    contour where the probability crosses ``percentile``."""
    phis = np.asarray(phis, dtype=float)
    if phis.ndim != 2 or phis.shape[1] != PARAM_COUNTS[kind]:
        raise DomainError(f"phis must have shape (m, {PARAM_COUNTS[kind]})")
    if len(phis) < min_particles:
        raise InsufficientSamplesError(
            f"need >= {min_particles} particles, got {len(phis)}")
    if not 0 <= percentile <= 1:
        raise DomainError(f"percentile must lie in [0, 1], got {percentile}")
    if wob_range is None:
        wob_range = (DEFAULT_WOB_FRACTIONS[0] * w_ref,
                     DEFAULT_WOB_FRACTIONS[1] * w_ref)
    omega_axis, wob_axis = _axes(omega_range, wob_range, resolution)
    frac = _unstable_fraction_fn(kind, phis, plant, w_ref)
    return _probability_map([frac], [1.0], omega_axis, wob_axis, percentile,
                            refine, source=f"stochastic:m{kind}:p{percentile}")


def map_mixture(components, weights, plant, w_ref: float,
                omega_range=DEFAULT_OMEGA_RANGE, wob_range=None,
                resolution=DEFAULT_RESOLUTION, percentile: float = 0.02,
                refine: int = DEFAULT_REFINE, min_particles: int = 100
                ) -> tuple[StabilityGrid, BoundaryCurve]:
    """Weighted mixture of per-model stochastic maps.

    ``components`` is a sequence of (kind, phis); ``weights`` must be
    nonnegative and sum to 1. The mixture boundary is truncated to the
    Omega columns where every component's own percentile contour exists
    (beyond that the mixture carries no information about the missing
    component).
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(components):
        raise DomainError("one weight per component required")
    if (weights < 0).any() or abs(weights.sum() - 1.0) > 1e-12:
        raise DomainError("weights must be nonnegative and sum to 1")
    if wob_range is None:
        wob_range = (DEFAULT_WOB_FRACTIONS[0] * w_ref,
                     DEFAULT_WOB_FRACTIONS[1] * w_ref)
    omega_axis, wob_axis = _axes(omega_range, wob_range, resolution)

    fracs = []
    component_curves = []
    for kind, phis in components:
        phis = np.asarray(phis, dtype=float)
        if len(phis) < min_particles:
            raise InsufficientSamplesError(
                f"need >= {min_particles} particles per component, got {len(phis)}")
        frac = _unstable_fraction_fn(kind, phis, plant, w_ref)
        fracs.append(frac)
        _, comp_curve = _probability_map(
            [frac], [1.0], omega_axis, wob_axis, percentile, refine,
            source=f"component:m{kind}")
        component_curves.append(comp_curve)

    grid, curve = _probability_map(
        fracs, weights, omega_axis, wob_axis, percentile, refine,
        source="mixture:" + "+".join(f"m{k}x{w!r}"
                                     for (k, _), w in zip(components, weights)))
    if len(curve) and all(len(c) for c in component_curves):
        lo = max(c.points[:, 0].min() for c in component_curves)
        hi = min(c.points[:, 0].max() for c in component_curves)
        keep = (curve.points[:, 0] >= lo) & (curve.points[:, 0] <= hi)
        curve = BoundaryCurve(points=curve.points[keep],
                              single_valued=curve.single_valued)
    elif not all(len(c) for c in component_curves):
        curve = BoundaryCurve(points=np.empty((0, 2)),
                              single_valued=curve.single_valued)
    return grid, curve


def boundary_separation(a: BoundaryCurve, b: BoundaryCurve,
                        cell_sizes: tuple[float, float]) -> float:
    """Worst-case distance between two boundary curves, in grid cells.

    Curves are split into contiguous pieces (gaps wider than 1.5 columns
    break a piece, e.g. where a boundary leaves the window and re-enters).
    Each piece's interior points are measured against the other curve's
    full polylines; piece end points are skipped because they carry
    window-clipping truncation, not boundary information. Points outside
    the Omega overlap of the two curves are skipped for the same reason.
    Returns the symmetric maximum of the point-to-polyline distances in
    cell-normalized coordinates (inf if either curve is empty).
    """
    if len(a) == 0 or len(b) == 0:
        return math.inf
    cell = np.asarray(cell_sizes, dtype=float)
    lo = max(a.points[:, 0].min(), b.points[:, 0].min())
    hi = min(a.points[:, 0].max(), b.points[:, 0].max())

    def pieces(curve):
        pts = curve.points[np.argsort(curve.points[:, 0], kind="stable")] / cell
        gaps = np.flatnonzero(np.diff(pts[:, 0]) > 1.5)
        return np.split(pts, gaps + 1)

    def point_to_polyline(p, qs):
        best = math.inf
        for q in qs:
            if len(q) == 1:
                best = min(best, float(np.linalg.norm(p - q[0])))
                continue
            seg = q[1:] - q[:-1]
            rel = p[None, :] - q[:-1]
            denom = np.einsum("ij,ij->i", seg, seg)
            with np.errstate(invalid="ignore", divide="ignore"):
                t = np.einsum("ij,ij->i", rel, seg) / denom
            t = np.clip(np.where(denom > 0, t, 0.0), 0.0, 1.0)
            d = np.linalg.norm(rel - t[:, None] * seg, axis=1)
            best = min(best, float(d.min()))
        return best

    def one_way(ps, qs):
        worst = 0.0
        for piece in ps:
            interior = piece[1:-1] if len(piece) > 2 else piece[:0]
            for p in interior:
                if not (lo / cell[0] <= p[0] <= hi / cell[0]):
                    continue
                worst = max(worst, point_to_polyline(p, qs))
        return worst

    pa, pb = pieces(a), pieces(b)
    return max(one_way(pa, pb), one_way(pb, pa))


def grid_to_csv(grid: StabilityGrid, path, w_ref: float) -> Path:
    """Cell-center export: omega (rad/s and RPM), W (kN and r), value(s)."""
    path = Path(path)
    has_p = grid.p_unstable is not None
    header = "omega_rad_s,omega_rpm,wob_kn,r,stable" + (",p_unstable" if has_p else "")
    lines = [header]
    for i, om in enumerate(grid.omega_axis):
        for j, w in enumerate(grid.wob_axis):
            row = (f"{float(om)!r},{float(om * RAD_S_TO_RPM)!r},{float(w)!r},"
                   f"{float(w / w_ref)!r},{int(grid.stable[i, j])}")
            if has_p:
                row += f",{float(grid.p_unstable[i, j])!r}"
            lines.append(row)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def boundary_to_csv(curve: BoundaryCurve, path, w_ref: float) -> Path:
    path = Path(path)
    lines = ["omega_rad_s,omega_rpm,wob_kn,r"]
    for om, w in curve.points:
        lines.append(f"{float(om)!r},{float(om * RAD_S_TO_RPM)!r},"
                     f"{float(w)!r},{float(w / w_ref)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
