"""Bit-rock interaction torque laws.

Four candidate laws relate torque on bit (kN m) to bit angular speed
(rad/s), each scaled by the weight-on-bit ratio r = W / W_ref:

* kind 1: saturating tanh plus a rational hump, params (b0, b1, b2, b3)
* kind 2: exponential decay between a static and a dynamic plateau,
  params (t_sb, t_cb, g_b)
* kind 3: Gaussian bump + constant gain - tanh tail, params (a0..a5)
* kind 4: cubic polynomial, params (c0, c1, c2, c3)

All laws are defined for speed >= 0 only; negative speeds are rejected
rather than clamped so that integrator bugs surface. Scalar speeds take a
pure-`math` fast path (the time integrator calls this in a tight loop);
numpy arrays broadcast through the same formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PARAM_COUNTS = {1: 4, 2: 3, 3: 6, 4: 4}

PARAM_NAMES = {
    1: ("b0", "b1", "b2", "b3"),
    2: ("t_sb", "t_cb", "g_b"),
    3: ("a0", "a1", "a2", "a3", "a4", "a5"),
    4: ("c0", "c1", "c2", "c3"),
}

MODEL_KINDS = (1, 2, 3, 4)


@dataclass(frozen=True)
class WobRatio:
    """Weight on bit W and reference weight W_ref, both in kN."""

    w: float
    w_ref: float

    def __post_init__(self):
        if not (math.isfinite(self.w) and self.w > 0):
            raise DomainError(f"weight on bit must be positive and finite, got {self.w}")
        if not (math.isfinite(self.w_ref) and self.w_ref > 0):
            raise DomainError(f"reference weight must be positive and finite, got {self.w_ref}")

    @property
    def r(self) -> float:
        """Dimensionless ratio w / w_ref."""
        return self.w / self.w_ref

    @classmethod
    def from_ratio(cls, r: float, w_ref: float) -> "WobRatio":
        return cls(w=r * w_ref, w_ref=w_ref)


def validate_params(kind: int, params) -> tuple[float, ...]:
    """Check a parameter vector against the sign constraints of its law.

    Raises DomainError on wrong length, non-finite entries, or violated
    constraints. Returns the vector as a tuple of floats.
    """
    if kind not in PARAM_COUNTS:
        raise DomainError(f"unknown model kind {kind}; expected one of {MODEL_KINDS}")
    p = tuple(float(v) for v in params)
    if len(p) != PARAM_COUNTS[kind]:
        raise DomainError(
            f"model {kind} takes {PARAM_COUNTS[kind]} parameters, got {len(p)}"
        )
    if not all(math.isfinite(v) for v in p):
        raise DomainError(f"model {kind} parameters must be finite, got {p}")
    if kind == 1:
        if p[1] <= 0 or p[3] <= 0:
            raise DomainError("model 1 requires b1 > 0 and b3 > 0")
    elif kind == 2:
        t_sb, t_cb, g_b = p
        if not (t_sb >= t_cb >= 0):
            raise DomainError("model 2 requires t_sb >= t_cb >= 0")
        if g_b <= 0:
            raise DomainError("model 2 requires g_b > 0")
    elif kind == 3:
        if p[1] <= 0 or p[5] <= 0:
            raise DomainError("model 3 requires a1 > 0 and a5 > 0")
    return p


def params_valid(kind: int, params) -> bool:
    try:
        validate_params(kind, params)
    except DomainError:
        return False
    return True


@dataclass(frozen=True)
class BitRockModel:
    """One torque law: the kind index plus its parameter vector.

    Parameters are stored in the documented per-law order (see
    PARAM_NAMES); units are such that with speed in rad/s the torque
    comes out in kN m.
    """

    kind: int
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", validate_params(self.kind, self.params))

    @property
    def param_names(self) -> tuple[str, ...]:
        return PARAM_NAMES[self.kind]


def _ratio(r) -> float:
    return r.r if isinstance(r, WobRatio) else float(r)


def _check_speed(speed):
    """Reject negative or non-finite speeds; return scalar flag."""
    if isinstance(speed, np.ndarray):
        if speed.size and (not np.isfinite(speed).all() or (speed < 0).any()):
            raise DomainError("speeds must be finite and >= 0")
        return False
    s = float(speed)
    if not math.isfinite(s) or s < 0:
        raise DomainError(f"speed must be finite and >= 0, got {speed}")
    return True


def torque_eval(kind: int, params, r, speed):
    """Torque for a raw (kind, params) pair; no invariant validation.

    Exists for optimizer and sampler paths that evaluate many candidate
    vectors; library users should go through ``torque``.
    """
    scalar = _check_speed(speed)
    m = math if scalar else np
    s = float(speed) if scalar else speed
    rv = _ratio(r)
    p = params
    k = kind
    if k == 1:
        b0, b1, b2, b3 = p
        return rv * b0 * (m.tanh(b1 * s) + b2 * s / (1.0 + b3 * s * s))
    if k == 2:
        t_sb, t_cb, g_b = p
        return rv * ((t_sb - t_cb) * m.exp(-g_b * s) + t_cb)
    if k == 3:
        a0, a1, a2, a3, a4, a5 = p
        return rv * (a0 * m.exp(-a1 * (s - a2) ** 2) + a3 - a4 * m.tanh(a5 * s))
    c0, c1, c2, c3 = p
    return rv * (c0 + s * (c1 + s * (c2 + s * c3)))


def torque(model: BitRockModel, r, speed):
    """Torque on bit in kN m at the given speed (rad/s, scalar or array)."""
    return torque_eval(model.kind, model.params, r, speed)


def torque_derivative_eval(kind: int, params, r, speed):
    """Derivative for a raw (kind, params) pair; no invariant validation."""
    scalar = _check_speed(speed)
    m = math if scalar else np
    s = float(speed) if scalar else speed
    rv = _ratio(r)
    p = params
    k = kind
    if k == 1:
        b0, b1, b2, b3 = p
        th = m.tanh(b1 * s)
        q = 1.0 + b3 * s * s
        return -rv * b0 * (b1 * (th * th - 1.0) - b2 / q + 2.0 * b2 * b3 * s * s / (q * q))
    if k == 2:
        t_sb, t_cb, g_b = p
        return -rv * (t_sb - t_cb) * g_b * m.exp(-g_b * s)
    if k == 3:
        a0, a1, a2, a3, a4, a5 = p
        th = m.tanh(a5 * s)
        return rv * (a4 * a5 * (th * th - 1.0)
                     + (2.0 * a2 - 2.0 * s) * a0 * a1 * m.exp(-a1 * (s - a2) ** 2))
    c0, c1, c2, c3 = p
    return rv * (c1 + 2.0 * c2 * s + 3.0 * c3 * s * s)


def torque_derivative(model: BitRockModel, r, speed):
    """d(torque)/d(speed) in kN m s/rad (closed forms, scalar or array)."""
    return torque_derivative_eval(model.kind, model.params, r, speed)


def torque_batch(kind: int, params: np.ndarray, r, speeds: np.ndarray) -> np.ndarray:
    """Evaluate one law for a table of parameter vectors.

    params has shape (m, p), speeds shape (d,); returns an (m, d) torque
    table. No invariant validation: callers (the ABC sampler, stability
    maps) draw parameters from pre-validated boxes.
    """
    rv = _ratio(r)
    s = np.asarray(speeds, dtype=float)[None, :]
    P = np.asarray(params, dtype=float)
    if P.ndim != 2 or P.shape[1] != PARAM_COUNTS[kind]:
        raise DomainError(f"params must have shape (m, {PARAM_COUNTS[kind]})")
    cols = [P[:, j:j + 1] for j in range(P.shape[1])]
    if kind == 1:
        b0, b1, b2, b3 = cols
        return rv * b0 * (np.tanh(b1 * s) + b2 * s / (1.0 + b3 * s * s))
    if kind == 2:
        t_sb, t_cb, g_b = cols
        return rv * ((t_sb - t_cb) * np.exp(-g_b * s) + t_cb)
    if kind == 3:
        a0, a1, a2, a3, a4, a5 = cols
        return rv * (a0 * np.exp(-a1 * (s - a2) ** 2) + a3 - a4 * np.tanh(a5 * s))
    c0, c1, c2, c3 = cols
    return rv * (c0 + s * (c1 + s * (c2 + s * c3)))


def torque_derivative_batch(kind: int, params: np.ndarray, r, speeds: np.ndarray) -> np.ndarray:
    """Derivative counterpart of torque_batch, shape (m, d)."""
    rv = _ratio(r)
    s = np.asarray(speeds, dtype=float)[None, :]
    P = np.asarray(params, dtype=float)
    if P.ndim != 2 or P.shape[1] != PARAM_COUNTS[kind]:
        raise DomainError(f"params must have shape (m, {PARAM_COUNTS[kind]})")
    cols = [P[:, j:j + 1] for j in range(P.shape[1])]
    if kind == 1:
        b0, b1, b2, b3 = cols
        th = np.tanh(b1 * s)
        q = 1.0 + b3 * s * s
        return -rv * b0 * (b1 * (th * th - 1.0) - b2 / q + 2.0 * b2 * b3 * s * s / (q * q))
    if kind == 2:
        t_sb, t_cb, g_b = cols
        return -rv * (t_sb - t_cb) * g_b * np.exp(-g_b * s)
    if kind == 3:
        a0, a1, a2, a3, a4, a5 = cols
        th = np.tanh(a5 * s)
        return rv * (a4 * a5 * (th * th - 1.0)
                     + (2.0 * a2 - 2.0 * s) * a0 * a1 * np.exp(-a1 * (s - a2) ** 2))
    c0, c1, c2, c3 = cols
    return rv * (c1 + 2.0 * c2 * s + 3.0 * c3 * s * s)
