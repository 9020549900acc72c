"""Three-stage closed-form estimation pipeline.

Stage 1 recovers position from ranges by linearized trilateration: with
theta = [x, y, x^2 + y^2] the squared range equations become linear, and the
unconstrained least-squares solution yields the position estimate (theta3 is
kept as a diagnostic only).

Stage 2 recovers velocity.  Multiplying the range-rate equation by the range
turns it into the linear system  v . (p - p_i) = a_i * r_i,  whose rows use
the stage-1 position estimate.  Uniform weights give the LS estimate; weights
1/r_i (the default WLS rule) down-rank far sensors, whose transformed noise
r_i * n_i is larger.

Stage 3 recovers acceleration the same way from the pseudo-measurements
k_i = b_i * r_i - ||v_hat||^2 + a_i^2, which equal  a . (p - p_i)  when the
inputs are exact.

All stage solves go through the weighted normal equations with a condition
guard; an independent dense solver in oracle.py cross-checks them.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateGeometry, SingularGeometry, TooFewSensors, ZeroRange
from .model import MeasurementSet, SensorArray, as_vec2, _locked

WEIGHT_MODES = ("uniform", "inverse_range", "inverse_range_sq")
WEIGHT_SOURCES = ("estimated_position", "measured_range")
RANGE_SOURCES = ("estimated", "measured")

_MODE_CODES = {
    "uniform": _kernels.WEIGHT_UNIFORM,
    "inverse_range": _kernels.WEIGHT_INV_RANGE,
    "inverse_range_sq": _kernels.WEIGHT_INV_RANGE_SQ,
}

COND_CAP_DEFAULT = _kernels.COND_CAP_DEFAULT


@dataclass(frozen=True)
class WeightRule:
    """Stage weighting: mode picks the exponent, source the range it is based on.

    The default (inverse range of the estimated position) is the standard WLS
    rule for this pipeline; ``uniform`` reduces every stage to plain LS.
    """

    mode: str = "inverse_range"
    source: str = "estimated_position"

    def __post_init__(self):
        if self.mode not in WEIGHT_MODES:
            raise ValueError(f"mode must be one of {WEIGHT_MODES}, got {self.mode!r}")
        if self.source not in WEIGHT_SOURCES:
            raise ValueError(f"source must be one of {WEIGHT_SOURCES}, got {self.source!r}")


UNIFORM = WeightRule(mode="uniform")


@dataclass(frozen=True)
class PositionSolution:
    position: np.ndarray    # m
    theta3: float           # m^2, diagnostic: the x^2+y^2 component of theta
    residual_norm: float
    gram_condition: float


@dataclass(frozen=True)
class KinematicEstimate:
    value: np.ndarray       # m/s for velocity, m/s^2 for acceleration
    method: str             # "LS" | "WLS"
    gram_condition: float
    pseudo_measurements: np.ndarray


@dataclass(frozen=True)
class EstimationResult:
    """Full pipeline output: position plus LS and WLS velocity/acceleration."""

    position: PositionSolution
    velocity_ls: KinematicEstimate
    velocity_wls: KinematicEstimate
    accel_ls: KinematicEstimate
    accel_wls: KinematicEstimate


def _check_lengths(measurements: MeasurementSet, sensors: SensorArray):
    if len(measurements) != len(sensors):
        raise ValueError(
            f"measurement count {len(measurements)} does not match sensor count {len(sensors)}"
        )


def _check_range_source(range_source: str):
    if range_source not in RANGE_SOURCES:
        raise ValueError(f"range_source must be one of {RANGE_SOURCES}, got {range_source!r}")


def estimate_position(measurements: MeasurementSet, sensors: SensorArray,
                      cond_cap: float = COND_CAP_DEFAULT) -> PositionSolution:
    """Trilateration position estimate from the measured ranges.

    Requires N >= 3 sensors in non-collinear position; raises TooFewSensors or
    DegenerateGeometry otherwise.
    """
    _check_lengths(measurements, sensors)
    n = len(sensors)
    if n < 3:
        raise TooFewSensors(f"position stage needs at least 3 sensors, got {n}")
    x, y, theta3, resid, cond, status = _kernels.position_solve(
        sensors.xs, sensors.ys, measurements.ranges, cond_cap)
    if status != _kernels.OK:
        raise DegenerateGeometry(
            f"sensor layout is rank-deficient for trilateration (gram condition {cond:.3g})")
    return PositionSolution(as_vec2((x, y)), float(theta3), float(resid), float(cond))


def _rows_and_weights(measurements, sensors, p_hat, weight_rule):
    p = as_vec2(p_hat, "p_hat")
    bx, by, rhat, w, status = _kernels.system_rows(
        sensors.xs, sensors.ys, p[0], p[1], measurements.ranges,
        _MODE_CODES[weight_rule.mode],
        1 if weight_rule.source == "measured_range" else 0)
    if status != _kernels.OK:
        raise ZeroRange("estimated position coincides with a sensor (or a zero measured range)")
    return bx, by, rhat, w


def build_velocity_system(measurements: MeasurementSet, sensors: SensorArray, p_hat,
                          weight_rule: WeightRule = WeightRule(),
                          range_source: str = "estimated"):
    """Velocity stage system: rows B (N x 2), pseudo-measurements d, weights W.

    Row i is (p_hat - p_i); d_i = a_i * r_i with r_i either the range implied
    by p_hat (default) or the raw measured range.
    """
    _check_lengths(measurements, sensors)
    _check_range_source(range_source)
    bx, by, rhat, w = _rows_and_weights(measurements, sensors, p_hat, weight_rule)
    r_d = rhat if range_source == "estimated" else measurements.ranges
    d = measurements.range_rates * r_d
    return np.column_stack((bx, by)), d, w


def solve_linear_stage(B, rhs, weights, cond_cap: float = COND_CAP_DEFAULT,
                       method: str | None = None) -> KinematicEstimate:
    """Exact minimizer of sum_i W_i (rhs_i - B_i . x)^2 for a 2D unknown.

    Raises SingularGeometry when the weighted Gram matrix is singular or its
    condition number exceeds cond_cap (all rows nearly parallel).
    """
    B = np.asarray(B, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if B.ndim != 2 or B.shape[1] != 2:
        raise ValueError(f"B must have shape (N, 2), got {B.shape}")
    if rhs.shape != (B.shape[0],) or weights.shape != (B.shape[0],):
        raise ValueError("rhs and weights must be N-vectors matching B")
    x0, x1, cond, status = _kernels.wls_solve2(
        np.ascontiguousarray(B[:, 0]), np.ascontiguousarray(B[:, 1]),
        np.ascontiguousarray(rhs), np.ascontiguousarray(weights), cond_cap)
    if status != _kernels.OK:
        raise SingularGeometry(
            f"stage Gram matrix singular or ill-conditioned (condition {cond:.3g})")
    if method is None:
        method = "LS" if np.all(weights == weights[0]) else "WLS"
    return KinematicEstimate(as_vec2((x0, x1)), method, float(cond),
                             _locked(rhs.copy()))


def estimate_velocity(measurements: MeasurementSet, sensors: SensorArray, p_hat,
                      weight_rule: WeightRule = WeightRule(),
                      range_source: str = "estimated",
                      reweight_passes: int = 1,
                      cond_cap: float = COND_CAP_DEFAULT) -> KinematicEstimate:
    """Velocity estimate from range rates, given the stage-1 position estimate.

    ``reweight_passes`` re-derives weights and re-solves; the shipped weight
    rules depend only on p_hat (or the measured ranges), which the velocity
    stage never updates, so every pass returns the same estimate.
    """
    if reweight_passes < 1:
        raise ValueError("reweight_passes must be >= 1")
    method = "LS" if weight_rule.mode == "uniform" else "WLS"
    estimate = None
    for _ in range(reweight_passes):
        B, d, w = build_velocity_system(measurements, sensors, p_hat, weight_rule, range_source)
        estimate = solve_linear_stage(B, d, w, cond_cap, method=method)
    return estimate


def acceleration_pseudo_measurements(measurements: MeasurementSet, sensors: SensorArray,
                                     p_hat, v_hat,
                                     range_source: str = "estimated") -> np.ndarray:
    """Transformed drr measurements k_i = b_i * r_i - ||v_hat||^2 + a_i^2.

    With exact p_hat, v_hat and noiseless measurements, k_i equals
    a . (p_hat - p_i) exactly.
    """
    _check_lengths(measurements, sensors)
    _check_range_source(range_source)
    v = as_vec2(v_hat, "v_hat")
    _, _, rhat, _ = _rows_and_weights(measurements, sensors, p_hat, UNIFORM)
    r_k = rhat if range_source == "estimated" else measurements.ranges
    v2 = float(v @ v)
    return measurements.drrs * r_k - v2 + measurements.range_rates ** 2


def estimate_acceleration(measurements: MeasurementSet, sensors: SensorArray, p_hat, v_hat,
                          weight_rule: WeightRule = WeightRule(),
                          range_source: str = "estimated",
                          reweight_passes: int = 1,
                          cond_cap: float = COND_CAP_DEFAULT) -> KinematicEstimate:
    """Acceleration estimate from drr measurements, given stage-1/2 estimates."""
    if reweight_passes < 1:
        raise ValueError("reweight_passes must be >= 1")
    method = "LS" if weight_rule.mode == "uniform" else "WLS"
    k = acceleration_pseudo_measurements(measurements, sensors, p_hat, v_hat, range_source)
    estimate = None
    for _ in range(reweight_passes):
        bx, by, _, w = _rows_and_weights(measurements, sensors, p_hat, weight_rule)
        estimate = solve_linear_stage(np.column_stack((bx, by)), k, w, cond_cap, method=method)
    return estimate


def estimate_all(measurements: MeasurementSet, sensors: SensorArray,
                 weight_rule: WeightRule = WeightRule(),
                 range_source: str = "estimated",
                 cond_cap: float = COND_CAP_DEFAULT) -> EstimationResult:
    """Run the full sequential pipeline: position, then LS and WLS velocity and
    acceleration.  Each WLS acceleration consumes the matching WLS velocity."""
    pos = estimate_position(measurements, sensors, cond_cap)
    v_ls = estimate_velocity(measurements, sensors, pos.position, UNIFORM,
                             range_source, cond_cap=cond_cap)
    v_wls = estimate_velocity(measurements, sensors, pos.position, weight_rule,
                              range_source, cond_cap=cond_cap)
    a_ls = estimate_acceleration(measurements, sensors, pos.position, v_ls.value,
                                 UNIFORM, range_source, cond_cap=cond_cap)
    a_wls = estimate_acceleration(measurements, sensors, pos.position, v_wls.value,
                                  weight_rule, range_source, cond_cap=cond_cap)
    return EstimationResult(pos, v_ls, v_wls, a_ls, a_wls)
