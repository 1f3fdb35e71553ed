#pragma once

#include <Eigen/Dense>

#include "ovtk/bbox.hpp"

namespace ovtk {

/// Noise model for the constant-velocity box filter. Standard deviations are
/// expressed as fractions of the current box height.
struct KalmanParams {
    double std_weight_position = 1.0 / 20.0;
    double std_weight_velocity = 1.0 / 160.0;
    double std_weight_measurement = 1.0 / 20.0;
    /// Multiplier on the initial velocity standard deviation.
    double initial_velocity_scale = 10.0;
    /// Multiplier on the initial position standard deviation.
    double initial_position_scale = 2.0;
    double aspect_position_std = 1e-2;
    double aspect_velocity_std = 1e-5;
    double aspect_measurement_std = 1e-1;
};

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;

/// Filter state over (cx, cy, aspect, height) and their per-frame velocities.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateCovariance covariance = StateCovariance::Identity();
};

MeasurementVector bbox_to_measurement(const BBox& b);
BBox state_to_bbox(const StateVector& mean);

KalmanState kf_init(const BBox& b, const KalmanParams& params = {});

struct Prediction {
    KalmanState state;
    BBox box;
};

/// One constant-velocity step; the returned box is the propagated mean.
Prediction kf_predict(const KalmanState& s, const KalmanParams& params = {});

/// Standard Kalman correction toward `observed`. Throws InvalidArgument for a
/// non-finite or empty observation.
KalmanState kf_update(const KalmanState& s, const BBox& observed, const KalmanParams& params = {});

}  // namespace ovtk
