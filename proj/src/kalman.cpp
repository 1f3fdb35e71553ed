#include "ovtk/kalman.hpp"

#include <algorithm>

#include "ovtk/error.hpp"

namespace ovtk {

namespace {

StateCovariance transition()
{
    StateCovariance f = StateCovariance::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

Eigen::Matrix<double, 4, 8> observation()
{
    Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

double sq(double v) { return v * v; }

}  // namespace

MeasurementVector bbox_to_measurement(const BBox& b)
{
    MeasurementVector m;
    m << b.x + 0.5 * b.w, b.y + 0.5 * b.h, b.w / b.h, b.h;
    return m;
}

BBox state_to_bbox(const StateVector& mean)
{
    const double h = mean(3);
    const double w = mean(2) * h;
    return BBox{mean(0) - 0.5 * w, mean(1) - 0.5 * h, w, h};
}

KalmanState kf_init(const BBox& b, const KalmanParams& p)
{
    KalmanState s;
    s.mean.setZero();
    s.mean.head<4>() = bbox_to_measurement(b);
    const double h = b.h;
    StateVector stddev;
    stddev << p.initial_position_scale * p.std_weight_position * h,
        p.initial_position_scale * p.std_weight_position * h, p.aspect_position_std,
        p.initial_position_scale * p.std_weight_position * h,
        p.initial_velocity_scale * p.std_weight_velocity * h,
        p.initial_velocity_scale * p.std_weight_velocity * h, p.aspect_velocity_std,
        p.initial_velocity_scale * p.std_weight_velocity * h;
    s.covariance = stddev.array().square().matrix().asDiagonal();
    return s;
}

Prediction kf_predict(const KalmanState& s, const KalmanParams& p)
{
    static const StateCovariance f = transition();
    const double h = std::max(s.mean(3), 1e-6);
    StateVector q;
    q << sq(p.std_weight_position * h), sq(p.std_weight_position * h), sq(p.aspect_position_std),
        sq(p.std_weight_position * h), sq(p.std_weight_velocity * h), sq(p.std_weight_velocity * h),
        sq(p.aspect_velocity_std), sq(p.std_weight_velocity * h);

    Prediction out;
    out.state.mean = f * s.mean;
    StateCovariance cov = f * s.covariance * f.transpose();
    cov.diagonal() += q;
    out.state.covariance = 0.5 * (cov + cov.transpose());
    out.box = state_to_bbox(out.state.mean);
    return out;
}

KalmanState kf_update(const KalmanState& s, const BBox& observed, const KalmanParams& p)
{
    if (!observed.valid()) throw InvalidArgument("kf_update: observation must be finite with positive size");
    static const Eigen::Matrix<double, 4, 8> hm = observation();

    const double h = std::max(s.mean(3), 1e-6);
    MeasurementVector r;
    r << sq(p.std_weight_measurement * h), sq(p.std_weight_measurement * h), sq(p.aspect_measurement_std),
        sq(p.std_weight_measurement * h);

    const Eigen::Matrix4d innovation_cov = hm * s.covariance * hm.transpose() + Eigen::Matrix4d(r.asDiagonal());
    const Eigen::Matrix<double, 8, 4> pht = s.covariance * hm.transpose();
    // K = P H^T S^-1, solved through the Cholesky factor of S.
    const Eigen::Matrix<double, 8, 4> gain = innovation_cov.llt().solve(pht.transpose()).transpose();
    const MeasurementVector innovation = bbox_to_measurement(observed) - hm * s.mean;

    KalmanState out;
    out.mean = s.mean + gain * innovation;
    // Joseph form keeps the posterior symmetric positive-definite.
    const StateCovariance ikh = StateCovariance::Identity() - gain * hm;
    StateCovariance cov = ikh * s.covariance * ikh.transpose() +
                          gain * Eigen::Matrix4d(r.asDiagonal()) * gain.transpose();
    out.covariance = 0.5 * (cov + cov.transpose());
    if (!(out.mean(3) > 0.0)) out.mean(3) = observed.h;
    return out;
}

}  // namespace ovtk
