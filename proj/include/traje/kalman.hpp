// Constant-velocity Kalman filter over (cx, cy, vx, vy) with position
// observations, SORT style. The velocity is initiated by differencing the
// first two observations; before that the filter predicts zero motion.

#pragma once

#include <Eigen/Dense>

#include "traje/core.hpp"

namespace traje
{

struct KalmanNoise
{
  double process_position{1e-2};
  double process_velocity{1e-4};
  double observation{1.0};
  double initial_velocity_variance{1e3};
};

class KalmanFilter
{
public:
  using Vector4 = Eigen::Vector4d;
  using Matrix4 = Eigen::Matrix4d;

  KalmanFilter(const Centroid& first, const KalmanNoise& noise = {}) : noise_(noise)
  {
    F_ = Matrix4::Identity();
    F_(0, 2) = 1.0;
    F_(1, 3) = 1.0;
    H_.setZero();
    H_(0, 0) = 1.0;
    H_(1, 1) = 1.0;
    Q_ = Vector4(noise.process_position, noise.process_position, noise.process_velocity,
                 noise.process_velocity)
             .asDiagonal();
    R_ = Eigen::Matrix2d::Identity() * noise.observation;

    x_ << first.x, first.y, 0.0, 0.0;
    P_ = Vector4(noise.observation, noise.observation, noise.initial_velocity_variance,
                 noise.initial_velocity_variance)
             .asDiagonal();
    first_ = first;
  }

  void predict()
  {
    x_ = F_ * x_;
    P_ = F_ * P_ * F_.transpose() + Q_;
    ++since_first_;
  }

  /// Position after one more predict, without changing the filter.
  Centroid peek() const
  {
    const Vector4 x = F_ * x_;
    return {x(0), x(1)};
  }

  void update(const Centroid& z)
  {
    if (updates_ == 0) {
      // Two-point initiation.
      const double steps = since_first_ > 0 ? static_cast<double>(since_first_) : 1.0;
      x_ << z.x, z.y, (z.x - first_.x) / steps, (z.y - first_.y) / steps;
      const double r = noise_.observation;
      P_ = Vector4(r, r, 2.0 * r / (steps * steps), 2.0 * r / (steps * steps)).asDiagonal();
      ++updates_;
      return;
    }
    const Eigen::Vector2d y = Eigen::Vector2d(z.x, z.y) - H_ * x_;
    const Eigen::Matrix2d S = H_ * P_ * H_.transpose() + R_;
    if (!(S.determinant() > 0.0)) {
      // Degenerate zero-noise filter: the state is already certain.
      ++updates_;
      return;
    }
    const Eigen::Matrix<double, 4, 2> K = P_ * H_.transpose() * S.inverse();
    x_ += K * y;
    // Joseph form keeps P symmetric positive definite.
    const Matrix4 I_KH = Matrix4::Identity() - K * H_;
    P_ = I_KH * P_ * I_KH.transpose() + K * R_ * K.transpose();
    P_ = 0.5 * (P_ + P_.transpose());
    ++updates_;
  }

  Centroid position() const { return {x_(0), x_(1)}; }
  Offset velocity() const { return {x_(2), x_(3)}; }
  const Vector4& state() const { return x_; }
  const Matrix4& covariance() const { return P_; }
  int updates() const { return updates_; }

private:
  KalmanNoise noise_;
  Matrix4 F_, Q_, P_;
  Eigen::Matrix<double, 2, 4> H_;
  Eigen::Matrix2d R_;
  Vector4 x_;
  Centroid first_;
  int since_first_{0};
  int updates_{0};
};

}  // namespace traje
