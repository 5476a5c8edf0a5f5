#pragma once

#include <Eigen/Dense>

namespace aberrasim {

template <typename T>
using Vec3 = Eigen::Matrix<T, 3, 1>;

template <typename T>
using Vec2 = Eigen::Matrix<T, 2, 1>;

/// Dense 2-D sample grid (row = y, col = x).
template <typename T>
using Plane = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
using PlaneC = Eigen::Array<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

using Planed = Plane<double>;
using Planef = Plane<float>;
using PlaneCd = PlaneC<double>;

}  // namespace aberrasim
