// Common scalar/vector aliases used across the library.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace kitbash {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

}  // namespace kitbash
