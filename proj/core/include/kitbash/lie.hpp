// SO(3)/SE(3) arithmetic: exponential/logarithm maps, geodesic distances,
// Lie-algebra averaging, and the isotropic Gaussian distribution on SO(3).
#pragma once

#include <span>
#include <vector>

#include "kitbash/errors.hpp"
#include "kitbash/rng.hpp"
#include "kitbash/types.hpp"

namespace kitbash {

// Skew-symmetric matrix such that skew(v) * u = v x u.
Mat3 skew(const Vec3& v);

// 3x3 rotation matrix wrapper. The raw constructor trusts its input; use
// Rotation::from_matrix to validate orthonormality and det = +1.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }
  // Validates m^T m = I and det(m) = 1 within tol; throws otherwise.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  // Rotation angle in [0, pi].
  double angle() const;
  // Relative angle between this and another rotation.
  double angle_to(const Rotation& o) const;

  // Max deviation of m^T m from the identity.
  double orthonormality_error() const;
  // Nearest rotation matrix (via quaternion normalization).
  Rotation renormalized() const;

 private:
  Mat3 m_;
};

// Element of SE(3). Composition applies the right operand first:
// (A * B).apply(x) == A.apply(B.apply(x)).
struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) {
    return {Rotation::identity(), t};
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
  RigidTransform inverse() const {
    const Rotation rinv = rotation.inverse();
    return {rinv, -(rinv * translation)};
  }
  Mat4 matrix() const;
};

// se(3) coordinates: rotational part first, translational part second.
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 rho = Vec3::Zero();

  Vec6 vector() const {
    Vec6 v;
    v << omega, rho;
    return v;
  }
  static Twist from_vector(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  double norm() const { return vector().norm(); }
};

// Rodrigues map, smooth at ||omega|| -> 0 via series.
Rotation so3_exp(const Vec3& omega);

// Principal logarithm with angle in [0, pi]. At angle pi the axis sign is
// fixed by making its largest-magnitude component positive.
Vec3 so3_log(const Rotation& r);

// Left Jacobian of SO(3) (the V matrix of the SE(3) exponential) and its
// inverse.
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inverse(const Vec3& omega);

RigidTransform se3_exp(const Twist& t);
// Throws AngleNearPi when the rotation angle is >= pi - 1e-6.
Twist se3_log(const RigidTransform& t);

// ||Log(A^-1 B)||; zero iff A == B, symmetric. Throws AngleNearPi.
double geodesic_norm(const RigidTransform& a, const RigidTransform& b);

// Single-shot average in the chart of the first element:
//   T0 * Exp(mean_i Log(T0^-1 Ti)).
// refine_iters > 0 re-centers the chart at the current estimate up to that
// many times (fixed-point polish, off by default).
RigidTransform lie_mean(std::span<const RigidTransform> transforms,
                        int refine_iters = 0);

// ---------------------------------------------------------------------------
// Isotropic Gaussian on SO(3).
//
// Density relative to the normalized Haar measure, as a function of the
// rotation angle w:
//   f(w) = sum_l (2l+1) exp(-l(l+1) scale^2 / 2) sin((l+1/2)w) / sin(w/2)
// so that the distribution of Log draws tends to N(0, scale^2 I) as
// scale -> 0. The angle marginal is f(w) (1-cos w)/pi on [0, pi].
// Sampling draws a uniform axis and an angle from a 4096-bin inverse-CDF
// table of the marginal. Below scale 0.05 the tangent-Gaussian approximation
// replaces the series (chi(3) angle marginal) and draws come directly from
// the tangent Gaussian, since the table cannot resolve such narrow widths.
// ---------------------------------------------------------------------------

struct Igso3Params {
  double scale = 0.5;
  int series_terms = 200;
};

// Haar-relative density at rotation angle `angle`.
double igso3_density(double angle, const Igso3Params& params);

// Marginal pdf of the rotation angle on [0, pi].
double igso3_angle_pdf(double angle, const Igso3Params& params);

// Draw a rotation; deterministic for a fixed rng state.
Rotation igso3_sample(const Igso3Params& params, Rng& rng);
Rotation igso3_sample(const Igso3Params& params, std::uint64_t seed);

// log f of the relative rotation r * base^-1.
double igso3_log_density(const Rotation& r, const Rotation& base,
                         const Igso3Params& params);

// Gradient of igso3_log_density with respect to left tangent coordinates of
// r at base, by central finite differences (step 1e-5). Throws AngleNearPi
// when the relative angle is >= pi - 1e-3.
Vec3 igso3_log_density_grad(const Rotation& r, const Rotation& base,
                            const Igso3Params& params);

}  // namespace kitbash
