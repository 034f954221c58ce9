#include "kitbash/lie.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace kitbash {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (ortho > tol || std::abs(det - 1.0) > tol) {
    std::ostringstream os;
    os << "matrix is not a rotation (orthonormality error " << ortho
       << ", det " << det << ")";
    throw ValidationError(os.str());
  }
  return Rotation(m);
}

double Rotation::angle() const {
  // atan2 form: precise for both small and large angles.
  const Vec3 v(m_(2, 1) - m_(1, 2), m_(0, 2) - m_(2, 0), m_(1, 0) - m_(0, 1));
  const double s = 0.5 * v.norm();
  const double c = 0.5 * (m_.trace() - 1.0);
  return std::atan2(s, c);
}

double Rotation::angle_to(const Rotation& o) const {
  return (inverse() * o).angle();
}

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Rotation Rotation::renormalized() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  return Rotation(q.toRotationMatrix());
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Rotation so3_exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;  // R = I + a [w]x + b [w]x^2
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    const double sh = std::sin(0.5 * theta);  // 1 - cos t = 2 sin^2(t/2)
    b = 2.0 * sh * sh / theta2;
  }
  const Mat3 w = skew(omega);
  return Rotation(Mat3(Mat3::Identity() + a * w + b * (w * w)));
}

Vec3 so3_log(const Rotation& r) {
  const Mat3& m = r.matrix();
  const Vec3 vee(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * vee.norm();
  const double c = 0.5 * (m.trace() - 1.0);
  const double theta = std::atan2(s, c);

  if (theta < 1e-6) {
    // R ~ I: log ~ vee/2 with a second-order correction.
    return (0.5 + theta * theta / 12.0) * vee;
  }
  if (theta > kPi - 1e-4) {
    // Near the cut locus the vee part vanishes; recover the axis from the
    // symmetric part. a_i^2 = (m_ii - cos t) / (1 - cos t).
    const double ct = std::cos(theta);
    const double denom = 1.0 - ct;
    Vec3 a;
    int imax = 0;
    for (int i = 1; i < 3; ++i)
      if (m(i, i) > m(imax, imax)) imax = i;
    a[imax] = std::sqrt(std::max(0.0, (m(imax, imax) - ct) / denom));
    const double scale = a[imax] * denom;
    for (int j = 0; j < 3; ++j) {
      if (j == imax) continue;
      a[j] = 0.5 * (m(imax, j) + m(j, imax)) / scale;
    }
    a.normalize();
    // Sign from the antisymmetric part when it still resolves it,
    // otherwise the deterministic convention: largest component positive.
    const double sgn = vee.dot(a);
    if (std::abs(sgn) > 1e-12) {
      if (sgn < 0.0) a = -a;
    } else {
      int k = 0;
      for (int i = 1; i < 3; ++i)
        if (std::abs(a[i]) > std::abs(a[k])) k = i;
      if (a[k] < 0.0) a = -a;
    }
    return theta * a;
  }
  return (theta / vee.norm()) * vee;  // vee = 2 sin(t) * axis
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double b, c;  // V = I + b [w]x + c [w]x^2
  if (theta < 1e-4) {
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    c = 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 w = skew(omega);
  return Mat3::Identity() + b * w + c * (w * w);
}

Mat3 so3_left_jacobian_inverse(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double c;  // V^-1 = I - 1/2 [w]x + c [w]x^2
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0;
  } else {
    c = (1.0 - 0.5 * theta * std::sin(theta) / (1.0 - std::cos(theta))) /
        theta2;
  }
  const Mat3 w = skew(omega);
  return Mat3::Identity() - 0.5 * w + c * (w * w);
}

RigidTransform se3_exp(const Twist& t) {
  RigidTransform out;
  out.rotation = so3_exp(t.omega);
  out.translation = so3_left_jacobian(t.omega) * t.rho;
  return out;
}

Twist se3_log(const RigidTransform& t) {
  const double theta = t.rotation.angle();
  if (theta >= kPi - 1e-6) {
    std::ostringstream os;
    os << "se3_log at rotation angle " << theta << " within 1e-6 of pi";
    throw AngleNearPi(os.str());
  }
  Twist out;
  out.omega = so3_log(t.rotation);
  out.rho = so3_left_jacobian_inverse(out.omega) * t.translation;
  return out;
}

double geodesic_norm(const RigidTransform& a, const RigidTransform& b) {
  return se3_log(a.inverse() * b).norm();
}

RigidTransform lie_mean(std::span<const RigidTransform> transforms,
                        int refine_iters) {
  if (transforms.empty()) throw EmptyInput("lie_mean of empty list");
  if (transforms.size() == 1) return transforms.front();
  RigidTransform base = transforms.front();
  for (int iter = 0;; ++iter) {
    Vec6 acc = Vec6::Zero();
    const RigidTransform base_inv = base.inverse();
    for (const RigidTransform& t : transforms)
      acc += se3_log(base_inv * t).vector();
    acc /= static_cast<double>(transforms.size());
    base = base * se3_exp(Twist::from_vector(acc));
    if (iter >= refine_iters || acc.norm() < 1e-14) break;
  }
  return base;
}

// ---------------------------------------------------------------------------
// IGSO(3)
// ---------------------------------------------------------------------------

namespace {

constexpr double kGaussianApproxScale = 0.05;
constexpr int kCdfBins = 4096;

double series_density(double angle, double scale, int terms) {
  // f(w) = sum_l (2l+1) exp(-l(l+1) s^2/2) sin((l+1/2)w)/sin(w/2)
  const double s2 = scale * scale;
  double f = 0.0;
  const double half = 0.5 * angle;
  const double sin_half = std::sin(half);
  for (int l = 0; l < terms; ++l) {
    const double degeneracy = 2.0 * l + 1.0;
    const double coeff = degeneracy * std::exp(-0.5 * l * (l + 1) * s2);
    if (coeff < 1e-300) break;
    double character;  // chi_l(w), equal to 2l+1 at w = 0
    if (angle < 1e-8) {
      character = degeneracy;
    } else {
      character = std::sin((l + 0.5) * angle) / sin_half;
    }
    f += coeff * character;
  }
  return f;
}

// chi(3) marginal of the tangent Gaussian N(0, scale^2 I).
double gaussian_angle_pdf(double angle, double scale) {
  const double s2 = scale * scale;
  const double norm = std::sqrt(2.0 / kPi) / (s2 * scale);
  return norm * angle * angle * std::exp(-0.5 * angle * angle / s2);
}

struct AngleTable {
  std::vector<double> cdf;  // kCdfBins + 1 entries over [0, pi]
  double sample(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
    if (hi == 0) hi = 1;
    if (hi >= cdf.size()) hi = cdf.size() - 1;
    const std::size_t lo = hi - 1;
    const double c0 = cdf[lo], c1 = cdf[hi];
    const double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
    const double step = kPi / kCdfBins;
    return (static_cast<double>(lo) + frac) * step;
  }
};

const AngleTable& angle_table(const Igso3Params& params) {
  struct Key {
    double scale;
    int terms;
    bool operator<(const Key& o) const {
      return scale < o.scale || (scale == o.scale && terms < o.terms);
    }
  };
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<AngleTable>> cache;

  const Key key{params.scale, params.series_terms};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto table = std::make_unique<AngleTable>();
  table->cdf.resize(kCdfBins + 1);
  const double step = kPi / kCdfBins;
  double acc = 0.0;
  // Truncation can leave tiny negative tail values; clamp so the cdf stays
  // monotone (binary search depends on it).
  double prev = std::max(igso3_angle_pdf(0.0, params), 0.0);
  table->cdf[0] = 0.0;
  for (int i = 1; i <= kCdfBins; ++i) {
    const double x = i * step;
    const double cur = std::max(igso3_angle_pdf(x, params), 0.0);
    acc += 0.5 * (prev + cur) * step;
    table->cdf[i] = acc;
    prev = cur;
  }
  if (!(acc > 0.0))
    throw SolverError("igso3 angle table has no mass; scale too small");
  for (double& c : table->cdf) c /= acc;
  const AngleTable& ref = *table;
  cache.emplace(key, std::move(table));
  return ref;
}

}  // namespace

double igso3_density(double angle, const Igso3Params& params) {
  if (params.scale <= 0.0) throw ValidationError("igso3 scale must be > 0");
  if (params.scale < kGaussianApproxScale) {
    const double marginal = gaussian_angle_pdf(angle, params.scale);
    const double haar = (1.0 - std::cos(angle)) / kPi;
    if (haar < 1e-300) {
      // limit (1-cos w)/pi ~ w^2/(2 pi): density finite at 0
      const double s2 = params.scale * params.scale;
      return std::sqrt(2.0 / kPi) / (s2 * params.scale) * 2.0 * kPi *
             std::exp(-0.5 * angle * angle / s2);
    }
    return marginal / haar;
  }
  return series_density(angle, params.scale, params.series_terms);
}

double igso3_angle_pdf(double angle, const Igso3Params& params) {
  if (params.scale < kGaussianApproxScale)
    return gaussian_angle_pdf(angle, params.scale);
  return series_density(angle, params.scale, params.series_terms) *
         (1.0 - std::cos(angle)) / kPi;
}

Rotation igso3_sample(const Igso3Params& params, Rng& rng) {
  if (params.scale <= 0.0) throw ValidationError("igso3 scale must be > 0");
  if (params.scale < kGaussianApproxScale) {
    // Tangent Gaussian: axis uniform, angle chi(3)-distributed, exactly the
    // small-scale marginal; the table cannot resolve these widths.
    return so3_exp(params.scale * rng.normal3());
  }
  const Vec3 axis = rng.unit_vector();
  const double angle = angle_table(params).sample(rng.uniform());
  return so3_exp(angle * axis);
}

Rotation igso3_sample(const Igso3Params& params, std::uint64_t seed) {
  Rng rng(seed);
  return igso3_sample(params, rng);
}

double igso3_log_density(const Rotation& r, const Rotation& base,
                         const Igso3Params& params) {
  const Rotation rel = r * base.inverse();
  return std::log(std::max(igso3_density(rel.angle(), params), 1e-300));
}

Vec3 igso3_log_density_grad(const Rotation& r, const Rotation& base,
                            const Igso3Params& params) {
  const Rotation rel = r * base.inverse();
  const double angle = rel.angle();
  if (angle >= kPi - 1e-3) {
    std::ostringstream os;
    os << "igso3 gradient at relative angle " << angle << " within 1e-3 of pi";
    throw AngleNearPi(os.str());
  }
  constexpr double h = 1e-5;
  Vec3 grad;
  for (int i = 0; i < 3; ++i) {
    Vec3 delta = Vec3::Zero();
    delta[i] = h;
    const Rotation plus = so3_exp(delta) * rel;
    const Rotation minus = so3_exp(-delta) * rel;
    const double fp = std::log(std::max(igso3_density(plus.angle(), params), 1e-300));
    const double fm = std::log(std::max(igso3_density(minus.angle(), params), 1e-300));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace kitbash
