// Optional attachment regularizers: a user pin for a part's center of mass
// and a kernel-density prior over relative transforms fitted from exemplars.
#pragma once

#include <string>
#include <vector>

#include "kitbash/lie.hpp"
#include "kitbash/mesh.hpp"

namespace kitbash {

struct PinConstraint {
  std::string part_id;
  Vec3 target = Vec3::Zero();  // world position for the part's center of mass
  double weight = 1.0;
};

// weight * || centroid(placement * mesh) - target ||^2, with the area-weighted
// surface centroid.
double pin_energy(const PinConstraint& pin, const RigidTransform& placement,
                  const TriMesh& part_mesh);

struct TransformPrior {
  std::vector<RigidTransform> exemplars;
  double sigma = 0.3;
  std::string parent_label;
  std::string child_label;
};

// Uniform-weight mixture of Gaussians in the geodesic distance to each
// exemplar:
//   -log[ (1/M) sum_j (2 pi sigma^2)^(-1/2) exp(-||Log(Ej^-1 P)||^2 / (2 sigma^2)) ]
// Throws AngleNearPi when some exemplar is a near-pi rotation away.
double prior_energy(const TransformPrior& prior,
                    const RigidTransform& placement);

// Kernel density estimate: exemplars are stored verbatim.
TransformPrior fit_prior(const std::vector<RigidTransform>& exemplars,
                         double sigma, const std::string& parent_label = "",
                         const std::string& child_label = "");

// Exemplar file entry: labels plus the relative transform.
struct PriorExemplar {
  std::string parent_label;
  std::string child_label;
  Vec3 rotation_axis_angle = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
};

std::vector<PriorExemplar> load_prior_exemplars(const std::string& path);

// Prior for one label pair, built from matching file entries. Throws
// EmptyInput when no entry matches.
TransformPrior prior_for_labels(const std::vector<PriorExemplar>& exemplars,
                                const std::string& parent_label,
                                const std::string& child_label, double sigma);

}  // namespace kitbash
