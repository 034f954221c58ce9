#include "kitbash/priors.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace kitbash {

double pin_energy(const PinConstraint& pin, const RigidTransform& placement,
                  const TriMesh& part_mesh) {
  if (pin.weight <= 0.0) throw ValidationError("pin weight must be > 0");
  const Vec3 com = placement.apply(surface_centroid(part_mesh));
  return pin.weight * (com - pin.target).squaredNorm();
}

double prior_energy(const TransformPrior& prior,
                    const RigidTransform& placement) {
  if (prior.exemplars.empty()) throw EmptyInput("prior has no exemplars");
  if (prior.sigma <= 0.0) throw ValidationError("prior sigma must be > 0");
  const double inv_2s2 = 0.5 / (prior.sigma * prior.sigma);
  const double norm =
      1.0 / std::sqrt(2.0 * M_PI * prior.sigma * prior.sigma);
  // log-sum-exp over exemplars for stability far from every mode
  double max_exponent = -std::numeric_limits<double>::infinity();
  std::vector<double> exponents;
  exponents.reserve(prior.exemplars.size());
  for (const RigidTransform& exemplar : prior.exemplars) {
    const double d = geodesic_norm(exemplar, placement);
    const double e = -d * d * inv_2s2;
    exponents.push_back(e);
    max_exponent = std::max(max_exponent, e);
  }
  double acc = 0.0;
  for (double e : exponents) acc += std::exp(e - max_exponent);
  const double log_p = std::log(norm / prior.exemplars.size()) + max_exponent +
                       std::log(acc);
  return -log_p;
}

TransformPrior fit_prior(const std::vector<RigidTransform>& exemplars,
                         double sigma, const std::string& parent_label,
                         const std::string& child_label) {
  if (exemplars.empty()) throw EmptyInput("fit_prior: no exemplars");
  if (sigma <= 0.0) throw ValidationError("fit_prior: sigma must be > 0");
  TransformPrior prior;
  prior.exemplars = exemplars;
  prior.sigma = sigma;
  prior.parent_label = parent_label;
  prior.child_label = child_label;
  return prior;
}

std::vector<PriorExemplar> load_prior_exemplars(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open prior exemplar file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_array())
    throw SchemaError(path + ": expected a JSON array of exemplars");
  std::vector<PriorExemplar> out;
  for (const auto& entry : doc) {
    if (!entry.is_object())
      throw SchemaError(path + ": exemplar entries must be objects");
    PriorExemplar ex;
    try {
      ex.parent_label = entry.at("parent_label").get<std::string>();
      ex.child_label = entry.at("child_label").get<std::string>();
      const auto& rot = entry.at("rotation_axis_angle");
      const auto& tr = entry.at("translation");
      for (int i = 0; i < 3; ++i) {
        ex.rotation_axis_angle[i] = rot.at(i).get<double>();
        ex.translation[i] = tr.at(i).get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ": " + e.what());
    }
    out.push_back(ex);
  }
  return out;
}

TransformPrior prior_for_labels(const std::vector<PriorExemplar>& exemplars,
                                const std::string& parent_label,
                                const std::string& child_label, double sigma) {
  std::vector<RigidTransform> transforms;
  for (const PriorExemplar& ex : exemplars) {
    if (ex.parent_label == parent_label && ex.child_label == child_label) {
      transforms.push_back(
          {so3_exp(ex.rotation_axis_angle), ex.translation});
    }
  }
  if (transforms.empty())
    throw EmptyInput("no prior exemplars for label pair (" + parent_label +
                     ", " + child_label + ")");
  return fit_prior(transforms, sigma, parent_label, child_label);
}

}  // namespace kitbash
