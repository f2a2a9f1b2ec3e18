#include "singlab/potential_io.hpp"

#include <set>

#include "singlab/error.hpp"

namespace singlab {

namespace {

using nlohmann::json;

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw Error(ErrorCode::ConfigError, where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T required(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw Error(ErrorCode::ConfigError, "potential: missing required key '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "potential: bad value for '" + key + "': " + e.what());
  }
}

template <class T>
T optional_or(const json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "potential: bad value for '" + key + "': " + e.what());
  }
}

MassMetric read_metric(const json& doc, int default_bodies) {
  const int dim = required<int>(doc, "dim");
  std::vector<double> masses =
      optional_or(doc, "masses", std::vector<double>(static_cast<std::size_t>(default_bodies), 1.0));
  std::vector<PiecewiseCubic> functions;
  if (doc.contains("mass_poly")) {
    const auto polys = required<std::vector<std::vector<double>>>(doc, "mass_poly");
    if (!doc.contains("masses")) masses.assign(polys.size(), 1.0);
    if (polys.size() != masses.size()) {
      throw Error(ErrorCode::ConfigError, "mass_poly needs one polynomial per body");
    }
    for (std::size_t i = 0; i < polys.size(); ++i) {
      functions.push_back(PiecewiseCubic::polynomial(polys[i]));
      masses[i] = functions.back()(0.0);
    }
  }
  return MassMetric(std::move(masses), dim, std::move(functions));
}

AssumptionConstants read_constants(const json& doc) {
  AssumptionConstants k;
  if (!doc.contains("constants")) return k;
  const json& c = doc.at("constants");
  reject_unknown(c, {"C1", "C2", "gamma", "alpha_tilde"}, "constants");
  k.c1 = optional_or(c, "C1", 0.0);
  k.c2 = optional_or(c, "C2", 0.0);
  k.gamma = optional_or(c, "gamma", 1.0);
  if (c.contains("alpha_tilde")) k.alpha_tilde = c.at("alpha_tilde").get<double>();
  return k;
}

PotentialSpec build(const json& doc) {
  const std::string kind = required<std::string>(doc, "kind");
  const std::set<std::string> common = {"kind", "constants"};
  auto allow = [&](std::set<std::string> extra) {
    extra.insert(common.begin(), common.end());
    reject_unknown(doc, extra, "potential");
  };

  if (kind == "homogeneous_n_body") {
    allow({"dim", "alpha", "masses", "mass_poly"});
    return PotentialSpec::homogeneous_n_body(read_metric(doc, 2), required<double>(doc, "alpha"));
  }
  if (kind == "one_center") {
    allow({"dim", "alpha", "weight"});
    return PotentialSpec::one_center(required<int>(doc, "dim"), required<double>(doc, "alpha"),
                                     optional_or(doc, "weight", 1.0));
  }
  if (kind == "quasi_homogeneous") {
    allow({"dim", "alpha", "beta", "lambda", "masses", "mass_poly"});
    return PotentialSpec::quasi_homogeneous(read_metric(doc, 1), required<double>(doc, "alpha"),
                                            required<double>(doc, "beta"), required<double>(doc, "lambda"));
  }
  if (kind == "logarithmic_n_body") {
    allow({"dim", "masses", "mass_poly"});
    return PotentialSpec::logarithmic_n_body(read_metric(doc, 2));
  }
  if (kind == "logarithmic_one_center") {
    allow({"dim", "M_poly"});
    const auto poly = optional_or(doc, "M_poly", std::vector<double>{1.0});
    return PotentialSpec::logarithmic_one_center(required<int>(doc, "dim"), PiecewiseCubic::polynomial(poly));
  }
  if (kind == "subspace_distance") {
    allow({"dim", "alpha", "masses", "subspaces", "weights"});
    MassMetric metric = read_metric(doc, 1);
    const auto spaces = required<std::vector<std::vector<std::vector<double>>>>(doc, "subspaces");
    const auto weights = optional_or(doc, "weights", std::vector<double>(spaces.size(), 1.0));
    if (weights.size() != spaces.size()) throw Error(ErrorCode::ConfigError, "one weight per subspace required");
    std::vector<std::pair<double, Subspace>> list;
    for (std::size_t k = 0; k < spaces.size(); ++k) {
      Mat basis(metric.size(), static_cast<Eigen::Index>(spaces[k].size()));
      for (std::size_t c = 0; c < spaces[k].size(); ++c) {
        if (static_cast<int>(spaces[k][c].size()) != metric.size()) {
          throw Error(ErrorCode::ConfigError, "subspace basis vector has the wrong length");
        }
        for (int r = 0; r < metric.size(); ++r) basis(r, static_cast<Eigen::Index>(c)) = spaces[k][c][static_cast<std::size_t>(r)];
      }
      list.emplace_back(weights[k], spaces[k].empty() ? Subspace::zero(metric) : Subspace::from_span(metric, basis));
    }
    return PotentialSpec::subspace_distance(std::move(metric), optional_or(doc, "alpha", 0.0), std::move(list));
  }
  if (kind == "hip_hop") {
    allow({"n", "alpha"});
    return PotentialSpec::hip_hop_reduced(required<int>(doc, "n"), required<double>(doc, "alpha"));
  }
  throw Error(ErrorCode::ConfigError, "unknown or non-loadable potential kind '" + kind + "'");
}

}  // namespace

PotentialSpec potential_from_json(const json& doc) {
  PotentialSpec spec = [&] {
    try {
      return build(doc);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }();
  if (doc.contains("constants")) spec = spec.with_constants(read_constants(doc));
  return spec;
}

json potential_summary(const PotentialSpec& spec) {
  const auto& k = spec.constants();
  json out = {
      {"kind", to_string(spec.kind())},
      {"bodies", spec.metric().bodies()},
      {"dim", spec.metric().dim()},
      {"masses", spec.metric().masses()},
      {"logarithmic", spec.is_logarithmic()},
      {"time_dependent", spec.is_time_dependent()},
      {"alpha", spec.alpha()},
      {"alpha_tilde", spec.alpha_tilde()},
      {"terms", spec.terms().size()},
      {"constants", {{"C1", k.c1}, {"C2", k.c2}, {"gamma", k.gamma}}},
  };
  return out;
}

}  // namespace singlab
