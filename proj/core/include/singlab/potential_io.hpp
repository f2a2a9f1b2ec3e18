#pragma once

#include <nlohmann/json.hpp>

#include "singlab/potential.hpp"

namespace singlab {

/// Builds a potential from its JSON description:
///
///   {"kind": "homogeneous_n_body" | "one_center" | "quasi_homogeneous" |
///            "logarithmic_n_body" | "logarithmic_one_center" |
///            "subspace_distance" | "hip_hop",
///    "dim", "alpha", "beta", "lambda", "weight", "masses": [...],
///    "mass_poly": [[c0, c1, ...] per body], "M_poly": [c0, c1, ...],
///    "subspaces": [[basis vector, ...] per subspace], "weights": [K_nu ...],
///    "n": hip-hop N, "constants": {"C1", "C2", "gamma", "alpha_tilde"}}
///
/// Unknown keys raise ConfigError, as do missing required fields.
PotentialSpec potential_from_json(const nlohmann::json& doc);

/// A summary of the potential (kind, exponents, body count, constants).
nlohmann::json potential_summary(const PotentialSpec& spec);

}  // namespace singlab
