#ifndef FSW_MODEL_REGISTRY_HPP
#define FSW_MODEL_REGISTRY_HPP

#include <json.hpp>

#include "fsw/model/system.hpp"

namespace fsw::model {

// Built-in parametrized systems:
//   advection-reaction-1d          b du/dx + c u = f on (0,1), mu = c
//   advection-reaction-2d-case1    fixed b, mu = reaction coefficient c
//   advection-reaction-2d-case2    b = (cos mu, sin mu), mu in [0.1, pi/2-0.1]
//   advection-reaction-2d-case3    b = (cos mu, sin mu), mu in [0, 2 pi]
//   cdr-1d / cdr-2d                convection-diffusion-reaction in first-order
//                                  (total-flux) form, mu = (D, b, c)
//   elasticity-2d                  stress/displacement form with a displacement
//                                  reaction term, mu = (lambda, mu_e); assembly
//                                  and classification only (solve unsupported)
std::vector<std::string> registry_ids();

// overrides: optional JSON object; accepted keys depend on the id and are
// rejected when unknown. "param_box": [[lo,hi],...] is accepted everywhere.
FriedrichsSystem registry_get(const std::string& id,
                              const nlohmann::json& overrides = nlohmann::json::object());

// {id, d, m, coefficients (symbolic tag + constants), parameter_box, flags}
nlohmann::json system_to_json(const FriedrichsSystem& sys);
// reconstructs a registry-backed system from its JSON document
FriedrichsSystem system_from_json(const nlohmann::json& doc);

} // namespace fsw::model

#endif
