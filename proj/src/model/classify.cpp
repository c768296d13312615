#include "fsw/model/classify.hpp"

#include <cmath>

namespace fsw::model {

nlohmann::json SystemClassification::to_json() const {
  nlohmann::json doc;
  doc["verdict"] = verdict_string();
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : criteria)
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"note", c.note}});
  doc["criteria"] = list;
  return doc;
}

SystemClassification classify_system(const FriedrichsSystem& sys) {
  SystemClassification out;

  SystemClassification::Criterion n1;
  n1.name = "N1";
  if (sys.n1 && sys.n1->kappa > 0.0) {
    n1.pass = true;
    n1.note = "A^i = a_hat * tilde(A^i) with kappa = " + format_double(sys.n1->kappa);
  } else {
    n1.pass = false;
    n1.note = sys.n1 ? "declared kappa not positive" : "first-order coefficients do not factor "
                                                       "through a common positive scalar";
  }
  out.criteria.push_back(n1);

  SystemClassification::Criterion sep;
  sep.name = "separability";
  if (sys.expansion && !sys.expansion->terms.empty()) {
    // sampled continuity check on the factor functions
    bool finite = true;
    Rng rng(0x5e9a7a11);
    for (int s = 0; s < 32 && finite; ++s) {
      const ParamPoint mu = sys.params.sample(rng);
      for (const auto& term : sys.expansion->terms)
        if (!std::isfinite(term.theta(mu))) finite = false;
      for (const auto& term : sys.expansion->rhs_terms)
        if (!std::isfinite(term.theta(mu))) finite = false;
    }
    sep.pass = finite;
    sep.note = finite ? "declared expansion with Q_b = " +
                            std::to_string(sys.expansion->q_b()) + " terms"
                      : "expansion factors not finite on sampled parameters";
  } else {
    sep.pass = false;
    sep.note = "no separable expansion declared";
  }
  out.criteria.push_back(sep);

  SystemClassification::Criterion bnd;
  bnd.name = "param-independent-boundary";
  bnd.pass = sys.boundary.param_independent;
  bnd.note = bnd.pass ? "D - M and D + M* declared parameter-independent"
                      : "boundary operator varies with the parameter";
  out.criteria.push_back(bnd);

  SystemClassification::Criterion fs;
  fs.name = "FS1/FS2";
  ValidationOptions opts;
  opts.samples_per_axis = 3;
  opts.random_samples = 64;
  opts.mu_samples = 6;
  const ValidationReport rep = validate_friedrichs(sys, opts);
  fs.pass = rep.fs1_pass && rep.fs2_pass && rep.finite_pass;
  fs.note = fs.pass ? "epsilon estimate " + format_double(rep.epsilon_estimate)
                    : (rep.failures.empty() ? "sample checks failed" : rep.failures.front());
  out.criteria.push_back(fs);

  const bool all = n1.pass && sep.pass && bnd.pass && fs.pass;
  out.verdict = all ? SystemClassification::Verdict::ExponentialCertified
                    : SystemClassification::Verdict::Uncertified;
  return out;
}

} // namespace fsw::model
