#ifndef FSW_MODEL_CLASSIFY_HPP
#define FSW_MODEL_CLASSIFY_HPP

#include <json.hpp>

#include "fsw/model/system.hpp"

namespace fsw::model {

// Exponential approximability certificate: the verdict is
// "exponential-certified" exactly when the N1 coefficient structure, a
// declared separable expansion, a parameter-independent boundary operator and
// the FS1/FS2 sample checks all hold.
struct SystemClassification {
  enum class Verdict { ExponentialCertified, Uncertified };
  Verdict verdict = Verdict::Uncertified;
  struct Criterion {
    std::string name;
    bool pass = false;
    std::string note;
  };
  std::vector<Criterion> criteria;

  std::string verdict_string() const {
    return verdict == Verdict::ExponentialCertified ? "exponential-certified" : "uncertified";
  }
  nlohmann::json to_json() const;
};

SystemClassification classify_system(const FriedrichsSystem& sys);

} // namespace fsw::model

#endif
