#ifndef FSW_MODEL_SYSTEM_HPP
#define FSW_MODEL_SYSTEM_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsw/la/dense.hpp"
#include "fsw/util.hpp"

namespace fsw::model {

using la::DenseMatrix;
using la::Vector;

using ParamPoint = std::vector<double>;
// spatial point, components beyond the dimension are zero
using SpacePoint = std::array<double, 2>;

struct Box {
  std::size_t dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  double diameter() const;
};

// Compact parameter box in R^p.
struct ParameterDomain {
  std::vector<std::array<double, 2>> bounds; // per-coordinate [lo, hi]
  std::vector<std::string> names;            // optional labels

  std::size_t dimension() const { return bounds.size(); }
  bool contains(const ParamPoint& mu, double slack = 1e-12) const;
  ParamPoint midpoint() const;
  ParamPoint sample(Rng& rng) const;
  void check_valid() const; // lo <= hi, finite
};

enum class Smoothness { Constant, Polynomial, General };

// Matrix-valued coefficient (mu, x) -> m x m.
struct CoefficientField {
  std::size_t space_dim = 1;
  std::size_t state_dim = 1;
  Smoothness smoothness = Smoothness::Constant;
  std::function<DenseMatrix(const ParamPoint&, const SpacePoint&)> eval;

  static CoefficientField constant(std::size_t d, const DenseMatrix& value);
  static CoefficientField scalar(std::size_t d,
                                 std::function<double(const ParamPoint&, const SpacePoint&)> f,
                                 Smoothness s);
};

// Vector-valued source (mu, x) -> R^m.
struct SourceField {
  std::size_t space_dim = 1;
  std::size_t state_dim = 1;
  Smoothness smoothness = Smoothness::Constant;
  std::function<Vector(const ParamPoint&, const SpacePoint&)> eval;

  static SourceField constant(std::size_t d, const Vector& value);
};

// Admissible boundary operator M(x, n; mu).
struct BoundaryOperatorSpec {
  enum class Kind {
    SpectralAbs,     // M = |D| (spectral absolute value of the face matrix)
    DirichletPrimal, // M = D with flux->primal coupling negated (zero BC on
                     // the primal components)
    Custom
  };
  Kind kind = Kind::SpectralAbs;
  std::vector<std::size_t> primal_indices;
  bool param_independent = false;
  std::function<DenseMatrix(const ParamPoint&, const SpacePoint&, const SpacePoint&)> custom;
};

// Affine-in-parameter decomposition of the operator. Each reaction term
// contributes theta(mu) * (a0_q u, v); the transport term contributes the
// whole first-order machinery (volume transport, interface flux, boundary
// penalty) built from the reference fields, scaled by theta(mu).
struct ExpansionTerm {
  enum class Piece { Transport, Reaction };
  Piece piece = Piece::Reaction;
  std::function<double(const ParamPoint&)> theta;
  std::optional<CoefficientField> a0; // Reaction only
};

struct RhsTerm {
  std::function<double(const ParamPoint&)> theta;
  SourceField f;
};

struct SeparableExpansion {
  std::vector<ExpansionTerm> terms;
  std::vector<RhsTerm> rhs_terms;
  std::size_t q_b() const { return terms.size(); }
};

// First-order part factors as A^i_mu = a_hat(mu,x) * tilde[i](x) with
// a_hat >= kappa > 0.
struct N1Structure {
  double kappa = 0.0;
  std::function<double(const ParamPoint&, const SpacePoint&)> a_hat;
  std::vector<CoefficientField> tilde;
};

class FriedrichsSystem {
public:
  std::string id = "custom";
  std::size_t space_dim = 1;
  std::size_t state_dim = 1;
  Box domain;
  ParameterDomain params;

  CoefficientField a0;                   // zeroth order, not necessarily symmetric
  std::vector<CoefficientField> a;       // first order, symmetric, one per axis
  std::optional<CoefficientField> div_a; // analytic divergence of the first-order part
  SourceField rhs;
  BoundaryOperatorSpec boundary;

  std::optional<SeparableExpansion> expansion;
  std::optional<N1Structure> n1;
  bool denseness_d1_d2 = false;
  bool solve_supported = true;
  double epsilon_bound = 0.0; // declared lower bound for the FS2 margin

  // sum_i n_i A^i(mu, x); n must be a unit vector.
  DenseMatrix face_matrix(const ParamPoint& mu, const SpacePoint& x, const SpacePoint& n) const;
  // M(x, n; mu) per the boundary spec.
  DenseMatrix boundary_matrix(const ParamPoint& mu, const SpacePoint& x,
                              const SpacePoint& n) const;
  // analytic divergence if supplied, else central finite differences with
  // step 1e-6 * domain diameter.
  DenseMatrix divergence(const ParamPoint& mu, const SpacePoint& x) const;

  void check_consistent() const; // dimensions, parameter box
};

struct ValidationOptions {
  std::size_t samples_per_axis = 4;
  std::size_t random_samples = 256;
  std::size_t mu_samples = 10;
  std::uint64_t seed = 0x46535732;
};

struct ValidationReport {
  bool finite_pass = true;
  bool fs1_pass = true;
  bool fs2_pass = true;
  bool m1_pass = true;
  double max_asymmetry = 0.0;    // worst FS1 violation
  double epsilon_estimate = 0.0; // min over samples of lambda_min(A0+A0^T-divA)/2
  double m1_min_eigenvalue = 0.0;
  ParamPoint worst_mu;
  SpacePoint worst_x{0.0, 0.0};
  std::vector<std::string> failures;

  bool pass() const { return finite_pass && fs1_pass && fs2_pass && m1_pass; }
};

ValidationReport validate_friedrichs(const FriedrichsSystem& sys,
                                     const ValidationOptions& opts = {});

// Formal adjoint: zeroth order (A^0)^T - div A, first order -(A^i)^T,
// boundary operator transposed. The result is itself a Friedrichs system.
FriedrichsSystem adjoint_coefficients(const FriedrichsSystem& sys);

} // namespace fsw::model

#endif
