#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cicdsc/panel.hpp"

// Synthetic data generation with analytic ground-truth counterfactuals. Every
// distribution in the menu has a closed-form quantile function, draws are made
// by inverse transform, and the oracles below are evaluated analytically.

namespace cicdsc {

// Accurate inverse of the standard normal CDF (Wichura's PPND16).
double normal_quantile(double p);

// Deterministic counter-derived stream seed, so replications are independent
// yet reproducible in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Uniform draw strictly inside (0, 1).
  double uniform01();

 private:
  std::uint64_t s_[4];
  std::uint64_t next();
};

struct Dist {
  enum class Family { Uniform, Normal, ShiftedExp, Point };
  Family family = Family::Uniform;
  double a = 0.0;  // uniform lo / normal mean / exp shift / point value
  double b = 1.0;  // uniform hi / normal sd / exp rate

  double quantile(double tau) const;
  double sample(Rng& rng) const;

  static Dist uniform(double lo, double hi);
  static Dist normal(double mean, double sd);
  static Dist shifted_exp(double shift, double rate);
  static Dist point(double value);
  static Dist from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// A quantile mixture: Q(tau) = sum_g lambda_g Q_g(tau). Used to construct the
// treated group's V so that the synthetic-control representation is exact by
// construction.
struct QuantileMixture {
  std::vector<Dist> components;
  std::vector<double> lambda;

  double quantile(double tau) const;
  double sample(Rng& rng) const;
};

// Outcome map: Y = link_t(u_coef_t * u + v_coef_t * v) + delta_t.
// Covers the additive form (identity links, common coefficients), the
// single-index form (per-period links, common coefficients) and deliberate
// index violations (per-period coefficients).
struct HForm {
  enum class Link { Identity, Exp };
  std::array<Link, 2> link{Link::Identity, Link::Identity};
  std::array<double, 2> u_coef{1.0, 1.0};
  std::array<double, 2> v_coef{1.0, 1.0};
  std::array<double, 2> delta{0.0, 0.0};

  double apply(double u, double v, int t) const;
  bool index_invariant() const;  // same index (u,v) -> y composition at t=0,1

  static HForm additive(double delta0, double delta1);
  // Linear factor map: Y = delta_t + theta_t * v + u, with v playing the
  // role of the group loading.
  static HForm factor(double delta0, double delta1, double theta0,
                      double theta1);
  static HForm from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Treatment effect injected as a known monotone map on treated post-period
// outcomes, so the true QTT is analytic.
struct Effect {
  enum class Type { None, Constant, RankShift };
  Type type = Type::None;
  double delta = 0.0;

  // Added to h(u, v, post) for an individual whose U-rank is tau_u.
  double shift_at(double tau_u) const;
  static Effect from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct CicDgp {
  HForm h = HForm::additive(0.0, 1.0);
  Dist u_treated = Dist::uniform(0, 1);
  Dist u_control = Dist::uniform(0, 1);
  Dist v_treated = Dist::uniform(0, 1);
  Dist v_control = Dist::uniform(0, 1);
  int groups_per_arm = 50;
  int cell_size = 200;
  Effect effect;
  std::uint64_t seed = 1;

  static CicDgp from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct DscDgp {
  Dist u = Dist::uniform(0, 1);
  std::vector<Dist> control_v;       // donor-group V distributions
  std::vector<double> lambda_star;   // construction weights for group 1's V
  double a_pre = 0.0;
  double a_post = 1.0;
  int t0 = 100;
  int t = 200;
  int cell_size = 200;
  Effect effect;
  std::uint64_t seed = 1;

  static DscDgp from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Deterministic generation given the spec seed (override_seed, when set,
// replaces spec.seed for replication streams).
PanelDataset generate_cic_panel(const CicDgp& spec,
                                std::optional<std::uint64_t> override_seed = {});
PanelDataset generate_dsc_panel(const DscDgp& spec,
                                std::optional<std::uint64_t> override_seed = {});

// Analytic counterfactual h(Q_{U_I}(tau_u), Q_{V_I}(tau_v), 1).
double oracle_cic_truth(const CicDgp& spec, double tau_u, double tau_v);
// Analytic synthetic-control counterfactual
// sum_g lambda*_g (a_post + Q_U(tau_u) + Q_{V_g}(tau_v)).
double oracle_dsc_truth(const DscDgp& spec, double tau_u, double tau_v);

// Scenario validators: strict monotonicity of h probed on a 50x50 (u,v)
// grid; support inclusion of the treated unobservables in the control
// supports checked at tau in {0.001, 0.999}. Throws ValidationError.
void validate_cic_dgp(const CicDgp& spec, bool claims_support_inclusion);
void validate_dsc_dgp(const DscDgp& spec);

}  // namespace cicdsc
