#include "cicdsc/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cicdsc/errors.hpp"

namespace cicdsc {

// Wichura (1988), algorithm AS 241, PPND16: inverse normal CDF accurate to
// about 1e-16 over (0, 1).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("normal quantile level must lie in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                      r +
                  2.41780725177450611770e-1) *
                     r +
                 1.27045825245236838258e0) *
                    r +
                3.64784832476320460504e0) *
                   r +
               5.76949722146069140550e0) *
                  r +
              4.63033784615654529590e0) *
                 r +
             1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                      r +
                  1.51986665636164571966e-2) *
                     r +
                 1.48103976427480074590e-1) *
                    r +
                6.89767334985100004550e-1) *
                   r +
               1.67638483018380384940e0) *
                  r +
              2.05319162663775882187e0) *
                 r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                      r +
                  1.24266094738807843860e-3) *
                     r +
                 2.65321895265761230930e-2) *
                    r +
                2.96560571828504891230e-1) *
                   r +
               1.78482653991729133580e0) *
                  r +
              5.46378491116411436990e0) *
                 r +
             6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r +
                   1.42151175831644588870e-7) *
                      r +
                  1.84631831751005468180e-5) *
                     r +
                 7.86869131145613259100e-4) *
                    r +
                1.48753612908506148525e-2) *
                   r +
               1.36929880922735805310e-1) *
                  r +
              5.99832206555887937690e-1) *
                 r +
             1.0);
  }
  return q < 0.0 ? -value : value;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ (0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL);
  return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t Rng::next() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  // 53 random bits centered in their cell: strictly inside (0, 1).
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

Dist Dist::uniform(double lo, double hi) {
  if (!(hi > lo)) throw ValidationError("uniform needs hi > lo");
  return {Family::Uniform, lo, hi};
}

Dist Dist::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw ValidationError("normal needs sd > 0");
  return {Family::Normal, mean, sd};
}

Dist Dist::shifted_exp(double shift, double rate) {
  if (!(rate > 0.0)) throw ValidationError("exponential needs rate > 0");
  return {Family::ShiftedExp, shift, rate};
}

Dist Dist::point(double value) { return {Family::Point, value, 0.0}; }

double Dist::quantile(double tau) const {
  switch (family) {
    case Family::Uniform:
      return a + (b - a) * tau;
    case Family::Normal:
      return a + b * normal_quantile(tau);
    case Family::ShiftedExp:
      return a - std::log1p(-tau) / b;
    case Family::Point:
      return a;
  }
  throw ValidationError("unknown distribution family");
}

double Dist::sample(Rng& rng) const { return quantile(rng.uniform01()); }

Dist Dist::from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "uniform")
    return uniform(j.at("a").get<double>(), j.at("b").get<double>());
  if (family == "normal")
    return normal(j.at("mean").get<double>(), j.at("sd").get<double>());
  if (family == "shifted_exp")
    return shifted_exp(j.at("shift").get<double>(), j.at("rate").get<double>());
  if (family == "point") return point(j.at("value").get<double>());
  throw ValidationError("unknown distribution family '" + family + "'");
}

nlohmann::json Dist::to_json() const {
  switch (family) {
    case Family::Uniform:
      return {{"family", "uniform"}, {"a", a}, {"b", b}};
    case Family::Normal:
      return {{"family", "normal"}, {"mean", a}, {"sd", b}};
    case Family::ShiftedExp:
      return {{"family", "shifted_exp"}, {"shift", a}, {"rate", b}};
    case Family::Point:
      return {{"family", "point"}, {"value", a}};
  }
  return {};
}

double QuantileMixture::quantile(double tau) const {
  double q = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i)
    q += lambda[i] * components[i].quantile(tau);
  return q;
}

double QuantileMixture::sample(Rng& rng) const {
  return quantile(rng.uniform01());
}

double HForm::apply(double u, double v, int t) const {
  const double index = u_coef[t] * u + v_coef[t] * v;
  const double linked = link[t] == Link::Exp ? std::exp(index) : index;
  return linked + delta[t];
}

bool HForm::index_invariant() const {
  return u_coef[0] == u_coef[1] && v_coef[0] == v_coef[1];
}

HForm HForm::additive(double delta0, double delta1) {
  HForm h;
  h.delta = {delta0, delta1};
  return h;
}

HForm HForm::factor(double delta0, double delta1, double theta0,
                    double theta1) {
  HForm h;
  h.delta = {delta0, delta1};
  h.v_coef = {theta0, theta1};
  return h;
}

HForm HForm::from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  auto link_of = [](const std::string& s) {
    if (s == "identity") return Link::Identity;
    if (s == "exp") return Link::Exp;
    throw ValidationError("unknown link '" + s + "'");
  };
  if (type == "additive")
    return additive(j.value("delta_pre", 0.0), j.value("delta_post", 1.0));
  if (type == "factor")
    return factor(j.value("delta_pre", 0.0), j.value("delta_post", 1.0),
                  j.value("theta_pre", 1.0), j.value("theta_post", 1.0));
  if (type == "index") {
    HForm h;
    h.link = {link_of(j.value("link_pre", std::string("identity"))),
              link_of(j.value("link_post", std::string("identity")))};
    h.delta = {j.value("delta_pre", 0.0), j.value("delta_post", 0.0)};
    return h;
  }
  if (type == "custom") {
    HForm h;
    if (j.contains("link"))
      h.link = {link_of(j.at("link")[0].get<std::string>()),
                link_of(j.at("link")[1].get<std::string>())};
    if (j.contains("u_coef"))
      h.u_coef = {j.at("u_coef")[0].get<double>(),
                  j.at("u_coef")[1].get<double>()};
    if (j.contains("v_coef"))
      h.v_coef = {j.at("v_coef")[0].get<double>(),
                  j.at("v_coef")[1].get<double>()};
    if (j.contains("delta"))
      h.delta = {j.at("delta")[0].get<double>(),
                 j.at("delta")[1].get<double>()};
    return h;
  }
  throw ValidationError("unknown h form '" + type + "'");
}

nlohmann::json HForm::to_json() const {
  auto link_name = [](Link l) {
    return l == Link::Exp ? "exp" : "identity";
  };
  return {{"type", "custom"},
          {"link", {link_name(link[0]), link_name(link[1])}},
          {"u_coef", u_coef},
          {"v_coef", v_coef},
          {"delta", delta}};
}

double Effect::shift_at(double tau_u) const {
  switch (type) {
    case Type::None:
      return 0.0;
    case Type::Constant:
      return delta;
    case Type::RankShift:
      return delta * tau_u;
  }
  return 0.0;
}

Effect Effect::from_json(const nlohmann::json& j) {
  Effect e;
  const std::string type = j.value("type", std::string("none"));
  if (type == "none") {
    e.type = Type::None;
  } else if (type == "constant") {
    e.type = Type::Constant;
    e.delta = j.at("delta").get<double>();
  } else if (type == "rank_shift") {
    e.type = Type::RankShift;
    e.delta = j.at("delta").get<double>();
    if (e.delta < 0.0)
      throw ValidationError("rank_shift effect must be nonnegative to keep "
                            "outcomes monotone in the individual rank");
  } else {
    throw ValidationError("unknown effect type '" + type + "'");
  }
  return e;
}

nlohmann::json Effect::to_json() const {
  switch (type) {
    case Type::None:
      return {{"type", "none"}};
    case Type::Constant:
      return {{"type", "constant"}, {"delta", delta}};
    case Type::RankShift:
      return {{"type", "rank_shift"}, {"delta", delta}};
  }
  return {};
}

CicDgp CicDgp::from_json(const nlohmann::json& j) {
  CicDgp spec;
  spec.h = HForm::from_json(j.at("h"));
  spec.u_treated = Dist::from_json(j.at("u_treated"));
  spec.u_control = Dist::from_json(j.at("u_control"));
  spec.v_treated = Dist::from_json(j.at("v_treated"));
  spec.v_control = Dist::from_json(j.at("v_control"));
  spec.groups_per_arm = j.at("groups_per_arm").get<int>();
  spec.cell_size = j.at("cell_size").get<int>();
  if (j.contains("effect")) spec.effect = Effect::from_json(j.at("effect"));
  spec.seed = j.value("seed", 1ULL);
  return spec;
}

nlohmann::json CicDgp::to_json() const {
  return {{"h", h.to_json()},
          {"u_treated", u_treated.to_json()},
          {"u_control", u_control.to_json()},
          {"v_treated", v_treated.to_json()},
          {"v_control", v_control.to_json()},
          {"groups_per_arm", groups_per_arm},
          {"cell_size", cell_size},
          {"effect", effect.to_json()},
          {"seed", seed}};
}

DscDgp DscDgp::from_json(const nlohmann::json& j) {
  DscDgp spec;
  spec.u = Dist::from_json(j.at("u"));
  for (const auto& d : j.at("controls")) spec.control_v.push_back(Dist::from_json(d));
  spec.lambda_star = j.at("lambda_star").get<std::vector<double>>();
  spec.a_pre = j.value("a_pre", 0.0);
  spec.a_post = j.value("a_post", 1.0);
  spec.t0 = j.at("t0").get<int>();
  spec.t = j.at("t").get<int>();
  spec.cell_size = j.at("cell_size").get<int>();
  if (j.contains("effect")) spec.effect = Effect::from_json(j.at("effect"));
  spec.seed = j.value("seed", 1ULL);
  return spec;
}

nlohmann::json DscDgp::to_json() const {
  nlohmann::json controls = nlohmann::json::array();
  for (const auto& d : control_v) controls.push_back(d.to_json());
  return {{"u", u.to_json()},
          {"controls", controls},
          {"lambda_star", lambda_star},
          {"a_pre", a_pre},
          {"a_post", a_post},
          {"t0", t0},
          {"t", t},
          {"cell_size", cell_size},
          {"effect", effect.to_json()},
          {"seed", seed}};
}

namespace {

std::string padded_id(const char* prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
  return buf;
}

}  // namespace

PanelDataset generate_cic_panel(const CicDgp& spec,
                                std::optional<std::uint64_t> override_seed) {
  if (spec.groups_per_arm < 1 || spec.cell_size < 1)
    throw ValidationError("groups_per_arm and cell_size must be positive");
  Rng rng(override_seed.value_or(spec.seed));

  PanelDataset p;
  p.periods = {0, 1};
  for (int arm = 0; arm < 2; ++arm) {
    const bool treated = arm == 0;
    const Dist& du = treated ? spec.u_treated : spec.u_control;
    const Dist& dv = treated ? spec.v_treated : spec.v_control;
    for (int g = 1; g <= spec.groups_per_arm; ++g) {
      const std::string gid = padded_id(treated ? "I" : "C", g);
      p.roles[gid] = treated ? Arm::Treated : Arm::Control;
      p.groups.push_back(gid);
      for (int t = 0; t <= 1; ++t) {
        const double v = dv.sample(rng);
        auto& cell = p.cells[{gid, t}];
        cell.reserve(spec.cell_size);
        for (int i = 0; i < spec.cell_size; ++i) {
          const double rank = rng.uniform01();
          double y = spec.h.apply(du.quantile(rank), v, t);
          if (treated && t == 1) y += spec.effect.shift_at(rank);
          cell.push_back(y);
        }
      }
    }
  }
  std::sort(p.groups.begin(), p.groups.end());
  return p;
}

PanelDataset generate_dsc_panel(const DscDgp& spec,
                                std::optional<std::uint64_t> override_seed) {
  validate_dsc_dgp(spec);
  Rng rng(override_seed.value_or(spec.seed));

  const QuantileMixture treated_v{spec.control_v, spec.lambda_star};

  PanelDataset p;
  const int num_groups = static_cast<int>(spec.control_v.size()) + 1;
  for (int t = 1; t <= spec.t; ++t) p.periods.push_back(t);
  for (int g = 1; g <= num_groups; ++g) {
    const std::string gid = padded_id("G", g);
    p.roles[gid] = g == 1 ? Arm::Treated : Arm::Control;
    p.groups.push_back(gid);
    for (int t = 1; t <= spec.t; ++t) {
      const bool post = t > spec.t0;
      const double a = post ? spec.a_post : spec.a_pre;
      const double v = g == 1 ? treated_v.sample(rng)
                              : spec.control_v[g - 2].sample(rng);
      auto& cell = p.cells[{gid, t}];
      cell.reserve(spec.cell_size);
      for (int i = 0; i < spec.cell_size; ++i) {
        const double rank = rng.uniform01();
        double y = a + spec.u.quantile(rank) + v;
        if (g == 1 && post) y += spec.effect.shift_at(rank);
        cell.push_back(y);
      }
    }
  }
  return p;
}

double oracle_cic_truth(const CicDgp& spec, double tau_u, double tau_v) {
  return spec.h.apply(spec.u_treated.quantile(tau_u),
                      spec.v_treated.quantile(tau_v), 1);
}

double oracle_dsc_truth(const DscDgp& spec, double tau_u, double tau_v) {
  double acc = 0.0;
  for (std::size_t g = 0; g < spec.control_v.size(); ++g)
    acc += spec.lambda_star[g] *
           (spec.a_post + spec.u.quantile(tau_u) +
            spec.control_v[g].quantile(tau_v));
  return acc;
}

void validate_cic_dgp(const CicDgp& spec, bool claims_support_inclusion) {
  if (spec.groups_per_arm < 1 || spec.cell_size < 1)
    throw ValidationError("groups_per_arm and cell_size must be positive");

  // Strict monotonicity probe of h in u and v on a 50x50 grid spanning the
  // bulk of both arms' supports.
  auto probe_points = [&](const Dist& d1, const Dist& d2) {
    std::vector<double> pts;
    for (int k = 0; k < 50; ++k) {
      const double tau = 0.01 + 0.98 * k / 49.0;
      pts.push_back(d1.quantile(tau));
      pts.push_back(d2.quantile(tau));
    }
    std::sort(pts.begin(), pts.end());
    return pts;
  };
  const auto us = probe_points(spec.u_treated, spec.u_control);
  const auto vs = probe_points(spec.v_treated, spec.v_control);
  // Near-duplicate probe points (distinct by rounding only) are skipped; a
  // strict comparison across a sub-epsilon gap would be vacuous anyway.
  auto distinct = [](double lo, double hi) {
    return hi - lo > 1e-9 * (1.0 + std::abs(lo) + std::abs(hi));
  };
  for (int t = 0; t <= 1; ++t) {
    for (std::size_t i = 1; i < us.size(); ++i) {
      if (!distinct(us[i - 1], us[i])) continue;
      if (!(spec.h.apply(us[i], vs[0], t) > spec.h.apply(us[i - 1], vs[0], t)))
        throw ValidationError("outcome map is not strictly increasing in u");
    }
    for (std::size_t i = 1; i < vs.size(); ++i) {
      if (!distinct(vs[i - 1], vs[i])) continue;
      if (!(spec.h.apply(us[0], vs[i], t) > spec.h.apply(us[0], vs[i - 1], t)))
        throw ValidationError("outcome map is not strictly increasing in v");
    }
  }

  if (claims_support_inclusion) {
    // Near-endpoint quantiles stand in for the support bounds; the slack
    // absorbs the gap between the eps-quantile and the true endpoint when the
    // endpoints coincide (e.g. Uniform(0,1) inside Uniform(0,2)).
    const double eps_lo = 1e-6, eps_hi = 1.0 - 1e-6;
    auto contained = [&](const Dist& treated, const Dist& control) {
      const double slack =
          1e-4 * (1.0 + control.quantile(eps_hi) - control.quantile(eps_lo));
      return treated.quantile(eps_lo) >= control.quantile(eps_lo) - slack &&
             treated.quantile(eps_hi) <= control.quantile(eps_hi) + slack;
    };
    if (!contained(spec.u_treated, spec.u_control))
      throw ValidationError(
          "treated U support is not contained in the control U support");
    if (!contained(spec.v_treated, spec.v_control))
      throw ValidationError(
          "treated V support is not contained in the control V support");
  }
}

void validate_dsc_dgp(const DscDgp& spec) {
  if (spec.control_v.empty())
    throw ValidationError("DSC scenario needs at least one donor group");
  if (spec.lambda_star.size() != spec.control_v.size())
    throw ValidationError("lambda_star length must match the donor count");
  double s = 0.0;
  for (double l : spec.lambda_star) {
    if (!(l >= 0.0)) throw ValidationError("lambda_star must be nonnegative");
    s += l;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw ValidationError("lambda_star must sum to one");
  if (spec.t0 < 1 || spec.t <= spec.t0)
    throw ValidationError("need 1 <= t0 < t for pre and post regimes");
  if (spec.cell_size < 1) throw ValidationError("cell_size must be positive");
}

}  // namespace cicdsc
