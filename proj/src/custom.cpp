#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "strictlyap/examples.hpp"
#include "strictlyap/expression.hpp"

namespace strictlyap {

namespace {

using nlohmann::json;

/// Evaluates expressions over (x1..xn, t[, tau]).
class StateFormula {
 public:
  StateFormula(const std::string& src, int dim, bool with_tau)
      : expr_(src, state_variables(dim, with_tau)), dim_(dim), with_tau_(with_tau) {}

  double operator()(const Vector& x, double t, double tau = 0.0) const {
    if (x.size() != dim_) throw std::invalid_argument("custom bundle: state dimension mismatch");
    std::vector<double> v(x.data(), x.data() + x.size());
    v.push_back(t);
    if (with_tau_) v.push_back(tau);
    return expr_(v);
  }

 private:
  Expression expr_;
  int dim_;
  bool with_tau_;
};

ScalarFn scalar_formula(const std::string& src, const std::string& var) {
  const Expression e(src, {var});
  return [e](double s) { return e(std::span<const double>(&s, 1)); };
}

std::vector<StateFormula> vector_formula(const json& j, const char* key, int dim, bool with_tau) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw std::invalid_argument(fmt::format("custom bundle: '{}' must be an array of {} expressions", key, dim));
  }
  std::vector<StateFormula> out;
  for (const auto& e : j) out.emplace_back(e.get<std::string>(), dim, with_tau);
  return out;
}

LyapunovCandidate candidate(const std::string& src, int dim) {
  const StateFormula V(src, dim, false);
  LyapunovCandidate c;
  c.value = [V](const Vector& x, double t) { return V(x, t); };
  return c;
}

ExampleBundle from_json(const json& j) {
  ExampleBundle b;
  b.name = j.value("name", std::string("custom"));
  b.description = j.value("description", std::string("user-supplied system"));
  const int dim = j.at("dim").get<int>();
  if (dim < 1) throw std::invalid_argument("custom bundle: dim must be positive");
  b.sys.dim = dim;
  const auto f = vector_formula(j.at("f"), "f", dim, true);
  b.sys.f = [f, dim](const Vector& x, double t, double tau) {
    Vector r(dim);
    for (int i = 0; i < dim; ++i) r(i) = f[static_cast<std::size_t>(i)](x, t, tau);
    return r;
  };

  if (j.contains("alpha")) b.alpha_default = j.at("alpha").get<double>();
  if (j.contains("ic")) {
    const auto ic = j.at("ic").get<std::vector<double>>();
    if (ic.size() != 2 || !(ic[0] < ic[1])) throw std::invalid_argument("custom bundle: ic must be [lo, hi] with lo < hi");
    b.ic_lo = ic[0];
    b.ic_hi = ic[1];
  }
  if (j.contains("t_end")) b.t_end = j.at("t_end").get<double>();
  if (!(b.alpha_default > 0.0) || !(b.t_end > 0.0)) throw std::invalid_argument("custom bundle: alpha and t_end must be positive");

  if (j.contains("delta")) {
    b.gauges.delta = Gauge{scalar_formula(j.at("delta").get<std::string>(), "s"), GaugeClass::K,
                           j.at("delta").get<std::string>()};
  }
  if (j.contains("N")) {
    b.gauges.N = Gauge{scalar_formula(j.at("N").get<std::string>(), "eta"), GaugeClass::M, j.at("N").get<std::string>()};
  }
  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    CompatibilityConstants k;
    k.c_bar = c.value("c_bar", k.c_bar);
    k.c_bbar = c.value("c_bbar", k.c_bbar);
    k.K = c.value("K", k.K);
    k.eta_0 = c.value("eta_0", k.eta_0);
    k.validate();
    b.gauges.constants = k;
    b.K = k.K;
  }
  if (j.contains("K")) b.K = j.at("K").get<double>();

  b.expected = {checks::validate_system};
  if (j.contains("fbar")) {
    const auto fb = vector_formula(j.at("fbar"), "fbar", dim, false);
    LimitingSystem lim;
    lim.dim = dim;
    lim.fbar = [fb, dim](const Vector& x, double t) {
      Vector r(dim);
      for (int i = 0; i < dim; ++i) r(i) = fb[static_cast<std::size_t>(i)](x, t);
      return r;
    };
    b.lim = lim;
    if (!j.contains("V")) throw std::invalid_argument("custom bundle: 'fbar' requires 'V'");
    b.V = candidate(j.at("V").get<std::string>(), dim);
    if (!b.gauges.delta || !b.gauges.constants) {
      throw std::invalid_argument("custom bundle: the limiting-shift route needs 'delta' and 'constants'");
    }
    b.route = Construction::limiting_shift;
    const auto V = b.V;
    const auto sys = b.sys;
    b.builder = [V, sys, lim](double alpha) { return v_alpha(V, sys, lim, alpha); };
    const auto& c = *b.gauges.constants;
    b.decay_floor = limiting_shift_floor(*b.gauges.delta, c.c_bar);
    auto d = b.gauges.delta->eval;
    const double c_bar = c.c_bar;
    b.limiting_floor = [d, c_bar](const Vector& x, double) {
      const double v = d(x.norm());
      return c_bar * v * v;
    };
    b.expected.push_back(checks::compatibility);
    if (b.gauges.N) b.expected.push_back(checks::relate);
    if (b.K > 0.0) b.expected.push_back(checks::m16);
    b.expected.push_back(checks::limiting_decay);
    b.expected.push_back(checks::decay);
  } else if (j.contains("strictification")) {
    const auto& s = j.at("strictification");
    StrictificationData sd;
    sd.V = candidate(s.at("V").get<std::string>(), dim);
    const StateFormula W(s.at("W").get<std::string>(), dim, false);
    const StateFormula theta(s.at("theta").get<std::string>(), dim, false);
    sd.W = [W](const Vector& x, double t) { return W(x, t); };
    sd.theta = [theta](const Vector& x, double t) { return theta(x, t); };
    sd.p = scalar_formula(s.at("p").get<std::string>(), "tau");
    sd.period = s.at("period").get<double>();
    sd.p_max = s.at("p_max").get<double>();
    if (s.contains("c")) sd.c = s.at("c").get<double>();
    if (!(sd.period > 0.0) || !(sd.p_max > 0.0)) {
      throw std::invalid_argument("custom bundle: period and p_max must be positive");
    }
    b.strictification = sd;
    b.V = sd.V;
    b.route = Construction::strictification;
    b.builder = [sd](double alpha) { return u_alpha(sd, alpha); };
    b.decay_floor = strictification_floor(sd.W);
    b.expected.push_back(checks::assumption_H);
    b.expected.push_back(checks::bounda);
    b.expected.push_back(checks::decay);
  } else {
    throw std::invalid_argument("custom bundle: need either 'fbar' (with V, delta, constants) or 'strictification'");
  }
  return b;
}

}  // namespace

ExampleBundle custom_bundle_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("custom bundle: {}", e.what()));
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("custom bundle: {}", e.what()));
  }
}

ExampleBundle load_custom_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("custom bundle: cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return custom_bundle_from_json(ss.str());
}

}  // namespace strictlyap
