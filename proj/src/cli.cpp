#include "strictlyap/cli.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "strictlyap/examples.hpp"

namespace strictlyap::cli {

namespace {

using nlohmann::ordered_json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string g17(double v) { return fmt::format("{:.17g}", v); }

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ExampleBundle resolve_bundle(const std::string& spec) {
  if (spec.ends_with(".json") || std::filesystem::is_regular_file(spec)) return load_custom_bundle(spec);
  return make_bundle(spec);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

bool is_hypothesis(const std::string& c) {
  static const std::set<std::string> h = {checks::validate_system, checks::compatibility, checks::relate,
                                          checks::m16,             checks::assumption_H,  checks::bounda,
                                          checks::limiting_decay};
  return h.contains(c);
}

/// Expands group names (expected, hypotheses) and validates the rest.
std::vector<std::string> expand_checks(const ExampleBundle& b, const std::string& spec) {
  std::vector<std::string> out;
  auto add = [&](const std::string& c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& item : split(spec, ',')) {
    if (item == "expected") {
      for (const auto& c : b.expected) add(c);
    } else if (item == "hypotheses") {
      for (const auto& c : b.expected) {
        if (is_hypothesis(c)) add(c);
      }
    } else if (item == "sweep") {
      add(item);
    } else if (check_applies(b, item)) {
      add(item);
    } else {
      throw UsageError(fmt::format("check '{}' is unknown or does not apply to bundle '{}'", item, b.name));
    }
  }
  if (out.empty()) throw UsageError("no checks requested");
  return out;
}

std::vector<double> sweep_grid(const ExampleBundle& b, double lo, double hi, double factor) {
  if (!(lo > 0.0) || !(hi >= lo) || !(factor > 1.0) || !std::isfinite(hi)) {
    throw UsageError(fmt::format("empty or invalid alpha range [{}, {}] with factor {}", lo, hi, factor));
  }
  std::vector<double> out;
  for (double a : alpha_grid(lo, hi, factor)) {
    if (a > b.alpha_floor) out.push_back(a);
  }
  if (out.empty()) throw UsageError(fmt::format("no alpha in the range exceeds the bundle floor {}", b.alpha_floor));
  return out;
}

SweepResult run_sweep(const ExampleBundle& b, const std::vector<double>& alphas, const RunOptions& o) {
  SimulationOptions sim;
  sim.t_end = o.t_end.value_or(b.t_end);
  sim.step = o.step;
  return sweep_alpha(b.builder, b.sys, bundle_initial_conditions(b, o.n_initial, o.seed), alphas, b.decay_floor, sim,
                     o.decay);
}

CertificateReport sweep_report(const SweepResult& s) {
  CertificateReport r;
  r.check_name = "sweep";
  r.passed = s.threshold.has_value() && s.monotone;
  r.tolerance = 0.0;
  for (const auto& v : s.verdicts) r.samples_total += v.samples_total;
  if (s.threshold) {
    // worst margin over the alphas at and above the threshold
    r.worst_margin = -kInf;
    for (std::size_t i = 0; i < s.alphas.size(); ++i) {
      if (s.alphas[i] < *s.threshold) continue;
      const double m = s.verdicts[i].worst_margin - s.verdicts[i].tolerance;
      if (m > r.worst_margin) {
        r.worst_margin = m;
        r.worst_point = s.verdicts[i].worst_point;
      }
    }
    if (!s.monotone) r.worst_margin = std::max(r.worst_margin, 0.0);
    r.diagnostic = fmt::format("threshold {}{}", g17(*s.threshold), s.monotone ? "" : ", verdicts not monotone");
  } else {
    r.worst_margin = s.verdicts.back().worst_margin - s.verdicts.back().tolerance;
    r.worst_point = s.verdicts.back().worst_point;
    if (r.worst_margin <= 0.0) r.worst_margin = 0.0;
    r.diagnostic = "no threshold on the grid";
  }
  return r;
}

struct Sink {
  std::ostream* stream = nullptr;
  std::unique_ptr<std::ofstream> file;

  static Sink open(const std::string& path, std::ostream& fallback) {
    Sink s;
    if (path.empty()) {
      s.stream = &fallback;
    } else {
      s.file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*s.file) throw UsageError(fmt::format("cannot open '{}' for writing", path));
      s.stream = s.file.get();
    }
    return s;
  }
  std::ostream& operator*() { return *stream; }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

struct Common {
  std::string bundle;
  std::uint64_t seed = 42;
  std::string out;
  int n_initial = 10;
  double t_end = 0.0;
};

void add_common(CLI::App* app, Common& c, bool with_bundle = true) {
  if (with_bundle) app->add_option("--bundle", c.bundle, "Bundle name or path to a JSON system description")->required();
  app->add_option("--seed", c.seed, "Seed for sampled grids and initial conditions")->capture_default_str();
  app->add_option("--out", c.out, "Output path (standard output when omitted)");
}

void add_run(CLI::App* app, Common& c) {
  app->add_option("--n-initial", c.n_initial, "Number of seeded initial conditions")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--t-end", c.t_end, "Simulation horizon (bundle default when omitted)")->check(CLI::PositiveNumber);
}

RunOptions run_options(const Common& c, double alpha) {
  RunOptions o;
  o.alpha = alpha;
  o.seed = c.seed;
  o.n_initial = c.n_initial;
  if (c.t_end > 0.0) o.t_end = c.t_end;
  return o;
}

double checked_alpha(const ExampleBundle& b, std::optional<double> alpha) {
  const double a = alpha.value_or(b.alpha_default);
  if (!(a > 0.0) || !std::isfinite(a)) throw UsageError(fmt::format("alpha must be positive (got {})", a));
  if (!(a > b.alpha_floor)) {
    throw UsageError(fmt::format("bundle '{}' requires alpha > {} (got {})", b.name, b.alpha_floor, a));
  }
  return a;
}

int cmd_verify(const Common& c, std::optional<double> alpha_opt, const std::string& checks_spec, std::ostream& out) {
  const ExampleBundle b = resolve_bundle(c.bundle);
  const double alpha = checked_alpha(b, alpha_opt);
  const auto names = expand_checks(b, checks_spec);
  const RunOptions o = run_options(c, alpha);
  Sink sink = Sink::open(c.out, out);
  bool all = true;
  for (const auto& name : names) {
    CertificateReport r;
    if (name == "sweep") {
      r = sweep_report(run_sweep(b, sweep_grid(b, 1.0, 4096.0, 2.0), o));
    } else {
      r = run_check(b, name, o);
    }
    all = all && r.passed;
    *sink << report_line(b.name, alpha, c.seed, r) << '\n';
    if (!c.out.empty()) {
      out << fmt::format("{} {} margin={} {}\n", r.passed ? "PASS" : "FAIL", name, g17(r.worst_margin), r.diagnostic);
    }
  }
  (*sink).flush();
  return all ? kAllPass : kCertifiedFail;
}

int cmd_sweep(const Common& c, double lo, double hi, double factor, std::ostream& out) {
  const ExampleBundle b = resolve_bundle(c.bundle);
  const auto alphas = sweep_grid(b, lo, hi, factor);
  const auto s = run_sweep(b, alphas, run_options(c, alphas.front()));
  Sink sink = Sink::open(c.out, out);
  *sink << "alpha,passed,worst_margin,worst_t,worst_x_norm\n";
  for (std::size_t i = 0; i < s.alphas.size(); ++i) {
    const auto& v = s.verdicts[i];
    const double xn = v.worst_point.state.size() > 0 ? v.worst_point.state.norm() : kNaN;
    *sink << fmt::format("{},{},{},{},{}\n", g17(s.alphas[i]), v.passed ? 1 : 0, g17(v.worst_margin),
                         g17(v.worst_point.t), g17(xn));
  }
  (*sink).flush();
  out << fmt::format("# threshold: {}\n", s.threshold ? g17(*s.threshold) : std::string("none"));
  out << fmt::format("# monotone: {}\n", s.monotone ? "true" : "false");
  return s.threshold && s.monotone ? kAllPass : kCertifiedFail;
}

int cmd_simulate(const Common& c, std::optional<double> alpha_opt, const std::string& x0_spec, int every,
                 std::ostream& out) {
  const ExampleBundle b = resolve_bundle(c.bundle);
  const double alpha = checked_alpha(b, alpha_opt);
  const auto parts = split(x0_spec, ',');
  if (static_cast<int>(parts.size()) != b.sys.dim) {
    throw UsageError(fmt::format("x0 has {} components but bundle '{}' has dimension {}", parts.size(), b.name, b.sys.dim));
  }
  Vector x0(b.sys.dim);
  for (int i = 0; i < b.sys.dim; ++i) {
    std::size_t used = 0;
    const std::string& p = parts[static_cast<std::size_t>(i)];
    try {
      x0(i) = std::stod(p, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != p.size()) throw UsageError(fmt::format("bad x0 component '{}'", p));
  }
  const double t_end = c.t_end > 0.0 ? c.t_end : b.t_end;
  Trajectory traj;
  bool diverged = false;
  std::string why;
  try {
    traj = integrate(b.sys, alpha, x0, 0.0, t_end);
  } catch (const DivergenceError& e) {
    traj = e.partial();
    diverged = true;
    why = e.what();
  }
  const auto L = b.builder(alpha);
  const ScalarFieldFn V = L.as_field();
  Sink sink = Sink::open(c.out, out);
  std::string header = "t";
  for (int i = 1; i <= b.sys.dim; ++i) header += fmt::format(",x_{}", i);
  header += ",V_alpha,Vdot_alpha\n";
  *sink << header;
  for (std::size_t i = 0; i < traj.size(); i += static_cast<std::size_t>(every)) {
    std::string row = g17(traj.times[i]);
    for (int k = 0; k < b.sys.dim; ++k) row += "," + g17(traj.states[i](k));
    const double v = V(traj.states[i], traj.times[i]);
    const double vdot = traj.size() >= 3 ? trajectory_rate(traj, V, i) : kNaN;
    row += "," + g17(v) + "," + g17(vdot) + "\n";
    *sink << row;
  }
  if (diverged) *sink << "# diverged\n";
  (*sink).flush();
  if (diverged) throw DivergenceError(why, traj);
  return kAllPass;
}

int cmd_list(const Common& c, std::ostream& out) {
  Sink sink = Sink::open(c.out, out);
  *sink << "name,description\n";
  for (const auto& info : list_bundles()) *sink << csv_field(info.name) << ',' << csv_field(info.description) << '\n';
  (*sink).flush();
  return kAllPass;
}

}  // namespace

std::string report_line(const std::string& bundle, double alpha, std::uint64_t seed, const CertificateReport& r) {
  ordered_json point;
  ordered_json state = ordered_json::array();
  for (Eigen::Index i = 0; i < r.worst_point.state.size(); ++i) state.push_back(number(r.worst_point.state(i)));
  point["state"] = state;
  point["t"] = number(r.worst_point.t);
  point["aux"] = number(r.worst_point.aux);

  ordered_json j;
  j["artifact_version"] = kArtifactVersion;
  j["bundle"] = bundle;
  j["alpha"] = number(alpha);
  j["check_name"] = r.check_name;
  j["passed"] = r.passed;
  j["worst_margin"] = number(r.worst_margin);
  j["worst_point"] = point;
  j["seed"] = seed;
  j["tolerance"] = number(r.tolerance);
  j["samples_total"] = r.samples_total;
  j["diagnostic"] = r.diagnostic;
  ordered_json parts = ordered_json::array();
  for (const auto& p : r.parts) {
    ordered_json q;
    q["check_name"] = p.check_name;
    q["passed"] = p.passed;
    q["worst_margin"] = number(p.worst_margin);
    q["tolerance"] = number(p.tolerance);
    parts.push_back(q);
  }
  j["parts"] = parts;
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explicit strict Lyapunov functions for rapidly time-varying systems: checks and simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  Common verify_c, sweep_c, sim_c, list_c;
  std::optional<double> verify_alpha, sim_alpha;
  std::string checks_spec = "expected";
  double lo = 1.0, hi = 65536.0, factor = 2.0;
  std::string x0_spec;
  int every = 1;

  auto* verify = app.add_subcommand("verify", "Run certificates for one bundle at a fixed alpha (NDJSON reports)");
  add_common(verify, verify_c);
  add_run(verify, verify_c);
  verify->add_option("--alpha", verify_alpha, "Fast-time scale (bundle default when omitted)");
  verify->add_option("--checks", checks_spec,
                     "Comma list of checks or groups: expected, hypotheses, sweep, validate_system, compatibility, "
                     "relate, m16, assumption_H, bounda, limiting_decay, decay, iss, iiss, envelope")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Decay verdicts on a geometric alpha grid (CSV)");
  add_common(sweep, sweep_c);
  add_run(sweep, sweep_c);
  sweep->add_option("--alpha-min", lo, "Smallest alpha")->capture_default_str();
  sweep->add_option("--alpha-max", hi, "Largest alpha")->capture_default_str();
  sweep->add_option("--factor", factor, "Grid ratio")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Trajectory with V_alpha and its rate (CSV)");
  add_common(simulate, sim_c);
  simulate->add_option("--alpha", sim_alpha, "Fast-time scale (bundle default when omitted)");
  simulate->add_option("--x0", x0_spec, "Initial state, comma separated")->required();
  simulate->add_option("--t-end", sim_c.t_end, "Horizon (bundle default when omitted)")->check(CLI::PositiveNumber);
  simulate->add_option("--every", every, "Write every k-th sample")->capture_default_str()->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-bundles", "Registered bundles (CSV)");
  add_common(list, list_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kAllPass;
  } catch (const CLI::CallForVersion&) {
    out << kArtifactVersion << '\n';
    return kAllPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*verify) return cmd_verify(verify_c, verify_alpha, checks_spec, out);
    if (*sweep) return cmd_sweep(sweep_c, lo, hi, factor, out);
    if (*simulate) return cmd_simulate(sim_c, sim_alpha, x0_spec, every, out);
    if (*list) return cmd_list(list_c, out);
  } catch (const DivergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  }
  return kUsageError;
}

}  // namespace strictlyap::cli
