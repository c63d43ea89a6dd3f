#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "great/baselines.hpp"

namespace great::harness {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const {
    return tree_ != nullptr && tree_->get_child_optional(key).has_value();
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return boost::trim_copy(tree_->get<std::string>(key));
  }

  std::string required(const std::string& key) const {
    if (!has(key)) config_error("[" + name_ + "] missing key '" + key + "'");
    return str(key, "");
  }

  double real(const std::string& key, double fallback) const {
    return has(key) ? to_real(key, str(key, "")) : fallback;
  }

  std::optional<double> optional_real(const std::string& key) const {
    if (!has(key) || str(key, "").empty()) return std::nullopt;
    return to_real(key, str(key, ""));
  }

  long integer(const std::string& key, long fallback) const {
    return has(key) ? to_integer(key, str(key, "")) : fallback;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string text = str(key, "");
    try {
      std::size_t used = 0;
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    config_error("[" + name_ + "] " + key + " = '" + text + "' is not an unsigned integer");
  }

  std::vector<std::string> list(const std::string& key,
                                const std::vector<std::string>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::string> parts;
    const std::string text = str(key, "");
    if (text.empty()) return parts;
    boost::split(parts, text, boost::is_any_of(","));
    for (auto& p : parts) boost::trim(p);
    parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
    return parts;
  }

  std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key, {})) out.push_back(to_real(key, s));
    return out;
  }

  std::vector<Index> integer_list(const std::string& key) const {
    std::vector<Index> out;
    for (const auto& s : list(key, {})) out.push_back(to_integer(key, s));
    return out;
  }

 private:
  double to_real(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    config_error("[" + name_ + "] " + key + " = '" + text + "' is not a number");
  }

  long to_integer(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      const long v = std::stol(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    config_error("[" + name_ + "] " + key + " = '" + text + "' is not an integer");
  }

  const pt::ptree* tree_;
  std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto child = root.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

StepRule parse_step_rule(const std::string& text) {
  if (text == "fixed") return StepRule::kFixed;
  if (text == "line_search") return StepRule::kLineSearch;
  config_error("step_rule must be 'fixed' or 'line_search', got '" + text + "'");
}

void write_report(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  for (const auto& [k, v] : kv) fmt::print(out, "{} = {}\n", k, v);
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::pair<std::string, std::string>> assumption_report(const std::string& label,
                                                                   double alpha,
                                                                   const Assumption4Report& r) {
  return {{"step", label},
          {"alpha", format_double(alpha)},
          {"rho_tilde", format_double(r.rho_tilde)},
          {"lhs", format_double(r.lhs)},
          {"rhs", format_double(r.rhs)},
          {"slack", format_double(r.slack)},
          {"holds", r.holds ? "true" : "false"}};
}

double resolve_step(const StepChoice& choice, double delta_sup, const CertificateParams& p) {
  if (choice.value) return *choice.value;
  if (choice.label == "cvg") return optimize_step_size(StepObjective::kMaxRate, delta_sup, p).alpha;
  if (choice.label == "ub") return optimize_step_size(StepObjective::kMinUltimate, delta_sup, p).alpha;
  if (choice.label == "mid") {
    return 0.5 * (optimize_step_size(StepObjective::kMaxRate, delta_sup, p).alpha +
                  optimize_step_size(StepObjective::kMinUltimate, delta_sup, p).alpha);
  }
  config_error("unknown step size '" + choice.label + "'");
}

std::unique_ptr<SubspaceTracker> make_tracker(const std::string& name, const Subspace& init,
                                              const TrackerConfig& great_cfg, double grouse_step,
                                              double past_forget) {
  if (name == "great") return std::make_unique<GreatTracker>(great_cfg, init);
  if (name == "grouse") return std::make_unique<GrouseTracker>(grouse_step, init);
  if (name == "past") return std::make_unique<PastTracker>(PastState::from_subspace(init, past_forget));
  config_error("unknown tracker '" + name + "'");
}

Vector sphere_vector(Index n, double radius, Rng& rng) {
  Vector e = rng.normal_vector(n);
  double norm = e.norm();
  while (!(norm > 0.0)) {
    e = rng.normal_vector(n);
    norm = e.norm();
  }
  return (radius / norm) * e;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

StepChoice parse_step_choice(const std::string& text) {
  const std::string t = boost::trim_copy(text);
  if (t == "cvg" || t == "ub" || t == "mid") return {t, std::nullopt};
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size() && v > 0.0) return {t, v};
  } catch (const std::exception&) {
  }
  config_error("step size must be cvg, ub, mid or a positive number, got '" + text + "'");
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    config_error(std::string("malformed config: ") + e.what());
  }

  ExperimentConfig cfg;
  const Section exp = section(root, "experiment");
  const std::string mode = exp.str("mode", "synthetic");
  if (mode == "synthetic") cfg.mode = Mode::kSynthetic;
  else if (mode == "sysid") cfg.mode = Mode::kSysid;
  else if (mode == "validate") cfg.mode = Mode::kValidate;
  else if (mode == "certify") cfg.mode = Mode::kCertify;
  else config_error("unknown mode '" + mode + "'");
  cfg.out_dir = exp.str("out", "out");

  const Section syn = section(root, "synthetic");
  auto& s = cfg.synthetic;
  s.data.ambient_dim = syn.integer("ambient_dim", s.data.ambient_dim);
  s.data.dim = syn.integer("dim", s.data.dim);
  s.data.horizon = syn.integer("horizon", s.data.horizon);
  s.data.drift = syn.real("drift", s.data.drift);
  s.data.noise = syn.real("noise", s.data.noise);
  s.data.coefficients = coefficient_mode_from_string(syn.str("coefficients", "gaussian"));
  s.data.seed = syn.seed("seed", s.data.seed);
  s.window_length = syn.integer("window", s.window_length);
  s.inner_iters = static_cast<int>(syn.integer("inner_iters", s.inner_iters));
  s.tube_radius = syn.real("tube_radius", s.tube_radius);
  s.t0 = syn.integer("t0", s.t0);
  s.init_radius = syn.optional_real("init_radius");
  s.sigma_lower = syn.optional_real("sigma_lower");
  s.sigma_upper = syn.optional_real("sigma_upper");
  if (syn.has("step_sizes")) {
    s.step_sizes.clear();
    for (const auto& item : syn.list("step_sizes", {})) s.step_sizes.push_back(parse_step_choice(item));
  }
  s.step_rule = parse_step_rule(syn.str("step_rule", "fixed"));
  s.baselines = syn.list("baselines", {});
  s.grouse_step = syn.real("grouse_step", s.grouse_step);
  s.past_forget = syn.real("past_forget", s.past_forget);

  const Section sid = section(root, "sysid");
  auto& y = cfg.sysid;
  if (sid.has("system")) {
    fs::path p = sid.str("system", "");
    y.system_file = p.is_absolute() ? p : base_dir / p;
  }
  y.lag = sid.integer("lag", y.lag);
  y.t_ini = sid.integer("t_ini", y.t_ini);
  y.t_fut = sid.integer("t_fut", y.t_fut);
  y.dim = sid.integer("dim", y.dim);
  y.window_length = sid.integer("window", y.window_length);
  y.step_size = sid.real("step_size", y.step_size);
  y.inner_iters = static_cast<int>(sid.integer("inner_iters", y.inner_iters));
  y.step_rule = parse_step_rule(sid.str("step_rule", "line_search"));
  y.trackers = sid.list("trackers", y.trackers);
  y.grouse_step = sid.real("grouse_step", y.grouse_step);
  y.past_forget = sid.real("past_forget", y.past_forget);
  y.init_length = sid.integer("init_length", y.init_length);
  y.validate_length = sid.integer("validate_length", y.validate_length);
  y.test_length = sid.integer("test_length", y.test_length);
  y.test_reps = static_cast<int>(sid.integer("test_reps", y.test_reps));
  y.noise = sid.real("noise", y.noise);
  y.input_scale = sid.real("input_scale", y.input_scale);
  y.state_scale = sid.real("state_scale", y.state_scale);
  if (sid.has("disturbance_time")) y.disturbance_time = sid.integer("disturbance_time", 0);
  y.disturbance_norm = sid.real("disturbance_norm", y.disturbance_norm);
  y.seed = sid.seed("seed", y.seed);

  const Section val = section(root, "validate");
  cfg.grid.tracker = val.str("tracker", cfg.grid.tracker);
  cfg.grid.dims = val.integer_list("dims");
  cfg.grid.windows = val.integer_list("windows");
  cfg.grid.step_sizes = val.real_list("step_sizes");
  cfg.grid.forgets = val.real_list("forgets");

  const Section cer = section(root, "certify");
  auto& c = cfg.certify;
  c.params.noise_bound = cer.real("noise", 0.0);
  c.params.drift_bound = cer.real("drift", 0.0);
  c.params.sigma_lower = cer.real("sigma_lower", 0.0);
  c.params.sigma_upper = cer.real("sigma_upper", 0.0);
  c.params.tube_radius = cer.real("tube_radius", 0.0);
  c.params.window_length = cer.integer("window", 0);
  c.params.inner_iters = static_cast<int>(cer.integer("inner_iters", 1));
  c.params.dim = cer.integer("dim", 0);
  if (cer.has("step_size")) c.step = parse_step_choice(cer.str("step_size", ""));
  c.delta_sup = cer.real("delta_sup", 0.0);
  c.initial_distance = cer.real("initial_distance", 0.0);
  c.steps = cer.integer("steps", c.steps);

  if (cfg.mode == Mode::kSysid || cfg.mode == Mode::kValidate) {
    if (y.system_file.empty()) config_error("[sysid] missing key 'system'");
    if (!fs::exists(y.system_file)) {
      config_error("system file '" + y.system_file.string() + "' does not exist");
    }
  }
  if (cfg.mode == Mode::kValidate && cfg.grid.dims.empty() && cfg.grid.windows.empty() &&
      cfg.grid.step_sizes.empty() && cfg.grid.forgets.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "[validate] defines no candidate values");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.synthetic.data.seed = seed;
  cfg.sysid.seed = seed;
}

void write_samples_csv(const fs::path& path, const std::vector<Vector>& samples) {
  std::ofstream out = open_csv(path);
  const Index n = samples.empty() ? 0 : samples.front().size();
  out << "t";
  for (Index i = 0; i < n; ++i) fmt::print(out, ",u{}", i);
  out << '\n';
  for (std::size_t t = 0; t < samples.size(); ++t) {
    out << (t + 1);
    for (Index i = 0; i < n; ++i) out << ',' << format_double(samples[t](i));
    out << '\n';
  }
}

std::vector<Vector> read_samples_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, "empty sample file");
  std::vector<Vector> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    boost::split(cells, line, boost::is_any_of(","));
    Vector u(static_cast<Index>(cells.size()) - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) u(static_cast<Index>(i) - 1) = std::stod(cells[i]);
    out.push_back(std::move(u));
  }
  return out;
}

SyntheticResult run_synthetic(const SyntheticConfig& cfg, const fs::path& out_dir) {
  const Index win = cfg.window_length;
  if (cfg.t0 + 2 - win < 1) config_error("[synthetic] need window <= t0 + 1");
  if (cfg.data.horizon <= cfg.t0) config_error("[synthetic] need horizon > t0");
  if (cfg.step_sizes.empty()) config_error("[synthetic] step_sizes is empty");
  fs::create_directories(out_dir);

  const SyntheticDataset data = generate_synthetic(cfg.data);
  CertificateParams p;
  p.noise_bound = cfg.data.noise;
  p.drift_bound = cfg.data.drift;
  p.tube_radius = cfg.tube_radius;
  p.window_length = win;
  p.inner_iters = cfg.inner_iters;
  p.dim = cfg.data.dim;

  SyntheticResult result;
  double lo = kInf;
  double hi = 0.0;
  for (long t = cfg.t0 + 1; t <= cfg.data.horizon; ++t) {
    const Matrix w = data.window(t, win);
    const SignalBounds sb = signal_bounds(w, data.truth(t));
    lo = std::min(lo, sb.lower);
    hi = std::max(hi, sb.upper);
    result.delta_sup = std::max(result.delta_sup, delta_bound(w, p));
  }
  result.sigma_lower = cfg.sigma_lower.value_or(lo);
  result.sigma_upper = cfg.sigma_upper.value_or(hi);
  p.sigma_lower = result.sigma_lower;
  p.sigma_upper = result.sigma_upper;

  Rng init_rng = Rng(cfg.data.seed).split(4);
  const double radius = cfg.init_radius.value_or(cfg.tube_radius - 2.0 * cfg.data.drift);
  const Subspace init = perturbed_initial_estimate(data.truth(cfg.t0 + 1), radius, init_rng);
  result.initial_distance = chordal_distance(init, data.truth(cfg.t0));
  const double d0_sq = result.initial_distance * result.initial_distance;

  write_samples_csv(out_dir / "dataset_samples.csv", data.samples);
  {
    std::ofstream out = open_csv(out_dir / "dataset_truth.csv");
    out << "t";
    for (Index j = 0; j < cfg.data.dim; ++j)
      for (Index i = 0; i < cfg.data.ambient_dim; ++i) fmt::print(out, ",b{}_{}", i, j);
    out << '\n';
    for (long t = 0; t <= cfg.data.horizon; ++t) {
      out << t;
      const Matrix& b = data.truth(t).basis();
      for (Index j = 0; j < b.cols(); ++j)
        for (Index i = 0; i < b.rows(); ++i) out << ',' << format_double(b(i, j));
      out << '\n';
    }
  }
  write_report(out_dir / "manifest.txt",
               {{"ambient_dim", std::to_string(cfg.data.ambient_dim)},
                {"dim", std::to_string(cfg.data.dim)},
                {"horizon", std::to_string(cfg.data.horizon)},
                {"noise", format_double(cfg.data.noise)},
                {"drift", format_double(cfg.data.drift)},
                {"coefficients", to_string(cfg.data.coefficients)},
                {"seed", std::to_string(cfg.data.seed)},
                {"transport", kTransportRule},
                {"samples", "dataset_samples.csv"},
                {"truth", "dataset_truth.csv"}});

  // Resolve and check every step size before tracking anything.
  const bool certified = cfg.step_rule == StepRule::kFixed;
  std::vector<double> alphas;
  std::string violated;
  for (const StepChoice& choice : cfg.step_sizes) {
    const double alpha = resolve_step(choice, result.delta_sup, p);
    alphas.push_back(alpha);
    if (!certified) continue;
    CertificateParams pa = p;
    pa.step_size = alpha;
    const Assumption4Report rep = assumption4_check(pa, result.delta_sup);
    write_report(out_dir / ("assumption4_" + choice.label + ".txt"),
                 assumption_report(choice.label, alpha, rep));
    if (!rep.holds && violated.empty()) {
      violated = choice.label + " (alpha " + format_double(alpha) + ", slack " +
                 format_double(rep.slack) + ")";
    }
  }
  write_report(out_dir / "summary.txt",
               {{"sigma_lower", format_double(result.sigma_lower)},
                {"sigma_upper", format_double(result.sigma_upper)},
                {"delta_sup", format_double(result.delta_sup)},
                {"initial_distance", format_double(result.initial_distance)},
                {"init_radius", format_double(radius)},
                {"certificates", certified ? "fixed-step" : "none (line search)"}});
  if (!violated.empty()) {
    throw Error(ErrorCode::kAssumptionViolated,
                "sufficient decrease condition fails for step " + violated);
  }

  auto run_one = [&](std::size_t idx) {
    SyntheticStepResult r;
    r.label = cfg.step_sizes[idx].label;
    r.alpha = alphas[idx];
    CertificateParams pa = p;
    pa.step_size = r.alpha;
    TrackerConfig tc{cfg.data.ambient_dim, cfg.data.dim, win, r.alpha, cfg.inner_iters, cfg.step_rule};
    GreatTracker tracker(tc, init);
    for (long t = cfg.t0 + 2 - win; t <= cfg.t0; ++t) tracker.prime(data.sample(t));
    if (certified) {
      r.assumption = assumption4_check(pa, result.delta_sup);
      r.ultimate_sq = ultimate_bound(result.delta_sup, pa);
    }
    for (long t = cfg.t0 + 1; t <= cfg.data.horizon; ++t) {
      tracker.observe(data.sample(t));
      const double dist = chordal_distance(tracker.estimate(), data.truth(t));
      r.times.push_back(t);
      r.distance.push_back(dist);
      if (certified) {
        const double bound = theorem1_bound(t - cfg.t0, d0_sq, result.delta_sup, pa);
        r.tube_sq.push_back(bound);
        if (dist * dist > bound) ++r.violations;
      }
    }
    std::ofstream out = open_csv(out_dir / ("synthetic_" + r.label + ".csv"));
    out << (certified ? "t,d2_measured,tube_bound,ultimate_bound\n" : "t,d2_measured\n");
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      out << r.times[i] << ',' << format_double(r.distance[i]);
      if (certified) {
        out << ',' << format_double(std::sqrt(r.tube_sq[i])) << ','
            << format_double(std::sqrt(r.ultimate_sq));
      }
      out << '\n';
    }
    return r;
  };

  std::vector<std::future<SyntheticStepResult>> jobs;
  for (std::size_t i = 0; i < cfg.step_sizes.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, run_one, i));
  }
  for (auto& j : jobs) result.runs.push_back(j.get());

  if (!cfg.baselines.empty()) {
    const double gstep = cfg.grouse_step > 0.0 ? cfg.grouse_step : alphas.front();
    TrackerConfig tc{cfg.data.ambient_dim, cfg.data.dim, win, alphas.front(), cfg.inner_iters,
                     cfg.step_rule};
    std::vector<std::unique_ptr<SubspaceTracker>> trackers;
    for (const auto& name : cfg.baselines) {
      trackers.push_back(make_tracker(name, init, tc, gstep, cfg.past_forget));
    }
    std::ofstream out = open_csv(out_dir / "synthetic_baselines.csv");
    out << "t";
    for (const auto& name : cfg.baselines) out << ',' << name;
    out << '\n';
    for (long t = cfg.t0 + 1; t <= cfg.data.horizon; ++t) {
      out << t;
      for (auto& tr : trackers) {
        tr->observe(data.sample(t));
        out << ',' << format_double(chordal_distance(tr->estimate(), data.truth(t)));
      }
      out << '\n';
    }
  }
  return result;
}

double SysidResult::split_mean(std::size_t tracker, const std::string& split) const {
  double acc = 0.0;
  long count = 0;
  for (const auto& row : rows) {
    if (row.split != split) continue;
    acc += row.mean.at(tracker);
    ++count;
  }
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return acc / static_cast<double>(count);
}

SysidResult simulate_sysid(const SysidConfig& cfg) {
  const LtvSystem sys = load_ltv(cfg.system_file.string());
  const Index L = cfg.lag;
  if (L + 1 != cfg.t_ini + cfg.t_fut) {
    config_error("[sysid] trajectory length L + 1 = " + std::to_string(L + 1) +
                 " must equal t_ini + t_fut = " + std::to_string(cfg.t_ini + cfg.t_fut));
  }
  if (cfg.init_length < 1 || cfg.validate_length < 0 || cfg.test_length < 0) {
    config_error("[sysid] split lengths must be nonnegative and init_length >= 1");
  }
  if (cfg.test_reps < 1) config_error("[sysid] test_reps must be >= 1");
  if (cfg.trackers.empty()) config_error("[sysid] trackers is empty");

  const Index k = sys.state_dim();
  const Index m = sys.input_dim();
  const Index p = sys.output_dim();
  const Index n = (m + p) * (L + 1);
  const long count = cfg.init_length + cfg.validate_length + cfg.test_length;
  const long steps = L + count;  // time instants 0 .. steps - 1
  if (steps > sys.horizon()) {
    throw Error(ErrorCode::kHorizonExceeded, "run needs " + std::to_string(steps) +
                                                 " time steps, system horizon is " +
                                                 std::to_string(sys.horizon()));
  }

  Rng root(cfg.seed);
  Rng state_rng = root.split(1);
  Rng input_rng = root.split(2);
  Rng noise_rng = root.split(3);
  Rng test_rng = root.split(4);

  std::vector<Vector> states, inputs, measured;
  Vector x = cfg.state_scale * state_rng.normal_vector(k);
  for (long t = 0; t < steps; ++t) {
    const StateSpaceMatrices s = sys.at(t);
    const Vector v = cfg.input_scale * input_rng.normal_vector(m);
    Vector y = s.c * x + s.d * v;
    if (cfg.noise > 0.0) y += sphere_vector(p, cfg.noise, noise_rng);
    if (cfg.disturbance_time && *cfg.disturbance_time == t) {
      y += sphere_vector(p, cfg.disturbance_norm, noise_rng);
    }
    states.push_back(x);
    inputs.push_back(v);
    measured.push_back(std::move(y));
    x = s.a * x + s.b * v;
  }

  auto sample_at = [&](long t) {
    const std::vector<Vector> vw(inputs.begin() + (t - L), inputs.begin() + t + 1);
    const std::vector<Vector> yw(measured.begin() + (t - L), measured.begin() + t + 1);
    return stack_sample(vw, yw, L);
  };

  Matrix w_ini(n, cfg.init_length);
  for (long i = 0; i < cfg.init_length; ++i) w_ini.col(i) = sample_at(L + i);
  const Subspace init = initialize(w_ini, cfg.dim);

  TrackerConfig tc{n, cfg.dim, cfg.window_length, cfg.step_size, cfg.inner_iters, cfg.step_rule};
  std::vector<std::unique_ptr<SubspaceTracker>> trackers;
  for (const auto& name : cfg.trackers) {
    auto tr = make_tracker(name, init, tc, cfg.grouse_step, cfg.past_forget);
    const long first = std::max<long>(0, cfg.init_length - cfg.window_length);
    for (long i = first; i < cfg.init_length; ++i) tr->prime(w_ini.col(i));
    trackers.push_back(std::move(tr));
  }

  SysidResult result;
  result.trackers = cfg.trackers;
  const std::size_t nt = trackers.size();
  for (long i = cfg.init_length; i < count; ++i) {
    const long t = L + i;
    const Vector u = sample_at(t);
    std::vector<std::optional<Predictor>> predictors(nt);
    for (std::size_t j = 0; j < nt; ++j) {
      trackers[j]->observe(u);
      try {
        predictors[j] = predictor_from_subspace(trackers[j]->estimate(), m, p, cfg.t_ini, cfg.t_fut);
      } catch (const Error&) {
        predictors[j].reset();
      }
    }

    std::vector<std::vector<double>> errors(nt);
    for (int rep = 0; rep < cfg.test_reps; ++rep) {
      std::vector<Vector> tv;
      for (Index j = 0; j <= L; ++j) tv.push_back(cfg.input_scale * test_rng.normal_vector(m));
      std::vector<Vector> ty = ltv_simulate(sys, states[static_cast<std::size_t>(t - L)], tv, t - L);
      if (cfg.noise > 0.0) {
        for (auto& yy : ty) yy += sphere_vector(p, cfg.noise, test_rng);
      }
      const Vector stacked = stack_sample(tv, ty, L);
      const Vector v_all = stacked.head(m * (L + 1));
      const Vector y_all = stacked.tail(p * (L + 1));
      std::vector<Vector> reference(ty.begin() + cfg.t_ini, ty.end());
      for (std::size_t j = 0; j < nt; ++j) {
        if (!predictors[j]) {
          errors[j].push_back(std::numeric_limits<double>::quiet_NaN());
          continue;
        }
        const Vector yhat = predictors[j]->predict(v_all.head(m * cfg.t_ini), y_all.head(p * cfg.t_ini),
                                                   v_all.tail(m * cfg.t_fut));
        std::vector<Vector> predicted;
        for (Index q = 0; q < cfg.t_fut; ++q) predicted.push_back(yhat.segment(q * p, p));
        errors[j].push_back(relative_prediction_error(predicted, reference));
      }
    }

    SysidRow row;
    row.t = t;
    row.split = i < cfg.init_length + cfg.validate_length ? "validate" : "test";
    for (std::size_t j = 0; j < nt; ++j) {
      const auto& e = errors[j];
      const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
      double var = 0.0;
      for (double v : e) var += (v - mean) * (v - mean);
      const double sd = e.size() > 1 ? std::sqrt(var / static_cast<double>(e.size() - 1)) : 0.0;
      row.mean.push_back(mean);
      row.stddev.push_back(sd);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

SysidResult run_sysid(const SysidConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  SysidResult result = simulate_sysid(cfg);
  std::ofstream out = open_csv(out_dir / "sysid_errors.csv");
  out << "t,split";
  for (const auto& name : result.trackers) out << ',' << name << "_mean," << name << "_std";
  out << '\n';
  for (const auto& row : result.rows) {
    out << row.t << ',' << row.split;
    for (std::size_t j = 0; j < row.mean.size(); ++j) {
      out << ',' << format_double(row.mean[j]) << ',' << format_double(row.stddev[j]);
    }
    out << '\n';
  }
  return result;
}

ValidationResult validate(const SysidConfig& base, const ValidateGrid& grid, const fs::path* out_dir) {
  auto or_base = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  const auto dims = or_base(grid.dims, base.dim);
  const auto windows = or_base(grid.windows, base.window_length);
  const double base_step = grid.tracker == "grouse" ? base.grouse_step : base.step_size;
  const auto steps = or_base(grid.step_sizes, base_step);
  const auto forgets = or_base(grid.forgets, base.past_forget);
  if (grid.dims.empty() && grid.windows.empty() && grid.step_sizes.empty() && grid.forgets.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "validation grid is empty");
  }

  std::vector<ValidationEntry> candidates;
  for (Index d : dims)
    for (Index w : windows)
      for (double a : steps)
        for (double f : forgets) candidates.push_back({d, w, a, f, kInf});

  auto score = [&](ValidationEntry e) {
    SysidConfig cfg = base;
    cfg.trackers = {grid.tracker};
    cfg.dim = e.dim;
    cfg.window_length = e.window_length;
    cfg.step_size = e.step_size;
    cfg.grouse_step = e.step_size;
    cfg.past_forget = e.forget;
    try {
      const double s = simulate_sysid(cfg).split_mean(0, "validate");
      e.score = std::isnan(s) ? kInf : s;
    } catch (const Error&) {
      e.score = kInf;
    }
    return e;
  };
  std::vector<std::future<ValidationEntry>> jobs;
  for (const auto& c : candidates) jobs.push_back(std::async(std::launch::async, score, c));

  ValidationResult out;
  for (auto& j : jobs) out.entries.push_back(j.get());
  out.best = *std::min_element(out.entries.begin(), out.entries.end(),
                               [](const ValidationEntry& a, const ValidationEntry& b) {
                                 if (a.score != b.score) return a.score < b.score;
                                 if (a.dim != b.dim) return a.dim < b.dim;
                                 return a.window_length < b.window_length;
                               });

  if (out_dir != nullptr) {
    fs::create_directories(*out_dir);
    std::ofstream csv = open_csv(*out_dir / "validation.csv");
    csv << "dim,window,step_size,forget,score\n";
    for (const auto& e : out.entries) {
      csv << e.dim << ',' << e.window_length << ',' << format_double(e.step_size) << ','
          << format_double(e.forget) << ',' << format_double(e.score) << '\n';
    }
    write_report(*out_dir / "best.txt", {{"tracker", grid.tracker},
                                         {"dim", std::to_string(out.best.dim)},
                                         {"window", std::to_string(out.best.window_length)},
                                         {"step_size", format_double(out.best.step_size)},
                                         {"forget", format_double(out.best.forget)},
                                         {"score", format_double(out.best.score)}});
  }
  return out;
}

CertifyResult certify(const CertifyConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  CertificateParams p = cfg.params;
  p.validate(false);
  const StepChoice choice = cfg.step.value_or(StepChoice{"cvg", std::nullopt});

  CertifyResult r;
  r.alpha = resolve_step(choice, cfg.delta_sup, p);
  p.step_size = r.alpha;
  r.assumption = assumption4_check(p, cfg.delta_sup);
  write_report(out_dir / "assumption4.txt", assumption_report(choice.label, r.alpha, r.assumption));
  if (!r.assumption.holds) {
    throw Error(ErrorCode::kAssumptionViolated,
                "sufficient decrease condition fails: slack " + format_double(r.assumption.slack));
  }
  r.tube = tube_bound(cfg.steps, cfg.initial_distance * cfg.initial_distance, cfg.delta_sup, p);
  std::ofstream out = open_csv(out_dir / "certify.csv");
  out << "step,tube_bound,ultimate_bound\n";
  for (std::size_t s = 0; s < r.tube.per_step.size(); ++s) {
    out << s << ',' << format_double(std::sqrt(r.tube.per_step[s])) << ','
        << format_double(std::sqrt(r.tube.ultimate)) << '\n';
  }
  return r;
}

}  // namespace great::harness
