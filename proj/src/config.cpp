#include "mra/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mra::config {

std::string to_string(Method m) {
  switch (m) {
    case Method::Mps: return "mps";
    case Method::Em: return "em";
    case Method::Ips: return "ips";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Parser {
  ExperimentConfig& cfg;
  std::vector<std::string>& errors;

  void fail(const std::string& key, const std::string& why) {
    errors.push_back(key + ": " + why);
  }

  bool as_u64(const std::string& key, const std::string& v, std::uint64_t& out) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);  // accepts 1e6-style counts
      if (used != v.size() || d < 0 || d != std::floor(d) || d > 1.8e19) {
        fail(key, "expected a non-negative integer, got '" + v + "'");
        return false;
      }
      out = static_cast<std::uint64_t>(d);
      return true;
    } catch (...) {
      fail(key, "expected an integer, got '" + v + "'");
      return false;
    }
  }

  bool as_f64(const std::string& key, const std::string& v, double& out) {
    try {
      std::size_t used = 0;
      out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return true;
    } catch (...) {
      fail(key, "expected a number, got '" + v + "'");
      return false;
    }
  }

  void apply(const std::string& key, const std::string& value) {
    std::uint64_t u;
    double d;
    if (key == "prior") {
      if (value == "step") cfg.prior.kind = priors::PriorKind::Step;
      else if (value == "bell") cfg.prior.kind = priors::PriorKind::Bell;
      else fail(key, "expected step|bell, got '" + value + "'");
    } else if (key == "L") {
      if (as_u64(key, value, u)) cfg.prior.L = static_cast<std::uint32_t>(u);
    } else if (key == "sigma2") {
      if (as_f64(key, value, d)) cfg.sigma2 = d;
    } else if (key == "N_list") {
      cfg.n_list.clear();
      for (const auto& item : split_list(value))
        if (as_u64(key, item, u)) cfg.n_list.push_back(u);
    } else if (key == "repetitions") {
      if (as_u64(key, value, u)) cfg.repetitions = static_cast<std::uint32_t>(u);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& item : split_list(value)) {
        if (item == "mps") cfg.methods.push_back(Method::Mps);
        else if (item == "em") cfg.methods.push_back(Method::Em);
        else if (item == "ips") cfg.methods.push_back(Method::Ips);
        else fail(key, "unknown method '" + item + "'");
      }
    } else if (key == "master_seed") {
      if (as_u64(key, value, u)) cfg.master_seed = u;
    } else if (key == "outdir") {
      cfg.outdir = value;
    } else if (key == "checkpoint") {
      cfg.checkpoint = value;
    } else if (key == "workers") {
      if (as_u64(key, value, u)) cfg.workers = static_cast<int>(u);
    } else if (key == "mps.dt") {
      if (as_f64(key, value, d)) cfg.mps.dt = d;
    } else if (key == "mps.J") {
      if (as_u64(key, value, u)) cfg.mps.J = static_cast<std::uint32_t>(u);
    } else if (key == "mps.noise_factor") {
      if (as_f64(key, value, d)) cfg.mps.noise_factor = d;
    } else if (key == "mps.discretization") {
      if (value == "euler") cfg.mps.mode = diffusion::Discretization::EulerMaruyama;
      else if (value == "literal") cfg.mps.mode = diffusion::Discretization::LiteralAlg1;
      else fail(key, "expected euler|literal, got '" + value + "'");
    } else if (key == "em.max_iters") {
      if (as_u64(key, value, u)) cfg.em.max_iters = u;
    } else if (key == "em.tol") {
      if (as_f64(key, value, d)) cfg.em.tol = d;
    } else if (key == "ips.max_iters") {
      if (as_u64(key, value, u)) cfg.ips.max_iters = static_cast<std::uint32_t>(u);
    } else if (key == "ips.tol") {
      if (as_f64(key, value, d)) cfg.ips.tol = d;
    } else if (key == "train.steps") {
      if (as_u64(key, value, u)) cfg.train.steps = u;
    } else if (key == "train.batch") {
      if (as_u64(key, value, u)) cfg.train.batch = static_cast<std::uint32_t>(u);
    } else if (key == "train.lr") {
      if (as_f64(key, value, d)) cfg.train.lr = d;
    } else if (key == "train.kernel") {
      if (as_u64(key, value, u)) cfg.train.kernel = static_cast<std::uint32_t>(u);
    } else if (key == "train.t_min") {
      if (as_f64(key, value, d)) cfg.train.t_min = d;
    } else if (key == "train.mean_samples") {
      if (as_u64(key, value, u)) cfg.train.mean_samples = u;
    } else if (key == "bell.poisson_rate") {
      if (as_f64(key, value, d)) cfg.prior.poisson_rate = d;
    } else if (key == "bell.amp_max") {
      if (as_f64(key, value, d)) cfg.prior.amp_hi = d;
    } else if (key == "bell.tau_dof") {
      if (as_f64(key, value, d)) cfg.prior.tau_dof = d;
    } else {
      fail(key, "unknown key");
    }
  }
};

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.prior.L < 2) errors.push_back("L: must be >= 2");
  if (cfg.sigma2 < 0.0) errors.push_back("sigma2: must be >= 0");
  if (cfg.n_list.empty()) errors.push_back("N_list: must be non-empty");
  for (auto n : cfg.n_list)
    if (n < 1) errors.push_back("N_list: entries must be >= 1");
  if (cfg.repetitions < 1) errors.push_back("repetitions: must be >= 1");
  if (cfg.methods.empty()) errors.push_back("methods: must be non-empty");
  const bool has_mps =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::Mps) != cfg.methods.end();
  if (has_mps && cfg.checkpoint.empty())
    errors.push_back("checkpoint: required when methods include mps");
  if (!(cfg.mps.dt > 0.0 && cfg.mps.dt < 1.0)) {
    errors.push_back("mps.dt: must be in (0, 1)");
  } else {
    const double steps = 1.0 / cfg.mps.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
      errors.push_back("mps.dt: 1/dt must be integral");
  }
  if (cfg.mps.J < 1) errors.push_back("mps.J: must be >= 1");
  if (!(cfg.mps.noise_factor > 0.0)) errors.push_back("mps.noise_factor: must be > 0");
  if (cfg.em.max_iters < 1) errors.push_back("em.max_iters: must be >= 1");
  if (!(cfg.em.tol > 0.0)) errors.push_back("em.tol: must be > 0");
  if (cfg.ips.max_iters < 1) errors.push_back("ips.max_iters: must be >= 1");
  if (!(cfg.ips.tol > 0.0)) errors.push_back("ips.tol: must be > 0");
  if (cfg.train.batch < 1) errors.push_back("train.batch: must be >= 1");
  if (cfg.train.steps < 1) errors.push_back("train.steps: must be >= 1");
  if (!(cfg.train.lr > 0.0)) errors.push_back("train.lr: must be > 0");
  if (cfg.train.kernel % 2 == 0) errors.push_back("train.kernel: must be odd");
  if (!(cfg.train.t_min > 0.0 && cfg.train.t_min < 1.0))
    errors.push_back("train.t_min: must be in (0, 1)");
  if (!(cfg.prior.poisson_rate > 0.0)) errors.push_back("bell.poisson_rate: must be > 0");
  if (!(cfg.prior.amp_hi > 0.0)) errors.push_back("bell.amp_max: must be > 0");
  if (!(cfg.prior.tau_dof > 0.0)) errors.push_back("bell.tau_dof: must be > 0");
  if (cfg.workers < 1) errors.push_back("workers: must be >= 1");
  return errors;
}

ParseResult load_config(const std::string& path) {
  ParseResult result;
  std::ifstream f(path);
  if (!f) {
    result.errors.push_back("cannot open config file: " + path);
    return result;
  }
  Parser parser{result.config, result.errors};
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      result.errors.push_back("line " + std::to_string(lineno) +
                              ": expected key = value");
      continue;
    }
    parser.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  const auto sem = validate(result.config);
  result.errors.insert(result.errors.end(), sem.begin(), sem.end());
  return result;
}

}  // namespace mra::config
