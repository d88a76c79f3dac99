#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mra/baselines.hpp"
#include "mra/mps.hpp"
#include "mra/priors.hpp"
#include "mra/score_net.hpp"

namespace mra::config {

enum class Method { Mps, Em, Ips };

std::string to_string(Method m);

// Flat key = value experiment configuration; every key has a default and the
// whole file is validated before any work starts.
struct ExperimentConfig {
  priors::PriorSpec prior;           // prior, L, bell.*
  double sigma2 = 100.0;
  std::vector<std::uint64_t> n_list = {100, 1000, 10000, 100000, 1000000};
  std::uint32_t repetitions = 20;
  std::vector<Method> methods = {Method::Mps, Method::Em, Method::Ips};
  std::uint64_t master_seed = 1;
  std::string outdir = "out";
  std::string checkpoint;            // required when MPS is selected

  mps::MpsConfig mps;                // mps.dt, mps.J, mps.noise_factor, mps.discretization
  baselines::EmConfig em;            // em.max_iters, em.tol
  baselines::IpsConfig ips;          // ips.max_iters, ips.tol
  score::TrainConfig train;          // train.steps, train.batch, ...

  int workers = 1;                   // experiment-cell pool width
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> errors;  // empty on success

  bool ok() const { return errors.empty(); }
};

// Parses and validates a key = value file ('#' comments, blank lines ok).
// Unknown keys, malformed values, and violated invariants all land in errors.
ParseResult load_config(const std::string& path);

// Validation applied to an already-built config (used by load_config).
std::vector<std::string> validate(const ExperimentConfig& cfg);

}  // namespace mra::config
