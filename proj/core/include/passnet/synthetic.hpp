#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "passnet/rng.hpp"
#include "passnet/sampler.hpp"
#include "passnet/types.hpp"

namespace passnet {

// Forward-simulation design: per interval a ball carrier is drawn uniformly,
// four candidate receivers are drawn from the remaining players, covariates
// come from simple seeded distributions, and pass arrivals compete as
// exponential clocks with interval-constant hazards.
struct SyntheticSpec {
  int n_games = 2;
  int n_players = 8;            // >= 5 so four candidate receivers exist
  int target_observations = 10000;  // intervals in total across games
  int latent_dim = 2;
  std::uint64_t seed = 0;
  double interval_length = 0.2;  // seconds
  std::optional<Truth> truth;    // drawn from the prior when absent
};

struct SyntheticData {
  std::vector<PassEvent> events;
  std::vector<CovariateRecord> covariates;
  Truth truth;
  std::vector<int> intervals_per_game;
  std::size_t total_intervals = 0;
  std::size_t total_cells = 0;  // dyad-interval cells (4 per interval)
};

// Simulates pass events from known parameters. Deterministic per seed.
SyntheticData generate(const SyntheticSpec& spec);

// One interval of competing exponential pass clocks: returns the index of
// the receiver whose arrival lands first inside the interval, if any.
std::optional<std::size_t> draw_interval_event(std::span<const double> log_hazards,
                                               double interval_length, Rng& rng);

struct SplitData {
  std::vector<PassEvent> train_events;
  std::vector<CovariateRecord> train_covariates;
  std::vector<PassEvent> test_events;
  std::vector<CovariateRecord> test_covariates;
};

// Per-game temporal split: the first floor(fraction * N_g) distinct
// intervals of each game go to train, the rest to test. Throws
// std::invalid_argument unless fraction lies in (0,1).
SplitData split_train_test(const std::vector<PassEvent>& events,
                           const std::vector<CovariateRecord>& covariates,
                           double fraction);

// Independent brute-force recomputation of the sequence log-likelihood,
// written as a naive scalar loop with no code shared with the likelihood
// module. log_hazards[i] belongs to covariates[i]. Test oracle only.
double oracle_loglik(const std::vector<PassEvent>& events,
                     std::span<const double> log_hazards,
                     const std::vector<CovariateRecord>& covariates);

}  // namespace passnet
