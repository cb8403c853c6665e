#include "passnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "passnet/spatial.hpp"

namespace passnet {

namespace {

void validate(const SyntheticSpec& spec) {
  if (spec.n_games < 1) throw std::invalid_argument("need at least one game");
  if (spec.n_players < 5)
    throw std::invalid_argument("need at least 5 players for 4 candidate receivers");
  if (spec.target_observations < 1)
    throw std::invalid_argument("target observations must be positive");
  if (spec.latent_dim < 1) throw std::invalid_argument("latent dimension must be >= 1");
  if (!(spec.interval_length > 0.0))
    throw std::invalid_argument("interval length must be positive");
}

Truth draw_truth(const SyntheticSpec& spec, Rng& rng) {
  Truth truth;
  truth.players.resize(spec.n_players);
  std::iota(truth.players.begin(), truth.players.end(), PlayerId{0});
  for (PlayerId i = 0; i < spec.n_players; ++i) {
    for (PlayerId j = 0; j < spec.n_players; ++j) {
      if (i == j) continue;
      Vector7 beta;
      for (int k = 0; k < kCovariateDim; ++k) beta[k] = rng.normal();
      truth.beta[{i, j}] = beta;
    }
  }
  for (GameId g = 0; g < spec.n_games; ++g) {
    Eigen::MatrixXd u(spec.n_players, spec.latent_dim);
    Eigen::MatrixXd v(spec.n_players, spec.latent_dim);
    for (int p = 0; p < spec.n_players; ++p)
      for (int r = 0; r < spec.latent_dim; ++r) u(p, r) = rng.normal();
    for (int p = 0; p < spec.n_players; ++p)
      for (int r = 0; r < spec.latent_dim; ++r) v(p, r) = rng.normal();
    truth.factors[g] = {std::move(u), std::move(v)};
  }
  return truth;
}

constexpr int kIntervalsPerPossession = 25;

}  // namespace

std::optional<std::size_t> draw_interval_event(std::span<const double> log_hazards,
                                               double interval_length, Rng& rng) {
  double best_arrival = interval_length;
  std::optional<std::size_t> winner;
  for (std::size_t j = 0; j < log_hazards.size(); ++j) {
    const double rate = std::exp(log_hazards[j]);
    const double arrival = rng.exponential(rate);
    if (arrival < best_arrival) {
      best_arrival = arrival;
      winner = j;
    }
  }
  return winner;
}

SyntheticData generate(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  SyntheticData data;
  data.truth = spec.truth ? *spec.truth : draw_truth(spec, rng);
  if (static_cast<int>(data.truth.players.size()) != spec.n_players)
    throw std::invalid_argument("supplied truth does not match n_players");

  // Spread the interval budget evenly; earlier games absorb the remainder.
  data.intervals_per_game.assign(spec.n_games, spec.target_observations / spec.n_games);
  for (int g = 0; g < spec.target_observations % spec.n_games; ++g)
    ++data.intervals_per_game[g];

  const double mean_xi = 1.0 / kTileCount;
  std::vector<int> others(spec.n_players - 1);
  std::array<int, 4> rank_values{1, 2, 3, 4};

  for (GameId g = 0; g < spec.n_games; ++g) {
    const auto& [u_true, v_true] = data.truth.factors.at(g);
    for (int t = 0; t < data.intervals_per_game[g]; ++t) {
      const auto interval = static_cast<std::uint32_t>(t);
      const PlayerId carrier = rng.uniform_int(0, spec.n_players - 1);

      // Four candidate receivers drawn without replacement.
      others.clear();
      for (PlayerId p = 0; p < spec.n_players; ++p)
        if (p != carrier) others.push_back(static_cast<int>(p));
      for (int k = 0; k < 4; ++k) {
        const int pick = rng.uniform_int(k, static_cast<int>(others.size()) - 1);
        std::swap(others[k], others[pick]);
      }

      // Closeness ranks as a uniform permutation of {1,2,3,4}.
      std::array<int, 4> ranks = rank_values;
      for (int k = 3; k > 0; --k)
        std::swap(ranks[k], ranks[rng.uniform_int(0, k)]);

      const double dribble = rng.uniform() < 0.5 ? 1.0 : 0.0;
      const double log_defender_distance = 1.5 + 0.5 * rng.normal();

      std::array<double, 4> log_hazards{};
      std::array<CovariateRecord, 4> records{};
      for (int k = 0; k < 4; ++k) {
        const auto receiver = static_cast<PlayerId>(others[k]);
        CovariateRecord rec;
        rec.game = g;
        rec.interval = interval;
        rec.sender = carrier;
        rec.receiver = receiver;
        rec.w = {1.0, dribble, log_defender_distance,
                 static_cast<double>(ranks[k]), rng.normal()};
        rec.xi_sender = std::max(mean_xi * (1.0 + rng.normal()), 0.0);
        rec.xi_receiver = std::max(mean_xi * (1.0 + rng.normal()), 0.0);
        rec.interval_length = spec.interval_length;
        records[k] = rec;

        const Vector7& beta = data.truth.beta.at({carrier, receiver});
        const double uv = u_true.row(carrier).dot(v_true.row(receiver));
        log_hazards[k] = rec.x().dot(beta) + uv + rng.normal();
      }

      const auto winner =
          draw_interval_event(log_hazards, spec.interval_length, rng);
      for (int k = 0; k < 4; ++k) data.covariates.push_back(records[k]);
      if (winner) {
        PassEvent event;
        event.game = g;
        event.possession = t / kIntervalsPerPossession;
        event.interval = interval;
        event.sender = carrier;
        event.receiver = records[*winner].receiver;
        data.events.push_back(event);
      }
    }
    data.total_intervals += static_cast<std::size_t>(data.intervals_per_game[g]);
  }
  data.total_cells = data.covariates.size();
  return data;
}

SplitData split_train_test(const std::vector<PassEvent>& events,
                           const std::vector<CovariateRecord>& covariates,
                           double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0,1)");

  // Distinct intervals per game, then the per-game cut at floor(f * N_g).
  std::map<GameId, std::vector<std::uint32_t>> intervals;
  for (const auto& c : covariates) intervals[c.game].push_back(c.interval);
  std::map<GameId, std::uint32_t> cut;  // first test interval per game
  for (auto& [game, list] : intervals) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    const auto n_train =
        static_cast<std::size_t>(fraction * static_cast<double>(list.size()));
    cut[game] = n_train >= list.size()
                    ? list.back() + 1
                    : list[n_train];
  }

  SplitData split;
  for (const auto& c : covariates) {
    if (c.interval < cut.at(c.game))
      split.train_covariates.push_back(c);
    else
      split.test_covariates.push_back(c);
  }
  for (const auto& e : events) {
    auto it = cut.find(e.game);
    if (it == cut.end())
      throw std::invalid_argument("event in a game with no covariates");
    if (e.interval < it->second)
      split.train_events.push_back(e);
    else
      split.test_events.push_back(e);
  }
  return split;
}

double oracle_loglik(const std::vector<PassEvent>& events,
                     std::span<const double> log_hazards,
                     const std::vector<CovariateRecord>& covariates) {
  if (log_hazards.size() != covariates.size())
    throw std::invalid_argument("one log hazard per covariate record required");

  // Deliberately naive: a scalar loop over records with a linear scan for
  // the matching event, recomputing the Poisson interval term from first
  // principles.
  double total = 0.0;
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    const CovariateRecord& rec = covariates[i];
    int y = 0;
    for (const auto& e : events) {
      if (e.game == rec.game && e.interval == rec.interval &&
          e.sender == rec.sender && e.receiver == rec.receiver) {
        y = 1;
        break;
      }
    }
    const double theta = std::exp(log_hazards[i]);
    double term = -theta * rec.interval_length;
    if (y == 1) term += std::log(theta * rec.interval_length);
    total += term;
  }

  // Every event must have found its cell.
  for (const auto& e : events) {
    bool found = false;
    for (const auto& rec : covariates) {
      if (e.game == rec.game && e.interval == rec.interval &&
          e.sender == rec.sender && e.receiver == rec.receiver) {
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("event without a matching lattice cell");
  }
  return total;
}

}  // namespace passnet
