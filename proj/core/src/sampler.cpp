#include "passnet/sampler.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "passnet/likelihood.hpp"
#include "passnet/tabular.hpp"

namespace passnet {

namespace {

void validate(const ChainConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations)
    throw std::invalid_argument("burn_in must satisfy 0 <= burn_in < iterations");
  if (cfg.thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (cfg.latent_dim < 1) throw std::invalid_argument("latent dimension must be >= 1");
}

double factor_product(std::span<const LatentFactorSet> factors, std::uint32_t game,
                      std::uint32_t sender, std::uint32_t receiver) {
  if (factors.empty()) return 0.0;
  const LatentFactorSet& f = factors[game];
  return f.U.row(sender).dot(f.V.row(receiver));
}

Vector7 draw_standard_normal7(Rng& rng) {
  Vector7 z;
  for (int k = 0; k < 7; ++k) z[k] = rng.normal();
  return z;
}

[[noreturn]] void nonfinite(int iteration, const std::string& path) {
  std::ostringstream os;
  os << "non-finite chain state at iteration " << iteration << ": " << path;
  throw std::runtime_error(os.str());
}

struct RecoveryPoint {
  double u_sqerr = 0.0;
  double v_sqerr = 0.0;
  double uvt_mse = 0.0;
};

// Truth factors re-indexed to the data's dense player order, per game index.
struct AlignedTruth {
  std::vector<Eigen::MatrixXd> u;
  std::vector<Eigen::MatrixXd> v;
};

AlignedTruth align_truth(const Truth& truth, const ModelData& data) {
  std::vector<Eigen::Index> row_of(data.n_players());
  for (std::size_t p = 0; p < data.n_players(); ++p) {
    auto it = std::lower_bound(truth.players.begin(), truth.players.end(),
                               data.player_id(p));
    if (it == truth.players.end() || *it != data.player_id(p))
      throw std::invalid_argument("truth does not cover player " +
                                  std::to_string(data.player_id(p)));
    row_of[p] = it - truth.players.begin();
  }
  AlignedTruth out;
  for (std::size_t g = 0; g < data.n_games(); ++g) {
    auto it = truth.factors.find(data.game_id(g));
    if (it == truth.factors.end())
      throw std::invalid_argument("truth does not cover game " +
                                  std::to_string(data.game_id(g)));
    const auto& [ut, vt] = it->second;
    Eigen::MatrixXd u(data.n_players(), ut.cols());
    Eigen::MatrixXd v(data.n_players(), vt.cols());
    for (std::size_t p = 0; p < data.n_players(); ++p) {
      u.row(p) = ut.row(row_of[p]);
      v.row(p) = vt.row(row_of[p]);
    }
    out.u.push_back(std::move(u));
    out.v.push_back(std::move(v));
  }
  return out;
}

RecoveryPoint recovery_point(std::span<const LatentFactorSet> factors,
                             const AlignedTruth& truth) {
  RecoveryPoint point;
  const auto n_games = factors.size();
  for (std::size_t g = 0; g < n_games; ++g) {
    const Eigen::MatrixXd& u = factors[g].U;
    const Eigen::MatrixXd& v = factors[g].V;
    Eigen::MatrixXd q = procrustes_rotation(u, v, truth.u[g], truth.v[g]);
    point.u_sqerr += (u * q - truth.u[g]).squaredNorm();
    point.v_sqerr += (v * q - truth.v[g]).squaredNorm();
    const Eigen::MatrixXd diff = u * v.transpose() - truth.u[g] * truth.v[g].transpose();
    point.uvt_mse += diff.squaredNorm() / static_cast<double>(diff.size());
  }
  point.u_sqerr /= static_cast<double>(n_games);
  point.v_sqerr /= static_cast<double>(n_games);
  point.uvt_mse /= static_cast<double>(n_games);
  return point;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = path.find('/', start);
    if (slash == std::string::npos) {
      parts.push_back(path.substr(start));
      break;
    }
    parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

}  // namespace

double mh_log_accept_ratio(bool y, double proposed_log_hazard,
                           double current_log_hazard, double dt) {
  return interval_loglik(y, proposed_log_hazard, dt) -
         interval_loglik(y, current_log_hazard, dt);
}

Vector7 sample_beta(const ModelData& data, PlayerId sender, PlayerId receiver,
                    const HazardLattice& lattice,
                    std::span<const LatentFactorSet> factors, Rng& rng) {
  auto dyad = data.dyad_index(sender, receiver);
  Vector7 z = draw_standard_normal7(rng);
  if (!dyad) return z;  // no observation time: the full conditional is the prior

  Vector7 b = Vector7::Zero();
  for (std::uint32_t c : data.dyad_cells(*dyad)) {
    const Cell& cell = data.cells()[c];
    const double residual = lattice.log_hazard[c] -
                            factor_product(factors, cell.game, cell.sender,
                                           cell.receiver);
    b += cell.x * residual;
  }
  const auto& llt = data.dyad_posterior_llt(*dyad);
  Vector7 mean = llt.solve(b);
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd sample_latent_column(const ModelData& data, GameId game,
                                     FactorSide side, int column,
                                     std::span<const Vector7> beta,
                                     const LatentFactorSet& current,
                                     const HazardLattice& lattice, Rng& rng) {
  const std::size_t g = data.game_index(game);
  const std::size_t n = data.n_players();
  const auto r = static_cast<Eigen::Index>(column);
  if (r < 0 || r >= current.U.cols())
    throw std::invalid_argument("latent column index out of range");

  Eigen::VectorXd out(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& cells = side == FactorSide::sender
                            ? data.game_sender_cells(g, p)
                            : data.game_receiver_cells(g, p);
    double precision_add = 0.0;
    double weighted_residual = 0.0;
    for (std::uint32_t c : cells) {
      const Cell& cell = data.cells()[c];
      const double xb = cell.x.dot(beta[cell.dyad]);
      const double full = current.U.row(cell.sender).dot(current.V.row(cell.receiver));
      const double own = current.U(cell.sender, r) * current.V(cell.receiver, r);
      const double coef = side == FactorSide::sender ? current.V(cell.receiver, r)
                                                     : current.U(cell.sender, r);
      const double residual = lattice.log_hazard[c] - xb - (full - own);
      precision_add += coef * coef;
      weighted_residual += coef * residual;
    }
    const double variance = 1.0 / (1.0 + precision_add);
    out[p] = variance * weighted_residual + std::sqrt(variance) * rng.normal();
  }
  return out;
}

void mh_update_lattice(const ModelData& data, std::span<const Vector7> beta,
                       std::span<const LatentFactorSet> factors,
                       HazardLattice& lattice, MhCounters& counters, Rng& rng) {
  if (lattice.log_hazard.size() != data.n_cells())
    throw std::invalid_argument("lattice size does not match cell count");
  const auto& cells = data.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const double mean = cell.x.dot(beta[cell.dyad]) +
                        factor_product(factors, cell.game, cell.sender,
                                       cell.receiver);
    const double proposal = mean + rng.normal();
    const double log_ratio =
        mh_log_accept_ratio(cell.y, proposal, lattice.log_hazard[c], cell.dt);
    ++counters.proposed;
    if (std::log(rng.uniform()) < log_ratio) {
      lattice.log_hazard[c] = proposal;
      ++counters.accepted;
    }
  }
}

std::vector<std::string> parameter_paths(const ModelData& data,
                                         const ChainConfig& config) {
  std::vector<std::string> paths;
  for (std::size_t d = 0; d < data.n_dyads(); ++d) {
    const auto [si, ri] = data.dyad_key(d);
    for (int k = 1; k <= kCovariateDim; ++k) {
      paths.push_back("beta/" + std::to_string(si) + "/" + std::to_string(ri) +
                      "/" + std::to_string(k));
    }
  }
  if (config.model == ModelKind::latent) {
    for (const char* block : {"U", "V"}) {
      for (std::size_t g = 0; g < data.n_games(); ++g)
        for (std::size_t p = 0; p < data.n_players(); ++p)
          for (int r = 1; r <= config.latent_dim; ++r)
            paths.push_back(std::string(block) + "/" +
                            std::to_string(data.game_id(g)) + "/" +
                            std::to_string(data.player_id(p)) + "/" +
                            std::to_string(r));
    }
  }
  return paths;
}

FitResult run_chain(const ChainConfig& config, const ModelData& data,
                    const Truth* truth) {
  validate(config);
  Rng rng(config.seed);
  const std::size_t n = data.n_players();
  const std::size_t n_games = data.n_games();
  const int R = config.latent_dim;
  const bool latent = config.model == ModelKind::latent;

  ChainState state;
  state.beta.resize(data.n_dyads());
  for (auto& b : state.beta) b = draw_standard_normal7(rng);
  if (latent) {
    state.factors.reserve(n_games);
    for (std::size_t g = 0; g < n_games; ++g) {
      LatentFactorSet f;
      f.game = data.game_id(g);
      f.U.resize(n, R);
      f.V.resize(n, R);
      for (std::size_t p = 0; p < n; ++p)
        for (int r = 0; r < R; ++r) f.U(p, r) = rng.normal();
      for (std::size_t p = 0; p < n; ++p)
        for (int r = 0; r < R; ++r) f.V(p, r) = rng.normal();
      state.factors.push_back(std::move(f));
    }
  }
  std::span<const LatentFactorSet> factor_view(state.factors);

  // Lattice starts at its conditional mean x.beta + u.v.
  state.lattice.log_hazard.resize(data.n_cells());
  for (std::size_t c = 0; c < data.n_cells(); ++c) {
    const Cell& cell = data.cells()[c];
    state.lattice.log_hazard[c] =
        cell.x.dot(state.beta[cell.dyad]) +
        factor_product(factor_view, cell.game, cell.sender, cell.receiver);
  }

  const int n_retained =
      (config.iterations - config.burn_in - 1) / config.thin + 1;
  SampleTable samples;
  samples.parameter_paths = parameter_paths(data, config);
  samples.iterations.reserve(n_retained);
  samples.values.resize(n_retained, static_cast<Eigen::Index>(samples.parameter_paths.size()));

  std::optional<AlignedTruth> aligned;
  RecoveryTrace trace;
  if (truth && latent) aligned = align_truth(*truth, data);

  MhCounters counters;
  int retained_row = 0;
  for (int s = 1; s <= config.iterations; ++s) {
    state.iteration = s;

    // Step 1: dyad coefficients from their conjugate full conditionals.
    for (std::size_t d = 0; d < data.n_dyads(); ++d) {
      Vector7 b = Vector7::Zero();
      for (std::uint32_t c : data.dyad_cells(d)) {
        const Cell& cell = data.cells()[c];
        const double residual =
            state.lattice.log_hazard[c] -
            factor_product(factor_view, cell.game, cell.sender, cell.receiver);
        b += cell.x * residual;
      }
      const auto& llt = data.dyad_posterior_llt(d);
      Vector7 z = draw_standard_normal7(rng);
      state.beta[d] = llt.solve(b) + llt.matrixU().solve(z);
      if (!state.beta[d].allFinite()) {
        const auto [si, ri] = data.dyad_key(d);
        nonfinite(s, "beta/" + std::to_string(si) + "/" + std::to_string(ri));
      }
    }

    // Step 2: latent factor columns, games ascending, sender then receiver
    // per column, columns ascending.
    if (latent) {
      for (std::size_t g = 0; g < n_games; ++g) {
        for (int r = 0; r < R; ++r) {
          state.factors[g].U.col(r) = sample_latent_column(
              data, data.game_id(g), FactorSide::sender, r, state.beta,
              state.factors[g], state.lattice, rng);
          state.factors[g].V.col(r) = sample_latent_column(
              data, data.game_id(g), FactorSide::receiver, r, state.beta,
              state.factors[g], state.lattice, rng);
        }
        if (!state.factors[g].U.allFinite() || !state.factors[g].V.allFinite())
          nonfinite(s, "factors/" + std::to_string(data.game_id(g)));
      }
    }

    // Step 3: Metropolis-Hastings sweep over the hazard lattice.
    mh_update_lattice(data, state.beta, factor_view, state.lattice, counters, rng);

    if (aligned) {
      RecoveryPoint point = recovery_point(factor_view, *aligned);
      trace.iterations.push_back(s);
      trace.u_sqerr.push_back(point.u_sqerr);
      trace.v_sqerr.push_back(point.v_sqerr);
      trace.uvt_mse.push_back(point.uvt_mse);
    }

    const int offset = s - config.burn_in - 1;
    if (offset >= 0 && offset % config.thin == 0) {
      samples.iterations.push_back(s);
      Eigen::Index col = 0;
      for (std::size_t d = 0; d < data.n_dyads(); ++d)
        for (int k = 0; k < kCovariateDim; ++k)
          samples.values(retained_row, col++) = state.beta[d][k];
      if (latent) {
        for (std::size_t g = 0; g < n_games; ++g)
          for (std::size_t p = 0; p < n; ++p)
            for (int r = 0; r < R; ++r)
              samples.values(retained_row, col++) = state.factors[g].U(p, r);
        for (std::size_t g = 0; g < n_games; ++g)
          for (std::size_t p = 0; p < n; ++p)
            for (int r = 0; r < R; ++r)
              samples.values(retained_row, col++) = state.factors[g].V(p, r);
      }
      ++retained_row;
    }
  }
  state.mh_accept_count = counters.accepted;
  state.mh_proposal_count = counters.proposed;

  FitResult result;
  result.samples = std::move(samples);
  result.summary = summarize(result.samples, &counters, nullptr);
  if (aligned) result.summary.trace = std::move(trace);
  return result;
}

PosteriorSummary summarize(const SampleTable& samples, const MhCounters* counters,
                           const Truth* truth) {
  const Eigen::Index rows = samples.values.rows();
  const Eigen::Index cols = samples.values.cols();
  if (rows < 1) throw std::invalid_argument("summarize needs retained samples");

  PosteriorSummary summary;
  summary.parameters.reserve(cols);
  std::vector<double> sorted(rows);
  for (Eigen::Index j = 0; j < cols; ++j) {
    ParameterSummary p;
    p.mean = samples.values.col(j).mean();
    if (rows > 1) {
      const double ss = (samples.values.col(j).array() - p.mean).square().sum();
      p.sd = std::sqrt(ss / static_cast<double>(rows - 1));
    }
    for (Eigen::Index i = 0; i < rows; ++i) sorted[i] = samples.values(i, j);
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double prob) {
      const double h = prob * static_cast<double>(rows - 1);
      const auto lo = static_cast<std::size_t>(h);
      if (lo + 1 >= sorted.size()) return sorted.back();
      return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    };
    p.lower95 = quantile(0.025);
    p.upper95 = quantile(0.975);
    summary.parameters.emplace_back(samples.parameter_paths[j], p);
  }

  if (counters) {
    summary.mh_accept_count = counters->accepted;
    summary.mh_proposal_count = counters->proposed;
    summary.acceptance_rate =
        counters->proposed == 0
            ? 0.0
            : static_cast<double>(counters->accepted) /
                  static_cast<double>(counters->proposed);
  }

  // Posterior-mean factors reconstructed from the U/V parameter paths.
  struct FactorLayout {
    std::vector<GameId> games;
    std::vector<PlayerId> players;
    int latent_dim = 0;
  } layout;
  for (const auto& path : samples.parameter_paths) {
    if (path.rfind("U/", 0) != 0 && path.rfind("V/", 0) != 0) continue;
    auto parts = split_path(path);
    layout.games.push_back(parse_int(parts[1]));
    layout.players.push_back(parse_int(parts[2]));
    layout.latent_dim = std::max(layout.latent_dim,
                                 static_cast<int>(parse_int(parts[3])));
  }
  std::sort(layout.games.begin(), layout.games.end());
  layout.games.erase(std::unique(layout.games.begin(), layout.games.end()),
                     layout.games.end());
  std::sort(layout.players.begin(), layout.players.end());
  layout.players.erase(std::unique(layout.players.begin(), layout.players.end()),
                       layout.players.end());

  std::map<std::string, Eigen::Index> column_of;
  for (Eigen::Index j = 0; j < cols; ++j) column_of[samples.parameter_paths[j]] = j;

  auto factor_matrix = [&](const char* block, GameId game, Eigen::Index row) {
    Eigen::MatrixXd m(layout.players.size(), layout.latent_dim);
    for (std::size_t p = 0; p < layout.players.size(); ++p) {
      for (int r = 1; r <= layout.latent_dim; ++r) {
        const std::string path = std::string(block) + "/" + std::to_string(game) +
                                 "/" + std::to_string(layout.players[p]) + "/" +
                                 std::to_string(r);
        const Eigen::Index j = column_of.at(path);
        m(p, r - 1) = row < 0 ? samples.values.col(j).mean()
                              : samples.values(row, j);
      }
    }
    return m;
  };

  if (layout.latent_dim > 0) {
    for (GameId game : layout.games) {
      LatentFactorSet f;
      f.game = game;
      f.U = factor_matrix("U", game, -1);
      f.V = factor_matrix("V", game, -1);
      summary.posterior_mean_factors[game] = std::move(f);
    }

    if (truth) {
      std::vector<Eigen::Index> truth_row(layout.players.size());
      for (std::size_t p = 0; p < layout.players.size(); ++p) {
        auto it = std::lower_bound(truth->players.begin(), truth->players.end(),
                                   layout.players[p]);
        if (it == truth->players.end() || *it != layout.players[p])
          throw std::invalid_argument("truth does not cover player " +
                                      std::to_string(layout.players[p]));
        truth_row[p] = it - truth->players.begin();
      }
      RecoveryTrace trace;
      for (Eigen::Index i = 0; i < rows; ++i) {
        RecoveryPoint point;
        for (GameId game : layout.games) {
          auto ft = truth->factors.find(game);
          if (ft == truth->factors.end())
            throw std::invalid_argument("truth does not cover game " +
                                        std::to_string(game));
          Eigen::MatrixXd ut(layout.players.size(), layout.latent_dim);
          Eigen::MatrixXd vt(layout.players.size(), layout.latent_dim);
          for (std::size_t p = 0; p < layout.players.size(); ++p) {
            ut.row(p) = ft->second.first.row(truth_row[p]);
            vt.row(p) = ft->second.second.row(truth_row[p]);
          }
          const Eigen::MatrixXd u = factor_matrix("U", game, i);
          const Eigen::MatrixXd v = factor_matrix("V", game, i);
          const Eigen::MatrixXd q = procrustes_rotation(u, v, ut, vt);
          point.u_sqerr += (u * q - ut).squaredNorm();
          point.v_sqerr += (v * q - vt).squaredNorm();
          const Eigen::MatrixXd diff = u * v.transpose() - ut * vt.transpose();
          point.uvt_mse += diff.squaredNorm() / static_cast<double>(diff.size());
        }
        const auto n_games = static_cast<double>(layout.games.size());
        trace.iterations.push_back(samples.iterations[i]);
        trace.u_sqerr.push_back(point.u_sqerr / n_games);
        trace.v_sqerr.push_back(point.v_sqerr / n_games);
        trace.uvt_mse.push_back(point.uvt_mse / n_games);
      }
      summary.trace = std::move(trace);
    }
  }
  return summary;
}

Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& u,
                                    const Eigen::MatrixXd& v,
                                    const Eigen::MatrixXd& u_true,
                                    const Eigen::MatrixXd& v_true) {
  const Eigen::MatrixXd m = u.transpose() * u_true + v.transpose() * v_true;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Vector7 draw_beta_conditional(std::span<const Vector7> xs,
                              std::span<const double> residuals, Rng& rng) {
  if (xs.size() != residuals.size())
    throw std::invalid_argument("one residual per design vector required");
  for (double r : residuals)
    if (!std::isfinite(r)) throw std::runtime_error("non-finite residual");
  Eigen::Matrix<double, 7, 7> m = Eigen::Matrix<double, 7, 7>::Identity();
  Vector7 b = Vector7::Zero();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m += xs[i] * xs[i].transpose();
    b += xs[i] * residuals[i];
  }
  Eigen::LLT<Eigen::Matrix<double, 7, 7>> llt(m);
  Vector7 z = draw_standard_normal7(rng);
  return llt.solve(b) + llt.matrixU().solve(z);
}

LoglikEvaluation evaluate_loglik(const SampleTable& samples, const ModelData& data) {
  std::map<std::string, Eigen::Index> column_of;
  for (std::size_t j = 0; j < samples.parameter_paths.size(); ++j)
    column_of[samples.parameter_paths[j]] = static_cast<Eigen::Index>(j);

  int latent_dim = 0;
  for (const auto& path : samples.parameter_paths)
    if (path.rfind("U/", 0) == 0)
      latent_dim =
          std::max(latent_dim, static_cast<int>(parse_int(
                                   std::string_view(path).substr(path.rfind('/') + 1))));

  // Column per (dyad, coordinate) and per (game, player, r); -1 keeps the
  // prior mean for parameters unseen in training.
  std::vector<std::array<Eigen::Index, 7>> beta_cols(data.n_dyads());
  for (std::size_t d = 0; d < data.n_dyads(); ++d) {
    const auto [si, ri] = data.dyad_key(d);
    for (int k = 0; k < kCovariateDim; ++k) {
      const std::string path = "beta/" + std::to_string(si) + "/" +
                               std::to_string(ri) + "/" + std::to_string(k + 1);
      auto it = column_of.find(path);
      beta_cols[d][k] = it == column_of.end() ? -1 : it->second;
    }
  }
  const std::size_t n = data.n_players();
  std::vector<Eigen::Index> u_cols(data.n_games() * n * latent_dim, -1);
  std::vector<Eigen::Index> v_cols(u_cols.size(), -1);
  for (std::size_t g = 0; g < data.n_games(); ++g) {
    for (std::size_t p = 0; p < n; ++p) {
      for (int r = 0; r < latent_dim; ++r) {
        const std::size_t idx = (g * n + p) * latent_dim + r;
        for (const char* block : {"U", "V"}) {
          const std::string path = std::string(block) + "/" +
                                   std::to_string(data.game_id(g)) + "/" +
                                   std::to_string(data.player_id(p)) + "/" +
                                   std::to_string(r + 1);
          auto it = column_of.find(path);
          if (it == column_of.end()) continue;
          (block[0] == 'U' ? u_cols : v_cols)[idx] = it->second;
        }
      }
    }
  }

  const auto& cells = data.cells();
  auto loglik_for = [&](const Eigen::VectorXd& values) {
    HazardLattice lattice;
    lattice.log_hazard.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      double lp = 0.0;
      const auto& bc = beta_cols[cell.dyad];
      for (int k = 0; k < kCovariateDim; ++k)
        if (bc[k] >= 0) lp += cell.x[k] * values[bc[k]];
      for (int r = 0; r < latent_dim; ++r) {
        const std::size_t ui = (cell.game * n + cell.sender) * latent_dim + r;
        const std::size_t vi = (cell.game * n + cell.receiver) * latent_dim + r;
        if (u_cols[ui] >= 0 && v_cols[vi] >= 0)
          lp += values[u_cols[ui]] * values[v_cols[vi]];
      }
      lattice.log_hazard[c] = lp;
    }
    return sequence_loglik(data, lattice);
  };

  LoglikEvaluation eval;
  Eigen::VectorXd column_means(samples.values.cols());
  for (Eigen::Index j = 0; j < samples.values.cols(); ++j)
    column_means[j] = samples.values.col(j).mean();
  eval.at_posterior_mean = loglik_for(column_means);

  const Eigen::Index rows = samples.values.rows();
  if (rows < 1) throw std::invalid_argument("evaluate_loglik needs retained samples");
  Eigen::VectorXd logliks(rows);
  for (Eigen::Index i = 0; i < rows; ++i)
    logliks[i] = loglik_for(samples.values.row(i).transpose());
  eval.mean = logliks.mean();
  eval.sd = rows > 1 ? std::sqrt((logliks.array() - eval.mean).square().sum() /
                                 static_cast<double>(rows - 1))
                     : 0.0;
  return eval;
}

}  // namespace passnet
