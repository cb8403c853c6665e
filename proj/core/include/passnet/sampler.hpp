#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "passnet/data.hpp"
#include "passnet/rng.hpp"
#include "passnet/types.hpp"

namespace passnet {

enum class ModelKind {
  latent,      // full model with multiplicative sender/receiver factors
  covariates,  // subset model: U and V pinned to zero
};

// Metropolis-within-Gibbs chain configuration. Priors are fixed at the
// standard multivariate normal (zero mean, identity covariance) for every
// dyad coefficient vector and every latent factor row.
struct ChainConfig {
  int iterations = 5000;
  int burn_in = 1000;
  int thin = 4;
  int latent_dim = 2;  // R
  std::uint64_t seed = 0;
  ModelKind model = ModelKind::latent;
};

// Ground-truth parameters, used by the synthetic generator and for recovery
// diagnostics. Factor rows follow `players` (sorted original ids).
struct Truth {
  std::map<DyadKey, Vector7> beta;
  std::map<GameId, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> factors;  // U, V
  std::vector<PlayerId> players;
};

// Mutable state of one chain.
struct ChainState {
  std::vector<Vector7> beta;             // aligned with ModelData::dyads()
  std::vector<LatentFactorSet> factors;  // aligned with ModelData::games()
  HazardLattice lattice;                 // aligned with ModelData::cells()
  int iteration = 0;
  std::uint64_t mh_accept_count = 0;
  std::uint64_t mh_proposal_count = 0;
};

struct MhCounters {
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;
};

enum class FactorSide { sender, receiver };

// Retained samples in columnar form: one column per parameter path
// (beta/<i>/<j>/<k>, U/<game>/<i>/<r>, V/<game>/<j>/<r>; k and r 1-based),
// one row per retained iteration.
struct SampleTable {
  std::vector<std::string> parameter_paths;
  std::vector<int> iterations;
  Eigen::MatrixXd values;  // retained x parameters

  Eigen::Index n_retained() const { return values.rows(); }
};

struct ParameterSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lower95 = 0.0;
  double upper95 = 0.0;
};

// Per-iteration recovery diagnostics against a known truth. Factor errors
// are squared Frobenius distances after a joint orthogonal Procrustes
// alignment of (U, V) to the truth; uvt_mse is the entrywise mean squared
// error of U V^T, which is rotation invariant. All three are averaged over
// games.
struct RecoveryTrace {
  std::vector<int> iterations;
  std::vector<double> u_sqerr;
  std::vector<double> v_sqerr;
  std::vector<double> uvt_mse;
};

struct PosteriorSummary {
  std::vector<std::pair<std::string, ParameterSummary>> parameters;
  std::map<GameId, LatentFactorSet> posterior_mean_factors;
  double acceptance_rate = 0.0;
  std::uint64_t mh_accept_count = 0;
  std::uint64_t mh_proposal_count = 0;
  std::optional<RecoveryTrace> trace;
};

struct FitResult {
  PosteriorSummary summary;
  SampleTable samples;
};

// Conjugate draw of a dyad's 7-vector from its normal full conditional in
// the linear-Gaussian model r = x.beta + eps over the dyad's cells, where
// r = log_hazard - u.v. A dyad absent from the data is a prior draw.
Vector7 sample_beta(const ModelData& data, PlayerId sender, PlayerId receiver,
                    const HazardLattice& lattice,
                    std::span<const LatentFactorSet> factors, Rng& rng);

// Gibbs draw of one latent factor column for one game. Players decouple
// given the opposite side, so the column is n independent scalar normals;
// players with no cells in the game draw from the prior.
Eigen::VectorXd sample_latent_column(const ModelData& data, GameId game,
                                     FactorSide side, int column,
                                     std::span<const Vector7> beta,
                                     const LatentFactorSet& current,
                                     const HazardLattice& lattice, Rng& rng);

// Independence-proposal Metropolis-Hastings sweep over every lattice cell:
// propose log theta* = x.beta + u.v + eps with eps ~ N(0,1) and accept with
// the interval-likelihood ratio. Counters accumulate across sweeps.
void mh_update_lattice(const ModelData& data, std::span<const Vector7> beta,
                       std::span<const LatentFactorSet> factors,
                       HazardLattice& lattice, MhCounters& counters, Rng& rng);

// Log acceptance ratio of a single-cell proposal; min(ratio, 1) applied by
// the caller in log space.
double mh_log_accept_ratio(bool y, double proposed_log_hazard,
                           double current_log_hazard, double dt);

// Runs the full chain: draws beta, U, V from the prior, initializes the
// lattice at its conditional mean, then iterates (1) dyad coefficients,
// (2) latent factor columns per game, sender then receiver per column,
// (3) the MH lattice sweep. Retains every `thin`-th state after burn-in.
// Deterministic given (config, data, seed). When `truth` is supplied, a
// per-iteration recovery trace covering every iteration is attached to the
// summary. Throws std::runtime_error naming the iteration and parameter on
// a non-finite state.
FitResult run_chain(const ChainConfig& config, const ModelData& data,
                    const Truth* truth = nullptr);

// Moments, central 95% intervals, acceptance rate, posterior-mean factors,
// and, when truth is supplied, recovery traces over the retained samples.
// Requires at least one retained sample; a single sample yields degenerate
// intervals.
PosteriorSummary summarize(const SampleTable& samples,
                           const MhCounters* counters = nullptr,
                           const Truth* truth = nullptr);

// Joint orthogonal Procrustes alignment: the rotation Q minimizing
// |U Q - U*|^2 + |V Q - V*|^2 over orthogonal Q.
Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& u,
                                    const Eigen::MatrixXd& v,
                                    const Eigen::MatrixXd& u_true,
                                    const Eigen::MatrixXd& v_true);

// Conjugate normal draw for the linear-Gaussian model r = x.beta + eps with
// a standard normal prior: covariance (I + sum x x^T)^{-1}, mean
// covariance * sum x r. The building block behind sample_beta, exposed for
// direct use on raw design/residual pairs.
Vector7 draw_beta_conditional(std::span<const Vector7> xs,
                              std::span<const double> residuals, Rng& rng);

// Plug-in log-likelihood of retained samples on a dataset: the lattice is
// set to its conditional mean x.beta + u.v (zero error) per sample.
// Parameters absent from the samples (dyads or players unseen in training)
// stay at the prior mean zero.
struct LoglikEvaluation {
  double at_posterior_mean = 0.0;  // parameters at their posterior means
  double mean = 0.0;               // mean over retained samples
  double sd = 0.0;                 // sd over retained samples
};

LoglikEvaluation evaluate_loglik(const SampleTable& samples, const ModelData& data);

// Builds the parameter paths of a fit without running it (column order of
// SampleTable).
std::vector<std::string> parameter_paths(const ModelData& data,
                                         const ChainConfig& config);

}  // namespace passnet
