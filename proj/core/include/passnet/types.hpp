#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace passnet {

// Opaque non-negative identifiers as they appear in source data. A fitted
// model re-indexes players and games densely (see ModelData in data.hpp).
using PlayerId = std::int64_t;
using GameId = std::int64_t;
using PossessionId = std::int64_t;

using Vector7 = Eigen::Matrix<double, 7, 1>;

inline constexpr int kTimeVaryingDim = 5;  // w1..w5
inline constexpr int kCovariateDim = 7;    // (w, xi_sender, xi_receiver)

enum class PositionClass { Guard, Forward, Center };

inline constexpr std::array<PositionClass, 3> kAllPositions = {
    PositionClass::Guard, PositionClass::Forward, PositionClass::Center};

std::string_view to_string(PositionClass pos);
std::optional<PositionClass> position_from_string(std::string_view s);

// One observed pass: the ball carrier `sender` passes to teammate `receiver`
// during observation interval `interval` of `game`. At most one pass per
// (game, interval).
struct PassEvent {
  GameId game = 0;
  PossessionId possession = 0;
  std::uint32_t interval = 0;
  PlayerId sender = 0;
  PlayerId receiver = 0;
};

// Covariates for one (dyad, interval) cell. `w` holds the five time-varying
// terms: w1 constant 1 (baseline), w2 dribble indicator, w3 log distance to
// the carrier's nearest defender, w4 the receiver's closeness rank in
// {1,2,3,4}, w5 openness of the passing route. xi_sender / xi_receiver are
// the carrier's and candidate's spatial field values at their locations.
struct CovariateRecord {
  GameId game = 0;
  std::uint32_t interval = 0;
  PlayerId sender = 0;
  PlayerId receiver = 0;
  std::array<double, 5> w{1.0, 0.0, 0.0, 1.0, 0.0};
  double xi_sender = 0.0;
  double xi_receiver = 0.0;
  double interval_length = 0.0;  // seconds, > 0

  // Full covariate vector x = (w1..w5, xi_sender, xi_receiver).
  Vector7 x() const {
    Vector7 out;
    out << w[0], w[1], w[2], w[3], w[4], xi_sender, xi_receiver;
    return out;
  }
};

// Per-dyad coefficient vector beta = (eta_1..eta_5, gamma, gamma_tilde),
// shared across games. eta weights the time-varying covariates, gamma the
// sender spatial field, gamma_tilde the receiver spatial field.
struct DyadCoefficients {
  Vector7 beta = Vector7::Zero();

  double gamma() const { return beta[5]; }
  double gamma_tilde() const { return beta[6]; }
  Eigen::Matrix<double, 5, 1> eta() const { return beta.head<5>(); }
};

// Per-game latent factors: row i of U is the sender vector of player i, row
// j of V the receiver vector of player j. Rows follow the dense player
// indexing of the fitted model.
struct LatentFactorSet {
  GameId game = 0;
  Eigen::MatrixXd U;  // n x R
  Eigen::MatrixXd V;  // n x R

  int latent_dim() const { return static_cast<int>(U.cols()); }
};

}  // namespace passnet
