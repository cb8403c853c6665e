#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "passnet/types.hpp"

namespace passnet {

// Ordered (sender, receiver) pair in original ids.
using DyadKey = std::pair<PlayerId, PlayerId>;

// One (dyad, interval) cell of the observation lattice, in dense indices.
struct Cell {
  std::uint32_t game = 0;      // dense game index
  std::uint32_t interval = 0;  // interval index within the game
  std::uint32_t sender = 0;    // dense player index
  std::uint32_t receiver = 0;  // dense player index
  std::uint32_t dyad = 0;      // dense dyad index
  Vector7 x = Vector7::Zero();
  double dt = 0.0;
  bool y = false;  // pass observed in this cell
};

// Latent per-cell log-hazards, aligned with ModelData::cells().
struct HazardLattice {
  std::vector<double> log_hazard;
};

// Validated, indexed view of an (events, covariates) pair. Construction
// registers players and games into contiguous 0..n-1 index sets, builds one
// lattice cell per covariate record, marks event cells, and precomputes the
// per-dyad Cholesky factors of (I + sum x x^T) used by the conjugate
// coefficient draws.
//
// Throws std::runtime_error on consistency violations: duplicate cells,
// more than one event or more than four candidate receivers per interval,
// an interval with two distinct senders, an event without a matching cell,
// or covariate invariant breaks (w1 != 1, w4 outside {1,2,3,4}, dt <= 0,
// non-finite values).
class ModelData {
 public:
  using Matrix7 = Eigen::Matrix<double, 7, 7>;

  ModelData(std::vector<PassEvent> events,
            std::vector<CovariateRecord> covariates);

  std::size_t n_players() const { return players_.size(); }
  std::size_t n_games() const { return games_.size(); }
  std::size_t n_dyads() const { return dyads_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_events() const { return events_.size(); }

  PlayerId player_id(std::size_t idx) const { return players_[idx]; }
  GameId game_id(std::size_t idx) const { return games_[idx]; }
  const std::vector<PlayerId>& players() const { return players_; }
  const std::vector<GameId>& games() const { return games_; }

  std::size_t player_index(PlayerId id) const;
  std::size_t game_index(GameId id) const;

  const std::vector<Cell>& cells() const { return cells_; }

  // Dense dyad index -> (sender, receiver) dense player indices.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& dyads() const {
    return dyads_;
  }
  DyadKey dyad_key(std::size_t dyad_idx) const;
  std::optional<std::size_t> dyad_index(PlayerId sender, PlayerId receiver) const;

  const std::vector<std::uint32_t>& dyad_cells(std::size_t dyad_idx) const {
    return cells_by_dyad_[dyad_idx];
  }
  const std::vector<std::uint32_t>& game_cells(std::size_t game_idx) const {
    return cells_by_game_[game_idx];
  }
  const std::vector<std::uint32_t>& game_sender_cells(std::size_t game_idx,
                                                      std::size_t player_idx) const {
    return cells_by_game_sender_[game_idx * n_players() + player_idx];
  }
  const std::vector<std::uint32_t>& game_receiver_cells(std::size_t game_idx,
                                                        std::size_t player_idx) const {
    return cells_by_game_receiver_[game_idx * n_players() + player_idx];
  }

  // Cholesky factor of (I7 + sum_c x_c x_c^T) over the dyad's cells.
  const Eigen::LLT<Matrix7>& dyad_posterior_llt(std::size_t dyad_idx) const {
    return dyad_llt_[dyad_idx];
  }

  std::optional<std::size_t> find_cell(GameId game, std::uint32_t interval,
                                       PlayerId sender, PlayerId receiver) const;

  const std::vector<PassEvent>& events() const { return events_; }
  const std::vector<CovariateRecord>& covariates() const { return covariates_; }

 private:
  std::optional<std::size_t> find_cell_internal(GameId game, std::uint32_t interval,
                                                PlayerId sender,
                                                PlayerId receiver) const;

  std::vector<PassEvent> events_;
  std::vector<CovariateRecord> covariates_;
  std::vector<PlayerId> players_;  // sorted original ids
  std::vector<GameId> games_;     // sorted original ids
  std::vector<Cell> cells_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dyads_;
  std::vector<std::vector<std::uint32_t>> cells_by_dyad_;
  std::vector<std::vector<std::uint32_t>> cells_by_game_;
  std::vector<std::vector<std::uint32_t>> cells_by_game_sender_;
  std::vector<std::vector<std::uint32_t>> cells_by_game_receiver_;
  std::vector<Eigen::LLT<Matrix7>> dyad_llt_;
};

}  // namespace passnet
