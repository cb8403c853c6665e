#include "passnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace passnet {

std::string_view to_string(PositionClass pos) {
  switch (pos) {
    case PositionClass::Guard: return "G";
    case PositionClass::Forward: return "F";
    case PositionClass::Center: return "C";
  }
  return "?";
}

std::optional<PositionClass> position_from_string(std::string_view s) {
  if (s == "G" || s == "guard" || s == "Guard") return PositionClass::Guard;
  if (s == "F" || s == "forward" || s == "Forward") return PositionClass::Forward;
  if (s == "C" || s == "center" || s == "Center") return PositionClass::Center;
  return std::nullopt;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

template <typename T>
std::size_t index_of(const std::vector<T>& sorted, T value, const char* kind) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  if (it == sorted.end() || *it != value) {
    std::ostringstream os;
    os << "unknown " << kind << " id " << value;
    fail(os.str());
  }
  return static_cast<std::size_t>(it - sorted.begin());
}

}  // namespace

ModelData::ModelData(std::vector<PassEvent> events,
                     std::vector<CovariateRecord> covariates)
    : events_(std::move(events)), covariates_(std::move(covariates)) {
  if (covariates_.empty()) fail("model data needs at least one covariate record");

  for (const auto& c : covariates_) {
    players_.push_back(c.sender);
    players_.push_back(c.receiver);
    games_.push_back(c.game);
  }
  for (const auto& e : events_) {
    players_.push_back(e.sender);
    players_.push_back(e.receiver);
    games_.push_back(e.game);
  }
  std::sort(players_.begin(), players_.end());
  players_.erase(std::unique(players_.begin(), players_.end()), players_.end());
  std::sort(games_.begin(), games_.end());
  games_.erase(std::unique(games_.begin(), games_.end()), games_.end());
  if (!players_.empty() && players_.front() < 0) fail("negative player id");
  if (!games_.empty() && games_.front() < 0) fail("negative game id");

  const std::size_t n = players_.size();
  const std::size_t n_games = games_.size();

  // Cells in a canonical order: by (game, interval, receiver).
  std::sort(covariates_.begin(), covariates_.end(),
            [](const CovariateRecord& a, const CovariateRecord& b) {
              return std::tie(a.game, a.interval, a.sender, a.receiver) <
                     std::tie(b.game, b.interval, b.sender, b.receiver);
            });

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> dyad_lookup;
  cells_.reserve(covariates_.size());
  for (const auto& c : covariates_) {
    if (c.sender == c.receiver) fail("covariate record with sender == receiver");
    if (c.w[0] != 1.0) fail("covariate invariant broken: w1 != 1");
    if (c.w[3] != 1.0 && c.w[3] != 2.0 && c.w[3] != 3.0 && c.w[3] != 4.0)
      fail("covariate invariant broken: w4 not in {1,2,3,4}");
    if (!(c.interval_length > 0.0)) fail("covariate invariant broken: dt <= 0");
    Cell cell;
    cell.game = static_cast<std::uint32_t>(index_of(games_, c.game, "game"));
    cell.interval = c.interval;
    cell.sender = static_cast<std::uint32_t>(index_of(players_, c.sender, "player"));
    cell.receiver = static_cast<std::uint32_t>(index_of(players_, c.receiver, "player"));
    cell.x = c.x();
    if (!cell.x.allFinite()) fail("covariate invariant broken: non-finite covariate");
    cell.dt = c.interval_length;
    auto [it, inserted] = dyad_lookup.try_emplace(
        std::make_pair(cell.sender, cell.receiver),
        static_cast<std::uint32_t>(dyads_.size()));
    if (inserted) dyads_.emplace_back(cell.sender, cell.receiver);
    cell.dyad = it->second;
    cells_.push_back(cell);
  }

  // Per-interval consistency: unique cells, one sender, <= 4 receivers.
  for (std::size_t i = 1; i < cells_.size(); ++i) {
    const Cell& a = cells_[i - 1];
    const Cell& b = cells_[i];
    if (a.game == b.game && a.interval == b.interval) {
      if (a.sender != b.sender)
        fail("two distinct senders share interval " + std::to_string(b.interval));
      if (a.receiver == b.receiver)
        fail("duplicate covariate record in interval " + std::to_string(b.interval));
    }
  }
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= cells_.size(); ++i) {
    if (i == cells_.size() || cells_[i].game != cells_[run_start].game ||
        cells_[i].interval != cells_[run_start].interval) {
      if (i - run_start > 4)
        fail("more than four candidate receivers in interval " +
             std::to_string(cells_[run_start].interval));
      run_start = i;
    }
  }

  // Bind events to cells.
  std::map<std::pair<GameId, std::uint32_t>, const PassEvent*> event_by_interval;
  for (const auto& e : events_) {
    if (e.sender == e.receiver) fail("pass event with sender == receiver");
    auto [it, inserted] =
        event_by_interval.try_emplace(std::make_pair(e.game, e.interval), &e);
    if (!inserted)
      fail("two pass events in game " + std::to_string(e.game) + " interval " +
           std::to_string(e.interval));
    auto cell = find_cell_internal(e.game, e.interval, e.sender, e.receiver);
    if (!cell)
      fail("pass event without a lattice cell: game " + std::to_string(e.game) +
           " interval " + std::to_string(e.interval));
    cells_[*cell].y = true;
  }

  // Index lists.
  cells_by_dyad_.assign(dyads_.size(), {});
  cells_by_game_.assign(n_games, {});
  cells_by_game_sender_.assign(n_games * n, {});
  cells_by_game_receiver_.assign(n_games * n, {});
  for (std::uint32_t c = 0; c < cells_.size(); ++c) {
    const Cell& cell = cells_[c];
    cells_by_dyad_[cell.dyad].push_back(c);
    cells_by_game_[cell.game].push_back(c);
    cells_by_game_sender_[cell.game * n + cell.sender].push_back(c);
    cells_by_game_receiver_[cell.game * n + cell.receiver].push_back(c);
  }

  // Conjugate-draw precomputation: LLT of (I + sum x x^T) per dyad.
  dyad_llt_.reserve(dyads_.size());
  for (std::size_t d = 0; d < dyads_.size(); ++d) {
    Matrix7 m = Matrix7::Identity();
    for (std::uint32_t c : cells_by_dyad_[d]) m += cells_[c].x * cells_[c].x.transpose();
    Eigen::LLT<Matrix7> llt(m);
    if (llt.info() != Eigen::Success) {
      // m >= I, so this indicates overflow rather than rank deficiency.
      fail("Cholesky failure on dyad posterior precision");
    }
    dyad_llt_.push_back(std::move(llt));
  }
}

std::size_t ModelData::player_index(PlayerId id) const {
  return index_of(players_, id, "player");
}

std::size_t ModelData::game_index(GameId id) const {
  return index_of(games_, id, "game");
}

DyadKey ModelData::dyad_key(std::size_t dyad_idx) const {
  const auto& [s, r] = dyads_[dyad_idx];
  return {players_[s], players_[r]};
}

std::optional<std::size_t> ModelData::dyad_index(PlayerId sender,
                                                 PlayerId receiver) const {
  auto si = std::lower_bound(players_.begin(), players_.end(), sender);
  auto ri = std::lower_bound(players_.begin(), players_.end(), receiver);
  if (si == players_.end() || *si != sender) return std::nullopt;
  if (ri == players_.end() || *ri != receiver) return std::nullopt;
  const auto s = static_cast<std::uint32_t>(si - players_.begin());
  const auto r = static_cast<std::uint32_t>(ri - players_.begin());
  for (std::size_t d = 0; d < dyads_.size(); ++d)
    if (dyads_[d].first == s && dyads_[d].second == r) return d;
  return std::nullopt;
}

std::optional<std::size_t> ModelData::find_cell(GameId game, std::uint32_t interval,
                                                PlayerId sender,
                                                PlayerId receiver) const {
  return find_cell_internal(game, interval, sender, receiver);
}

std::optional<std::size_t> ModelData::find_cell_internal(
    GameId game, std::uint32_t interval, PlayerId sender, PlayerId receiver) const {
  // Cells are sorted by (game, interval, sender, receiver) in original-id
  // order of game/interval and dense order of players; binary search on the
  // (game, interval) prefix then scan the <= 4 candidates.
  auto lo = std::lower_bound(
      cells_.begin(), cells_.end(), std::make_pair(game, interval),
      [this](const Cell& c, const std::pair<GameId, std::uint32_t>& key) {
        return std::make_pair(games_[c.game], c.interval) < key;
      });
  for (; lo != cells_.end() && games_[lo->game] == game && lo->interval == interval;
       ++lo) {
    if (players_[lo->sender] == sender && players_[lo->receiver] == receiver)
      return static_cast<std::size_t>(lo - cells_.begin());
  }
  return std::nullopt;
}

}  // namespace passnet
