#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "passnet/types.hpp"

namespace passnet {

// Half court: 47 ft (baseline to midcourt) by 50 ft (sideline to sideline),
// divided into one-foot tiles.
inline constexpr double kCourtX = 47.0;
inline constexpr double kCourtY = 50.0;
inline constexpr int kTilesX = 47;
inline constexpr int kTilesY = 50;
inline constexpr int kTileCount = kTilesX * kTilesY;  // 2350

struct CourtLocation {
  double x = 0.0;  // feet in [0, 47]
  double y = 0.0;  // feet in [0, 50]
};

// Per-tile location counts over the half court.
struct TileGrid {
  std::vector<std::uint32_t> counts;  // size kTileCount

  TileGrid() : counts(kTileCount, 0) {}

  static int tile_of(CourtLocation s);          // clips to the court first
  static CourtLocation center(int tile_index);  // (ix + 0.5, iy + 0.5)

  std::uint64_t total() const;
};

struct TileCountStats {
  std::size_t clipped = 0;  // inputs outside the court, clipped to boundary
};

// Bins locations into one-foot tiles. Out-of-bounds points are clipped to
// the boundary and counted in `stats`. Throws std::invalid_argument on an
// empty input.
TileGrid tile_counts(std::span<const CourtLocation> locations,
                     TileCountStats* stats = nullptr);

struct TpsOptions {
  // Knots are placed on every tile with a nonzero count plus a 6x6 uniform
  // lattice over the court; if that exceeds max_knots the support tiles are
  // thinned by count-weighted subsampling (deterministic).
  std::size_t max_knots = 400;
  bool lattice_knots = true;
};

// A fitted thin-plate spline field over the half court:
//   f(s) = affine . (1, x, y) + sum_m kernel_weights[m] * k(|s - knots[m]|)
// with k(r) = r^2 log r. Coefficients carry the unit-integral normalization;
// grid_values are the evaluations at the 2350 tile centers. raw_integral is
// the signed grid integral of the pre-normalization fit, so the raw field is
// recoverable as grid_values * raw_integral.
struct SpatialField {
  std::vector<CourtLocation> knots;
  Eigen::VectorXd kernel_weights;
  Eigen::Vector3d affine = Eigen::Vector3d::Zero();
  double lambda = 0.0;
  double raw_integral = 1.0;
  std::vector<double> grid_values;  // size kTileCount
};

// Knot set used by tps_fit / gcv_select for this grid. Exposed so tests can
// rebuild the same smoother independently.
std::vector<CourtLocation> select_knots(const TileGrid& grid,
                                        const TpsOptions& options = {});

// Minimizes sum_k (n_k/N - f(c_k))^2 + lambda * bending energy over all
// 2350 tiles, then normalizes the field to unit grid integral. When the
// knot set coincides with the tile centers the exact augmented interpolation
// system is solved instead of the low-rank normal equations. Throws
// std::runtime_error on degenerate (collinear) knot configurations or a
// singular system.
SpatialField tps_fit(const TileGrid& grid, double lambda,
                     const TpsOptions& options = {});

// Generalized cross validation over the supplied smoothing grid:
//   GCV(lambda) = K * RSS(lambda) / (K - tr A(lambda))^2,
// ties broken toward the larger lambda. Throws std::invalid_argument for an
// empty or negative grid and std::runtime_error when every score is
// non-finite.
double gcv_select(const TileGrid& grid, std::span<const double> lambda_grid,
                  const TpsOptions& options = {});

// 25 log-spaced values in [1e-4, 1e4].
std::vector<double> default_lambda_grid();

// Scales the field by its signed grid integral so the tile sum times the
// one square foot tile area equals 1. Idempotent. Throws std::runtime_error
// when the integral is zero.
SpatialField normalize_field(SpatialField field);

// TPS basis expansion at s, on the same normalization scale as grid_values.
double evaluate_field(const SpatialField& field, CourtLocation s);

// Constant 1/2350 per tile; the neutral field used when a receiver position
// class has no data.
SpatialField uniform_field();

// One pass with resolved locations: where the sender stood when passing and
// where the receiver stood when catching.
struct PassLocationSample {
  PlayerId sender = 0;
  PlayerId receiver = 0;
  PositionClass receiver_position = PositionClass::Guard;
  CourtLocation sender_location;
  CourtLocation receiver_location;
};

struct PlayerFieldSet {
  SpatialField sender_field;  // where the player passes from
  std::map<PositionClass, SpatialField> receiver_fields;  // keyed by pos(j)
};

// Fits the sender field from the player's own pass locations and one
// receiver field per position class from the catch locations of teammates
// at that position; classes with no data get the uniform field. Smoothing
// is chosen by GCV over `lambda_grid` (default grid when empty). Throws
// std::invalid_argument if the player has no recorded pass.
PlayerFieldSet build_player_fields(std::span<const PassLocationSample> samples,
                                   PlayerId player,
                                   const TpsOptions& options = {},
                                   std::span<const double> lambda_grid = {});

// In-memory field store keyed by player; falls back to the uniform field
// for unknown players or empty position classes so covariates stay defined.
class FieldStore {
 public:
  void put(PlayerId player, PlayerFieldSet fields);
  bool contains(PlayerId player) const;
  double sender_value(PlayerId player, CourtLocation s) const;
  double receiver_value(PlayerId sender, PositionClass pos, CourtLocation s) const;
  const PlayerFieldSet* find(PlayerId player) const;

 private:
  std::map<PlayerId, PlayerFieldSet> fields_;
  SpatialField uniform_ = uniform_field();
};

// Flat tabular export: a single header line carrying player id, field kind,
// position class and lambda, a column header, then one row per tile.
// serialize(parse(serialize(x))) is byte-identical.
struct FieldTable {
  PlayerId player = 0;
  std::string kind;  // "sender" or "receiver"
  std::optional<PositionClass> position;
  double lambda = 0.0;
  std::vector<double> values;  // size kTileCount, tile order
};

FieldTable to_field_table(const SpatialField& field, PlayerId player,
                          const std::string& kind,
                          std::optional<PositionClass> position);
std::string serialize_field_table(const FieldTable& table);
FieldTable parse_field_table(std::istream& in);

}  // namespace passnet
