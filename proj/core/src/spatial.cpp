#include "passnet/spatial.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "passnet/tabular.hpp"

namespace passnet {

namespace {

// Thin-plate kernel r^2 log r, taken as a function of r^2.
double tps_kernel_r2(double r2) {
  return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0;
}

double tps_kernel(CourtLocation a, CourtLocation b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return tps_kernel_r2(dx * dx + dy * dy);
}

Eigen::MatrixXd affine_basis(const std::vector<CourtLocation>& pts) {
  Eigen::MatrixXd t(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t(i, 0) = 1.0;
    t(i, 1) = pts[i].x;
    t(i, 2) = pts[i].y;
  }
  return t;
}

std::vector<CourtLocation> all_tile_centers() {
  std::vector<CourtLocation> centers(kTileCount);
  for (int k = 0; k < kTileCount; ++k) centers[k] = TileGrid::center(k);
  return centers;
}

// Assembled regression problem shared by tps_fit and gcv_select.
struct TpsSystem {
  std::vector<CourtLocation> knots;
  Eigen::VectorXd targets;  // n_k / N over all tiles
  // Low-rank path (knots are a strict subset of the tile centers):
  Eigen::MatrixXd basis;     // K x M, [Phi * Z | P]
  Eigen::MatrixXd gram;      // basis^T basis
  Eigen::VectorXd moment;    // basis^T targets
  Eigen::MatrixXd penalty;   // blockdiag(Z^T E Z, 0)
  Eigen::MatrixXd null_map;  // Z, M x (M-3)
  bool exact = false;        // knots == tile centers: augmented exact solve
  Eigen::MatrixXd kernel_at_sites;  // exact path: Phi, K x K
  Eigen::MatrixXd affine_at_sites;  // exact path: T, K x 3
};

[[noreturn]] void degenerate_knots(const std::vector<CourtLocation>& knots) {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const auto& k : knots) {
    min_x = std::min(min_x, k.x);
    max_x = std::max(max_x, k.x);
    min_y = std::min(min_y, k.y);
    max_y = std::max(max_y, k.y);
  }
  std::ostringstream os;
  os << "degenerate thin-plate knot configuration: " << knots.size()
     << " knots spanning [" << min_x << "," << max_x << "] x [" << min_y << ","
     << max_y << "] have a rank-deficient affine basis (collinear knots)";
  throw std::runtime_error(os.str());
}

TpsSystem build_system(const TileGrid& grid, const TpsOptions& options) {
  if (grid.counts.size() != static_cast<std::size_t>(kTileCount))
    throw std::invalid_argument("tile grid must hold 2350 tiles");
  const std::uint64_t total = grid.total();
  if (total == 0) throw std::invalid_argument("tile grid has no counts");

  TpsSystem sys;
  sys.knots = select_knots(grid, options);
  const auto m = static_cast<Eigen::Index>(sys.knots.size());

  sys.targets.resize(kTileCount);
  for (int k = 0; k < kTileCount; ++k)
    sys.targets[k] = static_cast<double>(grid.counts[k]) / static_cast<double>(total);

  Eigen::MatrixXd t_knots = affine_basis(sys.knots);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(t_knots);
  if (rank_qr.rank() < 3) degenerate_knots(sys.knots);

  const auto centers = all_tile_centers();
  sys.exact = sys.knots.size() == static_cast<std::size_t>(kTileCount);
  if (sys.exact) {
    sys.kernel_at_sites.resize(kTileCount, kTileCount);
    for (int i = 0; i < kTileCount; ++i)
      for (int j = 0; j < kTileCount; ++j)
        sys.kernel_at_sites(i, j) = tps_kernel(centers[i], centers[j]);
    sys.affine_at_sites = affine_basis(centers);
    return sys;
  }

  // Null-space basis of T^T from the full QR of T.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(t_knots);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  sys.null_map = q.rightCols(m - 3);

  Eigen::MatrixXd phi(kTileCount, m);
  for (int i = 0; i < kTileCount; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      phi(i, j) = tps_kernel(centers[i], sys.knots[j]);

  Eigen::MatrixXd energy(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      energy(i, j) = tps_kernel(sys.knots[i], sys.knots[j]);

  sys.basis.resize(kTileCount, m);
  sys.basis.leftCols(m - 3).noalias() = phi * sys.null_map;
  sys.basis.rightCols(3) = affine_basis(centers);

  sys.gram.noalias() = sys.basis.transpose() * sys.basis;
  sys.moment.noalias() = sys.basis.transpose() * sys.targets;

  sys.penalty = Eigen::MatrixXd::Zero(m, m);
  sys.penalty.topLeftCorner(m - 3, m - 3).noalias() =
      sys.null_map.transpose() * energy * sys.null_map;
  // The bending-energy quadratic form is only conditionally positive
  // definite; symmetrize to keep the solver happy.
  sys.penalty = 0.5 * (sys.penalty + sys.penalty.transpose()).eval();
  return sys;
}

struct TpsSolution {
  Eigen::VectorXd kernel_weights;  // per knot
  Eigen::Vector3d affine;
  Eigen::VectorXd fitted;  // at all tile centers
  double rss = 0.0;
  double trace_influence = 0.0;  // tr A(lambda); only on the low-rank path
};

TpsSolution solve_system(const TpsSystem& sys, double lambda, bool want_trace) {
  TpsSolution sol;
  if (sys.exact) {
    const auto k = static_cast<Eigen::Index>(kTileCount);
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(k + 3, k + 3);
    aug.topLeftCorner(k, k) = sys.kernel_at_sites;
    aug.topLeftCorner(k, k).diagonal().array() += lambda;
    aug.topRightCorner(k, 3) = sys.affine_at_sites;
    aug.bottomLeftCorner(3, k) = sys.affine_at_sites.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 3);
    rhs.head(k) = sys.targets;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(aug);
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite())
      throw std::runtime_error("singular thin-plate interpolation system");
    sol.kernel_weights = x.head(k);
    sol.affine = x.tail(3);
    sol.fitted.noalias() = sys.kernel_at_sites * sol.kernel_weights;
    sol.fitted.noalias() += sys.affine_at_sites * sol.affine;
    sol.rss = (sys.targets - sol.fitted).squaredNorm();
    if (want_trace)
      throw std::logic_error("influence trace unavailable on the exact path");
    return sol;
  }

  const Eigen::Index m = sys.gram.rows();
  Eigen::MatrixXd c = sys.gram + lambda * sys.penalty;
  Eigen::VectorXd coef;
  double jitter = 1e-10 * c.trace() / static_cast<double>(m);
  for (int attempt = 0;; ++attempt) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
    if (ldlt.info() == Eigen::Success) {
      coef = ldlt.solve(sys.moment);
      if (coef.allFinite()) {
        if (want_trace) {
          Eigen::MatrixXd influence = ldlt.solve(sys.gram);
          sol.trace_influence = influence.trace();
        }
        break;
      }
    }
    if (attempt >= 3)
      throw std::runtime_error("singular thin-plate system (jitter exhausted)");
    c.diagonal().array() += jitter;
    jitter *= 10.0;
  }
  sol.kernel_weights.noalias() = sys.null_map * coef.head(m - 3);
  sol.affine = coef.tail(3);
  sol.fitted.noalias() = sys.basis * coef;
  sol.rss = (sys.targets - sol.fitted).squaredNorm();
  return sol;
}

SpatialField field_from_solution(const TpsSystem& sys, const TpsSolution& sol,
                                 double lambda) {
  SpatialField field;
  field.knots = sys.knots;
  field.kernel_weights = sol.kernel_weights;
  field.affine = sol.affine;
  field.lambda = lambda;
  field.raw_integral = 1.0;
  field.grid_values.assign(sol.fitted.data(), sol.fitted.data() + kTileCount);
  return normalize_field(std::move(field));
}

}  // namespace

int TileGrid::tile_of(CourtLocation s) {
  const double x = std::clamp(s.x, 0.0, kCourtX);
  const double y = std::clamp(s.y, 0.0, kCourtY);
  const int ix = std::min(static_cast<int>(x), kTilesX - 1);
  const int iy = std::min(static_cast<int>(y), kTilesY - 1);
  return ix * kTilesY + iy;
}

CourtLocation TileGrid::center(int tile_index) {
  return {static_cast<double>(tile_index / kTilesY) + 0.5,
          static_cast<double>(tile_index % kTilesY) + 0.5};
}

std::uint64_t TileGrid::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

TileGrid tile_counts(std::span<const CourtLocation> locations,
                     TileCountStats* stats) {
  if (locations.empty())
    throw std::invalid_argument("cannot build tile counts from zero locations");
  TileGrid grid;
  std::size_t clipped = 0;
  for (const auto& s : locations) {
    if (s.x < 0.0 || s.x > kCourtX || s.y < 0.0 || s.y > kCourtY) ++clipped;
    ++grid.counts[TileGrid::tile_of(s)];
  }
  if (stats) stats->clipped = clipped;
  return grid;
}

std::vector<CourtLocation> select_knots(const TileGrid& grid,
                                        const TpsOptions& options) {
  if (options.max_knots < 40)
    throw std::invalid_argument("max_knots must be at least 40");
  std::vector<int> support;
  for (int k = 0; k < kTileCount; ++k)
    if (grid.counts[k] > 0) support.push_back(k);

  // Full support with room for every tile: use the tile centers themselves
  // so the fit interpolates; the uniform lattice would be redundant.
  if (support.size() == static_cast<std::size_t>(kTileCount) &&
      options.max_knots >= static_cast<std::size_t>(kTileCount))
    return all_tile_centers();

  const std::size_t lattice_size = options.lattice_knots ? 36 : 0;
  const std::size_t budget =
      options.max_knots > lattice_size ? options.max_knots - lattice_size : 0;

  if (support.size() > budget) {
    // Count-weighted subsampling without replacement (exponential keys with
    // a fixed internal seed; tile order makes it input-permutation
    // invariant).
    std::mt19937_64 engine(0x7061737366756cULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(support.size());
    for (int k : support) {
      const double u = std::max(unif(engine), 1e-300);
      keyed.emplace_back(-std::log(u) / static_cast<double>(grid.counts[k]), k);
    }
    std::sort(keyed.begin(), keyed.end());
    keyed.resize(budget);
    support.clear();
    for (const auto& [score, k] : keyed) support.push_back(k);
    std::sort(support.begin(), support.end());
  }

  std::vector<CourtLocation> knots;
  knots.reserve(support.size() + lattice_size);
  for (int k : support) knots.push_back(TileGrid::center(k));
  if (options.lattice_knots) {
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        CourtLocation p{(i + 0.5) * kCourtX / 6.0, (j + 0.5) * kCourtY / 6.0};
        bool duplicate = false;
        for (const auto& k : knots) {
          const double dx = k.x - p.x, dy = k.y - p.y;
          if (dx * dx + dy * dy < 1e-18) { duplicate = true; break; }
        }
        if (!duplicate) knots.push_back(p);
      }
    }
  }
  return knots;
}

SpatialField tps_fit(const TileGrid& grid, double lambda,
                     const TpsOptions& options) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  TpsSystem sys = build_system(grid, options);
  TpsSolution sol = solve_system(sys, lambda, /*want_trace=*/false);
  return field_from_solution(sys, sol, lambda);
}

double gcv_select(const TileGrid& grid, std::span<const double> lambda_grid,
                  const TpsOptions& options) {
  if (lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw std::invalid_argument("lambda grid values must be >= 0");

  TpsSystem sys = build_system(grid, options);
  if (sys.exact)
    throw std::invalid_argument(
        "gcv_select requires a capped knot basis (max_knots below the tile count)");

  std::vector<double> ordered(lambda_grid.begin(), lambda_grid.end());
  std::sort(ordered.begin(), ordered.end());

  double best_lambda = std::numeric_limits<double>::quiet_NaN();
  double best_score = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (double lambda : ordered) {
    TpsSolution sol = solve_system(sys, lambda, /*want_trace=*/true);
    const double denom = static_cast<double>(kTileCount) - sol.trace_influence;
    const double score = kTileCount * sol.rss / (denom * denom);
    if (!std::isfinite(score)) continue;
    any_finite = true;
    if (score <= best_score) {  // ties resolve toward the larger lambda
      best_score = score;
      best_lambda = lambda;
    }
  }
  if (!any_finite)
    throw std::runtime_error("GCV produced no finite score on the supplied grid");
  return best_lambda;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(25);
  for (int i = 0; i < 25; ++i) grid[i] = std::pow(10.0, -4.0 + 8.0 * i / 24.0);
  return grid;
}

SpatialField normalize_field(SpatialField field) {
  if (field.grid_values.size() != static_cast<std::size_t>(kTileCount))
    throw std::invalid_argument("field grid must hold 2350 values");
  double integral = 0.0;  // tile area is exactly 1 ft^2
  for (double v : field.grid_values) integral += v;
  if (std::abs(integral) < 1e-14)
    throw std::runtime_error("cannot normalize a field with zero grid integral");
  for (double& v : field.grid_values) v /= integral;
  field.kernel_weights /= integral;
  field.affine /= integral;
  field.raw_integral *= integral;
  return field;
}

double evaluate_field(const SpatialField& field, CourtLocation s) {
  double value = field.affine[0] + field.affine[1] * s.x + field.affine[2] * s.y;
  for (Eigen::Index m = 0; m < field.kernel_weights.size(); ++m)
    value += field.kernel_weights[m] * tps_kernel(s, field.knots[m]);
  return value;
}

SpatialField uniform_field() {
  SpatialField field;
  field.affine = Eigen::Vector3d(1.0 / kTileCount, 0.0, 0.0);
  field.kernel_weights.resize(0);
  field.grid_values.assign(kTileCount, 1.0 / kTileCount);
  field.raw_integral = 1.0;
  field.lambda = 0.0;
  return field;
}

PlayerFieldSet build_player_fields(std::span<const PassLocationSample> samples,
                                   PlayerId player, const TpsOptions& options,
                                   std::span<const double> lambda_grid) {
  std::vector<double> default_grid;
  if (lambda_grid.empty()) {
    default_grid = default_lambda_grid();
    lambda_grid = default_grid;
  }

  std::vector<CourtLocation> sender_locs;
  std::map<PositionClass, std::vector<CourtLocation>> receiver_locs;
  for (const auto& s : samples) {
    if (s.sender != player) continue;
    sender_locs.push_back(s.sender_location);
    receiver_locs[s.receiver_position].push_back(s.receiver_location);
  }
  if (sender_locs.empty())
    throw std::invalid_argument("player " + std::to_string(player) +
                                " has no recorded pass");

  auto fit_from = [&](const std::vector<CourtLocation>& locs) {
    TileGrid grid = tile_counts(locs);
    const double lambda = gcv_select(grid, lambda_grid, options);
    return tps_fit(grid, lambda, options);
  };

  PlayerFieldSet out;
  out.sender_field = fit_from(sender_locs);
  for (PositionClass pos : kAllPositions) {
    auto it = receiver_locs.find(pos);
    out.receiver_fields[pos] =
        it == receiver_locs.end() ? uniform_field() : fit_from(it->second);
  }
  return out;
}

void FieldStore::put(PlayerId player, PlayerFieldSet fields) {
  fields_[player] = std::move(fields);
}

bool FieldStore::contains(PlayerId player) const { return fields_.count(player) > 0; }

const PlayerFieldSet* FieldStore::find(PlayerId player) const {
  auto it = fields_.find(player);
  return it == fields_.end() ? nullptr : &it->second;
}

double FieldStore::sender_value(PlayerId player, CourtLocation s) const {
  const PlayerFieldSet* set = find(player);
  return evaluate_field(set ? set->sender_field : uniform_, s);
}

double FieldStore::receiver_value(PlayerId sender, PositionClass pos,
                                  CourtLocation s) const {
  const PlayerFieldSet* set = find(sender);
  if (!set) return evaluate_field(uniform_, s);
  auto it = set->receiver_fields.find(pos);
  return evaluate_field(it == set->receiver_fields.end() ? uniform_ : it->second, s);
}

FieldTable to_field_table(const SpatialField& field, PlayerId player,
                          const std::string& kind,
                          std::optional<PositionClass> position) {
  FieldTable table;
  table.player = player;
  table.kind = kind;
  table.position = position;
  table.lambda = field.lambda;
  table.values = field.grid_values;
  return table;
}

std::string serialize_field_table(const FieldTable& table) {
  std::string out;
  out += "#field\tplayer=" + std::to_string(table.player);
  out += "\tkind=" + table.kind;
  out += "\tposition=";
  out += table.position ? std::string(to_string(*table.position)) : "NA";
  out += "\tlambda=" + format_double(table.lambda) + "\n";
  out += "tile_x\ttile_y\tvalue\n";
  for (int k = 0; k < kTileCount; ++k) {
    out += std::to_string(k / kTilesY);
    out += '\t';
    out += std::to_string(k % kTilesY);
    out += '\t';
    out += format_double(table.values[k]);
    out += '\n';
  }
  return out;
}

FieldTable parse_field_table(std::istream& in) {
  FieldTable table;
  table.values.assign(kTileCount, 0.0);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty field table");
  auto header = split_tabs(strip_cr(line));
  if (header.empty() || header[0] != "#field")
    throw std::runtime_error("field table missing #field header");
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto field = header[i];
    const auto eq = field.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("malformed field header entry");
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (key == "player") {
      table.player = parse_int(value);
    } else if (key == "kind") {
      table.kind = std::string(value);
    } else if (key == "position") {
      table.position = value == "NA" ? std::nullopt : position_from_string(value);
      if (value != "NA" && !table.position)
        throw std::runtime_error("unknown position class in field header");
    } else if (key == "lambda") {
      table.lambda = parse_double(value);
    }
  }
  if (!std::getline(in, line) ||
      strip_cr(line) != std::string_view("tile_x\ttile_y\tvalue"))
    throw std::runtime_error("field table missing column header");
  int rows = 0;
  while (std::getline(in, line)) {
    auto sv = strip_cr(line);
    if (sv.empty()) continue;
    auto cols = split_tabs(sv);
    if (cols.size() != 3) throw std::runtime_error("field table row needs 3 columns");
    const auto ix = parse_int(cols[0]);
    const auto iy = parse_int(cols[1]);
    if (ix < 0 || ix >= kTilesX || iy < 0 || iy >= kTilesY)
      throw std::runtime_error("field table tile index out of range");
    table.values[ix * kTilesY + iy] = parse_double(cols[2]);
    ++rows;
  }
  if (rows != kTileCount)
    throw std::runtime_error("field table must hold one row per tile");
  return table;
}

}  // namespace passnet
