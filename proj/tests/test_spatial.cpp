#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "passnet/rng.hpp"
#include "passnet/spatial.hpp"
#include "support.hpp"

using namespace passnet;

namespace {

// Test-side kernel, written out independently of the library.
double kernel_loop(CourtLocation a, CourtLocation b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double r = std::sqrt(dx * dx + dy * dy);
  return r > 0.0 ? r * r * std::log(r) : 0.0;
}

double evaluate_loop(const SpatialField& field, CourtLocation s) {
  double value = field.affine[0] + field.affine[1] * s.x + field.affine[2] * s.y;
  for (Eigen::Index m = 0; m < field.kernel_weights.size(); ++m)
    value += field.kernel_weights[m] * kernel_loop(s, field.knots[m]);
  return value;
}

// Grid whose counts come from an affine function with integer values at
// tile centers.
TileGrid affine_grid() {
  TileGrid grid;
  for (int k = 0; k < kTileCount; ++k) {
    const CourtLocation c = TileGrid::center(k);
    grid.counts[k] = static_cast<std::uint32_t>(
        std::llround(3.0 + 2.0 * (c.x - 0.5) + 4.0 * (c.y - 0.5)));
  }
  return grid;
}

std::vector<double> normalized_targets(const TileGrid& grid) {
  std::vector<double> targets(kTileCount);
  const double total = static_cast<double>(grid.total());
  for (int k = 0; k < kTileCount; ++k)
    targets[k] = static_cast<double>(grid.counts[k]) / total;
  return targets;
}

// Counts supported on a 10x10 block of tiles, a noisy sinusoid over it.
TileGrid sinusoid_block_grid(std::uint64_t seed) {
  Rng rng(seed);
  TileGrid grid;
  for (int ix = 10; ix < 20; ++ix) {
    for (int iy = 20; iy < 30; ++iy) {
      const double bump = 40.0 * (1.2 + std::sin(0.9 * ix) * std::cos(0.7 * iy));
      const double noisy = bump + 6.0 * rng.normal();
      grid.counts[ix * kTilesY + iy] =
          static_cast<std::uint32_t>(std::max(1.0, std::llround(noisy) * 1.0));
    }
  }
  return grid;
}

}  // namespace

TEST_CASE("tile counts: single location") {
  std::vector<CourtLocation> locations{{0.5, 0.5}};
  TileGrid grid = tile_counts(locations);
  CHECK(grid.counts[0] == 1);
  CHECK(grid.total() == 1);
}

TEST_CASE("tile counts: one location per tile center") {
  std::vector<CourtLocation> locations;
  for (int k = 0; k < kTileCount; ++k) locations.push_back(TileGrid::center(k));
  TileGrid grid = tile_counts(locations);
  for (int k = 0; k < kTileCount; ++k) CHECK(grid.counts[k] == 1);
}

TEST_CASE("tile counts match a brute-force binning oracle") {
  Rng rng(42);
  std::vector<CourtLocation> locations;
  for (int i = 0; i < 500; ++i)
    locations.push_back({rng.uniform() * kCourtX, rng.uniform() * kCourtY});
  TileGrid grid = tile_counts(locations);

  // Independent double loop over tiles and points.
  for (int ix = 0; ix < kTilesX; ++ix) {
    for (int iy = 0; iy < kTilesY; ++iy) {
      std::uint32_t expected = 0;
      for (const auto& s : locations) {
        const int bx = std::min(static_cast<int>(s.x), kTilesX - 1);
        const int by = std::min(static_cast<int>(s.y), kTilesY - 1);
        if (bx == ix && by == iy) ++expected;
      }
      CHECK(grid.counts[ix * kTilesY + iy] == expected);
    }
  }
  CHECK(grid.total() == 500);
}

TEST_CASE("tile counts clip and count out-of-bounds points") {
  TileCountStats stats;
  std::vector<CourtLocation> locations{{-1.0, 2.0}, {50.0, 55.0}, {3.0, 3.0}};
  TileGrid grid = tile_counts(locations, &stats);
  CHECK(stats.clipped == 2);
  CHECK(grid.total() == 3);
  CHECK(grid.counts[0 * kTilesY + 2] == 1);               // clipped to x = 0
  CHECK(grid.counts[46 * kTilesY + 49] == 1);             // clipped to the far corner
}

TEST_CASE("tile counts reject empty input") {
  CHECK_THROWS_AS(tile_counts({}), std::invalid_argument);
}

TEST_CASE("tps fit with lambda 0 reproduces affine targets") {
  TileGrid grid = affine_grid();
  const auto targets = normalized_targets(grid);
  SpatialField field = tps_fit(grid, 0.0);
  for (int k = 0; k < kTileCount; ++k)
    CHECK(std::abs(field.grid_values[k] - targets[k]) < 1e-6);
}

TEST_CASE("tps fit with huge lambda converges to the affine least-squares plane") {
  Rng rng(5);
  TileGrid grid;
  for (int k = 0; k < kTileCount; ++k)
    grid.counts[k] = static_cast<std::uint32_t>(rng.uniform_int(0, 9));
  const auto targets = normalized_targets(grid);

  // Independent affine least squares over all tiles.
  Eigen::MatrixXd design(kTileCount, 3);
  Eigen::VectorXd t(kTileCount);
  for (int k = 0; k < kTileCount; ++k) {
    const CourtLocation c = TileGrid::center(k);
    design.row(k) << 1.0, c.x, c.y;
    t[k] = targets[k];
  }
  const Eigen::Vector3d plane =
      (design.transpose() * design).ldlt().solve(design.transpose() * t);

  SpatialField field = tps_fit(grid, 1e8);
  double max_dev = 0.0;
  for (const auto& knot : field.knots) {
    const double plane_value = plane[0] + plane[1] * knot.x + plane[2] * knot.y;
    const double fit_value = evaluate_field(field, knot) * field.raw_integral;
    max_dev = std::max(max_dev, std::abs(fit_value - plane_value));
  }
  CHECK(max_dev < 1e-4);
}

TEST_CASE("tps fit at lambda 1 is a local minimum of the penalized objective") {
  TileGrid grid = sinusoid_block_grid(11);
  const auto targets = normalized_targets(grid);
  const double lambda = 1.0;
  SpatialField field = tps_fit(grid, lambda, {.max_knots = 150});

  // Objective recomputed on the test side from raw coefficients.
  const auto m = static_cast<Eigen::Index>(field.knots.size());
  Eigen::MatrixXd energy(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      energy(i, j) = kernel_loop(field.knots[i], field.knots[j]);
  Eigen::MatrixXd t_knots(m, 3);
  for (Eigen::Index i = 0; i < m; ++i)
    t_knots.row(i) << 1.0, field.knots[i].x, field.knots[i].y;
  const Eigen::MatrixXd projector =
      Eigen::MatrixXd::Identity(m, m) -
      t_knots * (t_knots.transpose() * t_knots).ldlt().solve(t_knots.transpose());

  auto objective = [&](const Eigen::VectorXd& w, const Eigen::Vector3d& a) {
    double rss = 0.0;
    for (int k = 0; k < kTileCount; ++k) {
      const CourtLocation c = TileGrid::center(k);
      double f = a[0] + a[1] * c.x + a[2] * c.y;
      for (Eigen::Index i = 0; i < m; ++i)
        f += w[i] * kernel_loop(c, field.knots[i]);
      const double r = targets[k] - f;
      rss += r * r;
    }
    return rss + lambda * w.dot(energy * w);
  };

  const Eigen::VectorXd w0 = field.kernel_weights * field.raw_integral;
  const Eigen::Vector3d a0 = field.affine * field.raw_integral;
  const double at_solution = objective(w0, a0);

  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd dw(m);
    for (Eigen::Index i = 0; i < m; ++i) dw[i] = 1e-7 * rng.normal();
    dw = projector * dw;  // stay inside the side-condition space
    Eigen::Vector3d da;
    for (int i = 0; i < 3; ++i) da[i] = 1e-6 * rng.normal();
    CHECK(objective(w0 + dw, a0 + da) >= at_solution);
  }
}

TEST_CASE("tps fit flags degenerate collinear knots") {
  TileGrid grid;
  for (int iy = 10; iy < 16; ++iy) grid.counts[20 * kTilesY + iy] = 3;
  CHECK_THROWS_WITH_AS(tps_fit(grid, 0.5, {.lattice_knots = false}),
                       doctest::Contains("collinear"), std::runtime_error);
}

TEST_CASE("gcv: singleton grid returns its value") {
  TileGrid grid = sinusoid_block_grid(3);
  const std::vector<double> lambdas{0.37};
  CHECK(gcv_select(grid, lambdas) == doctest::Approx(0.37));
}

TEST_CASE("gcv: affine targets select the largest lambda") {
  TileGrid grid = affine_grid();
  const auto lambdas = default_lambda_grid();
  CHECK(gcv_select(grid, lambdas) == doctest::Approx(lambdas.back()));
}

TEST_CASE("gcv validates its lambda grid") {
  TileGrid grid = sinusoid_block_grid(3);
  CHECK_THROWS_AS(gcv_select(grid, {}), std::invalid_argument);
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(gcv_select(grid, negative), std::invalid_argument);
}

TEST_CASE("gcv equals an independent influence-trace oracle") {
  TileGrid grid = sinusoid_block_grid(29);
  const TpsOptions options{.max_knots = 150};
  const auto lambdas = default_lambda_grid();
  const double chosen = gcv_select(grid, lambdas, options);

  // Oracle: rebuild the smoother over the same knots and recompute
  // GCV(lambda) = K RSS / (K - sum_k A_kk)^2 with explicit leave-one-out
  // influence diagonals A_kk = b_k^T (B^T B + lambda S)^{-1} b_k.
  const auto knots = select_knots(grid, options);
  const auto m = static_cast<Eigen::Index>(knots.size());
  const auto targets = normalized_targets(grid);

  Eigen::MatrixXd t_knots(m, 3);
  for (Eigen::Index i = 0; i < m; ++i)
    t_knots.row(i) << 1.0, knots[i].x, knots[i].y;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(t_knots);
  const Eigen::MatrixXd z =
      (qr.householderQ() * Eigen::MatrixXd::Identity(m, m)).rightCols(m - 3);

  Eigen::MatrixXd phi(kTileCount, m);
  Eigen::MatrixXd p(kTileCount, 3);
  for (int k = 0; k < kTileCount; ++k) {
    const CourtLocation c = TileGrid::center(k);
    for (Eigen::Index i = 0; i < m; ++i) phi(k, i) = kernel_loop(c, knots[i]);
    p.row(k) << 1.0, c.x, c.y;
  }
  Eigen::MatrixXd energy(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      energy(i, j) = kernel_loop(knots[i], knots[j]);

  Eigen::MatrixXd basis(kTileCount, m);
  basis.leftCols(m - 3) = phi * z;
  basis.rightCols(3) = p;
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(m, m);
  penalty.topLeftCorner(m - 3, m - 3) = z.transpose() * energy * z;
  penalty = (0.5 * (penalty + penalty.transpose())).eval();

  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(targets.data(), kTileCount);
  double best_score = std::numeric_limits<double>::infinity();
  double best_lambda = -1.0;
  std::vector<double> ordered(lambdas.begin(), lambdas.end());
  std::sort(ordered.begin(), ordered.end());
  for (double lambda : ordered) {
    const Eigen::MatrixXd c = basis.transpose() * basis + lambda * penalty;
    const Eigen::MatrixXd c_inv = c.inverse();
    const Eigen::VectorXd coef = c_inv * (basis.transpose() * t);
    double rss = 0.0;
    double trace = 0.0;
    for (int k = 0; k < kTileCount; ++k) {
      const Eigen::VectorXd row = basis.row(k).transpose();
      const double fitted = row.dot(coef);
      rss += (t[k] - fitted) * (t[k] - fitted);
      trace += row.dot(c_inv * row);
    }
    const double denom = kTileCount - trace;
    const double score = kTileCount * rss / (denom * denom);
    if (std::isfinite(score) && score <= best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  CHECK(chosen == doctest::Approx(best_lambda));
}

TEST_CASE("normalize: constant raw field becomes 1/2350 per tile") {
  SpatialField field;
  field.affine = Eigen::Vector3d(2.0, 0.0, 0.0);
  field.kernel_weights.resize(0);
  field.grid_values.assign(kTileCount, 2.0);
  field = normalize_field(std::move(field));
  for (double v : field.grid_values)
    CHECK(v == doctest::Approx(1.0 / kTileCount).epsilon(1e-12));
  CHECK(field.raw_integral == doctest::Approx(2.0 * kTileCount));
  CHECK(evaluate_field(field, {23.0, 11.0}) == doctest::Approx(1.0 / kTileCount));
}

TEST_CASE("normalize is idempotent") {
  SpatialField field = tps_fit(sinusoid_block_grid(8), 0.5, {.max_knots = 150});
  SpatialField again = normalize_field(field);
  for (int k = 0; k < kTileCount; ++k)
    CHECK(again.grid_values[k] ==
          doctest::Approx(field.grid_values[k]).epsilon(1e-12));
}

TEST_CASE("normalize rejects a zero-integral field") {
  SpatialField field;
  field.affine.setZero();
  field.kernel_weights.resize(0);
  field.grid_values.assign(kTileCount, 0.0);
  CHECK_THROWS_AS(normalize_field(std::move(field)), std::runtime_error);
}

TEST_CASE("every fitted field has unit grid integral") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SpatialField field = tps_fit(sinusoid_block_grid(seed), 0.1, {.max_knots = 150});
    double sum = 0.0;
    for (double v : field.grid_values) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("full-knot interpolation: lambda 0 reproduces every target") {
  // All tiles carry data, so the knot set is the full tile-center grid and
  // the fit interpolates.
  Rng rng(31);
  TileGrid grid;
  for (int k = 0; k < kTileCount; ++k)
    grid.counts[k] = static_cast<std::uint32_t>(1 + rng.uniform_int(0, 30));
  const auto targets = normalized_targets(grid);
  SpatialField field = tps_fit(grid, 0.0, {.max_knots = 2500});
  REQUIRE(field.knots.size() == static_cast<std::size_t>(kTileCount));

  double max_resid = 0.0;
  for (int k = 0; k < kTileCount; ++k)
    max_resid = std::max(max_resid, std::abs(field.grid_values[k] - targets[k]));
  CHECK(max_resid < 1e-6);

  SUBCASE("evaluation at tile centers equals stored grid values") {
    for (int k = 0; k < kTileCount; k += 97)
      CHECK(std::abs(evaluate_field(field, TileGrid::center(k)) -
                     field.grid_values[k]) < 1e-10);
  }
  SUBCASE("evaluation at a knot matches the interpolated target") {
    CHECK(std::abs(evaluate_field(field, field.knots[1234]) - targets[1234]) <
          1e-6);
  }
}

TEST_CASE("evaluation matches an independent kernel summation") {
  SpatialField field = tps_fit(sinusoid_block_grid(77), 2.0, {.max_knots = 150});
  const CourtLocation mid{(field.knots[0].x + field.knots[1].x) / 2.0,
                          (field.knots[0].y + field.knots[1].y) / 2.0};
  CHECK(evaluate_field(field, mid) == doctest::Approx(evaluate_loop(field, mid)).epsilon(1e-12));
  CHECK(evaluate_field(field, {0.0, 0.0}) ==
        doctest::Approx(evaluate_loop(field, {0.0, 0.0})).epsilon(1e-12));
}

TEST_CASE("fit is equivariant under permutations of the input locations") {
  Rng rng(1234);
  std::vector<CourtLocation> locations;
  for (int i = 0; i < 300; ++i)
    locations.push_back({5.0 + 20.0 * rng.uniform(), 10.0 + 25.0 * rng.uniform()});
  std::vector<CourtLocation> shuffled = locations;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[rng.uniform_int(0, static_cast<int>(i))]);

  SpatialField a = tps_fit(tile_counts(locations), 0.7, {.max_knots = 150});
  SpatialField b = tps_fit(tile_counts(shuffled), 0.7, {.max_knots = 150});
  REQUIRE(a.knots.size() == b.knots.size());
  for (std::size_t i = 0; i < a.knots.size(); ++i) {
    CHECK(a.knots[i].x == b.knots[i].x);
    CHECK(a.knots[i].y == b.knots[i].y);
  }
  for (int k = 0; k < kTileCount; ++k)
    CHECK(a.grid_values[k] == b.grid_values[k]);  // bit identical
}

TEST_CASE("build player fields") {
  SUBCASE("single-tile support yields a bump at that tile") {
    std::vector<PassLocationSample> samples;
    for (int i = 0; i < 40; ++i) {
      PassLocationSample s;
      s.sender = 9;
      s.receiver = 4;
      s.receiver_position = PositionClass::Forward;
      s.sender_location = {23.5, 25.5};
      s.receiver_location = {10.5, 40.5};
      samples.push_back(s);
    }
    PlayerFieldSet fields = build_player_fields(samples, 9, {.max_knots = 150});
    const auto& grid = fields.sender_field.grid_values;
    const auto argmax = std::max_element(grid.begin(), grid.end()) - grid.begin();
    CHECK(argmax == TileGrid::tile_of({23.5, 25.5}));
  }

  SUBCASE("position class with no received passes falls back to uniform") {
    std::vector<PassLocationSample> samples;
    PassLocationSample s;
    s.sender = 9;
    s.receiver = 4;
    s.receiver_position = PositionClass::Forward;
    s.sender_location = {23.5, 25.5};
    s.receiver_location = {10.5, 40.5};
    samples.push_back(s);
    PlayerFieldSet fields = build_player_fields(samples, 9, {.max_knots = 150});
    const auto& guard_field = fields.receiver_fields.at(PositionClass::Guard);
    for (double v : guard_field.grid_values)
      CHECK(v == doctest::Approx(1.0 / kTileCount));
  }

  SUBCASE("player with no passes is an error") {
    std::vector<PassLocationSample> samples;
    CHECK_THROWS_AS(build_player_fields(samples, 1), std::invalid_argument);
  }

  SUBCASE("modal tiles survive smoothing below the GCV choice") {
    Rng rng(2024);
    std::vector<PassLocationSample> samples;
    for (int i = 0; i < 200; ++i) {
      PassLocationSample s;
      s.sender = 3;
      s.receiver = 5;
      s.receiver_position = PositionClass::Center;
      // A dominant tile at (30, 20) plus scatter around it.
      if (i % 10 < 7) {
        s.sender_location = {30.5, 20.5};
      } else {
        s.sender_location = {std::clamp(30.0 + 2.5 * rng.normal(), 0.0, kCourtX),
                             std::clamp(20.0 + 2.5 * rng.normal(), 0.0, kCourtY)};
      }
      s.receiver_location = {10.5, 40.5};
      samples.push_back(s);
    }
    std::vector<CourtLocation> sender_locations;
    for (const auto& s : samples) sender_locations.push_back(s.sender_location);
    TileGrid grid = tile_counts(sender_locations);
    const TpsOptions options{.max_knots = 150};
    const double chosen = gcv_select(grid, default_lambda_grid(), options);
    SpatialField field = tps_fit(grid, chosen / 10.0, options);

    const auto modal =
        std::max_element(grid.counts.begin(), grid.counts.end()) -
        grid.counts.begin();
    const auto argmax =
        std::max_element(field.grid_values.begin(), field.grid_values.end()) -
        field.grid_values.begin();
    CHECK(argmax == modal);
  }
}

TEST_CASE("field table round-trip is byte stable") {
  SpatialField field = tps_fit(sinusoid_block_grid(4), 0.3, {.max_knots = 150});
  FieldTable table = to_field_table(field, 601140, "receiver", PositionClass::Forward);
  const std::string first = serialize_field_table(table);
  std::istringstream in(first);
  FieldTable parsed = parse_field_table(in);
  CHECK(parsed.player == 601140);
  CHECK(parsed.kind == "receiver");
  REQUIRE(parsed.position.has_value());
  CHECK(*parsed.position == PositionClass::Forward);
  CHECK(parsed.lambda == field.lambda);
  CHECK(serialize_field_table(parsed) == first);
}

TEST_CASE("field store falls back to uniform for unknown players") {
  FieldStore store;
  CHECK(store.sender_value(42, {10.0, 10.0}) == doctest::Approx(1.0 / kTileCount));
  CHECK(store.receiver_value(42, PositionClass::Center, {10.0, 10.0}) ==
        doctest::Approx(1.0 / kTileCount));
}
