#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "passnet/data.hpp"
#include "passnet/rng.hpp"
#include "passnet/types.hpp"

namespace passnet::test {

inline CovariateRecord make_record(GameId game, std::uint32_t interval,
                                   PlayerId sender, PlayerId receiver,
                                   double dt = 1.0) {
  CovariateRecord rec;
  rec.game = game;
  rec.interval = interval;
  rec.sender = sender;
  rec.receiver = receiver;
  rec.w = {1.0, 0.0, 0.0, 1.0, 0.0};
  rec.interval_length = dt;
  return rec;
}

// Valid random covariates: w4 stays a rank in {1..4}.
inline CovariateRecord random_record(GameId game, std::uint32_t interval,
                                     PlayerId sender, PlayerId receiver, Rng& rng,
                                     double dt = 0.2) {
  CovariateRecord rec = make_record(game, interval, sender, receiver, dt);
  rec.w[1] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  rec.w[2] = 1.5 + 0.5 * rng.normal();
  rec.w[3] = static_cast<double>(rng.uniform_int(1, 4));
  rec.w[4] = rng.normal();
  rec.xi_sender = std::abs(rng.normal()) / 2350.0;
  rec.xi_receiver = std::abs(rng.normal()) / 2350.0;
  return rec;
}

// A game of intervals with one carrier and four candidate receivers each,
// valid per-interval rank structure included.
inline std::vector<CovariateRecord> random_game_records(GameId game,
                                                        int n_intervals,
                                                        int n_players, Rng& rng) {
  std::vector<CovariateRecord> records;
  for (int t = 0; t < n_intervals; ++t) {
    const PlayerId carrier = rng.uniform_int(0, n_players - 1);
    std::vector<PlayerId> others;
    for (PlayerId p = 0; p < n_players; ++p)
      if (p != carrier) others.push_back(p);
    for (int k = 0; k < 4; ++k)
      std::swap(others[k], others[rng.uniform_int(k, static_cast<int>(others.size()) - 1)]);
    std::array<int, 4> ranks{1, 2, 3, 4};
    for (int k = 3; k > 0; --k) std::swap(ranks[k], ranks[rng.uniform_int(0, k)]);
    for (int k = 0; k < 4; ++k) {
      auto rec = random_record(game, static_cast<std::uint32_t>(t), carrier,
                               others[k], rng);
      rec.w[3] = static_cast<double>(ranks[k]);
      records.push_back(rec);
    }
  }
  return records;
}

class TempDir {
 public:
  explicit TempDir(const std::string& label) {
    static std::mt19937_64 engine(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("passnet_test_" + label + "_" + std::to_string(engine()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

}  // namespace passnet::test
