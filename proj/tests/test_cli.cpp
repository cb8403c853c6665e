#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "passnet/io.hpp"
#include "passnet/spatial.hpp"
#include "passnet/tabular.hpp"
#include "support.hpp"

using namespace passnet;
using passnet::test::TempDir;
using passnet::test::read_file;
using passnet::test::write_file;

namespace {

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string command =
      std::string(PASSNET_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string tracking_line(GameId game, double t, double bx, double by) {
  // Five home players in a row plus five away defenders, ball at (bx, by).
  std::ostringstream os;
  os << game << '\t' << format_double(t) << '\t' << format_double(bx) << '\t'
     << format_double(by);
  const double xs[5] = {10, 15, 20, 25, 30};
  for (int i = 0; i < 5; ++i)
    os << '\t' << i << "\thome\t" << format_double(xs[i]) << "\t25";
  for (int i = 0; i < 5; ++i)
    os << '\t' << (10 + i) << "\taway\t" << format_double(12.0 + 5 * i) << "\t32";
  os << '\n';
  return os.str();
}

// A small scripted game: repeated carrier-0 possessions with a pass to a
// rotating teammate, each ended by a made shot.
void write_game_fixture(const std::filesystem::path& dir) {
  std::ostringstream tracking, pbp, box;
  double t = 0.0;
  for (int possession = 0; possession < 12; ++possession) {
    const int receiver = 1 + possession % 4;
    const double receiver_x = 10.0 + 5.0 * receiver;
    const double start = t;
    for (int f = 0; f < 10; ++f, t += 0.04)
      tracking << tracking_line(1, t, 10, 25);
    pbp << "1\t" << format_double(start + 0.36) << "\tpass\t0\n";
    for (int f = 0; f < 10; ++f, t += 0.04)
      tracking << tracking_line(1, t, receiver_x, 25);
    pbp << "1\t" << format_double(t - 0.04) << "\tshot_made\t" << receiver << "\n";
  }
  box << "1\t0\tG\t10\t6\t2\n1\t1\tG\t8\t2\t1\n1\t2\tF\t12\t1\t6\n"
      << "1\t3\tF\t2\t0\t3\n1\t4\tC\t20\t1\t9\n";
  write_file(dir / "tracking.tsv", tracking.str());
  write_file(dir / "playbyplay.tsv", pbp.str());
  write_file(dir / "boxscore.tsv", box.str());
}

}  // namespace

TEST_CASE("cli: simulate is deterministic and validates flags") {
  TempDir dir("cli_sim");
  const auto log = dir.path() / "log.txt";

  const std::string flags = "--games 2 --players 8 --obs 400 --seed 7";
  CHECK(run_cli("simulate " + flags + " --out " + (dir.path() / "a").string(), log) == 0);
  CHECK(run_cli("simulate " + flags + " --out " + (dir.path() / "b").string(), log) == 0);
  for (const char* name : {"events.tsv", "covariates.tsv", "truth.tsv", "meta.tsv"})
    CHECK(read_file(dir.path() / "a" / name) == read_file(dir.path() / "b" / name));

  SUBCASE("usage errors exit with code 2") {
    CHECK(run_cli("simulate --obs 0 --out " + (dir.path() / "c").string(), log) == 2);
    CHECK(run_cli("simulate --obs 10", log) == 2);  // --out required
    CHECK(run_cli("nonsense", log) == 2);
  }
  SUBCASE("existing output directory is a runtime error") {
    CHECK(run_cli("simulate " + flags + " --out " + (dir.path() / "a").string(), log) == 1);
  }
  SUBCASE("manifest is present exactly once per output directory") {
    CHECK(std::filesystem::exists(dir.path() / "a" / "manifest.tsv"));
    RunManifest manifest = read_manifest(dir.path() / "a" / "manifest.tsv");
    CHECK(manifest.command == "simulate");
    CHECK(manifest.seed == 7);
  }
}

TEST_CASE("cli: fit, evaluate and export-factors") {
  TempDir dir("cli_fit");
  const auto log = dir.path() / "log.txt";
  const auto data_dir = (dir.path() / "data").string();
  REQUIRE(run_cli("simulate --games 2 --players 8 --obs 400 --seed 3 --out " +
                      data_dir, log) == 0);

  const std::string fit_flags =
      " --iters 120 --burnin 40 --thin 2 --seed 5 --out ";
  REQUIRE(run_cli("fit " + data_dir + " --model latent --R 2" + fit_flags +
                      (dir.path() / "latent").string(), log) == 0);
  REQUIRE(run_cli("fit " + data_dir + " --model covariates" + fit_flags +
                      (dir.path() / "cov").string(), log) == 0);

  SUBCASE("covariates model emits no latent factor paths") {
    const std::string samples = read_file(dir.path() / "cov" / "samples.tsv");
    CHECK(samples.find("\tU/") == std::string::npos);
    CHECK(samples.find("\tV/") == std::string::npos);
    CHECK(samples.find("\tbeta/") != std::string::npos);
  }
  SUBCASE("latent model emits factor paths up to R = 2") {
    SampleTable samples = read_samples(dir.path() / "latent" / "samples.tsv");
    int max_dim = 0;
    bool any_factor = false;
    for (const auto& path : samples.parameter_paths) {
      if (path.rfind("U/", 0) != 0 && path.rfind("V/", 0) != 0) continue;
      any_factor = true;
      max_dim = std::max(max_dim, static_cast<int>(parse_int(
                                      path.substr(path.rfind('/') + 1))));
    }
    CHECK(any_factor);
    CHECK(max_dim == 2);
  }
  SUBCASE("same seed reruns byte-identically") {
    REQUIRE(run_cli("fit " + data_dir + " --model latent --R 2" + fit_flags +
                        (dir.path() / "latent2").string(), log) == 0);
    CHECK(read_file(dir.path() / "latent" / "samples.tsv") ==
          read_file(dir.path() / "latent2" / "samples.tsv"));
    CHECK(read_file(dir.path() / "latent" / "summary.tsv") ==
          read_file(dir.path() / "latent2" / "summary.tsv"));
  }
  SUBCASE("evaluate train and test splits") {
    const auto report = dir.path() / "report.tsv";
    CHECK(run_cli("evaluate " + data_dir + " --samples " +
                      (dir.path() / "latent" / "samples.tsv").string() +
                      " --split test --out " + report.string(), log) == 0);
    const std::string text = read_file(report);
    CHECK(text.find("split\ttest") != std::string::npos);
    CHECK(text.find("loglik_mean\t") != std::string::npos);
    CHECK(text.find(" ± ") != std::string::npos);
  }
  SUBCASE("export-factors produces 16 rows for 8 players with 2 dims") {
    const auto table = dir.path() / "factors.tsv";
    CHECK(run_cli("export-factors --samples " +
                      (dir.path() / "latent" / "samples.tsv").string() +
                      " --game 0 --out " + table.string(), log) == 0);
    std::ifstream in(table);
    std::string line;
    std::getline(in, line);
    CHECK(line == "player\trole\tdim1\tdim2");
    int senders = 0, receivers = 0;
    std::set<PlayerId> players;
    while (std::getline(in, line)) {
      auto cols = split_tabs(line);
      REQUIRE(cols.size() == 4);
      players.insert(parse_int(cols[0]));
      if (cols[1] == "sender") ++senders;
      if (cols[1] == "receiver") ++receivers;
    }
    CHECK(senders == 8);
    CHECK(receivers == 8);
    CHECK(players.size() == 8);

    // Coordinates equal an independent averaging pass over the samples.
    SampleTable samples =
        read_samples(dir.path() / "latent" / "samples.tsv");
    double expected = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < samples.parameter_paths.size(); ++j) {
      if (samples.parameter_paths[j] == "U/0/0/1") {
        expected = samples.values.col(static_cast<Eigen::Index>(j)).mean();
        ++count;
      }
    }
    REQUIRE(count == 1);
    std::istringstream table_in(read_file(table));
    std::getline(table_in, line);  // header
    std::getline(table_in, line);  // first sender row: player 0
    auto cols = split_tabs(line);
    CHECK(parse_double(cols[2]) == doctest::Approx(expected).epsilon(1e-15));
  }
  SUBCASE("evaluating an empty split is a runtime error") {
    // A single-interval game puts everything into the test side: the train
    // split is empty.
    const auto tiny = (dir.path() / "tiny").string();
    REQUIRE(run_cli("simulate --games 1 --players 8 --obs 1 --seed 1 --out " + tiny,
                    log) == 0);
    CHECK(run_cli("evaluate " + tiny + " --samples " +
                      (dir.path() / "latent" / "samples.tsv").string() +
                      " --split train", log) == 1);
  }
}

TEST_CASE("cli: ingest and spatial") {
  TempDir dir("cli_ingest");
  const auto log = dir.path() / "log.txt";
  write_game_fixture(dir.path());

  const auto ingested = (dir.path() / "ingested").string();
  REQUIRE(run_cli("ingest --tracking " + (dir.path() / "tracking.tsv").string() +
                      " --playbyplay " + (dir.path() / "playbyplay.tsv").string() +
                      " --boxscore " + (dir.path() / "boxscore.tsv").string() +
                      " --out " + ingested, log) == 0);
  CHECK(std::filesystem::exists(dir.path() / "ingested" / "events.tsv"));
  CHECK(std::filesystem::exists(dir.path() / "ingested" / "covariates.tsv"));
  CHECK(std::filesystem::exists(dir.path() / "ingested" / "pass_locations.tsv"));
  Dataset dataset = read_dataset(dir.path() / "ingested");
  CHECK(dataset.events.size() == 12);
  CHECK(!dataset.covariates.empty());

  const auto spatial_dir = dir.path() / "spatial";
  REQUIRE(run_cli("spatial " + ingested + " --player 0 --max-knots 120 --out " +
                      spatial_dir.string(), log) == 0);

  // One sender field plus one receiver field per position class.
  const auto sender_file = spatial_dir / "field_0_sender.tsv";
  REQUIRE(std::filesystem::exists(sender_file));
  std::ifstream in(sender_file);
  FieldTable table = parse_field_table(in);
  CHECK(table.kind == "sender");
  double sum = 0.0;
  for (double v : table.values) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  for (const char* pos : {"G", "F", "C"})
    CHECK(std::filesystem::exists(spatial_dir /
                                  ("field_0_receiver_" + std::string(pos) + ".tsv")));

  SUBCASE("header lambda equals an independent GCV recomputation") {
    auto locations = [&] {
      std::vector<PassLocationSample> out;
      std::ifstream loc_in(dir.path() / "ingested" / "pass_locations.tsv");
      std::string line;
      std::getline(loc_in, line);
      while (std::getline(loc_in, line)) {
        auto cols = split_tabs(line);
        PassLocationSample s;
        s.sender = parse_int(cols[0]);
        s.receiver = parse_int(cols[1]);
        s.receiver_position = *position_from_string(cols[2]);
        s.sender_location = {parse_double(cols[3]), parse_double(cols[4])};
        s.receiver_location = {parse_double(cols[5]), parse_double(cols[6])};
        out.push_back(s);
      }
      return out;
    }();
    std::vector<CourtLocation> sender_locations;
    for (const auto& s : locations)
      if (s.sender == 0) sender_locations.push_back(s.sender_location);
    REQUIRE(!sender_locations.empty());
    TileGrid grid = tile_counts(sender_locations);
    const double lambda =
        gcv_select(grid, default_lambda_grid(), {.max_knots = 120});
    CHECK(table.lambda == doctest::Approx(lambda));
  }
}
