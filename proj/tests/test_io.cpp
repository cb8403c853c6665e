#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "passnet/io.hpp"
#include "passnet/sampler.hpp"
#include "passnet/synthetic.hpp"
#include "support.hpp"

using namespace passnet;
using passnet::test::TempDir;

TEST_CASE("dataset round-trip is value and byte stable") {
  TempDir dir("dataset");
  SyntheticSpec spec;
  spec.target_observations = 200;
  spec.seed = 11;
  SyntheticData synthetic = generate(spec);

  Dataset dataset;
  dataset.events = synthetic.events;
  dataset.covariates = synthetic.covariates;
  dataset.truth = synthetic.truth;
  dataset.meta["n_games"] = "2";
  write_dataset(dir.path(), dataset);

  Dataset loaded = read_dataset(dir.path());
  REQUIRE(loaded.events.size() == dataset.events.size());
  REQUIRE(loaded.covariates.size() == dataset.covariates.size());
  for (std::size_t i = 0; i < dataset.covariates.size(); ++i)
    CHECK(loaded.covariates[i].x() == dataset.covariates[i].x());
  REQUIRE(loaded.truth.has_value());
  CHECK(loaded.truth->beta.size() == synthetic.truth.beta.size());
  for (const auto& [dyad, beta] : synthetic.truth.beta)
    CHECK(loaded.truth->beta.at(dyad) == beta);
  for (const auto& [game, uv] : synthetic.truth.factors) {
    CHECK(loaded.truth->factors.at(game).first == uv.first);
    CHECK(loaded.truth->factors.at(game).second == uv.second);
  }

  // Re-serialization reproduces the files byte for byte.
  TempDir dir2("dataset2");
  write_dataset(dir2.path(), loaded);
  for (const char* name : {"events.tsv", "covariates.tsv", "truth.tsv"})
    CHECK(passnet::test::read_file(dir.path() / name) ==
          passnet::test::read_file(dir2.path() / name));
}

TEST_CASE("samples round-trip preserves paths, iterations and values") {
  TempDir dir("samples");
  Rng data_rng(6);
  auto records = passnet::test::random_game_records(0, 15, 6, data_rng);
  ModelData data({}, records);
  ChainConfig config;
  config.iterations = 12;
  config.burn_in = 2;
  config.thin = 2;
  config.seed = 9;
  FitResult result = run_chain(config, data);

  const auto file = dir.path() / "samples.tsv";
  write_samples(file, result.samples);
  SampleTable loaded = read_samples(file);
  CHECK(loaded.parameter_paths == result.samples.parameter_paths);
  CHECK(loaded.iterations == result.samples.iterations);
  REQUIRE(loaded.values.rows() == result.samples.values.rows());
  CHECK((loaded.values.array() == result.samples.values.array()).all());
}

TEST_CASE("manifest round-trip") {
  TempDir dir("manifest");
  RunManifest manifest;
  manifest.command = "fit";
  manifest.config_hash = 0xdeadbeefcafef00dULL;
  manifest.seed = 42;
  manifest.input_digests = {{"events.tsv", 0x1234}, {"covariates.tsv", 0x5678}};
  manifest.artifacts = {"samples.tsv", "summary.tsv"};
  manifest.wall_ms = 1234;
  const auto file = dir.path() / "manifest.tsv";
  write_manifest(file, manifest);
  RunManifest loaded = read_manifest(file);
  CHECK(loaded.command == manifest.command);
  CHECK(loaded.config_hash == manifest.config_hash);
  CHECK(loaded.seed == manifest.seed);
  CHECK(loaded.input_digests == manifest.input_digests);
  CHECK(loaded.artifacts == manifest.artifacts);
  CHECK(loaded.wall_ms == manifest.wall_ms);
}

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("output stager commits atomically and refuses existing targets") {
  TempDir dir("stager");
  const auto target = dir.path() / "out";
  {
    OutputStager stager(target);
    passnet::test::write_file(stager.dir() / "artifact.tsv", "key\tvalue\n");
    CHECK(!std::filesystem::exists(target));
    stager.commit();
  }
  CHECK(std::filesystem::exists(target / "artifact.tsv"));

  SUBCASE("second commit to the same directory refuses") {
    CHECK_THROWS_AS(OutputStager{target}, std::runtime_error);
  }
  SUBCASE("abandoned staging directories are cleaned up") {
    const auto target2 = dir.path() / "out2";
    {
      OutputStager stager(target2);
      passnet::test::write_file(stager.dir() / "partial.tsv", "x");
      // no commit: simulated failure
    }
    CHECK(!std::filesystem::exists(target2));
    bool staging_left = false;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path()))
      if (entry.path().string().find("staging") != std::string::npos)
        staging_left = true;
    CHECK(!staging_left);
  }
}

TEST_CASE("summary and trace files are written as flat tables") {
  TempDir dir("summary");
  Rng data_rng(61);
  auto records = passnet::test::random_game_records(0, 15, 6, data_rng);
  SyntheticSpec spec;
  spec.n_games = 1;
  spec.n_players = 6;
  spec.target_observations = 50;
  spec.seed = 3;
  SyntheticData synthetic = generate(spec);
  ModelData data(synthetic.events, synthetic.covariates);
  ChainConfig config;
  config.iterations = 10;
  config.burn_in = 2;
  config.thin = 1;
  FitResult result = run_chain(config, data, &synthetic.truth);

  write_summary(dir.path() / "summary.tsv", result.summary);
  REQUIRE(result.summary.trace.has_value());
  write_trace(dir.path() / "trace.tsv", *result.summary.trace);

  const std::string summary = passnet::test::read_file(dir.path() / "summary.tsv");
  CHECK(summary.rfind("key\tvalue\n", 0) == 0);
  CHECK(summary.find("mh_acceptance_rate\t") != std::string::npos);
  CHECK(summary.find("/mean\t") != std::string::npos);
  CHECK(summary.find("/q975\t") != std::string::npos);
  const std::string trace = passnet::test::read_file(dir.path() / "trace.tsv");
  CHECK(trace.rfind("iteration\tu_sqerr\tv_sqerr\tuvt_mse\n", 0) == 0);
}
