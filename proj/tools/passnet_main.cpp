// passnet: simulate, ingest, fit, evaluate and export the latent-factor
// passing model from the command line. Exit codes: 0 success, 2 usage
// error, 1 runtime failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "passnet/data.hpp"
#include "passnet/ingest.hpp"
#include "passnet/io.hpp"
#include "passnet/likelihood.hpp"
#include "passnet/sampler.hpp"
#include "passnet/spatial.hpp"
#include "passnet/synthetic.hpp"
#include "passnet/tabular.hpp"

namespace fs = std::filesystem;
using namespace passnet;

namespace {

class Stopwatch {
 public:
  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_pass_locations(const fs::path& file,
                          const std::vector<PassLocationSample>& samples) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << "sender\treceiver\treceiver_pos\tsender_x\tsender_y\treceiver_x\t"
         "receiver_y\n";
  for (const auto& s : samples) {
    out << s.sender << '\t' << s.receiver << '\t' << to_string(s.receiver_position)
        << '\t' << format_double(s.sender_location.x) << '\t'
        << format_double(s.sender_location.y) << '\t'
        << format_double(s.receiver_location.x) << '\t'
        << format_double(s.receiver_location.y) << '\n';
  }
}

std::vector<PassLocationSample> read_pass_locations(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line) ||
      strip_cr(line) !=
          std::string_view("sender\treceiver\treceiver_pos\tsender_x\tsender_y\t"
                           "receiver_x\treceiver_y"))
    throw std::runtime_error("bad pass locations header in " + file.string());
  std::vector<PassLocationSample> samples;
  while (std::getline(in, line)) {
    auto sv = strip_cr(line);
    if (sv.empty()) continue;
    auto cols = split_tabs(sv);
    if (cols.size() != 7)
      throw std::runtime_error("bad pass locations row in " + file.string());
    PassLocationSample s;
    s.sender = parse_int(cols[0]);
    s.receiver = parse_int(cols[1]);
    auto pos = position_from_string(cols[2]);
    if (!pos) throw std::runtime_error("bad position in " + file.string());
    s.receiver_position = *pos;
    s.sender_location = {parse_double(cols[3]), parse_double(cols[4])};
    s.receiver_location = {parse_double(cols[5]), parse_double(cols[6])};
    samples.push_back(s);
  }
  return samples;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int games = 2;
  int players = 8;
  int obs = 10000;
  int latent_dim = 2;
  std::uint64_t seed = 0;
  double dt = 0.2;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  Stopwatch watch;
  SyntheticSpec spec;
  spec.n_games = args.games;
  spec.n_players = args.players;
  spec.target_observations = args.obs;
  spec.latent_dim = args.latent_dim;
  spec.seed = args.seed;
  spec.interval_length = args.dt;

  SyntheticData data = generate(spec);

  Dataset dataset;
  dataset.events = std::move(data.events);
  dataset.covariates = std::move(data.covariates);
  dataset.truth = std::move(data.truth);
  dataset.meta["n_games"] = std::to_string(args.games);
  dataset.meta["n_players"] = std::to_string(args.players);
  dataset.meta["latent_dim"] = std::to_string(args.latent_dim);
  dataset.meta["interval_length"] = format_double(args.dt);
  dataset.meta["seed"] = std::to_string(args.seed);
  dataset.meta["total_intervals"] = std::to_string(data.total_intervals);
  dataset.meta["total_dyad_cells"] = std::to_string(data.total_cells);
  dataset.meta["n_events"] = std::to_string(dataset.events.size());
  for (std::size_t g = 0; g < data.intervals_per_game.size(); ++g)
    dataset.meta["intervals_per_game/" + std::to_string(g)] =
        std::to_string(data.intervals_per_game[g]);

  OutputStager stager{fs::path(args.out)};
  write_dataset(stager.dir(), dataset);

  std::ostringstream cfg;
  cfg << "simulate|games=" << args.games << "|players=" << args.players
      << "|obs=" << args.obs << "|R=" << args.latent_dim << "|seed=" << args.seed
      << "|dt=" << format_double(args.dt);
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = fnv1a64(cfg.str());
  manifest.seed = args.seed;
  manifest.artifacts = {"events.tsv", "covariates.tsv", "truth.tsv", "meta.tsv"};
  manifest.wall_ms = watch.elapsed_ms();
  write_manifest(stager.dir() / "manifest.tsv", manifest);
  stager.commit();

  log_message(LogLevel::info,
              "simulate: " + std::to_string(data.total_intervals) + " intervals, " +
                  std::to_string(dataset.events.size()) + " events -> " + args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data_dir;
  std::string model = "latent";
  int latent_dim = 2;
  int iterations = 5000;
  int burn_in = 1000;
  int thin = 4;
  std::uint64_t seed = 0;
  double split_fraction = 0.9;
  int chains = 1;
  std::string out;
};

int cmd_fit(const FitArgs& args) {
  Stopwatch watch;
  Dataset dataset = read_dataset(args.data_dir);
  SplitData split =
      split_train_test(dataset.events, dataset.covariates, args.split_fraction);
  ModelData data(split.train_events, split.train_covariates);

  ChainConfig config;
  config.iterations = args.iterations;
  config.burn_in = args.burn_in;
  config.thin = args.thin;
  config.latent_dim = args.latent_dim;
  config.model = args.model == "latent" ? ModelKind::latent : ModelKind::covariates;

  const Truth* truth = dataset.truth ? &*dataset.truth : nullptr;

  std::vector<FitResult> results(args.chains);
  std::vector<std::exception_ptr> errors(args.chains);
  {
    std::vector<std::thread> workers;
    for (int c = 0; c < args.chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          ChainConfig chain_config = config;
          chain_config.seed = args.seed + static_cast<std::uint64_t>(c);
          results[c] = run_chain(chain_config, data, truth);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  OutputStager stager{fs::path(args.out)};
  std::vector<std::string> artifacts;
  for (int c = 0; c < args.chains; ++c) {
    const std::string suffix = args.chains == 1 ? "" : "_" + std::to_string(c);
    write_samples(stager.dir() / ("samples" + suffix + ".tsv"), results[c].samples);
    write_summary(stager.dir() / ("summary" + suffix + ".tsv"), results[c].summary);
    artifacts.push_back("samples" + suffix + ".tsv");
    artifacts.push_back("summary" + suffix + ".tsv");
    if (results[c].summary.trace) {
      write_trace(stager.dir() / ("trace" + suffix + ".tsv"),
                  *results[c].summary.trace);
      artifacts.push_back("trace" + suffix + ".tsv");
    }
  }

  std::ostringstream cfg;
  cfg << "fit|model=" << args.model << "|R=" << args.latent_dim
      << "|iters=" << args.iterations << "|burnin=" << args.burn_in
      << "|thin=" << args.thin << "|seed=" << args.seed
      << "|split=" << format_double(args.split_fraction)
      << "|chains=" << args.chains;
  RunManifest manifest;
  manifest.command = "fit";
  manifest.config_hash = fnv1a64(cfg.str());
  manifest.seed = args.seed;
  manifest.input_digests.emplace_back(
      "events.tsv", fnv1a64_file(fs::path(args.data_dir) / "events.tsv"));
  manifest.input_digests.emplace_back(
      "covariates.tsv", fnv1a64_file(fs::path(args.data_dir) / "covariates.tsv"));
  manifest.artifacts = std::move(artifacts);
  manifest.wall_ms = watch.elapsed_ms();
  write_manifest(stager.dir() / "manifest.tsv", manifest);
  stager.commit();

  log_message(LogLevel::info, "fit: " + std::to_string(args.chains) +
                                  " chain(s) -> " + args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string data_dir;
  std::string samples_file;
  std::string split = "test";
  double split_fraction = 0.9;
  std::string out;
};

std::string render_report(const LoglikEvaluation& eval, const std::string& split,
                          const ModelData& data) {
  char formatted[80];
  std::snprintf(formatted, sizeof formatted, "%.2f ± %.2f", eval.mean, eval.sd);
  std::ostringstream os;
  os << "split\t" << split << '\n'
     << "n_cells\t" << data.n_cells() << '\n'
     << "n_events\t" << data.n_events() << '\n'
     << "loglik_at_posterior_mean\t" << format_double(eval.at_posterior_mean)
     << '\n'
     << "loglik_mean\t" << format_double(eval.mean) << '\n'
     << "loglik_sd\t" << format_double(eval.sd) << '\n'
     << "loglik\t" << formatted << '\n';
  return os.str();
}

int cmd_evaluate(const EvaluateArgs& args) {
  Dataset dataset = read_dataset(args.data_dir);
  SplitData split =
      split_train_test(dataset.events, dataset.covariates, args.split_fraction);
  const bool use_test = args.split == "test";
  const auto& events = use_test ? split.test_events : split.train_events;
  const auto& covariates = use_test ? split.test_covariates : split.train_covariates;
  if (covariates.empty())
    throw std::runtime_error("empty " + args.split + " split: nothing to evaluate");
  ModelData data(events, covariates);

  SampleTable samples = read_samples(args.samples_file);
  LoglikEvaluation eval = evaluate_loglik(samples, data);
  const std::string text = render_report(eval, args.split, data);
  std::cout << text;
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + args.out);
    out << text;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// export-factors

struct ExportFactorsArgs {
  std::string samples_file;
  GameId game = 0;
  std::string out;
};

int cmd_export_factors(const ExportFactorsArgs& args) {
  SampleTable samples = read_samples(args.samples_file);
  PosteriorSummary summary = summarize(samples);
  auto it = summary.posterior_mean_factors.find(args.game);
  if (it == summary.posterior_mean_factors.end())
    throw std::runtime_error("no latent factors for game " +
                             std::to_string(args.game) + " in samples");
  const LatentFactorSet& factors = it->second;

  // Player ids in factor row order (sorted, as summarize builds them).
  std::vector<PlayerId> players;
  for (const auto& path : samples.parameter_paths) {
    if (path.rfind("U/" + std::to_string(args.game) + "/", 0) != 0) continue;
    const auto rest = path.substr(2 + std::to_string(args.game).size() + 1);
    players.push_back(parse_int(rest.substr(0, rest.find('/'))));
  }
  std::sort(players.begin(), players.end());
  players.erase(std::unique(players.begin(), players.end()), players.end());

  std::ostringstream os;
  os << "player\trole";
  for (int r = 1; r <= factors.latent_dim(); ++r) os << "\tdim" << r;
  os << '\n';
  for (std::size_t p = 0; p < players.size(); ++p) {
    os << players[p] << "\tsender";
    for (int r = 0; r < factors.latent_dim(); ++r)
      os << '\t' << format_double(factors.U(static_cast<Eigen::Index>(p), r));
    os << '\n';
  }
  for (std::size_t p = 0; p < players.size(); ++p) {
    os << players[p] << "\treceiver";
    for (int r = 0; r < factors.latent_dim(); ++r)
      os << '\t' << format_double(factors.V(static_cast<Eigen::Index>(p), r));
    os << '\n';
  }

  std::cout << os.str();
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + args.out);
    out << os.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// spatial

struct SpatialArgs {
  std::string data_dir;
  PlayerId player = 0;
  std::string out;
  std::size_t max_knots = 400;
};

int cmd_spatial(const SpatialArgs& args) {
  Stopwatch watch;
  const fs::path locations_file = fs::path(args.data_dir) / "pass_locations.tsv";
  auto samples = read_pass_locations(locations_file);

  TpsOptions options;
  options.max_knots = args.max_knots;
  PlayerFieldSet fields = build_player_fields(samples, args.player, options);

  OutputStager stager{fs::path(args.out)};
  std::vector<std::string> artifacts;
  auto write_field = [&](const SpatialField& field, const std::string& kind,
                         std::optional<PositionClass> pos) {
    std::string name = "field_" + std::to_string(args.player) + "_" + kind;
    if (pos) name += std::string("_") + std::string(to_string(*pos));
    name += ".tsv";
    std::ofstream out(stager.dir() / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + name);
    out << serialize_field_table(to_field_table(field, args.player, kind, pos));
    artifacts.push_back(name);
  };
  write_field(fields.sender_field, "sender", std::nullopt);
  for (const auto& [pos, field] : fields.receiver_fields)
    write_field(field, "receiver", pos);

  RunManifest manifest;
  manifest.command = "spatial";
  manifest.config_hash = fnv1a64("spatial|player=" + std::to_string(args.player) +
                                 "|max_knots=" + std::to_string(args.max_knots));
  manifest.input_digests.emplace_back("pass_locations.tsv",
                                      fnv1a64_file(locations_file));
  manifest.artifacts = std::move(artifacts);
  manifest.wall_ms = watch.elapsed_ms();
  write_manifest(stager.dir() / "manifest.tsv", manifest);
  stager.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string tracking;
  std::string playbyplay;
  std::string boxscore;
  double dt = 0.2;
  std::string out;
};

int cmd_ingest(const IngestArgs& args) {
  Stopwatch watch;
  IngestDiagnostics diag;

  std::ifstream tracking_in(args.tracking, std::ios::binary);
  if (!tracking_in) throw std::runtime_error("cannot open " + args.tracking);
  std::ifstream pbp_in(args.playbyplay, std::ios::binary);
  if (!pbp_in) throw std::runtime_error("cannot open " + args.playbyplay);
  std::ifstream box_in(args.boxscore, std::ios::binary);
  if (!box_in) throw std::runtime_error("cannot open " + args.boxscore);

  auto frames = parse_tracking(tracking_in, diag);
  auto annotations = parse_playbyplay(pbp_in, diag);
  auto boxscore = parse_boxscore(box_in, diag);

  // Group by game and run the per-game pipeline.
  std::map<GameId, std::vector<TrackingFrame>> frames_by_game;
  for (auto& f : frames) frames_by_game[f.game].push_back(std::move(f));
  std::map<GameId, std::vector<PlayAnnotation>> annotations_by_game;
  for (const auto& a : annotations) annotations_by_game[a.game].push_back(a);
  std::map<GameId, std::vector<BoxScoreRow>> box_by_game;
  for (const auto& b : boxscore) box_by_game[b.game].push_back(b);

  ExtractOptions options;
  options.interval_length = args.dt;

  std::vector<MergedGame> merged_games;
  std::vector<std::vector<Possession>> possession_lists;
  std::vector<PassLocationSample> all_locations;
  for (auto& [game, game_frames] : frames_by_game) {
    MergedGame merged = merge_streams(std::move(game_frames),
                                      annotations_by_game[game],
                                      box_by_game[game], diag);
    auto possessions = segment_possessions(merged);
    auto locations = collect_pass_locations(merged, possessions, options, diag);
    all_locations.insert(all_locations.end(), locations.begin(), locations.end());
    merged_games.push_back(std::move(merged));
    possession_lists.push_back(std::move(possessions));
  }

  // Spatial effect fields for every player with at least one pass; the
  // store falls back to the uniform field for the rest.
  FieldStore fields;
  {
    std::map<PlayerId, int> pass_counts;
    for (const auto& s : all_locations) ++pass_counts[s.sender];
    for (const auto& [player, count] : pass_counts)
      fields.put(player, build_player_fields(all_locations, player));
  }

  Dataset dataset;
  std::size_t n_possessions = 0;
  std::size_t n_excluded = 0;
  std::ostringstream possession_rows;
  for (std::size_t g = 0; g < merged_games.size(); ++g) {
    ExtractedGame extracted = extract_game(merged_games[g], possession_lists[g],
                                           fields, options, diag);
    dataset.events.insert(dataset.events.end(), extracted.events.begin(),
                          extracted.events.end());
    dataset.covariates.insert(dataset.covariates.end(),
                              extracted.covariates.begin(),
                              extracted.covariates.end());
    for (const auto& p : possession_lists[g]) {
      ++n_possessions;
      if (p.excluded) ++n_excluded;
      possession_rows << p.game << '\t' << format_double(p.start_time) << '\t'
                      << format_double(p.end_time) << '\t' << to_string(p.offense)
                      << '\t'
                      << (p.outcome == PossessionOutcome::made       ? "made"
                          : p.outcome == PossessionOutcome::missed   ? "missed"
                          : p.outcome == PossessionOutcome::turnover ? "turnover"
                                                                     : "reset")
                      << '\t' << (p.excluded ? 1 : 0) << '\t'
                      << (p.incomplete ? 1 : 0) << '\n';
    }
  }

  dataset.meta["n_games"] = std::to_string(merged_games.size());
  dataset.meta["n_possessions"] = std::to_string(n_possessions);
  dataset.meta["n_excluded_possessions"] = std::to_string(n_excluded);
  dataset.meta["interval_length"] = format_double(args.dt);
  dataset.meta["malformed_rows"] = std::to_string(diag.malformed_rows);
  dataset.meta["unknown_event_kinds"] = std::to_string(diag.unknown_event_kinds);
  dataset.meta["unmatched_annotations"] = std::to_string(diag.unmatched_annotations);
  dataset.meta["skipped_intervals"] = std::to_string(diag.skipped_intervals);
  dataset.meta["dropped_passes"] = std::to_string(diag.dropped_passes);
  dataset.meta["duplicate_pass_intervals"] =
      std::to_string(diag.duplicate_pass_intervals);
  dataset.meta["carrier_mismatches"] = std::to_string(diag.carrier_mismatches);

  OutputStager stager{fs::path(args.out)};
  write_dataset(stager.dir(), dataset);
  write_pass_locations(stager.dir() / "pass_locations.tsv", all_locations);
  {
    std::ofstream out(stager.dir() / "possessions.tsv", std::ios::binary);
    out << "game\tstart\tend\toffense\toutcome\texcluded\tincomplete\n"
        << possession_rows.str();
  }

  RunManifest manifest;
  manifest.command = "ingest";
  manifest.config_hash = fnv1a64("ingest|dt=" + format_double(args.dt));
  manifest.input_digests.emplace_back("tracking", fnv1a64_file(args.tracking));
  manifest.input_digests.emplace_back("playbyplay", fnv1a64_file(args.playbyplay));
  manifest.input_digests.emplace_back("boxscore", fnv1a64_file(args.boxscore));
  manifest.artifacts = {"events.tsv", "covariates.tsv", "pass_locations.tsv",
                        "possessions.tsv", "meta.tsv"};
  manifest.wall_ms = watch.elapsed_ms();
  write_manifest(stager.dir() / "manifest.tsv", manifest);
  stager.commit();

  log_message(LogLevel::info,
              "ingest: " + std::to_string(dataset.covariates.size()) +
                  " covariate records, " + std::to_string(dataset.events.size()) +
                  " pass events -> " + args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-factor passing model: simulation, inference and export"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--games", sim.games)->check(CLI::PositiveNumber);
  simulate->add_option("--players", sim.players)->check(CLI::Range(5, 100000));
  simulate->add_option("--obs", sim.obs, "Total observation intervals")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--R", sim.latent_dim)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--dt", sim.dt)->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out)->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model by MCMC");
  fit_cmd->add_option("data", fit.data_dir, "Dataset directory")->required();
  fit_cmd->add_option("--model", fit.model)
      ->check(CLI::IsMember({"latent", "covariates"}));
  fit_cmd->add_option("--R", fit.latent_dim)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--iters", fit.iterations)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--burnin", fit.burn_in)->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--thin", fit.thin)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed);
  fit_cmd->add_option("--split-fraction", fit.split_fraction)
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  fit_cmd->add_option("--chains", fit.chains)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit.out)->required();

  EvaluateArgs eval;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Log-likelihood of fitted samples on a split");
  eval_cmd->add_option("data", eval.data_dir, "Dataset directory")->required();
  eval_cmd->add_option("--samples", eval.samples_file)->required();
  eval_cmd->add_option("--split", eval.split)
      ->check(CLI::IsMember({"train", "test"}));
  eval_cmd->add_option("--split-fraction", eval.split_fraction)
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  eval_cmd->add_option("--out", eval.out);

  ExportFactorsArgs exp;
  auto* export_cmd =
      app.add_subcommand("export-factors", "Posterior-mean latent factors");
  export_cmd->add_option("--samples", exp.samples_file)->required();
  export_cmd->add_option("--game", exp.game)->required();
  export_cmd->add_option("--out", exp.out);

  SpatialArgs spatial;
  auto* spatial_cmd =
      app.add_subcommand("spatial", "Fit and export a player's spatial fields");
  spatial_cmd->add_option("data", spatial.data_dir, "Ingested game directory")
      ->required();
  spatial_cmd->add_option("--player", spatial.player)->required();
  spatial_cmd->add_option("--max-knots", spatial.max_knots);
  spatial_cmd->add_option("--out", spatial.out)->required();

  IngestArgs ingest;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Parse, merge and extract raw game files");
  ingest_cmd->add_option("--tracking", ingest.tracking)->required();
  ingest_cmd->add_option("--playbyplay", ingest.playbyplay)->required();
  ingest_cmd->add_option("--boxscore", ingest.boxscore)->required();
  ingest_cmd->add_option("--dt", ingest.dt)->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--out", ingest.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (eval_cmd->parsed()) return cmd_evaluate(eval);
    if (export_cmd->parsed()) return cmd_export_factors(exp);
    if (spatial_cmd->parsed()) return cmd_spatial(spatial);
    if (ingest_cmd->parsed()) return cmd_ingest(ingest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
