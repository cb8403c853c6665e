#include "passnet/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "passnet/tabular.hpp"

namespace passnet {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + file.string());
  return in;
}

std::vector<std::string> data_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto sv = strip_cr(line);
    if (sv.empty()) continue;
    lines.emplace_back(sv);
  }
  return lines;
}

}  // namespace

void write_events(const std::filesystem::path& file,
                  const std::vector<PassEvent>& events) {
  auto out = open_out(file);
  out << "game\tpossession\tinterval\tsender\treceiver\n";
  for (const auto& e : events) {
    out << e.game << '\t' << e.possession << '\t' << e.interval << '\t'
        << e.sender << '\t' << e.receiver << '\n';
  }
}

std::vector<PassEvent> read_events(const std::filesystem::path& file) {
  auto in = open_in(file);
  auto lines = data_lines(in);
  if (lines.empty() || lines[0] != "game\tpossession\tinterval\tsender\treceiver")
    throw std::runtime_error("bad events header in " + file.string());
  std::vector<PassEvent> events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split_tabs(lines[i]);
    if (cols.size() != 5)
      throw std::runtime_error("bad events row in " + file.string());
    PassEvent e;
    e.game = parse_int(cols[0]);
    e.possession = parse_int(cols[1]);
    e.interval = static_cast<std::uint32_t>(parse_int(cols[2]));
    e.sender = parse_int(cols[3]);
    e.receiver = parse_int(cols[4]);
    events.push_back(e);
  }
  return events;
}

void write_covariates(const std::filesystem::path& file,
                      const std::vector<CovariateRecord>& covariates) {
  auto out = open_out(file);
  out << "game\tinterval\tsender\treceiver\tw1\tw2\tw3\tw4\tw5\txi_sender\t"
         "xi_receiver\tdt\n";
  for (const auto& c : covariates) {
    out << c.game << '\t' << c.interval << '\t' << c.sender << '\t' << c.receiver;
    for (double w : c.w) out << '\t' << format_double(w);
    out << '\t' << format_double(c.xi_sender) << '\t'
        << format_double(c.xi_receiver) << '\t'
        << format_double(c.interval_length) << '\n';
  }
}

std::vector<CovariateRecord> read_covariates(const std::filesystem::path& file) {
  auto in = open_in(file);
  auto lines = data_lines(in);
  if (lines.empty() ||
      lines[0] !=
          "game\tinterval\tsender\treceiver\tw1\tw2\tw3\tw4\tw5\txi_sender\t"
          "xi_receiver\tdt")
    throw std::runtime_error("bad covariates header in " + file.string());
  std::vector<CovariateRecord> covariates;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split_tabs(lines[i]);
    if (cols.size() != 12)
      throw std::runtime_error("bad covariates row in " + file.string());
    CovariateRecord c;
    c.game = parse_int(cols[0]);
    c.interval = static_cast<std::uint32_t>(parse_int(cols[1]));
    c.sender = parse_int(cols[2]);
    c.receiver = parse_int(cols[3]);
    for (int k = 0; k < 5; ++k) c.w[k] = parse_double(cols[4 + k]);
    c.xi_sender = parse_double(cols[9]);
    c.xi_receiver = parse_double(cols[10]);
    c.interval_length = parse_double(cols[11]);
    covariates.push_back(c);
  }
  return covariates;
}

void write_truth(const std::filesystem::path& file, const Truth& truth) {
  auto out = open_out(file);
  out << "parameter_path\tvalue\n";
  for (const auto& [dyad, beta] : truth.beta)
    for (int k = 0; k < kCovariateDim; ++k)
      out << "beta/" << dyad.first << '/' << dyad.second << '/' << (k + 1) << '\t'
          << format_double(beta[k]) << '\n';
  for (const auto& [game, uv] : truth.factors) {
    const auto& [u, v] = uv;
    for (Eigen::Index p = 0; p < u.rows(); ++p)
      for (Eigen::Index r = 0; r < u.cols(); ++r)
        out << "U/" << game << '/' << truth.players[p] << '/' << (r + 1) << '\t'
            << format_double(u(p, r)) << '\n';
    for (Eigen::Index p = 0; p < v.rows(); ++p)
      for (Eigen::Index r = 0; r < v.cols(); ++r)
        out << "V/" << game << '/' << truth.players[p] << '/' << (r + 1) << '\t'
            << format_double(v(p, r)) << '\n';
  }
}

namespace {

std::vector<std::string_view> split_slashes(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = path.find('/', start);
    if (slash == std::string_view::npos) {
      parts.push_back(path.substr(start));
      break;
    }
    parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

}  // namespace

Truth read_truth(const std::filesystem::path& file) {
  auto in = open_in(file);
  auto lines = data_lines(in);
  if (lines.empty() || lines[0] != "parameter_path\tvalue")
    throw std::runtime_error("bad truth header in " + file.string());

  Truth truth;
  struct FactorEntry {
    GameId game;
    PlayerId player;
    int r;
    double value;
    bool receiver_side;
  };
  std::vector<FactorEntry> entries;
  int latent_dim = 0;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split_tabs(lines[i]);
    if (cols.size() != 2)
      throw std::runtime_error("bad truth row in " + file.string());
    auto parts = split_slashes(cols[0]);
    const double value = parse_double(cols[1]);
    if (parts.size() != 4)
      throw std::runtime_error("bad parameter path: " + std::string(cols[0]));
    if (parts[0] == "beta") {
      const DyadKey key{parse_int(parts[1]), parse_int(parts[2])};
      const auto k = static_cast<int>(parse_int(parts[3]));
      auto [it, inserted] = truth.beta.try_emplace(key, Vector7::Zero());
      it->second[k - 1] = value;
    } else if (parts[0] == "U" || parts[0] == "V") {
      FactorEntry e;
      e.game = parse_int(parts[1]);
      e.player = parse_int(parts[2]);
      e.r = static_cast<int>(parse_int(parts[3]));
      e.value = value;
      e.receiver_side = parts[0] == "V";
      latent_dim = std::max(latent_dim, e.r);
      entries.push_back(e);
    } else {
      throw std::runtime_error("bad parameter path: " + std::string(cols[0]));
    }
  }

  for (const auto& e : entries) truth.players.push_back(e.player);
  for (const auto& [dyad, beta] : truth.beta) {
    truth.players.push_back(dyad.first);
    truth.players.push_back(dyad.second);
  }
  std::sort(truth.players.begin(), truth.players.end());
  truth.players.erase(std::unique(truth.players.begin(), truth.players.end()),
                      truth.players.end());

  const auto n = static_cast<Eigen::Index>(truth.players.size());
  for (const auto& e : entries) {
    auto [it, inserted] = truth.factors.try_emplace(
        e.game, std::make_pair(Eigen::MatrixXd::Zero(n, latent_dim),
                               Eigen::MatrixXd::Zero(n, latent_dim)));
    auto row = std::lower_bound(truth.players.begin(), truth.players.end(),
                                e.player) -
               truth.players.begin();
    auto& m = e.receiver_side ? it->second.second : it->second.first;
    m(row, e.r - 1) = e.value;
  }
  return truth;
}

void write_meta(const std::filesystem::path& file,
                const std::map<std::string, std::string>& meta) {
  auto out = open_out(file);
  out << "key\tvalue\n";
  for (const auto& [k, v] : meta) out << k << '\t' << v << '\n';
}

std::map<std::string, std::string> read_meta(const std::filesystem::path& file) {
  auto in = open_in(file);
  auto lines = data_lines(in);
  if (lines.empty() || lines[0] != "key\tvalue")
    throw std::runtime_error("bad meta header in " + file.string());
  std::map<std::string, std::string> meta;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split_tabs(lines[i]);
    if (cols.size() != 2) throw std::runtime_error("bad meta row in " + file.string());
    meta[std::string(cols[0])] = std::string(cols[1]);
  }
  return meta;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  write_events(dir / "events.tsv", dataset.events);
  write_covariates(dir / "covariates.tsv", dataset.covariates);
  if (dataset.truth) write_truth(dir / "truth.tsv", *dataset.truth);
  if (!dataset.meta.empty()) write_meta(dir / "meta.tsv", dataset.meta);
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset dataset;
  dataset.events = read_events(dir / "events.tsv");
  dataset.covariates = read_covariates(dir / "covariates.tsv");
  if (std::filesystem::exists(dir / "truth.tsv"))
    dataset.truth = read_truth(dir / "truth.tsv");
  if (std::filesystem::exists(dir / "meta.tsv"))
    dataset.meta = read_meta(dir / "meta.tsv");
  return dataset;
}

void write_samples(const std::filesystem::path& file, const SampleTable& samples) {
  auto out = open_out(file);
  out << "iteration\tparameter_path\tvalue\n";
  for (Eigen::Index i = 0; i < samples.values.rows(); ++i)
    for (Eigen::Index j = 0; j < samples.values.cols(); ++j)
      out << samples.iterations[i] << '\t' << samples.parameter_paths[j] << '\t'
          << format_double(samples.values(i, j)) << '\n';
}

SampleTable read_samples(const std::filesystem::path& file) {
  auto in = open_in(file);
  auto lines = data_lines(in);
  if (lines.empty() || lines[0] != "iteration\tparameter_path\tvalue")
    throw std::runtime_error("bad samples header in " + file.string());

  SampleTable table;
  std::map<std::string, Eigen::Index> column_of;
  std::vector<std::tuple<int, Eigen::Index, double>> rows;
  std::vector<int> iterations;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split_tabs(lines[i]);
    if (cols.size() != 3)
      throw std::runtime_error("bad samples row in " + file.string());
    const int iter = static_cast<int>(parse_int(cols[0]));
    const std::string path(cols[1]);
    auto [it, inserted] =
        column_of.try_emplace(path, static_cast<Eigen::Index>(table.parameter_paths.size()));
    if (inserted) table.parameter_paths.push_back(path);
    if (iterations.empty() || iterations.back() != iter) iterations.push_back(iter);
    rows.emplace_back(iter, it->second, parse_double(cols[2]));
  }
  table.iterations = iterations;
  std::map<int, Eigen::Index> row_of;
  for (std::size_t i = 0; i < iterations.size(); ++i)
    row_of[iterations[i]] = static_cast<Eigen::Index>(i);
  table.values.setZero(static_cast<Eigen::Index>(iterations.size()),
                       static_cast<Eigen::Index>(table.parameter_paths.size()));
  for (const auto& [iter, col, value] : rows)
    table.values(row_of.at(iter), col) = value;
  return table;
}

void write_summary(const std::filesystem::path& file,
                   const PosteriorSummary& summary) {
  auto out = open_out(file);
  out << "key\tvalue\n";
  out << "mh_acceptance_rate\t" << format_double(summary.acceptance_rate) << '\n';
  out << "mh_accept_count\t" << summary.mh_accept_count << '\n';
  out << "mh_proposal_count\t" << summary.mh_proposal_count << '\n';
  for (const auto& [path, p] : summary.parameters) {
    out << path << "/mean\t" << format_double(p.mean) << '\n';
    out << path << "/sd\t" << format_double(p.sd) << '\n';
    out << path << "/q025\t" << format_double(p.lower95) << '\n';
    out << path << "/q975\t" << format_double(p.upper95) << '\n';
  }
}

void write_trace(const std::filesystem::path& file, const RecoveryTrace& trace) {
  auto out = open_out(file);
  out << "iteration\tu_sqerr\tv_sqerr\tuvt_mse\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i)
    out << trace.iterations[i] << '\t' << format_double(trace.u_sqerr[i]) << '\t'
        << format_double(trace.v_sqerr[i]) << '\t'
        << format_double(trace.uvt_mse[i]) << '\n';
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& file) {
  auto in = open_in(file);
  std::ostringstream os;
  os << in.rdbuf();
  return fnv1a64(os.str());
}

void write_manifest(const std::filesystem::path& file, const RunManifest& manifest) {
  auto out = open_out(file);
  out << "key\tvalue\n";
  out << "command\t" << manifest.command << '\n';
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(manifest.config_hash));
  out << "config_hash\t" << hex << '\n';
  out << "seed\t" << manifest.seed << '\n';
  for (const auto& [name, digest] : manifest.input_digests) {
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(digest));
    out << "input/" << name << '\t' << hex << '\n';
  }
  for (const auto& artifact : manifest.artifacts)
    out << "artifact/" << artifact << '\t' << artifact << '\n';
  out << "wall_ms\t" << manifest.wall_ms << '\n';
}

RunManifest read_manifest(const std::filesystem::path& file) {
  auto in = open_in(file);
  auto lines = data_lines(in);
  if (lines.empty() || lines[0] != "key\tvalue")
    throw std::runtime_error("bad manifest header in " + file.string());
  RunManifest manifest;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split_tabs(lines[i]);
    if (cols.size() != 2)
      throw std::runtime_error("bad manifest row in " + file.string());
    const std::string key(cols[0]);
    const std::string value(cols[1]);
    if (key == "command") {
      manifest.command = value;
    } else if (key == "config_hash") {
      manifest.config_hash = std::stoull(value, nullptr, 16);
    } else if (key == "seed") {
      manifest.seed = std::stoull(value);
    } else if (key == "wall_ms") {
      manifest.wall_ms = std::stoll(value);
    } else if (key.rfind("input/", 0) == 0) {
      manifest.input_digests.emplace_back(key.substr(6),
                                          std::stoull(value, nullptr, 16));
    } else if (key.rfind("artifact/", 0) == 0) {
      manifest.artifacts.push_back(value);
    }
  }
  return manifest;
}

OutputStager::OutputStager(std::filesystem::path final_dir)
    : final_(std::move(final_dir)) {
  if (std::filesystem::exists(final_))
    throw std::runtime_error("output directory already exists: " + final_.string());
  temp_ = final_;
  temp_ += ".staging";
  std::filesystem::remove_all(temp_);
  std::filesystem::create_directories(temp_);
}

OutputStager::~OutputStager() {
  if (!committed_) {
    std::error_code ec;
    std::filesystem::remove_all(temp_, ec);
  }
}

void OutputStager::commit() {
  if (std::filesystem::exists(final_))
    throw std::runtime_error("output directory already exists: " + final_.string());
  std::filesystem::rename(temp_, final_);
  committed_ = true;
}

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PASSNET_LOG");
    if (!env) return LogLevel::warn;
    const std::string_view v(env);
    if (v == "quiet" || v == "0") return LogLevel::quiet;
    if (v == "warn" || v == "1") return LogLevel::warn;
    if (v == "info" || v == "2") return LogLevel::info;
    if (v == "debug" || v == "3") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

void log_message(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) <= static_cast<int>(log_level()) &&
      log_level() != LogLevel::quiet) {
    std::cerr << "[passnet] " << message << '\n';
  }
}

}  // namespace passnet
