#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "passnet/sampler.hpp"
#include "passnet/spatial.hpp"
#include "passnet/types.hpp"

namespace passnet {

// On-disk dataset directory layout:
//   events.tsv      game possession interval sender receiver
//   covariates.tsv  game interval sender receiver w1..w5 xi_sender
//                   xi_receiver dt
//   truth.tsv       parameter_path value            (optional)
//   meta.tsv        key value                       (optional)
struct Dataset {
  std::vector<PassEvent> events;
  std::vector<CovariateRecord> covariates;
  std::optional<Truth> truth;
  std::map<std::string, std::string> meta;
};

void write_events(const std::filesystem::path& file,
                  const std::vector<PassEvent>& events);
std::vector<PassEvent> read_events(const std::filesystem::path& file);

void write_covariates(const std::filesystem::path& file,
                      const std::vector<CovariateRecord>& covariates);
std::vector<CovariateRecord> read_covariates(const std::filesystem::path& file);

void write_truth(const std::filesystem::path& file, const Truth& truth);
Truth read_truth(const std::filesystem::path& file);

void write_meta(const std::filesystem::path& file,
                const std::map<std::string, std::string>& meta);
std::map<std::string, std::string> read_meta(const std::filesystem::path& file);

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

// Retained samples, columnar: iteration / parameter_path / value.
void write_samples(const std::filesystem::path& file, const SampleTable& samples);
SampleTable read_samples(const std::filesystem::path& file);

// Flat key-value summary plus, when a recovery trace is present, a separate
// traces file (iteration u_sqerr v_sqerr uvt_mse).
void write_summary(const std::filesystem::path& file,
                   const PosteriorSummary& summary);
void write_trace(const std::filesystem::path& file, const RecoveryTrace& trace);

// 64-bit FNV-1a, used for config hashes and input digests in manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& file);

// Every output directory carries exactly one manifest.tsv recording the
// command, a hash of its configuration, input digests, seed, the artifacts
// written, and wall time. Everything except wall_ms is deterministic.
struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> input_digests;
  std::vector<std::string> artifacts;
  std::int64_t wall_ms = 0;
};

void write_manifest(const std::filesystem::path& file, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& file);

// Stages an output directory: contents are written to a temporary sibling
// and renamed into place on commit, so failures leave no partial outputs.
// Refuses to commit over an existing directory.
class OutputStager {
 public:
  explicit OutputStager(std::filesystem::path final_dir);
  ~OutputStager();

  OutputStager(const OutputStager&) = delete;
  OutputStager& operator=(const OutputStager&) = delete;

  const std::filesystem::path& dir() const { return temp_; }
  void commit();

 private:
  std::filesystem::path final_;
  std::filesystem::path temp_;
  bool committed_ = false;
};

// Stderr logger, level from the PASSNET_LOG environment variable
// (quiet|warn|info|debug, default warn).
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };
LogLevel log_level();
void log_message(LogLevel level, std::string_view message);

}  // namespace passnet
