#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "passnet/spatial.hpp"
#include "passnet/types.hpp"

namespace passnet {

enum class Side { home, away };

std::string_view to_string(Side side);
std::optional<Side> side_from_string(std::string_view s);

struct TrackedPlayer {
  PlayerId id = 0;
  Side side = Side::home;
  std::optional<CourtLocation> location;  // absent when the source wrote NA
};

// One 25 Hz snapshot: ball and up to ten player locations.
struct TrackingFrame {
  GameId game = 0;
  double timestamp = 0.0;  // seconds
  std::optional<CourtLocation> ball;
  std::vector<TrackedPlayer> players;
};

enum class PlayKind {
  dribble,
  pass,
  shot_made,
  shot_missed,
  turnover,
  foul,
  violation_reset,
  rebound,
  other,
};

std::string_view to_string(PlayKind kind);

struct PlayAnnotation {
  GameId game = 0;
  double timestamp = 0.0;
  PlayKind kind = PlayKind::other;
  std::optional<PlayerId> player;
};

struct BoxScoreRow {
  GameId game = 0;
  PlayerId player = 0;
  PositionClass position = PositionClass::Guard;
  int points = 0;
  int assists = 0;
  int rebounds = 0;
};

// Running counters for everything skipped or coerced while building a game.
struct IngestDiagnostics {
  std::size_t malformed_rows = 0;
  std::size_t unknown_event_kinds = 0;
  std::size_t unmatched_annotations = 0;
  std::size_t skipped_intervals = 0;
  std::size_t dropped_passes = 0;
  std::size_t duplicate_pass_intervals = 0;
  std::size_t carrier_mismatches = 0;
};

// Parsers accept the line-delimited tabular schema and the markup variant
// (auto-detected from a leading '<'). Malformed rows are skipped and
// counted; an unreadable stream or unknown schema is fatal
// (std::runtime_error). Parsed frames are ordered; rows that break the
// strictly-increasing timestamp rule or carry more than ten players count
// as malformed.
std::vector<TrackingFrame> parse_tracking(std::istream& in, IngestDiagnostics& diag);
std::vector<PlayAnnotation> parse_playbyplay(std::istream& in,
                                             IngestDiagnostics& diag);
std::vector<BoxScoreRow> parse_boxscore(std::istream& in, IngestDiagnostics& diag);

// Canonical tabular form; parse(serialize(parse(f))) == parse(f).
std::string serialize_tracking(const std::vector<TrackingFrame>& frames);
std::string serialize_playbyplay(const std::vector<PlayAnnotation>& annotations);
std::string serialize_boxscore(const std::vector<BoxScoreRow>& rows);

struct BoundAnnotation {
  PlayAnnotation annotation;
  std::size_t frame_index = 0;
};

// One game after merging the three sources by time, player id and game id.
struct MergedGame {
  GameId game = 0;
  std::vector<TrackingFrame> frames;
  std::vector<BoundAnnotation> annotations;  // ordered by frame index
  std::map<PlayerId, PositionClass> positions;
};

// Binds each annotation to the nearest frame within +-0.1 s; unmatched
// annotations are dropped and counted. Throws std::runtime_error when the
// inputs disagree on the game id.
MergedGame merge_streams(std::vector<TrackingFrame> frames,
                         const std::vector<PlayAnnotation>& annotations,
                         const std::vector<BoxScoreRow>& boxscore,
                         IngestDiagnostics& diag);

enum class PossessionOutcome { made, missed, turnover, reset };

struct Possession {
  GameId game = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;  // inclusive
  Side offense = Side::home;
  PossessionOutcome outcome = PossessionOutcome::reset;
  bool excluded = false;    // ended by a foul; never reaches the model
  bool incomplete = false;  // no terminal annotation observed
};

// Splits the merged game at made shots, missed shots, turnovers and reset
// violations; a possession terminated by a foul is kept but excluded.
// Frames partition exactly: trailing frames (or a game with no boundary at
// all) form one open possession flagged incomplete.
std::vector<Possession> segment_possessions(const MergedGame& merged);

struct ExtractOptions {
  double interval_length = 0.2;         // seconds per lattice interval
  double carrier_radius = 3.0;          // ft, ball-to-carrier attribution
  int carrier_hysteresis = 5;           // frames before a carrier switch
  double reception_window = 2.0;        // s to resolve a pass receiver
};

// Ball-carrier attribution per frame: nearest player within carrier_radius
// of the ball, with hysteresis against flicker. Exposed for tests.
std::vector<std::optional<PlayerId>> carrier_track(const MergedGame& merged,
                                                   std::size_t first_frame,
                                                   std::size_t last_frame,
                                                   const ExtractOptions& options);

// Openness of the passing route from `from` to `to`: log of the smallest
// defender distance to the segment, floored at 0.1 ft and capped at
// log(10) == 2.302585. No defenders means a fully open route (the cap).
double openness_score(CourtLocation from, CourtLocation to,
                      std::span<const CourtLocation> defenders);

// One possession's covariate records. interval_base is the game-level index
// of the possession's first interval; intervals whose carrier or candidate
// set cannot be resolved are skipped and counted.
std::vector<CovariateRecord> extract_covariates(const MergedGame& merged,
                                                const Possession& possession,
                                                const FieldStore& fields,
                                                const ExtractOptions& options,
                                                std::uint32_t interval_base,
                                                IngestDiagnostics& diag);

// Pass locations (sender at release, receiver at reception) for spatial
// field estimation, across all non-excluded possessions.
std::vector<PassLocationSample> collect_pass_locations(
    const MergedGame& merged, const std::vector<Possession>& possessions,
    const ExtractOptions& options, IngestDiagnostics& diag);

// Model-ready view of one game: events, covariates and pass locations with
// game-level interval indexing.
struct ExtractedGame {
  std::vector<PassEvent> events;
  std::vector<CovariateRecord> covariates;
  std::vector<PassLocationSample> pass_locations;
  std::size_t n_intervals = 0;
};

ExtractedGame extract_game(const MergedGame& merged,
                           const std::vector<Possession>& possessions,
                           const FieldStore& fields,
                           const ExtractOptions& options,
                           IngestDiagnostics& diag);

}  // namespace passnet
