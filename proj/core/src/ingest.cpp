#include "passnet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "passnet/tabular.hpp"

namespace passnet {

namespace {

constexpr double kFramePeriod = 0.04;      // 25 Hz
constexpr double kBindTolerance = 0.1;     // s, annotation-to-frame binding
constexpr double kOpennessFloor = 0.1;     // ft
constexpr double kOpennessCap = 2.302585092994046;  // log(10)

std::optional<double> parse_coordinate(std::string_view s) {
  if (s == "NA") return std::nullopt;
  return parse_double(s);
}

std::string coordinate_string(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

std::optional<PlayKind> play_kind_from_string(std::string_view s) {
  if (s == "dribble") return PlayKind::dribble;
  if (s == "pass") return PlayKind::pass;
  if (s == "shot_made") return PlayKind::shot_made;
  if (s == "shot_missed") return PlayKind::shot_missed;
  if (s == "turnover") return PlayKind::turnover;
  if (s == "foul") return PlayKind::foul;
  if (s == "violation_reset") return PlayKind::violation_reset;
  if (s == "rebound") return PlayKind::rebound;
  if (s == "other") return PlayKind::other;
  return std::nullopt;
}

double horizontal_distance(CourtLocation a, CourtLocation b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// --- minimal markup scanner -------------------------------------------------
//
// The markup variant is a flat, attribute-only dialect; a small scanner is
// enough. Tags look like <name a="v" b="v">, </name> or <name a="v"/>.

struct MarkupTag {
  std::string_view name;
  bool closing = false;
  bool self_closing = false;
  std::vector<std::pair<std::string_view, std::string_view>> attrs;
};

class MarkupScanner {
 public:
  explicit MarkupScanner(std::string_view text) : text_(text) {}

  // Advances to the next tag; returns std::nullopt at end of input. A
  // malformed tag yields a tag named "!" so callers can count it as a bad
  // row and continue.
  std::optional<MarkupTag> next() {
    const std::size_t open = text_.find('<', pos_);
    if (open == std::string_view::npos) return std::nullopt;
    const std::size_t close = text_.find('>', open);
    if (close == std::string_view::npos) {
      pos_ = text_.size();
      return MarkupTag{.name = "!"};
    }
    pos_ = close + 1;
    std::string_view body = text_.substr(open + 1, close - open - 1);
    MarkupTag tag;
    if (!body.empty() && body.front() == '/') {
      tag.closing = true;
      body.remove_prefix(1);
    }
    if (!body.empty() && body.back() == '/') {
      tag.self_closing = true;
      body.remove_suffix(1);
    }
    const std::size_t name_end = body.find_first_of(" \t\r\n");
    tag.name = body.substr(0, name_end);
    if (tag.name.empty()) return MarkupTag{.name = "!"};
    if (name_end == std::string_view::npos) return tag;
    body.remove_prefix(name_end);
    while (true) {
      const std::size_t start = body.find_first_not_of(" \t\r\n");
      if (start == std::string_view::npos) break;
      body.remove_prefix(start);
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos || eq + 1 >= body.size() ||
          body[eq + 1] != '"')
        return MarkupTag{.name = "!"};
      const std::string_view key = body.substr(0, eq);
      const std::size_t quote_end = body.find('"', eq + 2);
      if (quote_end == std::string_view::npos) return MarkupTag{.name = "!"};
      tag.attrs.emplace_back(key, body.substr(eq + 2, quote_end - eq - 2));
      body.remove_prefix(quote_end + 1);
    }
    return tag;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<std::string_view> attr(const MarkupTag& tag, std::string_view key) {
  for (const auto& [k, v] : tag.attrs)
    if (k == key) return v;
  return std::nullopt;
}

std::string read_all(std::istream& in) {
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw std::runtime_error("unreadable input stream");
  return os.str();
}

bool looks_like_markup(std::string_view text) {
  const std::size_t start = text.find_first_not_of(" \t\r\n");
  return start != std::string_view::npos && text[start] == '<';
}

// Strictly-increasing timestamp bookkeeping per game.
class MonotonicCheck {
 public:
  bool admit(GameId game, double t) {
    auto [it, inserted] = last_.try_emplace(game, t);
    if (inserted) return true;
    if (!(t > it->second)) return false;
    it->second = t;
    return true;
  }

 private:
  std::map<GameId, double> last_;
};

// --- tracking ---------------------------------------------------------------

std::optional<TrackingFrame> tracking_row(std::string_view line) {
  auto cols = split_tabs(line);
  if (cols.size() < 4 || (cols.size() - 4) % 4 != 0) return std::nullopt;
  const std::size_t n_players = (cols.size() - 4) / 4;
  if (n_players > 10) return std::nullopt;
  try {
    TrackingFrame frame;
    frame.game = parse_int(cols[0]);
    frame.timestamp = parse_double(cols[1]);
    const auto bx = parse_coordinate(cols[2]);
    const auto by = parse_coordinate(cols[3]);
    if (bx && by) frame.ball = CourtLocation{*bx, *by};
    for (std::size_t p = 0; p < n_players; ++p) {
      TrackedPlayer player;
      player.id = parse_int(cols[4 + 4 * p]);
      const auto side = side_from_string(cols[5 + 4 * p]);
      if (!side) return std::nullopt;
      player.side = *side;
      const auto x = parse_coordinate(cols[6 + 4 * p]);
      const auto y = parse_coordinate(cols[7 + 4 * p]);
      if (x && y) player.location = CourtLocation{*x, *y};
      frame.players.push_back(player);
    }
    return frame;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<TrackingFrame> parse_tracking_markup(std::string_view text,
                                                 IngestDiagnostics& diag) {
  MarkupScanner scanner(text);
  std::vector<TrackingFrame> frames;
  MonotonicCheck monotonic;
  std::optional<GameId> game;
  std::optional<TrackingFrame> open_frame;
  bool in_document = false;

  auto commit = [&](TrackingFrame frame) {
    if (frame.players.size() > 10 || !monotonic.admit(frame.game, frame.timestamp)) {
      ++diag.malformed_rows;
      return;
    }
    frames.push_back(std::move(frame));
  };

  while (auto tag = scanner.next()) {
    if (tag->name == "!") {
      ++diag.malformed_rows;
      continue;
    }
    if (tag->name == "tracking" && !tag->closing) {
      const auto g = attr(*tag, "game");
      if (!g) throw std::runtime_error("tracking markup missing game attribute");
      game = parse_int(*g);
      in_document = true;
    } else if (tag->name == "frame" && !tag->closing) {
      if (!in_document) throw std::runtime_error("frame outside tracking document");
      const auto t = attr(*tag, "t");
      const auto bx = attr(*tag, "ball_x");
      const auto by = attr(*tag, "ball_y");
      if (!t || !bx || !by) {
        ++diag.malformed_rows;
        continue;
      }
      try {
        TrackingFrame frame;
        frame.game = *game;
        frame.timestamp = parse_double(*t);
        const auto x = parse_coordinate(*bx);
        const auto y = parse_coordinate(*by);
        if (x && y) frame.ball = CourtLocation{*x, *y};
        if (tag->self_closing)
          commit(std::move(frame));
        else
          open_frame = std::move(frame);
      } catch (const std::exception&) {
        ++diag.malformed_rows;
      }
    } else if (tag->name == "player" && open_frame) {
      const auto id = attr(*tag, "id");
      const auto side_attr = attr(*tag, "side");
      const auto x = attr(*tag, "x");
      const auto y = attr(*tag, "y");
      const auto side = side_attr ? side_from_string(*side_attr) : std::nullopt;
      if (!id || !side || !x || !y) {
        ++diag.malformed_rows;
        continue;
      }
      try {
        TrackedPlayer player;
        player.id = parse_int(*id);
        player.side = *side;
        const auto px = parse_coordinate(*x);
        const auto py = parse_coordinate(*y);
        if (px && py) player.location = CourtLocation{*px, *py};
        open_frame->players.push_back(player);
      } catch (const std::exception&) {
        ++diag.malformed_rows;
      }
    } else if (tag->name == "frame" && tag->closing) {
      if (open_frame) {
        commit(std::move(*open_frame));
        open_frame.reset();
      }
    } else if (tag->name == "tracking" && tag->closing) {
      break;
    } else {
      ++diag.malformed_rows;
    }
  }
  if (!in_document) throw std::runtime_error("unknown markup schema for tracking");
  return frames;
}

// --- play by play -----------------------------------------------------------

std::optional<PlayAnnotation> playbyplay_row(std::string_view line,
                                             IngestDiagnostics& diag) {
  auto cols = split_tabs(line);
  if (cols.size() != 4) return std::nullopt;
  try {
    PlayAnnotation a;
    a.game = parse_int(cols[0]);
    a.timestamp = parse_double(cols[1]);
    const auto kind = play_kind_from_string(cols[2]);
    if (kind) {
      a.kind = *kind;
    } else {
      a.kind = PlayKind::other;
      ++diag.unknown_event_kinds;
    }
    if (cols[3] != "NA") a.player = parse_int(cols[3]);
    return a;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<PlayAnnotation> parse_playbyplay_markup(std::string_view text,
                                                    IngestDiagnostics& diag) {
  MarkupScanner scanner(text);
  std::vector<PlayAnnotation> out;
  std::optional<GameId> game;
  bool in_document = false;
  while (auto tag = scanner.next()) {
    if (tag->name == "!") {
      ++diag.malformed_rows;
      continue;
    }
    if (tag->name == "playbyplay" && !tag->closing) {
      const auto g = attr(*tag, "game");
      if (!g) throw std::runtime_error("playbyplay markup missing game attribute");
      game = parse_int(*g);
      in_document = true;
    } else if (tag->name == "event" && !tag->closing) {
      if (!in_document) throw std::runtime_error("event outside playbyplay document");
      const auto t = attr(*tag, "t");
      const auto kind_attr = attr(*tag, "kind");
      if (!t || !kind_attr) {
        ++diag.malformed_rows;
        continue;
      }
      try {
        PlayAnnotation a;
        a.game = *game;
        a.timestamp = parse_double(*t);
        const auto kind = play_kind_from_string(*kind_attr);
        if (kind) {
          a.kind = *kind;
        } else {
          a.kind = PlayKind::other;
          ++diag.unknown_event_kinds;
        }
        if (const auto p = attr(*tag, "player"); p && *p != "NA")
          a.player = parse_int(*p);
        out.push_back(a);
      } catch (const std::exception&) {
        ++diag.malformed_rows;
      }
    } else if (tag->name == "playbyplay" && tag->closing) {
      break;
    } else {
      ++diag.malformed_rows;
    }
  }
  if (!in_document) throw std::runtime_error("unknown markup schema for playbyplay");
  return out;
}

// --- boxscore ---------------------------------------------------------------

std::optional<BoxScoreRow> boxscore_row(std::string_view line) {
  auto cols = split_tabs(line);
  if (cols.size() != 6) return std::nullopt;
  try {
    BoxScoreRow row;
    row.game = parse_int(cols[0]);
    row.player = parse_int(cols[1]);
    const auto pos = position_from_string(cols[2]);
    if (!pos) return std::nullopt;
    row.position = *pos;
    row.points = static_cast<int>(parse_int(cols[3]));
    row.assists = static_cast<int>(parse_int(cols[4]));
    row.rebounds = static_cast<int>(parse_int(cols[5]));
    return row;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<BoxScoreRow> parse_boxscore_markup(std::string_view text,
                                               IngestDiagnostics& diag) {
  MarkupScanner scanner(text);
  std::vector<BoxScoreRow> out;
  std::optional<GameId> game;
  bool in_document = false;
  while (auto tag = scanner.next()) {
    if (tag->name == "!") {
      ++diag.malformed_rows;
      continue;
    }
    if (tag->name == "boxscore" && !tag->closing) {
      const auto g = attr(*tag, "game");
      if (!g) throw std::runtime_error("boxscore markup missing game attribute");
      game = parse_int(*g);
      in_document = true;
    } else if (tag->name == "player" && !tag->closing) {
      if (!in_document) throw std::runtime_error("player outside boxscore document");
      const auto id = attr(*tag, "id");
      const auto pos_attr = attr(*tag, "position");
      const auto pos = pos_attr ? position_from_string(*pos_attr) : std::nullopt;
      if (!id || !pos) {
        ++diag.malformed_rows;
        continue;
      }
      try {
        BoxScoreRow row;
        row.game = *game;
        row.player = parse_int(*id);
        row.position = *pos;
        if (const auto v = attr(*tag, "points")) row.points = static_cast<int>(parse_int(*v));
        if (const auto v = attr(*tag, "assists")) row.assists = static_cast<int>(parse_int(*v));
        if (const auto v = attr(*tag, "rebounds")) row.rebounds = static_cast<int>(parse_int(*v));
        out.push_back(row);
      } catch (const std::exception&) {
        ++diag.malformed_rows;
      }
    } else if (tag->name == "boxscore" && tag->closing) {
      break;
    } else {
      ++diag.malformed_rows;
    }
  }
  if (!in_document) throw std::runtime_error("unknown markup schema for boxscore");
  return out;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

}  // namespace

std::string_view to_string(Side side) {
  return side == Side::home ? "home" : "away";
}

std::optional<Side> side_from_string(std::string_view s) {
  if (s == "home") return Side::home;
  if (s == "away") return Side::away;
  return std::nullopt;
}

std::string_view to_string(PlayKind kind) {
  switch (kind) {
    case PlayKind::dribble: return "dribble";
    case PlayKind::pass: return "pass";
    case PlayKind::shot_made: return "shot_made";
    case PlayKind::shot_missed: return "shot_missed";
    case PlayKind::turnover: return "turnover";
    case PlayKind::foul: return "foul";
    case PlayKind::violation_reset: return "violation_reset";
    case PlayKind::rebound: return "rebound";
    case PlayKind::other: return "other";
  }
  return "other";
}

std::vector<TrackingFrame> parse_tracking(std::istream& in,
                                          IngestDiagnostics& diag) {
  const std::string text = read_all(in);
  if (looks_like_markup(text)) return parse_tracking_markup(text, diag);

  std::vector<TrackingFrame> frames;
  MonotonicCheck monotonic;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto sv = strip_cr(line);
    if (skippable(sv)) continue;
    auto frame = tracking_row(sv);
    if (!frame || !monotonic.admit(frame->game, frame->timestamp)) {
      ++diag.malformed_rows;
      continue;
    }
    frames.push_back(std::move(*frame));
  }
  return frames;
}

std::vector<PlayAnnotation> parse_playbyplay(std::istream& in,
                                             IngestDiagnostics& diag) {
  const std::string text = read_all(in);
  if (looks_like_markup(text)) return parse_playbyplay_markup(text, diag);

  std::vector<PlayAnnotation> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto sv = strip_cr(line);
    if (skippable(sv)) continue;
    auto row = playbyplay_row(sv, diag);
    if (!row) {
      ++diag.malformed_rows;
      continue;
    }
    out.push_back(*row);
  }
  return out;
}

std::vector<BoxScoreRow> parse_boxscore(std::istream& in, IngestDiagnostics& diag) {
  const std::string text = read_all(in);
  if (looks_like_markup(text)) return parse_boxscore_markup(text, diag);

  std::vector<BoxScoreRow> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto sv = strip_cr(line);
    if (skippable(sv)) continue;
    auto row = boxscore_row(sv);
    if (!row) {
      ++diag.malformed_rows;
      continue;
    }
    out.push_back(*row);
  }
  return out;
}

std::string serialize_tracking(const std::vector<TrackingFrame>& frames) {
  std::string out;
  for (const auto& f : frames) {
    out += std::to_string(f.game);
    out += '\t';
    out += format_double(f.timestamp);
    out += '\t';
    out += coordinate_string(f.ball ? std::optional<double>(f.ball->x) : std::nullopt);
    out += '\t';
    out += coordinate_string(f.ball ? std::optional<double>(f.ball->y) : std::nullopt);
    for (const auto& p : f.players) {
      out += '\t';
      out += std::to_string(p.id);
      out += '\t';
      out += to_string(p.side);
      out += '\t';
      out += coordinate_string(p.location ? std::optional<double>(p.location->x)
                                          : std::nullopt);
      out += '\t';
      out += coordinate_string(p.location ? std::optional<double>(p.location->y)
                                          : std::nullopt);
    }
    out += '\n';
  }
  return out;
}

std::string serialize_playbyplay(const std::vector<PlayAnnotation>& annotations) {
  std::string out;
  for (const auto& a : annotations) {
    out += std::to_string(a.game);
    out += '\t';
    out += format_double(a.timestamp);
    out += '\t';
    out += to_string(a.kind);
    out += '\t';
    out += a.player ? std::to_string(*a.player) : "NA";
    out += '\n';
  }
  return out;
}

std::string serialize_boxscore(const std::vector<BoxScoreRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += std::to_string(r.game);
    out += '\t';
    out += std::to_string(r.player);
    out += '\t';
    out += to_string(r.position);
    out += '\t';
    out += std::to_string(r.points);
    out += '\t';
    out += std::to_string(r.assists);
    out += '\t';
    out += std::to_string(r.rebounds);
    out += '\n';
  }
  return out;
}

MergedGame merge_streams(std::vector<TrackingFrame> frames,
                         const std::vector<PlayAnnotation>& annotations,
                         const std::vector<BoxScoreRow>& boxscore,
                         IngestDiagnostics& diag) {
  std::optional<GameId> game;
  auto check_game = [&](GameId g) {
    if (!game) {
      game = g;
    } else if (*game != g) {
      throw std::runtime_error("game id mismatch while merging: " +
                               std::to_string(*game) + " vs " + std::to_string(g));
    }
  };
  for (const auto& f : frames) check_game(f.game);
  for (const auto& a : annotations) check_game(a.game);
  for (const auto& b : boxscore) check_game(b.game);
  if (!game) throw std::runtime_error("cannot merge empty inputs");

  MergedGame merged;
  merged.game = *game;
  merged.frames = std::move(frames);
  for (const auto& b : boxscore) merged.positions[b.player] = b.position;

  for (const auto& a : annotations) {
    // Nearest frame by timestamp.
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    auto it = std::lower_bound(merged.frames.begin(), merged.frames.end(),
                               a.timestamp,
                               [](const TrackingFrame& f, double t) {
                                 return f.timestamp < t;
                               });
    for (auto cand : {it, it == merged.frames.begin() ? it : std::prev(it)}) {
      if (cand == merged.frames.end()) continue;
      const double gap = std::abs(cand->timestamp - a.timestamp);
      if (gap < best_gap) {
        best_gap = gap;
        best = static_cast<std::size_t>(cand - merged.frames.begin());
      }
    }
    if (best_gap <= kBindTolerance + 1e-12) {
      merged.annotations.push_back({a, best});
    } else {
      ++diag.unmatched_annotations;
    }
  }
  std::stable_sort(merged.annotations.begin(), merged.annotations.end(),
                   [](const BoundAnnotation& a, const BoundAnnotation& b) {
                     return std::tie(a.frame_index, a.annotation.timestamp) <
                            std::tie(b.frame_index, b.annotation.timestamp);
                   });
  return merged;
}

namespace {

Side possession_offense(const MergedGame& merged, std::size_t first,
                        std::size_t last) {
  for (std::size_t f = first; f <= last && f < merged.frames.size(); ++f) {
    const TrackingFrame& frame = merged.frames[f];
    if (!frame.ball) continue;
    double best = std::numeric_limits<double>::infinity();
    std::optional<Side> side;
    for (const auto& p : frame.players) {
      if (!p.location) continue;
      const double d = horizontal_distance(*p.location, *frame.ball);
      if (d < best) {
        best = d;
        side = p.side;
      }
    }
    if (side) return *side;
  }
  return Side::home;
}

bool is_boundary(PlayKind kind) {
  switch (kind) {
    case PlayKind::shot_made:
    case PlayKind::shot_missed:
    case PlayKind::turnover:
    case PlayKind::violation_reset:
    case PlayKind::foul:
      return true;
    default:
      return false;
  }
}

PossessionOutcome outcome_of(PlayKind kind) {
  switch (kind) {
    case PlayKind::shot_made: return PossessionOutcome::made;
    case PlayKind::shot_missed: return PossessionOutcome::missed;
    case PlayKind::turnover: return PossessionOutcome::turnover;
    default: return PossessionOutcome::reset;  // violation_reset and foul
  }
}

}  // namespace

std::vector<Possession> segment_possessions(const MergedGame& merged) {
  std::vector<Possession> possessions;
  if (merged.frames.empty()) return possessions;

  auto make = [&](std::size_t first, std::size_t last) {
    Possession p;
    p.game = merged.game;
    p.first_frame = first;
    p.last_frame = last;
    p.start_time = merged.frames[first].timestamp;
    p.end_time = merged.frames[last].timestamp;
    p.offense = possession_offense(merged, first, last);
    return p;
  };

  std::size_t start = 0;
  for (const auto& bound : merged.annotations) {
    if (!is_boundary(bound.annotation.kind)) continue;
    if (bound.frame_index < start) continue;  // boundary on an absorbed frame
    Possession p = make(start, bound.frame_index);
    p.outcome = outcome_of(bound.annotation.kind);
    p.excluded = bound.annotation.kind == PlayKind::foul;
    possessions.push_back(p);
    start = bound.frame_index + 1;
  }
  if (start < merged.frames.size()) {
    Possession p = make(start, merged.frames.size() - 1);
    p.outcome = PossessionOutcome::reset;
    p.incomplete = true;
    possessions.push_back(p);
  }
  return possessions;
}

std::vector<std::optional<PlayerId>> carrier_track(const MergedGame& merged,
                                                   std::size_t first_frame,
                                                   std::size_t last_frame,
                                                   const ExtractOptions& options) {
  std::vector<std::optional<PlayerId>> track;
  track.reserve(last_frame - first_frame + 1);
  std::optional<PlayerId> current;
  std::optional<PlayerId> pending;
  bool pending_none = false;
  int pending_count = 0;

  for (std::size_t f = first_frame; f <= last_frame; ++f) {
    const TrackingFrame& frame = merged.frames[f];
    if (!frame.ball) {
      track.push_back(current);  // no ball fix: keep the current attribution
      continue;
    }
    std::optional<PlayerId> candidate;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : frame.players) {
      if (!p.location) continue;
      const double d = horizontal_distance(*p.location, *frame.ball);
      if (d < best || (d == best && candidate && p.id < *candidate)) {
        best = d;
        candidate = p.id;
      }
    }
    if (!candidate || best > options.carrier_radius) candidate.reset();

    if (!current) {
      current = candidate;  // immediate acquisition
      pending.reset();
      pending_none = false;
      pending_count = 0;
    } else if (candidate == current) {
      pending.reset();
      pending_none = false;
      pending_count = 0;
    } else {
      const bool same_pending =
          candidate ? (pending && *pending == *candidate) : pending_none;
      if (same_pending) {
        ++pending_count;
      } else {
        pending = candidate;
        pending_none = !candidate;
        pending_count = 1;
      }
      if (pending_count >= options.carrier_hysteresis) {
        current = candidate;
        pending.reset();
        pending_none = false;
        pending_count = 0;
      }
    }
    track.push_back(current);
  }
  return track;
}

double openness_score(CourtLocation from, CourtLocation to,
                      std::span<const CourtLocation> defenders) {
  double min_distance = std::numeric_limits<double>::infinity();
  const double seg_x = to.x - from.x;
  const double seg_y = to.y - from.y;
  const double seg_len2 = seg_x * seg_x + seg_y * seg_y;
  for (const auto& d : defenders) {
    double distance;
    if (seg_len2 == 0.0) {
      distance = horizontal_distance(d, from);
    } else {
      const double t = std::clamp(
          ((d.x - from.x) * seg_x + (d.y - from.y) * seg_y) / seg_len2, 0.0, 1.0);
      const CourtLocation closest{from.x + t * seg_x, from.y + t * seg_y};
      distance = horizontal_distance(d, closest);
    }
    min_distance = std::min(min_distance, distance);
  }
  if (!std::isfinite(min_distance)) return kOpennessCap;
  return std::min(std::log(std::max(min_distance, kOpennessFloor) / kOpennessFloor),
                  kOpennessCap);
}

namespace {

struct IntervalLayout {
  std::vector<std::size_t> first_frame;  // representative frame per interval
  std::vector<int> local_index;
  std::vector<double> dt;
  int n_intervals = 0;
};

IntervalLayout interval_layout(const MergedGame& merged, const Possession& poss,
                               double interval_length) {
  IntervalLayout layout;
  const double t0 = merged.frames[poss.first_frame].timestamp;
  int current = -1;
  for (std::size_t f = poss.first_frame; f <= poss.last_frame; ++f) {
    const double t = merged.frames[f].timestamp;
    const int idx =
        static_cast<int>(std::floor((t - t0) / interval_length + 1e-9));
    if (idx != current) {
      layout.first_frame.push_back(f);
      layout.local_index.push_back(idx);
      layout.dt.push_back(interval_length);
      current = idx;
    }
  }
  if (!layout.local_index.empty()) {
    layout.n_intervals = layout.local_index.back() + 1;
    // Final interval keeps its true (shorter) duration.
    const double t_end =
        merged.frames[poss.last_frame].timestamp + kFramePeriod;
    const double last_start = t0 + layout.local_index.back() * interval_length;
    const double dt = t_end - last_start;
    if (dt > 0.0 && dt < interval_length) layout.dt.back() = dt;
  }
  return layout;
}

const TrackedPlayer* find_player(const TrackingFrame& frame, PlayerId id) {
  for (const auto& p : frame.players)
    if (p.id == id) return &p;
  return nullptr;
}

// Dribble latch per frame: set by the first dribble annotation of the
// current carry, cleared whenever the carrier changes.
std::vector<bool> dribble_latch(const MergedGame& merged, const Possession& poss,
                                const std::vector<std::optional<PlayerId>>& track) {
  std::vector<bool> latch(track.size(), false);
  std::size_t a = 0;
  while (a < merged.annotations.size() &&
         merged.annotations[a].frame_index < poss.first_frame)
    ++a;
  bool latched = false;
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (i > 0 && track[i] != track[i - 1]) latched = false;
    const std::size_t f = poss.first_frame + i;
    while (a < merged.annotations.size() &&
           merged.annotations[a].frame_index == f) {
      if (merged.annotations[a].annotation.kind == PlayKind::dribble && track[i])
        latched = true;
      ++a;
    }
    latch[i] = latched;
  }
  return latch;
}

struct DetectedPass {
  std::size_t release_frame = 0;
  std::size_t reception_frame = 0;
  PlayerId sender = 0;
  PlayerId receiver = 0;
};

std::vector<DetectedPass> detect_passes(
    const MergedGame& merged, const Possession& poss,
    const std::vector<std::optional<PlayerId>>& track,
    const ExtractOptions& options, IngestDiagnostics& diag) {
  std::vector<DetectedPass> passes;
  for (const auto& bound : merged.annotations) {
    if (bound.annotation.kind != PlayKind::pass) continue;
    if (bound.frame_index < poss.first_frame || bound.frame_index > poss.last_frame)
      continue;
    const std::size_t rel = bound.frame_index - poss.first_frame;
    const auto sender = track[rel];
    if (!sender) {
      ++diag.dropped_passes;
      continue;
    }
    if (bound.annotation.player && *bound.annotation.player != *sender)
      ++diag.carrier_mismatches;

    const double t_release = merged.frames[bound.frame_index].timestamp;
    std::optional<std::size_t> reception;
    for (std::size_t f = bound.frame_index + 1; f <= poss.last_frame; ++f) {
      if (merged.frames[f].timestamp - t_release > options.reception_window) break;
      const auto carrier = track[f - poss.first_frame];
      if (carrier && *carrier != *sender) {
        reception = f;
        break;
      }
    }
    if (!reception) {
      ++diag.dropped_passes;
      continue;
    }
    const PlayerId receiver = *track[*reception - poss.first_frame];
    const TrackedPlayer* s = find_player(merged.frames[bound.frame_index], *sender);
    const TrackedPlayer* r = find_player(merged.frames[*reception], receiver);
    if (!s || !r || s->side != r->side) {
      ++diag.dropped_passes;  // interception or unresolvable sides
      continue;
    }
    passes.push_back({bound.frame_index, *reception, *sender, receiver});
  }
  return passes;
}

}  // namespace

std::vector<CovariateRecord> extract_covariates(const MergedGame& merged,
                                                const Possession& possession,
                                                const FieldStore& fields,
                                                const ExtractOptions& options,
                                                std::uint32_t interval_base,
                                                IngestDiagnostics& diag) {
  std::vector<CovariateRecord> records;
  const auto track =
      carrier_track(merged, possession.first_frame, possession.last_frame, options);
  const auto latch = dribble_latch(merged, possession, track);
  const auto layout = interval_layout(merged, possession, options.interval_length);

  for (std::size_t i = 0; i < layout.first_frame.size(); ++i) {
    const std::size_t f = layout.first_frame[i];
    const TrackingFrame& frame = merged.frames[f];
    const auto carrier = track[f - possession.first_frame];
    if (!carrier) {
      ++diag.skipped_intervals;
      continue;
    }
    const TrackedPlayer* carrier_player = find_player(frame, *carrier);
    if (!carrier_player || !carrier_player->location) {
      ++diag.skipped_intervals;
      continue;
    }
    const CourtLocation carrier_loc = *carrier_player->location;

    std::vector<const TrackedPlayer*> teammates;
    std::vector<CourtLocation> defenders;
    for (const auto& p : frame.players) {
      if (!p.location) continue;
      if (p.side == carrier_player->side) {
        if (p.id != *carrier) teammates.push_back(&p);
      } else {
        defenders.push_back(*p.location);
      }
    }
    if (teammates.size() != 4 || defenders.empty()) {
      ++diag.skipped_intervals;
      continue;
    }
    bool positions_known = true;
    for (const auto* t : teammates)
      if (!merged.positions.count(t->id)) positions_known = false;
    if (!positions_known) {
      ++diag.skipped_intervals;
      continue;
    }

    double nearest_defender = std::numeric_limits<double>::infinity();
    for (const auto& d : defenders)
      nearest_defender =
          std::min(nearest_defender, horizontal_distance(d, carrier_loc));

    // Closeness ranks 1..4, ties broken by player id.
    std::vector<std::pair<double, const TrackedPlayer*>> ranked;
    for (const auto* t : teammates)
      ranked.emplace_back(horizontal_distance(*t->location, carrier_loc), t);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                return std::tie(a.first, a.second->id) <
                       std::tie(b.first, b.second->id);
              });

    for (std::size_t k = 0; k < ranked.size(); ++k) {
      const TrackedPlayer* mate = ranked[k].second;
      CovariateRecord rec;
      rec.game = merged.game;
      rec.interval = interval_base + static_cast<std::uint32_t>(layout.local_index[i]);
      rec.sender = *carrier;
      rec.receiver = mate->id;
      rec.w[0] = 1.0;
      rec.w[1] = latch[f - possession.first_frame] ? 1.0 : 0.0;
      rec.w[2] = std::log(std::max(nearest_defender, kOpennessFloor));
      rec.w[3] = static_cast<double>(k + 1);
      rec.w[4] = openness_score(carrier_loc, *mate->location, defenders);
      rec.xi_sender = fields.sender_value(*carrier, carrier_loc);
      rec.xi_receiver = fields.receiver_value(
          *carrier, merged.positions.at(mate->id), *mate->location);
      rec.interval_length = layout.dt[i];
      records.push_back(rec);
    }
  }
  return records;
}

std::vector<PassLocationSample> collect_pass_locations(
    const MergedGame& merged, const std::vector<Possession>& possessions,
    const ExtractOptions& options, IngestDiagnostics& diag) {
  std::vector<PassLocationSample> samples;
  for (const auto& poss : possessions) {
    if (poss.excluded) continue;
    const auto track =
        carrier_track(merged, poss.first_frame, poss.last_frame, options);
    for (const auto& pass : detect_passes(merged, poss, track, options, diag)) {
      const TrackedPlayer* s =
          find_player(merged.frames[pass.release_frame], pass.sender);
      const TrackedPlayer* r =
          find_player(merged.frames[pass.reception_frame], pass.receiver);
      auto pos = merged.positions.find(pass.receiver);
      if (!s || !s->location || !r || !r->location ||
          pos == merged.positions.end()) {
        ++diag.dropped_passes;
        continue;
      }
      samples.push_back({pass.sender, pass.receiver, pos->second, *s->location,
                         *r->location});
    }
  }
  return samples;
}

ExtractedGame extract_game(const MergedGame& merged,
                           const std::vector<Possession>& possessions,
                           const FieldStore& fields,
                           const ExtractOptions& options,
                           IngestDiagnostics& diag) {
  ExtractedGame out;
  std::uint32_t base = 0;
  for (std::size_t p = 0; p < possessions.size(); ++p) {
    const Possession& poss = possessions[p];
    const auto layout = interval_layout(merged, poss, options.interval_length);
    if (!poss.excluded) {
      auto records =
          extract_covariates(merged, poss, fields, options, base, diag);

      // Candidate receivers per interval, to validate detected passes.
      std::map<std::uint32_t, std::vector<PlayerId>> candidates;
      for (const auto& rec : records) candidates[rec.interval].push_back(rec.receiver);

      const auto track =
          carrier_track(merged, poss.first_frame, poss.last_frame, options);
      std::map<std::uint32_t, bool> interval_has_event;
      for (const auto& pass : detect_passes(merged, poss, track, options, diag)) {
        const double t0 = merged.frames[poss.first_frame].timestamp;
        const double t = merged.frames[pass.release_frame].timestamp;
        const auto interval =
            base + static_cast<std::uint32_t>(
                       std::floor((t - t0) / options.interval_length + 1e-9));
        auto cand = candidates.find(interval);
        if (cand == candidates.end() ||
            std::find(cand->second.begin(), cand->second.end(), pass.receiver) ==
                cand->second.end()) {
          ++diag.dropped_passes;  // no lattice cell for this pass
          continue;
        }
        if (interval_has_event[interval]) {
          ++diag.duplicate_pass_intervals;
          continue;
        }
        interval_has_event[interval] = true;
        PassEvent event;
        event.game = merged.game;
        event.possession = static_cast<PossessionId>(p);
        event.interval = interval;
        event.sender = pass.sender;
        event.receiver = pass.receiver;
        out.events.push_back(event);
      }
      out.covariates.insert(out.covariates.end(), records.begin(), records.end());
    }
    base += static_cast<std::uint32_t>(layout.n_intervals);
  }
  out.pass_locations = collect_pass_locations(merged, possessions, options, diag);
  out.n_intervals = base;
  return out;
}

}  // namespace passnet
