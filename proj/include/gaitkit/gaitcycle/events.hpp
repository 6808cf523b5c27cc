#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaitkit/core/types.hpp"
#include "gaitkit/util/fs.hpp"

namespace gaitkit::gaitcycle {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

/// Parses a heel-strike CSV with header `frame,side,kind`. Side is L/R
/// (Left/Right accepted); kind is HS (HeelStrike accepted). Events for one
/// side must be strictly increasing in the order given.
inline std::vector<GaitEvent> parse_events(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  bool header_seen = false;
  std::vector<GaitEvent> events;
  std::map<Side, long> last;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (!header_seen) {
      if (cells.size() != 3 || cells[0] != "frame" || cells[1] != "side" || cells[2] != "kind") {
        throw Error(ErrorCode::MalformedDocument, "events header must be 'frame,side,kind'");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 3) {
      throw Error(ErrorCode::MalformedDocument, "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    GaitEvent ev;
    try {
      std::size_t used = 0;
      ev.frame_index = std::stol(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedDocument, "line " + std::to_string(line_no) + ": bad frame '" + cells[0] + "'");
    }
    ev.side = side_from_name(cells[1]);
    if (cells[2] != "HS" && cells[2] != "HeelStrike") {
      throw Error(ErrorCode::UnknownEventField, "unknown event kind '" + cells[2] + "'");
    }
    if (auto it = last.find(ev.side); it != last.end() && ev.frame_index <= it->second) {
      throw Error(ErrorCode::NonMonotonicEvents, "line " + std::to_string(line_no) + ": " +
                                                     std::string(side_name(ev.side)) + " events not increasing");
    }
    last[ev.side] = ev.frame_index;
    events.push_back(ev);
  }
  if (events.empty()) throw Error(ErrorCode::NoEvents, "no heel-strike events");
  std::stable_sort(events.begin(), events.end(),
                   [](const GaitEvent& a, const GaitEvent& b) { return a.frame_index < b.frame_index; });
  return events;
}

inline std::vector<GaitEvent> load_events(const std::filesystem::path& file) {
  return parse_events(util::read_file(file));
}

inline std::string format_events(const std::vector<GaitEvent>& events) {
  std::string out = "frame,side,kind\n";
  for (const auto& e : events) out += std::to_string(e.frame_index) + "," + std::string(side_name(e.side)) + ",HS\n";
  return out;
}

/// Consecutive same-side heel strikes, as (start_frame, end_frame).
inline std::vector<std::pair<long, long>> segment_cycles(const std::vector<GaitEvent>& events, Side side) {
  std::vector<long> frames;
  for (const auto& e : events) {
    if (e.side == side && e.kind == EventKind::HeelStrike) frames.push_back(e.frame_index);
  }
  if (frames.size() < 2) {
    throw Error(ErrorCode::InsufficientEvents, "need two " + std::string(side_name(side)) + " heel strikes, have " +
                                                   std::to_string(frames.size()));
  }
  std::sort(frames.begin(), frames.end());
  std::vector<std::pair<long, long>> cycles;
  for (std::size_t i = 1; i < frames.size(); ++i) cycles.emplace_back(frames[i - 1], frames[i]);
  return cycles;
}

}  // namespace gaitkit::gaitcycle

