#pragma once

// Session action logs (CSV or JSON Lines) to encoded corpora.
//
// CSV:   header `session_id,timestamp,action`, one event per row.
// JSONL: one object per line with the same three string keys.
// Timestamps are ISO-8601 (`YYYY-MM-DD`, optionally `THH:MM:SS[.frac]`
// and `Z` or `+HH:MM`); within a session events are ordered by time,
// then by file order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tactics/hmm.hpp"

namespace tactics {

struct RawEvent {
  std::string session_id;
  std::string timestamp;
  std::string action;
  std::size_t line = 0;       // 1-based source line
  std::int64_t time_key = 0;  // microseconds since the Unix epoch, UTC
};

enum class LogFormat { kCsv, kJsonl };
enum class UnknownActions { kStrict, kDrop };

LogFormat parse_log_format(const std::string& name);
UnknownActions parse_unknown_actions(const std::string& name);

/// Microseconds since the epoch; throws FormatError if unparseable.
std::int64_t parse_timestamp(const std::string& text);

std::vector<RawEvent> parse(std::istream& in, LogFormat format);
std::vector<RawEvent> parse_file(const std::string& path, LogFormat format);

/// Distinct action names in first-appearance order.
ActionAlphabet build_alphabet(const std::vector<RawEvent>& events);

/// Parses a comma-separated preset such as "Q,V,S,W,T".
ActionAlphabet parse_alphabet(const std::string& comma_list);

/// Groups by session (first-appearance order) and sorts each session by
/// (time, line). Sessions left empty by `kDrop` are omitted and reported
/// in `warnings` when given.
EncodedCorpus encode(const std::vector<RawEvent>& events, const ActionAlphabet& alphabet,
                     UnknownActions unknown = UnknownActions::kStrict,
                     std::vector<std::string>* warnings = nullptr);

/// Per-session action names, in corpus order.
std::vector<std::vector<std::string>> decode(const EncodedCorpus& corpus);

/// Writes the corpus in the CSV schema, stamping each session's events one
/// second apart from 2020-01-01T00:00:00Z.
void write_csv(std::ostream& out, const EncodedCorpus& corpus);

}  // namespace tactics
