#include "tactics/log_ingest.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "tactics/errors.hpp"

namespace tactics {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(text);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

RawEvent make_event(std::string session, std::string timestamp, std::string action, std::size_t line) {
  if (session.empty()) fail_at(line, "empty session_id");
  if (action.empty()) fail_at(line, "empty action");
  RawEvent ev{std::move(session), std::move(timestamp), std::move(action), line, 0};
  try {
    ev.time_key = parse_timestamp(ev.timestamp);
  } catch (const FormatError& e) {
    fail_at(line, e.what());
  }
  return ev;
}

std::vector<RawEvent> parse_csv(std::istream& in) {
  std::vector<RawEvent> events;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(std::move(line));
    if (!have_header) {
      if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
      if (blank(line)) continue;
      if (line != "session_id,timestamp,action") {
        fail_at(lineno, "expected header 'session_id,timestamp,action', got '" + line + "'");
      }
      have_header = true;
      continue;
    }
    if (blank(line)) continue;
    auto fields = split(line, ',');
    if (fields.size() != 3) {
      fail_at(lineno, "expected 3 fields (session_id,timestamp,action), got " + std::to_string(fields.size()));
    }
    events.push_back(make_event(std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), lineno));
  }
  return events;
}

std::vector<RawEvent> parse_jsonl(std::istream& in) {
  std::vector<RawEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail_at(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail_at(lineno, "expected a JSON object");
    const auto field = [&](const char* key) {
      const auto it = obj.find(key);
      if (it == obj.end()) fail_at(lineno, std::string("missing field '") + key + "'");
      if (!it->is_string()) fail_at(lineno, std::string("field '") + key + "' must be a string");
      return it->get<std::string>();
    };
    events.push_back(make_event(field("session_id"), field("timestamp"), field("action"), lineno));
  }
  return events;
}

std::string format_utc(std::chrono::sys_seconds when) {
  using namespace std::chrono;
  const auto day = floor<days>(when);
  const year_month_day ymd{day};
  const hh_mm_ss hms{when - day};
  std::ostringstream out;
  out << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
      << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day()) << 'T'
      << std::setw(2) << hms.hours().count() << ':' << std::setw(2) << hms.minutes().count() << ':'
      << std::setw(2) << hms.seconds().count() << 'Z';
  return out.str();
}

}  // namespace

LogFormat parse_log_format(const std::string& name) {
  if (name == "csv") return LogFormat::kCsv;
  if (name == "jsonl") return LogFormat::kJsonl;
  throw ArgumentError("unknown log format '" + name + "' (expected csv or jsonl)");
}

UnknownActions parse_unknown_actions(const std::string& name) {
  if (name == "strict") return UnknownActions::kStrict;
  if (name == "drop") return UnknownActions::kDrop;
  throw ArgumentError("unknown action handling '" + name + "' (expected strict or drop)");
}

std::int64_t parse_timestamp(const std::string& text) {
  static const std::regex pattern(
      R"(^(\d{4})-(\d{2})-(\d{2})(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:[.,](\d+))?)?)?(Z|[+-]\d{2}:?\d{2})?$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw FormatError("unparseable timestamp '" + text + "'");

  using namespace std::chrono;
  const auto num = [&](int g) { return m[g].matched ? std::stoi(m[g].str()) : 0; };
  const year_month_day ymd{year{num(1)}, month{static_cast<unsigned>(num(2))}, day{static_cast<unsigned>(num(3))}};
  const int hh = num(4), mm = num(5), ss = num(6);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) throw FormatError("timestamp out of range '" + text + "'");

  std::int64_t micros = 0;
  if (m[7].matched) {
    std::string frac = m[7].str().substr(0, 6);
    frac.resize(6, '0');
    micros = std::stoll(frac);
  }
  std::int64_t offset_seconds = 0;
  if (m[8].matched && m[8].str() != "Z") {
    const std::string z = m[8].str();
    const int oh = std::stoi(z.substr(1, 2));
    const int om = std::stoi(z.substr(z.size() - 2));
    offset_seconds = (z[0] == '-' ? -1 : 1) * (oh * 3600 + om * 60);
  }
  const std::int64_t seconds =
      sys_days{ymd}.time_since_epoch().count() * 86400LL + hh * 3600LL + mm * 60LL + ss - offset_seconds;
  return seconds * 1'000'000LL + micros;
}

std::vector<RawEvent> parse(std::istream& in, LogFormat format) {
  return format == LogFormat::kCsv ? parse_csv(in) : parse_jsonl(in);
}

std::vector<RawEvent> parse_file(const std::string& path, LogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": no such file or not readable");
  return parse(in, format);
}

ActionAlphabet build_alphabet(const std::vector<RawEvent>& events) {
  if (events.empty()) throw ArgumentError("cannot build an alphabet from zero events");
  std::vector<std::string> symbols;
  for (const auto& ev : events) {
    if (std::find(symbols.begin(), symbols.end(), ev.action) == symbols.end()) symbols.push_back(ev.action);
  }
  return ActionAlphabet(std::move(symbols));
}

ActionAlphabet parse_alphabet(const std::string& comma_list) {
  auto symbols = split(comma_list, ',');
  for (auto& s : symbols) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    s = first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  }
  return ActionAlphabet(std::move(symbols));
}

EncodedCorpus encode(const std::vector<RawEvent>& events, const ActionAlphabet& alphabet, UnknownActions unknown,
                     std::vector<std::string>* warnings) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RawEvent*>> by_session;
  for (const auto& ev : events) {
    auto [it, inserted] = by_session.try_emplace(ev.session_id);
    if (inserted) order.push_back(ev.session_id);
    it->second.push_back(&ev);
  }

  std::vector<Sequence> sequences;
  for (const auto& id : order) {
    auto& rows = by_session[id];
    std::stable_sort(rows.begin(), rows.end(), [](const RawEvent* a, const RawEvent* b) {
      return a->time_key != b->time_key ? a->time_key < b->time_key : a->line < b->line;
    });
    Sequence seq{id, {}};
    for (const RawEvent* ev : rows) {
      const auto k = alphabet.index_of(ev->action);
      if (!k) {
        if (unknown == UnknownActions::kStrict) {
          throw EncodingError("line " + std::to_string(ev->line) + ": action '" + ev->action +
                              "' is not in the alphabet");
        }
        continue;
      }
      seq.observations.push_back(static_cast<int>(*k));
    }
    if (seq.observations.empty()) {
      if (warnings) warnings->push_back("session '" + id + "' has no events left after dropping unknown actions");
      continue;
    }
    sequences.push_back(std::move(seq));
  }
  if (sequences.empty()) throw EncodingError("no encodable events: corpus would be empty");
  return EncodedCorpus(alphabet, std::move(sequences));
}

std::vector<std::vector<std::string>> decode(const EncodedCorpus& corpus) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.sequences().size());
  for (const auto& seq : corpus.sequences()) {
    std::vector<std::string> names;
    names.reserve(seq.size());
    for (const int o : seq.observations) names.push_back(corpus.alphabet()[static_cast<std::size_t>(o)]);
    out.push_back(std::move(names));
  }
  return out;
}

void write_csv(std::ostream& out, const EncodedCorpus& corpus) {
  using namespace std::chrono;
  const sys_seconds base = sys_days{year{2020} / January / 1};
  out << "session_id,timestamp,action\n";
  for (const auto& seq : corpus.sequences()) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      out << seq.session_id << ',' << format_utc(base + seconds{static_cast<long long>(t)}) << ','
          << corpus.alphabet()[static_cast<std::size_t>(seq.observations[t])] << '\n';
    }
  }
}

}  // namespace tactics
