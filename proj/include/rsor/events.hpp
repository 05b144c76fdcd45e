#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace rsor {

using ojson = nlohmann::ordered_json;

enum class Visibility { environment, adversary, diagnostic };

std::string_view to_string(Visibility v);

/// One trace record. Serialized as a single JSON line:
/// {"time":..,"actor":..,"kind":..,<fields>,"vis":..}
struct Event {
  std::uint64_t time = 0;
  std::string actor;
  std::string kind;
  ojson fields = ojson::object();
  Visibility vis = Visibility::environment;

  ojson to_json() const;
};

class EventLog {
 public:
  void set_time(std::uint64_t t) { now_ = t; }
  std::uint64_t time() const { return now_; }

  void emit(std::string actor, std::string kind, ojson fields = ojson::object(),
            Visibility vis = Visibility::environment);

  const std::vector<Event>& events() const { return events_; }
  std::vector<Event> filtered(Visibility vis) const;
  std::vector<Event> environment_view() const { return filtered(Visibility::environment); }

  /// All records, one per line.
  std::string jsonl() const;

 private:
  std::uint64_t now_ = 0;
  std::vector<Event> events_;
};

std::string to_jsonl(const std::vector<Event>& events);

/// Canonical multiset form for comparing traces: time is dropped and every
/// "tid"/"rid" value is replaced by a label derived from the records it
/// occurs in, so traces that differ only by identifier renaming compare
/// equal. Each entry is a JSON string; the result is sorted.
std::vector<std::string> canonical_multiset(const std::vector<Event>& events);

}  // namespace rsor
