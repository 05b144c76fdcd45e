#include "rsor/events.hpp"

#include <algorithm>
#include <map>

namespace rsor {

std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::environment: return "env";
    case Visibility::adversary: return "adv";
    case Visibility::diagnostic: return "diag";
  }
  return "?";
}

ojson Event::to_json() const {
  ojson j{{"time", time}, {"actor", actor}, {"kind", kind}};
  for (auto it = fields.begin(); it != fields.end(); ++it) j[it.key()] = it.value();
  j["vis"] = std::string(to_string(vis));
  return j;
}

void EventLog::emit(std::string actor, std::string kind, ojson fields, Visibility vis) {
  events_.push_back(Event{now_, std::move(actor), std::move(kind), std::move(fields), vis});
}

std::vector<Event> EventLog::filtered(Visibility vis) const {
  std::vector<Event> out;
  std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
               [vis](const Event& e) { return e.vis == vis; });
  return out;
}

std::string EventLog::jsonl() const { return to_jsonl(events_); }

std::string to_jsonl(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

namespace {

const char* const kIdKeys[] = {"tid", "rid"};

ojson stripped(const Event& e) {
  ojson j{{"actor", e.actor}, {"kind", e.kind}};
  for (auto it = e.fields.begin(); it != e.fields.end(); ++it) {
    bool id = false;
    for (const char* k : kIdKeys) id = id || it.key() == k;
    j[it.key()] = id ? ojson("*") : it.value();
  }
  return j;
}

}  // namespace

std::vector<std::string> canonical_multiset(const std::vector<Event>& events) {
  std::map<std::string, std::vector<std::string>> contexts;
  for (const auto& e : events) {
    for (const char* k : kIdKeys) {
      if (e.fields.contains(k) && e.fields[k].is_string()) {
        contexts[std::string(k) + ":" + e.fields[k].get<std::string>()].push_back(stripped(e).dump());
      }
    }
  }
  std::map<std::string, std::string> label;
  for (auto& [id, ctx] : contexts) {
    std::sort(ctx.begin(), ctx.end());
    std::string sig;
    for (const auto& c : ctx) sig += c + "|";
    label[id] = sig;
  }
  std::vector<std::string> out;
  for (const auto& e : events) {
    ojson j = stripped(e);
    for (const char* k : kIdKeys) {
      if (e.fields.contains(k) && e.fields[k].is_string()) {
        j[k] = label[std::string(k) + ":" + e.fields[k].get<std::string>()];
      }
    }
    out.push_back(j.dump());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rsor
