#include <doctest.h>

#include <set>

#include "ideal_driver.hpp"

using namespace rsor;
using testing_support::drive_ideal;
using testing_support::honest_scenario;

namespace {

std::vector<std::string> path(std::initializer_list<const char*> names) {
  return {names.begin(), names.end()};
}

std::size_t count(const std::vector<Event>& ev, std::string_view kind) {
  std::size_t n = 0;
  for (const auto& e : ev) n += e.kind == kind;
  return n;
}

const Event* find(const std::vector<Event>& ev, std::string_view kind) {
  for (const auto& e : ev) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("ideal") {
  TEST_CASE("overlong paths are rejected") {
    IdealFunctionality f({}, 5, Rng(1));
    auto six = path({"P1", "P2", "P3", "P4", "P5", "P6"});
    CHECK_FALSE(f.process_new_onion(Role::environment, "S", "R", Bytes{1}, six, {}));
    CHECK_FALSE(f.process_new_onion(Role::environment, "S", "R", Bytes{1}, path({"P1"}), six));
    CHECK(f.outputs().empty());
    CHECK(f.process_new_onion(Role::environment, "S", "R", Bytes{1}, path({"P1"}), {}));
  }

  TEST_CASE("capability roles") {
    IdealFunctionality f({"B"}, 5, Rng(1));
    CHECK_FALSE(f.process_new_onion(Role::adversary, "S", "R", Bytes{1}, path({"P1"}), {}));
    CHECK_FALSE(f.process_new_onion(Role::environment, "B", "R", Bytes{1}, path({"P1"}), {}));
    CHECK_FALSE(f.deliver_onion(Role::environment, "x"));
    CHECK_FALSE(f.tag(Role::environment, "x"));
    CHECK_FALSE(f.deliver_message(Role::environment, "P1", Bytes{1}, std::nullopt, "R"));
  }

  TEST_CASE("honest path leaks only hop notifications before the exit") {
    IdealFunctionality f({}, 5, Rng(2));
    f.process_new_onion(Role::environment, "S", "R", Bytes{7}, path({"P1", "P2", "P3"}), {});
    for (int hop = 0; hop < 3; ++hop) {
      const Event* h = nullptr;
      for (const auto& e : f.outputs()) {
        if (e.kind == "hop") h = &e;
      }
      REQUIRE(h);
      std::string tid = h->fields["tid"];
      f.deliver_onion(Role::adversary, tid);
      const Event& rec = f.outputs().back();
      REQUIRE(rec.kind == "onion-received");
      CHECK(rec.fields["tid"] != tid);
      f.forward_onion(Role::environment, rec.fields["party"], rec.fields["tid"]);
    }
    std::set<std::string> kinds;
    for (const auto& e : f.outputs()) {
      if (e.vis == Visibility::adversary) kinds.insert(e.kind);
      CHECK_FALSE(e.fields.contains("path"));
    }
    CHECK(kinds == std::set<std::string>{"hop", "leak-message"});
    const Event* leak = find(f.outputs(), "leak-message");
    CHECK(leak->fields["via"].empty());
    CHECK(leak->fields["from"] == "P3");
    CHECK(count(f.outputs(), "message-sent") == 1);
  }

  TEST_CASE("corrupted sender leaks everything") {
    IdealFunctionality f({"S"}, 5, Rng(3));
    CHECK(f.process_new_onion(Role::adversary, "S", "R", Bytes{7}, path({"P1", "P2"}), path({"P3", "S"})));
    const Event* leak = find(f.outputs(), "leak-sender");
    REQUIRE(leak);
    CHECK(leak->fields["receiver"] == "R");
    CHECK(leak->fields["message"] == "07");
    CHECK(leak->fields["path"] == ojson::array({"P1", "P2"}));
    CHECK(leak->fields["reply_path"] == ojson::array({"P3", "S"}));
  }

  TEST_CASE("tagged onion fails integrity at an honest exit") {
    IdealFunctionality f({"P1"}, 5, Rng(4));
    f.process_new_onion(Role::environment, "S", "R", Bytes{7}, path({"P1", "P2"}), {});
    std::string tid = find(f.outputs(), "hop")->fields["tid"];
    CHECK(f.tag(Role::adversary, tid));
    f.deliver_onion(Role::adversary, tid);
    const Event& rec = f.outputs().back();
    f.forward_onion(Role::environment, rec.fields["party"], rec.fields["tid"]);
    const Event* fail = find(f.outputs(), "integrity-fail");
    REQUIRE(fail);
    CHECK(fail->fields["party"] == "P2");
    CHECK(fail->vis == Visibility::environment);
    CHECK(count(f.outputs(), "message-sent") == 0);
    CHECK(count(f.outputs(), "leak-message") == 0);
  }

  TEST_CASE("tagged onion with corrupted relays remaining") {
    IdealFunctionality f({"P1", "P3"}, 5, Rng(5));
    f.process_new_onion(Role::environment, "S", "R", Bytes{7}, path({"P1", "P2", "P3"}), {});
    std::string tid = find(f.outputs(), "hop")->fields["tid"];
    f.tag(Role::adversary, tid);
    f.deliver_onion(Role::adversary, tid);
    const Event& rec = f.outputs().back();
    f.forward_onion(Role::environment, rec.fields["party"], rec.fields["tid"]);
    const Event* t = find(f.outputs(), "tagged");
    REQUIRE(t);
    CHECK(t->fields["from"] == "P2");
    CHECK(t->fields["via"] == ojson::array({"P3"}));
    CHECK(f.outputs().back().kind == "forwarded");
  }

  TEST_CASE("tagged reply is not delivered to an honest reply receiver") {
    IdealFunctionality f({"P1", "P2"}, 5, Rng(6));
    f.process_new_onion(Role::environment, "S", "R", Bytes{7}, path({"P1"}), path({"P2", "S"}));
    const Event* rt = find(f.outputs(), "reply-tid");
    REQUIRE(rt);
    CHECK(rt->fields["reply_path_prefix"] == ojson::array({"P2", "S"}));
    CHECK(f.bypass_reply(Role::adversary, "P1", Bytes{9}, rt->fields["tid"]));
    const Event* hop = nullptr;
    for (const auto& e : f.outputs()) {
      if (e.kind == "hop") hop = &e;
    }
    REQUIRE(hop);
    CHECK(hop->fields["to"] == "S");
    CHECK(find(f.outputs(), "tid-belongs"));
    std::string tid = hop->fields["tid"];
    f.tag(Role::adversary, tid);
    const std::size_t before = f.outputs().size();
    CHECK(f.deliver_onion(Role::adversary, tid));
    CHECK(f.outputs().size() == before);
  }

  TEST_CASE("reply round trip and single-use bookkeeping") {
    IdealFunctionality f({}, 5, Rng(7));
    f.process_new_onion(Role::environment, "S", "R", Bytes{7}, path({"P1"}), path({"P2", "S"}));
    f.deliver_onion(Role::adversary, find(f.outputs(), "hop")->fields["tid"]);
    f.forward_onion(Role::environment, "P1", f.outputs().back().fields["tid"]);
    std::string rid = find(f.outputs(), "reply-rid")->fields["rid"];
    CHECK(f.deliver_reply(Role::adversary, "R", "P1", Bytes{9}, rid));
    std::string t = f.outputs().back().fields["tid"];
    CHECK(f.outputs().back().kind == "reply-onion-ready");
    CHECK(f.deliver_reply(Role::adversary, "R", "P1", Bytes{9}, rid));
    CHECK(f.outputs().back().kind == "reply-received");
    f.forward_onion(Role::environment, "P1", t);
    for (int k = 0; k < 2; ++k) {
      const Event* hop = nullptr;
      for (const auto& e : f.outputs()) {
        if (e.kind == "hop") hop = &e;
      }
      f.deliver_onion(Role::adversary, hop->fields["tid"]);
      if (f.outputs().back().kind == "onion-received") {
        f.forward_onion(Role::environment, f.outputs().back().fields["party"],
                        f.outputs().back().fields["tid"]);
      }
    }
    const Event* got = find(f.outputs(), "got-reply");
    REQUIRE(got);
    CHECK(got->fields["party"] == "S");
    CHECK(got->fields["message"] == "09");
  }

  TEST_CASE("fresh identifiers never repeat") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::set<std::string> ids;
      for (const auto& e : drive_ideal(honest_scenario(seed), seed)) {
        for (const char* k : {"tid", "rid"}) {
          if (e.fields.contains(k) && e.kind != "reply-request" && e.kind != "reply-received") {
            const std::string id = e.fields[k];
            if (e.kind == "hop" || e.kind == "onion-received" || e.kind == "reply-rid" ||
                e.kind == "reply-onion-ready") {
              CHECK(ids.insert(id).second);
            }
          }
        }
      }
    }
  }

  TEST_CASE("trace correspondence with the real protocol") {
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
      Scenario s = honest_scenario(seed);
      auto ideal = canonical_multiset(ideal_party_view(drive_ideal(s, seed)));
      auto real = canonical_multiset(run_scenario(s, seed).log.environment_view());
      CHECK(ideal == real);
    }
  }

  TEST_CASE("canonical form ignores identifier renaming only") {
    std::vector<Event> a{{0, "X", "onion-received", {{"tid", "aa"}, {"from", "Y"}}, Visibility::environment},
                         {1, "X", "forwarded", {{"to", "Z"}}, Visibility::environment}};
    auto b = a;
    b[0].fields["tid"] = "bb";
    b[0].time = 9;
    CHECK(canonical_multiset(a) == canonical_multiset(b));
    b[1].fields["to"] = "W";
    CHECK(canonical_multiset(a) != canonical_multiset(b));
  }
}
