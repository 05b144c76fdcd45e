#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rsor/bytes.hpp"
#include "rsor/events.hpp"
#include "rsor/rng.hpp"

namespace rsor {

/// Who is calling into F_RSOR. The environment may only act through honest
/// parties and the adversary only through corrupted ones; the
/// adversary-only messages (DeliverOnion, Tag, DeliverMessage,
/// DeliverReply) reject environment callers.
enum class Role { environment, adversary };

enum class Direction { forward, backward };

struct AbstractOnion {
  std::string sid;
  std::string sender;
  /// R for a forward onion, P_r for a reply.
  std::string recipient;
  /// nullopt stands for an absent message.
  std::optional<Bytes> message;
  std::vector<std::string> path;
  std::vector<std::string> reply_path;
  std::size_t i = 0;
  Direction d = Direction::forward;
};

/// Executable F_RSOR. Every output is recorded as an Event with
/// actor "F_RSOR". Outputs to a party carry {"party": name} and are
/// environment-visible; outputs to the adversary carry {"to": "S"}.
class IdealFunctionality {
 public:
  IdealFunctionality(std::set<std::string> bad, std::size_t max_hops, Rng rng,
                     std::size_t id_len = 16);

  bool process_new_onion(Role caller, const std::string& sender, const std::string& receiver,
                         std::optional<Bytes> m, const std::vector<std::string>& path,
                         const std::vector<std::string>& reply_path);
  bool deliver_onion(Role caller, const std::string& tid);
  bool forward_onion(Role caller, const std::string& party, const std::string& tid);
  bool tag(Role caller, const std::string& tid);
  bool deliver_message(Role caller, const std::string& relay, ByteView m,
                       const std::optional<std::string>& rid, const std::string& receiver);
  bool initiate_reply(Role caller, const std::string& receiver, const std::string& relay,
                      ByteView m, const std::string& rid);
  bool deliver_reply(Role caller, const std::string& receiver, const std::string& relay,
                     ByteView m, const std::string& rid);
  bool bypass_reply(Role caller, const std::string& relay, ByteView m, const std::string& tid);

  const std::vector<Event>& outputs() const { return log_.events(); }
  EventLog& log() { return log_; }

  bool is_bad(const std::string& party) const { return bad_.contains(party); }
  std::size_t pending_deliveries() const { return l_o_.size(); }

 private:
  struct PendingDelivery {
    std::string tid;
    AbstractOnion onion;
    std::size_t j;
  };
  struct BackEntry {
    std::string sender;
    std::vector<std::string> path;
    std::vector<std::string> reply_path;
    std::string origin;
    std::string sid;
  };
  struct HeldReply {
    Bytes m;
    std::string tid;
  };

  std::string fresh();
  const std::string& party_at(const AbstractOnion& o, std::size_t k) const;
  bool permitted(Role caller, const std::string& party) const;

  void to_party(const std::string& party, std::string kind, ojson fields);
  void to_adversary(std::string kind, ojson fields);

  void process_new_reply(ByteView m, const std::string& tid);
  void out_cor_sender(const std::string& sender, const std::string& sid,
                      const std::string& recipient, const std::optional<Bytes>& m,
                      const std::vector<std::string>& path,
                      const std::vector<std::string>& reply_path, const std::string& tid,
                      Direction d);
  void to_relay(const AbstractOnion& o);
  void setup_reply(const AbstractOnion& o, const std::string& rid);
  void leak_message(const AbstractOnion& o);
  void leak_reply(const AbstractOnion& o);
  void next_step(const AbstractOnion& o);

  std::set<std::string> bad_;
  std::size_t max_hops_;
  Rng rng_;
  std::size_t id_len_;
  std::set<std::string> minted_;
  EventLog log_;

  std::vector<PendingDelivery> l_o_;
  std::map<std::string, std::map<std::string, AbstractOnion>> b_;
  std::map<std::string, std::map<std::string, HeldReply>> b_r_;
  std::set<std::string> l_tag_;
  std::map<std::string, BackEntry> back_;
  std::map<std::string, std::string> id_fwd_;
  std::map<std::string, std::map<std::string, std::string>> rep_;
};

/// Rewrites F_RSOR party outputs as if the party had emitted them (actor
/// becomes the party, the "party" field is removed); other records are
/// dropped.
std::vector<Event> ideal_party_view(const std::vector<Event>& outputs);

}  // namespace rsor
