#include "rsor/ideal.hpp"

#include <algorithm>

namespace rsor {

namespace {

ojson names(const std::vector<std::string>& v, std::size_t from, std::size_t to) {
  ojson out = ojson::array();
  for (std::size_t k = from; k < to && k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

ojson msg_field(const std::optional<Bytes>& m) {
  return m ? ojson(to_hex(*m)) : ojson(nullptr);
}

std::string_view dir(Direction d) { return d == Direction::forward ? "f" : "b"; }

}  // namespace

IdealFunctionality::IdealFunctionality(std::set<std::string> bad, std::size_t max_hops, Rng rng,
                                       std::size_t id_len)
    : bad_(std::move(bad)), max_hops_(max_hops), rng_(std::move(rng)), id_len_(id_len) {}

std::string IdealFunctionality::fresh() {
  for (;;) {
    std::string id = to_hex(rng_.bytes(id_len_));
    if (minted_.insert(id).second) return id;
  }
}

const std::string& IdealFunctionality::party_at(const AbstractOnion& o, std::size_t k) const {
  return k == 0 ? o.sender : o.path.at(k - 1);
}

bool IdealFunctionality::permitted(Role caller, const std::string& party) const {
  return (caller == Role::adversary) == bad_.contains(party);
}

void IdealFunctionality::to_party(const std::string& party, std::string kind, ojson fields) {
  ojson f{{"party", party}};
  for (auto it = fields.begin(); it != fields.end(); ++it) f[it.key()] = it.value();
  log_.emit("F_RSOR", std::move(kind), std::move(f), Visibility::environment);
}

void IdealFunctionality::to_adversary(std::string kind, ojson fields) {
  ojson f{{"to", "S"}};
  for (auto it = fields.begin(); it != fields.end(); ++it) f[it.key()] = it.value();
  log_.emit("F_RSOR", std::move(kind), std::move(f), Visibility::adversary);
}

bool IdealFunctionality::process_new_onion(Role caller, const std::string& sender,
                                           const std::string& receiver, std::optional<Bytes> m,
                                           const std::vector<std::string>& path,
                                           const std::vector<std::string>& reply_path) {
  if (!permitted(caller, sender)) return false;
  if (path.empty() || path.size() > max_hops_ || reply_path.size() > max_hops_) return false;
  AbstractOnion o{fresh(), sender, receiver, std::move(m), path, reply_path, 0, Direction::forward};
  out_cor_sender(o.sender, o.sid, o.recipient, o.message, o.path, o.reply_path, "start",
                 Direction::forward);
  next_step(o);
  return true;
}

void IdealFunctionality::process_new_reply(ByteView m, const std::string& tid) {
  auto it = back_.find(tid);
  if (it == back_.end()) return;
  BackEntry e = std::move(it->second);
  back_.erase(it);
  std::string sid = fresh();
  id_fwd_[sid] = e.sid;
  AbstractOnion o{sid, e.origin, e.sender, to_bytes(m), e.reply_path, {}, 0, Direction::backward};
  out_cor_sender(e.origin, sid, e.sender, o.message, e.path, e.reply_path, "start",
                 Direction::backward);
  next_step(o);
}

bool IdealFunctionality::deliver_onion(Role caller, const std::string& tid) {
  if (caller != Role::adversary) return false;
  auto it = std::find_if(l_o_.begin(), l_o_.end(),
                         [&](const PendingDelivery& p) { return p.tid == tid; });
  if (it == l_o_.end()) return false;
  AbstractOnion o = std::move(it->onion);
  const std::size_t j = it->j;
  l_o_.erase(it);
  o.i = j;
  if (o.d == Direction::backward && j == o.path.size()) {
    if (o.message && !l_tag_.contains(o.sid)) {
      to_party(o.recipient, "got-reply", {{"message", to_hex(*o.message)}});
    }
    return true;
  }
  std::string t = fresh();
  to_party(party_at(o, j), "onion-received", {{"tid", t}, {"from", party_at(o, j - 1)}});
  b_[party_at(o, j)].emplace(t, std::move(o));
  return true;
}

bool IdealFunctionality::forward_onion(Role caller, const std::string& party,
                                       const std::string& tid) {
  if (!permitted(caller, party)) return false;
  if (auto it = b_[party].find(tid); it != b_[party].end()) {
    AbstractOnion o = std::move(it->second);
    b_[party].erase(it);
    next_step(o);
    return true;
  }
  if (auto it = b_r_[party].find(tid); it != b_r_[party].end()) {
    HeldReply h = std::move(it->second);
    b_r_[party].erase(it);
    process_new_reply(h.m, h.tid);
    return true;
  }
  return false;
}

bool IdealFunctionality::tag(Role caller, const std::string& tid) {
  if (caller != Role::adversary) return false;
  for (const auto& p : l_o_) {
    if (p.tid == tid) {
      l_tag_.insert(p.onion.sid);
      return true;
    }
  }
  return false;
}

void IdealFunctionality::out_cor_sender(const std::string& sender, const std::string& sid,
                                        const std::string& recipient,
                                        const std::optional<Bytes>& m,
                                        const std::vector<std::string>& path,
                                        const std::vector<std::string>& reply_path,
                                        const std::string& tid, Direction d) {
  if (d == Direction::forward && bad_.contains(sender)) {
    to_adversary("leak-sender", {{"tid", tid},
                                 {"from", sender},
                                 {"sid", sid},
                                 {"receiver", recipient},
                                 {"message", msg_field(m)},
                                 {"path", path},
                                 {"reply_path", reply_path},
                                 {"d", dir(d)}});
  } else if (d == Direction::backward && bad_.contains(recipient)) {
    auto fwd = id_fwd_.find(sid);
    to_adversary("leak-reply-sender",
                 {{"tid", tid},
                  {"from", sender},
                  {"sid", sid},
                  {"reply_receiver", recipient},
                  {"message", msg_field(m)},
                  {"path", path},
                  {"reply_path", reply_path},
                  {"d", dir(d)},
                  {"replying_to", fwd == id_fwd_.end() ? ojson(nullptr) : ojson(fwd->second)}});
  }
}

void IdealFunctionality::to_relay(const AbstractOnion& o) {
  std::size_t j = o.i + 1;
  while (j < o.path.size() && bad_.contains(party_at(o, j))) ++j;
  std::string tid = fresh();
  to_adversary("hop", {{"from", party_at(o, o.i)},
                       {"tid", tid},
                       {"to", party_at(o, j)},
                       {"via", names(o.path, o.i, j - 1)}});
  to_party(party_at(o, o.i), "forwarded", {{"to", party_at(o, o.i + 1)}});
  // The |P| argument takes the first path slot.
  if (o.d == Direction::forward && bad_.contains(o.sender)) {
    to_adversary("leak-sender", {{"tid", tid},
                                 {"from", o.sender},
                                 {"sid", o.sid},
                                 {"receiver", o.recipient},
                                 {"message", msg_field(o.message)},
                                 {"path", o.path.size()},
                                 {"reply_path", o.path},
                                 {"d", dir(o.d)}});
  } else {
    out_cor_sender(o.sender, o.sid, o.recipient, o.message, o.path, o.reply_path, tid, o.d);
  }
  if (o.d == Direction::backward && o.i == 0) {
    to_adversary("tid-belongs", {{"tid", tid}, {"sid", o.sid}});
  }
  l_o_.push_back(PendingDelivery{tid, o, j});
}

void IdealFunctionality::setup_reply(const AbstractOnion& o, const std::string& rid) {
  std::string tid = fresh();
  back_[tid] = BackEntry{o.sender, o.path, o.reply_path, party_at(o, o.i), o.sid};
  if (o.i == o.path.size()) {
    rep_[party_at(o, o.i)][rid] = tid;
    to_adversary("reply-rid", {{"rid", rid}});
  } else {
    std::size_t k = 0;
    while (k < o.reply_path.size() && bad_.contains(o.reply_path[k])) ++k;
    to_adversary("reply-tid", {{"tid", tid}, {"reply_path_prefix", names(o.reply_path, 0, k + 1)}});
  }
}

void IdealFunctionality::leak_message(const AbstractOnion& o) {
  if (!o.message) return;
  out_cor_sender(o.sender, o.sid, o.recipient, o.message, o.path, o.reply_path, "end", o.d);
  if (!o.reply_path.empty()) setup_reply(o, fresh());
  if (o.i == o.path.size()) {
    to_party(party_at(o, o.i), "message-sent", {{"to", o.recipient}});
  } else {
    to_party(party_at(o, o.i), "forwarded", {{"to", party_at(o, o.i + 1)}});
  }
  to_adversary("leak-message", {{"from", party_at(o, o.i)},
                                {"message", to_hex(*o.message)},
                                {"receiver", o.recipient},
                                {"via", names(o.path, o.i, o.path.size())}});
}

void IdealFunctionality::leak_reply(const AbstractOnion& o) {
  std::string tid = fresh();
  to_adversary("leak-reply", {{"from", party_at(o, o.i)},
                              {"tid", tid},
                              {"message", msg_field(o.message)},
                              {"reply_receiver", o.recipient},
                              {"via", names(o.path, o.i, o.path.size() - 1)}});
  to_party(party_at(o, o.i), "forwarded", {{"to", party_at(o, o.i + 1)}});
  out_cor_sender(o.sender, o.sid, o.recipient, o.message, o.path, o.reply_path, tid,
                 Direction::backward);
}

void IdealFunctionality::next_step(const AbstractOnion& o) {
  const std::size_t n = o.path.size();
  bool rest_bad = true;
  for (std::size_t k = o.i + 1; k <= n; ++k) rest_bad = rest_bad && bad_.contains(party_at(o, k));
  if (!(rest_bad || o.i == n)) {
    to_relay(o);
    return;
  }
  if (l_tag_.contains(o.sid)) {
    out_cor_sender(o.sender, o.sid, o.recipient, o.message, o.path, {}, "tagged", o.d);
    if (o.i < n) {
      to_adversary("tagged", {{"from", party_at(o, o.i)}, {"via", names(o.path, o.i, n)}});
      to_party(party_at(o, o.i), "forwarded", {{"to", party_at(o, o.i + 1)}});
    } else {
      to_party(party_at(o, o.i), "integrity-fail", ojson::object());
    }
    return;
  }
  if (o.d == Direction::forward) {
    leak_message(o);
  } else {
    leak_reply(o);
  }
}

bool IdealFunctionality::deliver_message(Role caller, const std::string& relay, ByteView m,
                                         const std::optional<std::string>& rid,
                                         const std::string& receiver) {
  if (caller != Role::adversary) return false;
  to_party(receiver, "message-delivered", {{"from", relay}, {"message", to_hex(m)}});
  if (rid) to_party(receiver, "message-repliable", {{"rid", *rid}});
  return true;
}

bool IdealFunctionality::initiate_reply(Role caller, const std::string& receiver,
                                        const std::string& relay, ByteView m,
                                        const std::string& rid) {
  if (!permitted(caller, receiver)) return false;
  to_adversary("reply-request",
               {{"from", receiver}, {"rid", rid}, {"message", to_hex(m)}, {"via", relay}});
  return true;
}

bool IdealFunctionality::deliver_reply(Role caller, const std::string& receiver,
                                       const std::string& relay, ByteView m,
                                       const std::string& rid) {
  if (caller != Role::adversary) return false;
  to_party(relay, "reply-received", {{"from", receiver}, {"message", to_hex(m)}, {"rid", rid}});
  auto& rep = rep_[relay];
  auto it = rep.find(rid);
  if (it == rep.end()) return true;
  std::string tid = std::move(it->second);
  rep.erase(it);
  std::string t = fresh();
  b_r_[relay].emplace(t, HeldReply{to_bytes(m), std::move(tid)});
  to_party(relay, "reply-onion-ready", {{"tid", t}});
  return true;
}

bool IdealFunctionality::bypass_reply(Role caller, const std::string& relay, ByteView m,
                                      const std::string& tid) {
  if (caller != Role::adversary || !bad_.contains(relay)) return false;
  if (!back_.contains(tid)) return false;
  process_new_reply(m, tid);
  return true;
}

std::vector<Event> ideal_party_view(const std::vector<Event>& outputs) {
  std::vector<Event> out;
  for (const auto& e : outputs) {
    if (e.vis != Visibility::environment || !e.fields.contains("party")) continue;
    Event p = e;
    p.actor = e.fields["party"].get<std::string>();
    p.fields.erase("party");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace rsor
