#include "snp/referral_graph.hpp"

#include <algorithm>

#include "snp/error.hpp"

namespace snp {

using nlohmann::json;

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::existing_member: return "existing_member";
    case Kind::direct_recruit: return "direct_recruit";
    case Kind::indirect_recruit: return "indirect_recruit";
    case Kind::non_member_sharer: return "non_member_sharer";
    case Kind::passive_clicker: return "passive_clicker";
  }
  return "unknown";
}

std::string_view to_string(ClickOutcome outcome) {
  switch (outcome) {
    case ClickOutcome::attributed: return "attributed";
    case ClickOutcome::already_attributed: return "already_attributed";
    case ClickOutcome::self_click_ignored: return "self_click_ignored";
  }
  return "unknown";
}

namespace {

void check_visitor_id(std::string_view id) {
  if (id.empty()) throw Error(ErrorCode::invalid_argument, "empty visitor id");
  if (id == kStaffRoot) {
    throw Error(ErrorCode::invalid_argument, "visitor id '" + std::string(id) + "' is reserved");
  }
}

}  // namespace

Participant& ReferralGraph::ensure_visitor(const VisitorId& id) {
  check_visitor_id(id);
  auto [it, inserted] = participants_.try_emplace(id);
  if (inserted) it->second.id = id;
  return it->second;
}

Participant& ReferralGraph::staff_root() {
  const VisitorId id(kStaffRoot);
  auto [it, inserted] = participants_.try_emplace(id);
  if (inserted) {
    it->second.id = id;
    it->second.is_staff = true;
  }
  return it->second;
}

const ReferralToken& ReferralGraph::add_token(std::string token, const VisitorId& owner,
                                              Timestamp now, bool staff,
                                              std::optional<std::string> email_hash,
                                              bool consent) {
  if (token.empty()) throw Error(ErrorCode::invalid_argument, "empty token");
  if (tokens_.contains(token)) {
    throw Error(ErrorCode::invalid_argument, "duplicate token '" + token + "'");
  }
  Participant& p = ensure_visitor(owner);
  if (staff) p.is_staff = true;
  if (email_hash && !p.email_hash) p.email_hash = email_hash;

  ReferralToken rec;
  rec.token = token;
  rec.owner = owner;
  rec.created_at = now;
  rec.staff = staff;
  rec.email_hash = std::move(email_hash);
  rec.consent = consent;
  if (staff) {
    staff_root();
    if (!canonical_staff_token_) {
      rec.staff_canonical = true;
      canonical_staff_token_ = token;
    }
  }
  tokens_by_owner_[owner].push_back(token);
  return tokens_.emplace(std::move(token), std::move(rec)).first->second;
}

std::string ReferralGraph::fresh_token(const TokenSource& source) const {
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::string candidate = source();
    if (!candidate.empty() && !tokens_.contains(candidate)) return candidate;
  }
  throw Error(ErrorCode::io, "token source keeps producing collisions");
}

const ReferralToken& ReferralGraph::issue_token(const VisitorId& owner, Timestamp now, bool staff,
                                                const TokenSource& source,
                                                std::optional<std::string> email_hash,
                                                bool consent) {
  return add_token(fresh_token(source), owner, now, staff, std::move(email_hash), consent);
}

ClickResult ReferralGraph::record_click(std::string_view token, const VisitorId& visitor,
                                        Timestamp now, std::optional<std::string> country) {
  const ReferralToken* tok = find_token(token);
  if (tok == nullptr) {
    throw Error(ErrorCode::unknown_token, "unknown token '" + std::string(token) + "'");
  }
  const VisitorId owner = resolve_owner(*tok);
  const bool staff_token = tok->staff;
  const std::string via(tok->token);

  Participant& p = ensure_visitor(visitor);
  ++click_events_;
  if (country && !p.country) p.country = std::move(country);

  auto current_parent = [&]() -> VisitorId {
    const auto it = parents_.find(visitor);
    return it == parents_.end() ? VisitorId{} : it->second.parent;
  };

  if (owner == visitor || (staff_token && p.is_staff)) {
    return {ClickOutcome::self_click_ignored, current_parent()};
  }
  if (parents_.contains(visitor)) {
    return {ClickOutcome::already_attributed, current_parent()};
  }
  // A root clicking a link from its own subtree would close a cycle; this is
  // the same self-reward loop as a direct self-click.
  for (auto it = parents_.find(owner); it != parents_.end(); it = parents_.find(it->second.parent)) {
    if (it->second.parent == visitor) return {ClickOutcome::self_click_ignored, {}};
  }

  parents_.emplace(visitor, ReferralEdge{visitor, owner, via, now});
  if (!p.first_click_at) p.first_click_at = now;
  return {ClickOutcome::attributed, owner};
}

const Participant& ReferralGraph::register_member(const VisitorId& visitor, MemberId member_id,
                                                  Timestamp now) {
  if (member_id.empty()) throw Error(ErrorCode::invalid_argument, "empty member id");
  check_visitor_id(visitor);
  if (const auto it = participants_.find(visitor);
      it != participants_.end() && it->second.membership) {
    throw Error(ErrorCode::already_registered, "visitor '" + visitor + "' is already a member");
  }
  if (members_.contains(member_id)) {
    throw Error(ErrorCode::already_registered, "member id '" + member_id + "' is already taken");
  }
  Participant& p = ensure_visitor(visitor);
  members_.emplace(member_id, visitor);
  p.membership = Membership{std::move(member_id), now};
  return p;
}

bool ReferralGraph::is_established(const Participant& p) const {
  if (p.is_staff) return true;
  if (!p.membership) return false;
  return !p.first_click_at || p.membership->created_at <= *p.first_click_at;
}

bool ReferralGraph::is_new_recruit(const Participant& p) const {
  return !p.is_staff && p.membership && p.first_click_at && *p.first_click_at < p.membership->created_at;
}

Classification ReferralGraph::classify(const VisitorId& visitor) const {
  const Participant& p = at(visitor);
  if (is_established(p)) {
    // Staff nodes are not members; they classify by what they did.
    if (p.membership) return {Kind::existing_member, 0};
    return {owns_token(p.id) ? Kind::non_member_sharer : Kind::passive_clicker, 0};
  }

  // Distance to the nearest established ancestor. A chain that never reaches
  // one counts its root as one step removed from an established source.
  std::optional<std::uint32_t> degrees;
  {
    std::uint32_t d = 0;
    VisitorId cur = p.id;
    for (const ReferralEdge* e = parent_edge(cur); e != nullptr; e = parent_edge(cur)) {
      ++d;
      if (is_established(at(e->parent))) {
        degrees = d;
        break;
      }
      cur = e->parent;
    }
    if (!degrees && d > 0) degrees = d + 1;
  }

  if (is_new_recruit(p)) {
    return {*degrees == 1 ? Kind::direct_recruit : Kind::indirect_recruit, degrees};
  }
  return {owns_token(p.id) ? Kind::non_member_sharer : Kind::passive_clicker, degrees};
}

std::vector<VisitorId> ReferralGraph::chain_of(const VisitorId& visitor) const {
  at(visitor);
  std::vector<VisitorId> chain;
  for (const ReferralEdge* e = parent_edge(visitor); e != nullptr; e = parent_edge(e->parent)) {
    chain.push_back(e->parent);
  }
  return chain;
}

NetworkCounts ReferralGraph::network_counts() const {
  NetworkCounts counts;
  for (const auto& [id, p] : participants_) {
    if (p.is_staff) continue;
    if (p.first_click_at) ++counts.clickers;
    if (owns_token(id)) ++counts.link_creators;
    if (is_new_recruit(p)) {
      ++counts.new_recruits;
      if (classify(id).kind == Kind::direct_recruit) {
        ++counts.direct;
      } else {
        ++counts.indirect;
      }
    }
  }
  return counts;
}

std::optional<std::string> ReferralGraph::find_invariant_violation() const {
  for (const auto& [child, e] : parents_) {
    if (e.child != child) return "edge keyed by '" + child + "' names child '" + e.child + "'";
    if (e.child == e.parent) return "self edge at '" + child + "'";
    if (child == kStaffRoot) return "staff root has a parent";
    const Participant* c = find(child);
    const Participant* p = find(e.parent);
    if (c == nullptr || p == nullptr) return "edge '" + child + "' -> '" + e.parent + "' names an unknown participant";
    if (!c->first_click_at || *c->first_click_at != e.established_at) {
      return "edge time of '" + child + "' differs from its first click";
    }
    if (!tokens_.contains(e.via_token)) return "edge of '" + child + "' cites unknown token";
  }
  // Acyclicity: every upward walk must end at a root. States are memoized so
  // the whole check is linear.
  enum class Mark : unsigned char { visiting, done };
  std::unordered_map<std::string_view, Mark> marks;
  marks.reserve(participants_.size());
  std::vector<std::string_view> path;
  for (const auto& [id, _] : participants_) {
    path.clear();
    std::string_view cur = id;
    while (true) {
      const auto m = marks.find(cur);
      if (m != marks.end()) {
        if (m->second == Mark::visiting) return "cycle through '" + std::string(cur) + "'";
        break;
      }
      marks.emplace(cur, Mark::visiting);
      path.push_back(cur);
      const auto e = parents_.find(std::string(cur));
      if (e == parents_.end()) break;
      cur = e->second.parent;
    }
    for (const auto v : path) marks[v] = Mark::done;
  }
  return std::nullopt;
}

const Participant* ReferralGraph::find(std::string_view visitor) const {
  const auto it = participants_.find(std::string(visitor));
  return it == participants_.end() ? nullptr : &it->second;
}

const Participant& ReferralGraph::at(std::string_view visitor) const {
  if (const Participant* p = find(visitor)) return *p;
  throw Error(ErrorCode::unknown_participant, "unknown participant '" + std::string(visitor) + "'");
}

const ReferralToken* ReferralGraph::find_token(std::string_view token) const {
  const auto it = tokens_.find(std::string(token));
  return it == tokens_.end() ? nullptr : &it->second;
}

const ReferralEdge* ReferralGraph::parent_edge(std::string_view visitor) const {
  const auto it = parents_.find(std::string(visitor));
  return it == parents_.end() ? nullptr : &it->second;
}

const VisitorId* ReferralGraph::find_member(std::string_view member_id) const {
  const auto it = members_.find(std::string(member_id));
  return it == members_.end() ? nullptr : &it->second;
}

const ReferralToken* ReferralGraph::token_for(std::string_view owner,
                                              std::string_view email_hash) const {
  const auto it = tokens_by_owner_.find(std::string(owner));
  if (it == tokens_by_owner_.end()) return nullptr;
  const ReferralToken* best = nullptr;
  for (const auto& t : it->second) {
    const ReferralToken& rec = tokens_.at(t);
    if (!rec.email_hash || *rec.email_hash != email_hash) continue;
    if (best == nullptr || std::tie(rec.created_at, rec.token) < std::tie(best->created_at, best->token)) {
      best = &rec;
    }
  }
  return best;
}

bool ReferralGraph::owns_token(std::string_view visitor) const {
  if (visitor == kStaffRoot) return canonical_staff_token_.has_value();
  return tokens_by_owner_.contains(std::string(visitor));
}

VisitorId ReferralGraph::resolve_owner(const ReferralToken& token) const {
  return token.staff ? VisitorId(kStaffRoot) : token.owner;
}

std::vector<VisitorId> ReferralGraph::sorted_ids() const {
  std::vector<VisitorId> ids;
  ids.reserve(participants_.size());
  for (const auto& [id, _] : participants_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

json ReferralGraph::to_json() const {
  json people = json::array();
  for (const auto& id : sorted_ids()) {
    const Participant& p = participants_.at(id);
    json j = {{"id", p.id}, {"staff", p.is_staff}};
    if (p.email_hash) j["email_hash"] = *p.email_hash;
    if (p.first_click_at) j["first_click_at"] = format_rfc3339(*p.first_click_at);
    if (p.membership) {
      j["member"] = {{"id", p.membership->member_id},
                     {"created_at", format_rfc3339(p.membership->created_at)}};
    }
    if (p.country) j["country"] = *p.country;
    people.push_back(std::move(j));
  }

  std::vector<const ReferralToken*> toks;
  toks.reserve(tokens_.size());
  for (const auto& [_, t] : tokens_) toks.push_back(&t);
  std::sort(toks.begin(), toks.end(), [](auto* a, auto* b) { return a->token < b->token; });
  json tokens = json::array();
  for (const ReferralToken* t : toks) {
    json j = {{"token", t->token},
              {"owner", t->owner},
              {"created_at", format_rfc3339(t->created_at)},
              {"staff", t->staff},
              {"canonical", t->staff_canonical},
              {"consent", t->consent}};
    if (t->email_hash) j["email_hash"] = *t->email_hash;
    tokens.push_back(std::move(j));
  }

  std::vector<const ReferralEdge*> es;
  es.reserve(parents_.size());
  for (const auto& [_, e] : parents_) es.push_back(&e);
  std::sort(es.begin(), es.end(), [](auto* a, auto* b) { return a->child < b->child; });
  json edges = json::array();
  for (const ReferralEdge* e : es) {
    edges.push_back({{"child", e->child},
                     {"parent", e->parent},
                     {"token", e->via_token},
                     {"at", format_rfc3339(e->established_at)}});
  }

  return {{"participants", std::move(people)},
          {"tokens", std::move(tokens)},
          {"edges", std::move(edges)},
          {"click_events", click_events_}};
}

ReferralGraph ReferralGraph::from_json(const json& doc) {
  ReferralGraph g;
  for (const auto& j : doc.at("participants")) {
    Participant p;
    p.id = j.at("id").get<std::string>();
    p.is_staff = j.at("staff").get<bool>();
    if (j.contains("email_hash")) p.email_hash = j["email_hash"].get<std::string>();
    if (j.contains("first_click_at")) {
      p.first_click_at = parse_rfc3339(j["first_click_at"].get<std::string>());
    }
    if (j.contains("member")) {
      p.membership = Membership{j["member"].at("id").get<std::string>(),
                                parse_rfc3339(j["member"].at("created_at").get<std::string>())};
      g.members_.emplace(p.membership->member_id, p.id);
    }
    if (j.contains("country")) p.country = j["country"].get<std::string>();
    g.participants_.emplace(p.id, std::move(p));
  }
  for (const auto& j : doc.at("tokens")) {
    ReferralToken t;
    t.token = j.at("token").get<std::string>();
    t.owner = j.at("owner").get<std::string>();
    t.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
    t.staff = j.at("staff").get<bool>();
    t.staff_canonical = j.at("canonical").get<bool>();
    t.consent = j.value("consent", false);
    if (j.contains("email_hash")) t.email_hash = j["email_hash"].get<std::string>();
    if (t.staff_canonical) g.canonical_staff_token_ = t.token;
    g.tokens_by_owner_[t.owner].push_back(t.token);
    g.tokens_.emplace(t.token, std::move(t));
  }
  for (const auto& j : doc.at("edges")) {
    ReferralEdge e{j.at("child").get<std::string>(), j.at("parent").get<std::string>(),
                   j.at("token").get<std::string>(), parse_rfc3339(j.at("at").get<std::string>())};
    g.parents_.emplace(e.child, std::move(e));
  }
  g.click_events_ = doc.at("click_events").get<std::uint64_t>();
  return g;
}

}  // namespace snp
