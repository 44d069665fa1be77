#include "snp/events.hpp"

#include "snp/error.hpp"

namespace snp {

using nlohmann::json;

std::string_view to_string(ProposalStatus status) {
  switch (status) {
    case ProposalStatus::semifinalist: return "semifinalist";
    case ProposalStatus::finalist: return "finalist";
    case ProposalStatus::popular_choice: return "popular_choice";
    case ProposalStatus::judges_choice: return "judges_choice";
    case ProposalStatus::grand_prize: return "grand_prize";
  }
  return "unknown";
}

ProposalStatus parse_proposal_status(std::string_view text) {
  for (auto s : {ProposalStatus::semifinalist, ProposalStatus::finalist,
                 ProposalStatus::popular_choice, ProposalStatus::judges_choice,
                 ProposalStatus::grand_prize}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::malformed, "unknown proposal status '" + std::string(text) + "'");
}

std::string_view event_type(const EventPayload& payload) {
  struct {
    std::string_view operator()(const LinkCreated&) const { return "link_created"; }
    std::string_view operator()(const Click&) const { return "click"; }
    std::string_view operator()(const MemberRegistered&) const { return "member_registered"; }
    std::string_view operator()(const ProposalAuthored&) const { return "proposal_authored"; }
    std::string_view operator()(const ProposalResult&) const { return "proposal_result"; }
  } visitor;
  return std::visit(visitor, payload);
}

namespace {

json payload_json(const EventPayload& payload) {
  struct {
    json operator()(const LinkCreated& e) const {
      json j = {{"token", e.token}, {"owner_visitor", e.owner_visitor}, {"staff", e.staff},
                {"consent", e.consent}};
      j["email_hash"] = e.email_hash ? json(*e.email_hash) : json(nullptr);
      return j;
    }
    json operator()(const Click& e) const {
      json j = {{"token", e.token}, {"visitor", e.visitor}};
      if (e.country) j["country"] = *e.country;
      return j;
    }
    json operator()(const MemberRegistered& e) const {
      return {{"visitor", e.visitor}, {"member", e.member}};
    }
    json operator()(const ProposalAuthored& e) const {
      return {{"member", e.member}, {"proposal", e.proposal}};
    }
    json operator()(const ProposalResult& e) const {
      return {{"proposal", e.proposal}, {"status", std::string(to_string(e.status))}};
    }
  } visitor;
  return std::visit(visitor, payload);
}

std::string req_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::malformed, std::string("missing string field '") + key + "'");
  }
  std::string v = it->get<std::string>();
  if (v.empty()) throw Error(ErrorCode::malformed, std::string("empty field '") + key + "'");
  return v;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::malformed, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool opt_bool(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw Error(ErrorCode::malformed, std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

}  // namespace

json to_json(const EventRecord& record) {
  return {{"seq", record.seq},
          {"ts", format_rfc3339(record.ts)},
          {"type", std::string(event_type(record.payload))},
          {"payload", payload_json(record.payload)}};
}

EventRecord event_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::malformed, "event record must be an object");
  EventRecord rec;
  const auto seq = doc.find("seq");
  if (seq == doc.end() || !seq->is_number_unsigned()) {
    throw Error(ErrorCode::malformed, "missing or non-positive integer 'seq'");
  }
  rec.seq = seq->get<std::uint64_t>();
  rec.ts = parse_rfc3339(req_string(doc, "ts"));
  const std::string type = req_string(doc, "type");
  const auto pit = doc.find("payload");
  if (pit == doc.end() || !pit->is_object()) throw Error(ErrorCode::malformed, "missing 'payload' object");
  const json& p = *pit;

  if (type == "link_created") {
    rec.payload = LinkCreated{req_string(p, "token"), req_string(p, "owner_visitor"),
                              opt_string(p, "email_hash"), opt_bool(p, "staff"),
                              opt_bool(p, "consent")};
  } else if (type == "click") {
    rec.payload = Click{req_string(p, "token"), req_string(p, "visitor"), opt_string(p, "country")};
  } else if (type == "member_registered") {
    rec.payload = MemberRegistered{req_string(p, "visitor"), req_string(p, "member")};
  } else if (type == "proposal_authored") {
    rec.payload = ProposalAuthored{req_string(p, "member"), req_string(p, "proposal")};
  } else if (type == "proposal_result") {
    rec.payload = ProposalResult{req_string(p, "proposal"), parse_proposal_status(req_string(p, "status"))};
  } else {
    throw Error(ErrorCode::malformed, "unknown event type '" + type + "'");
  }
  return rec;
}

std::string encode_line(const EventRecord& record) { return to_json(record).dump(); }

EventRecord decode_line(std::string_view line) {
  json doc = json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::malformed, "line is not valid JSON");
  return event_from_json(doc);
}

}  // namespace snp
