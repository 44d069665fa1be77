#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "snp/referral_graph.hpp"
#include "snp/time.hpp"

namespace snp {

enum class ProposalStatus { semifinalist, finalist, popular_choice, judges_choice, grand_prize };

std::string_view to_string(ProposalStatus status);
ProposalStatus parse_proposal_status(std::string_view text);

inline bool counts_as_finalist(ProposalStatus s) { return s >= ProposalStatus::finalist; }
inline bool counts_as_winner(ProposalStatus s) { return s >= ProposalStatus::popular_choice; }

struct LinkCreated {
  std::string token;
  VisitorId owner_visitor;
  std::optional<std::string> email_hash;
  bool staff = false;
  bool consent = false;

  bool operator==(const LinkCreated&) const = default;
};

struct Click {
  std::string token;
  VisitorId visitor;
  std::optional<std::string> country;

  bool operator==(const Click&) const = default;
};

struct MemberRegistered {
  VisitorId visitor;
  MemberId member;

  bool operator==(const MemberRegistered&) const = default;
};

struct ProposalAuthored {
  MemberId member;
  std::string proposal;

  bool operator==(const ProposalAuthored&) const = default;
};

struct ProposalResult {
  std::string proposal;
  ProposalStatus status;

  bool operator==(const ProposalResult&) const = default;
};

using EventPayload = std::variant<LinkCreated, Click, MemberRegistered, ProposalAuthored, ProposalResult>;

struct EventRecord {
  std::uint64_t seq = 0;
  Timestamp ts;
  EventPayload payload;

  bool operator==(const EventRecord&) const = default;
};

std::string_view event_type(const EventPayload& payload);

nlohmann::json to_json(const EventRecord& record);
/// Throws snp::Error(malformed) on schema violations.
EventRecord event_from_json(const nlohmann::json& doc);

/// One JSON Lines record, without the trailing newline.
std::string encode_line(const EventRecord& record);
EventRecord decode_line(std::string_view line);

}  // namespace snp
