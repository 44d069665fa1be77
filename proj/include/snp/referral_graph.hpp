#pragma once

// Referral forest and participant classification.
//
// The graph is a deterministic fold over contest events: tokens are created,
// visitors click tokens, visitors register as platform members. Attribution is
// first-click-wins, self-clicks never create edges, and every staff-issued
// token resolves to a single synthetic staff root.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "snp/time.hpp"

namespace snp {

using VisitorId = std::string;
using MemberId = std::string;

/// Reserved participant id for the condensed staff referral link.
inline constexpr std::string_view kStaffRoot = "staff-root";

struct Membership {
  MemberId member_id;
  Timestamp created_at;

  bool operator==(const Membership&) const = default;
};

struct Participant {
  VisitorId id;
  std::optional<std::string> email_hash;
  bool is_staff = false;
  /// Earliest click on a token not resolving to this visitor.
  std::optional<Timestamp> first_click_at;
  std::optional<Membership> membership;
  std::optional<std::string> country;

  bool operator==(const Participant&) const = default;
};

struct ReferralToken {
  std::string token;
  VisitorId owner;
  Timestamp created_at;
  bool staff = false;
  /// The first staff token ever created; later staff tokens alias it.
  bool staff_canonical = false;
  std::optional<std::string> email_hash;
  bool consent = false;

  bool operator==(const ReferralToken&) const = default;
};

struct ReferralEdge {
  VisitorId child;
  VisitorId parent;
  std::string via_token;
  Timestamp established_at;

  bool operator==(const ReferralEdge&) const = default;
};

enum class Kind {
  existing_member,
  direct_recruit,
  indirect_recruit,
  non_member_sharer,
  passive_clicker,
};

std::string_view to_string(Kind kind);

struct Classification {
  Kind kind;
  std::optional<std::uint32_t> degrees_from_established;

  bool operator==(const Classification&) const = default;
};

enum class ClickOutcome { attributed, already_attributed, self_click_ignored };

std::string_view to_string(ClickOutcome outcome);

struct ClickResult {
  ClickOutcome outcome;
  /// Current parent of the visitor (empty when the visitor is a root).
  VisitorId parent;
};

struct NetworkCounts {
  std::uint64_t clickers = 0;
  std::uint64_t link_creators = 0;
  std::uint64_t new_recruits = 0;
  std::uint64_t direct = 0;
  std::uint64_t indirect = 0;

  bool operator==(const NetworkCounts&) const = default;
};

using TokenSource = std::function<std::string()>;

class ReferralGraph {
 public:
  /// Creates the visitor record on first sight; returns the (possibly
  /// existing) participant.
  Participant& ensure_visitor(const VisitorId& id);

  /// Applies a link_created record. Throws on a token collision or a malformed
  /// owner id.
  const ReferralToken& add_token(std::string token, const VisitorId& owner, Timestamp now,
                                 bool staff, std::optional<std::string> email_hash = {},
                                 bool consent = false);

  /// Draws tokens from `source` until one is unused, then adds it. A collision
  /// is retried internally; exhausting the retry budget is an error.
  const ReferralToken& issue_token(const VisitorId& owner, Timestamp now, bool staff,
                                   const TokenSource& source,
                                   std::optional<std::string> email_hash = {},
                                   bool consent = false);

  /// A token value not yet present in the graph.
  std::string fresh_token(const TokenSource& source) const;

  ClickResult record_click(std::string_view token, const VisitorId& visitor, Timestamp now,
                           std::optional<std::string> country = {});

  const Participant& register_member(const VisitorId& visitor, MemberId member_id,
                                     Timestamp now);

  Classification classify(const VisitorId& visitor) const;

  /// Ancestors, parent first, ending at a root.
  std::vector<VisitorId> chain_of(const VisitorId& visitor) const;

  NetworkCounts network_counts() const;

  /// First violated structural invariant (forest shape, no self edges, edge
  /// time equal to the child's first click, staff root never a child), or
  /// nullopt when the graph is sound.
  std::optional<std::string> find_invariant_violation() const;

  /// True when the participant counted as affiliated at its own first click:
  /// the staff root, staff, or a member whose membership predates (or equals)
  /// its first click.
  bool is_established(const Participant& p) const;
  bool is_new_recruit(const Participant& p) const;

  const Participant* find(std::string_view visitor) const;
  const Participant& at(std::string_view visitor) const;
  const ReferralToken* find_token(std::string_view token) const;
  const ReferralEdge* parent_edge(std::string_view visitor) const;
  const VisitorId* find_member(std::string_view member_id) const;
  /// Token previously issued to `owner` for `email_hash`, if any.
  const ReferralToken* token_for(std::string_view owner, std::string_view email_hash) const;
  bool owns_token(std::string_view visitor) const;
  /// Attribution owner: the staff root for staff tokens, else the token owner.
  VisitorId resolve_owner(const ReferralToken& token) const;

  bool has_staff_root() const { return participants_.contains(std::string(kStaffRoot)); }
  std::uint64_t click_events() const { return click_events_; }
  std::size_t size() const { return participants_.size(); }
  const std::unordered_map<VisitorId, Participant>& participants() const { return participants_; }
  const std::unordered_map<VisitorId, ReferralEdge>& edges() const { return parents_; }
  const std::unordered_map<std::string, ReferralToken>& tokens() const { return tokens_; }

  /// Ids sorted lexicographically; the canonical iteration order.
  std::vector<VisitorId> sorted_ids() const;

  /// Canonical document: every collection sorted, so equal states serialize
  /// to identical bytes.
  nlohmann::json to_json() const;
  static ReferralGraph from_json(const nlohmann::json& doc);

 private:
  Participant& staff_root();

  std::unordered_map<VisitorId, Participant> participants_;
  std::unordered_map<std::string, ReferralToken> tokens_;
  std::unordered_map<VisitorId, ReferralEdge> parents_;
  std::unordered_map<MemberId, VisitorId> members_;
  std::unordered_map<VisitorId, std::vector<std::string>> tokens_by_owner_;
  std::optional<std::string> canonical_staff_token_;
  std::uint64_t click_events_ = 0;
};

}  // namespace snp
