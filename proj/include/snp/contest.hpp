#pragma once

// Live contest: the single writer in front of the event log. Every mutation
// is applied to the in-memory state and appended to the log under one
// exclusive lock; queries take a shared lock.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "snp/analytics.hpp"
#include "snp/contest_state.hpp"
#include "snp/event_log.hpp"
#include "snp/payout.hpp"

namespace snp {

inline constexpr std::string_view kVisitorCookie = "snp_visitor";

struct ServiceConfig {
  /// Empty path keeps the log in memory only.
  std::filesystem::path events_path;
  std::string salt;
  std::string public_base_url = "http://localhost:8080";
  std::string landing_url = "/";
  std::int64_t cookie_ttl_days = 365;
  PayoutSchedule payout_defaults;
  /// Addresses whose links are issued as staff links.
  std::vector<std::string> staff_emails;
  bool durable = true;
  std::uint16_t port = 8080;

  /// Reads SNP_* variables; `salt_var` names the variable holding the salt.
  static ServiceConfig from_env(const std::string& salt_var = "SNP_SALT");
};

class Contest {
 public:
  using Clock = std::function<Timestamp()>;

  /// Replays `config.events_path` when it exists, then appends to it.
  explicit Contest(ServiceConfig config, TokenSource tokens = {}, Clock clock = {});

  struct Redirect {
    VisitorId visitor;
    bool new_cookie = false;
    ClickOutcome outcome = ClickOutcome::attributed;
    VisitorId parent;
  };
  /// Throws malformed (bad token syntax or country) or unknown_token.
  Redirect handle_redirect(std::string_view token, std::optional<std::string> cookie,
                           std::optional<std::string> country = {});

  struct Link {
    std::string token;
    std::string share_url;
    bool created = false;
  };
  /// Idempotent per (visitor, email). Throws malformed without a cookie and
  /// invalid_argument for an implausible address.
  Link handle_create_link(std::string_view email, std::optional<std::string> cookie, bool consent);

  MemberId handle_register_member(std::optional<std::string> cookie);

  /// `id` may be a visitor id or a member id.
  nlohmann::json handle_classification(std::string_view id) const;

  /// Winners are member ids (or visitor ids of members). `overrides` may set
  /// winner_award, chain_base, min_unit (major units), decay and max_depth.
  nlohmann::json handle_payout_preview(const std::vector<std::string>& winners,
                                       const nlohmann::json& overrides) const;

  /// kind is table1, tests or summary; anything else throws not_found.
  nlohmann::json handle_stats(std::string_view kind) const;
  std::string handle_network(GraphFormat format) const;

  std::string state_hash() const;
  std::uint64_t last_seq() const;
  ContestState snapshot() const;
  const ServiceConfig& config() const { return config_; }

  /// Writes one staff link when the log has none; returns the canonical staff
  /// share URL (empty when staff links already exist and none is canonical).
  std::string ensure_staff_link();

 private:
  void commit(EventPayload payload);
  VisitorId resolve_visitor(std::string_view id) const;
  bool is_staff_email(const std::string& email_hash) const;

  ServiceConfig config_;
  TokenSource tokens_;
  Clock clock_;
  std::vector<std::string> staff_hashes_;

  mutable std::shared_mutex mu_;
  ContestState state_;
  std::optional<EventLogWriter> writer_;
  bool broken_ = false;
};

/// Applies schedule overrides from a JSON object onto `base`.
PayoutSchedule apply_schedule_overrides(PayoutSchedule base, const nlohmann::json& overrides);

nlohmann::json schedule_json(const PayoutSchedule& schedule);

}  // namespace snp
