#pragma once

// Recursive-incentive payouts: a winner award plus a geometrically decaying
// reward for every ancestor on the winner's referral chain.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "snp/referral_graph.hpp"

namespace snp {

/// Amount in minor currency units (cents).
struct Money {
  std::int64_t minor = 0;

  static constexpr Money dollars(std::int64_t d) { return {d * 100}; }

  constexpr auto operator<=>(const Money&) const = default;
  constexpr Money operator+(Money o) const { return {minor + o.minor}; }
  constexpr Money& operator+=(Money o) {
    minor += o.minor;
    return *this;
  }

  /// "1234.50"
  std::string to_string() const;
  /// Parses a nonnegative decimal major-unit amount ("1000", "62.5", "0.01").
  static Money parse(std::string_view text);
};

/// Exact fraction num/den with den > 0.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 2;

  bool operator==(const Rational&) const = default;

  /// Parses "0.5", "1/2" or "0.125" exactly.
  static Rational parse(std::string_view text);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct PayoutSchedule {
  Money winner_award = Money::dollars(10'000);
  Money chain_base = Money::dollars(1'000);
  Rational decay{1, 2};
  Money min_unit{1};
  std::optional<std::uint32_t> max_depth;

  /// Throws snp::Error(invalid_argument) unless award, base >= 0,
  /// 0 < decay < 1 and min_unit > 0.
  void validate() const;
};

/// Degrees from the winner along parent edges; the winner's referrer is 1.
class ChainPosition {
 public:
  explicit ChainPosition(std::uint32_t d);
  std::uint32_t d() const { return d_; }

 private:
  std::uint32_t d_;
};

/// chain_base * decay^(d-1), rounded half-up to min_unit; zero once the
/// rounded amount falls below min_unit or d exceeds max_depth.
Money chain_reward(ChainPosition pos, const PayoutSchedule& schedule);

/// Nonzero rewards for d = 1, 2, ... (element i is d = i + 1). The series is
/// finite for every valid schedule.
std::vector<Money> reward_series(const PayoutSchedule& schedule);

struct PayoutLedger {
  std::map<VisitorId, Money> entries;
  Money total;

  bool operator==(const PayoutLedger&) const = default;
};

/// Winners are a set (duplicates collapse). Staff ancestors, including the
/// staff root, are skipped but still occupy their chain position.
PayoutLedger compute_payouts(std::span<const VisitorId> winners, const ReferralGraph& graph,
                             const PayoutSchedule& schedule);

/// total <= winners * (winner_award + chain_base / (1 - decay)), exactly.
bool ledger_bound_check(const PayoutLedger& ledger, std::size_t winner_count,
                        const PayoutSchedule& schedule);

/// participant_id,amount_minor_units,currency rows in id order.
std::string ledger_csv(const PayoutLedger& ledger, std::string_view currency = "USD");
nlohmann::json ledger_json(const PayoutLedger& ledger, std::string_view currency = "USD");

}  // namespace snp
