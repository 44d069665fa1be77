#include "snp/payout.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>

#include "snp/error.hpp"

namespace snp {

using boost::multiprecision::cpp_int;
using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

std::int64_t parse_uint(std::string_view digits, std::string_view whole) {
  if (digits.empty()) invalid("expected digits in '" + std::string(whole) + "'");
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || v < 0) {
    invalid("invalid number '" + std::string(whole) + "'");
  }
  return v;
}

std::int64_t pow10(std::size_t n) {
  std::int64_t p = 1;
  for (std::size_t i = 0; i < n; ++i) p *= 10;
  return p;
}

}  // namespace

std::string Money::to_string() const {
  const std::int64_t abs = minor < 0 ? -minor : minor;
  std::string frac = std::to_string(abs % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (minor < 0 ? "-" : "") + std::to_string(abs / 100) + "." + frac;
}

Money Money::parse(std::string_view text) {
  const auto dot = text.find('.');
  const std::int64_t whole = parse_uint(text.substr(0, dot), text);
  std::int64_t cents = 0;
  if (dot != std::string_view::npos) {
    const auto frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 2) invalid("amount '" + std::string(text) + "' needs 1-2 decimals");
    cents = parse_uint(frac, text) * (frac.size() == 1 ? 10 : 1);
  }
  return {whole * 100 + cents};
}

Rational Rational::parse(std::string_view text) {
  Rational r;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_uint(text.substr(0, slash), text);
    r.den = parse_uint(text.substr(slash + 1), text);
  } else {
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (frac.size() > 15) invalid("too many decimals in '" + std::string(text) + "'");
    r.den = pow10(frac.size());
    r.num = parse_uint(whole.empty() ? std::string_view("0") : whole, text) * r.den +
            (frac.empty() ? 0 : parse_uint(frac, text));
  }
  if (r.den == 0) invalid("zero denominator in '" + std::string(text) + "'");
  const std::int64_t g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

void PayoutSchedule::validate() const {
  if (winner_award.minor < 0) invalid("winner_award must be >= 0");
  if (chain_base.minor < 0) invalid("chain_base must be >= 0");
  if (decay.den <= 0 || decay.num <= 0 || decay.num >= decay.den) invalid("decay must lie in (0, 1)");
  if (min_unit.minor <= 0) invalid("min_unit must be > 0");
}

ChainPosition::ChainPosition(std::uint32_t d) : d_(d) {
  if (d == 0) invalid("chain position must be >= 1");
}

namespace {

// Walks chain_base * decay^(k-1) exactly for k = 1.. and hands each rounded
// amount to `sink`; stops at the first zero, after `limit` terms, or when the
// sink returns false.
template <typename Sink>
void walk_series(const PayoutSchedule& s, std::uint32_t limit, Sink&& sink) {
  s.validate();
  cpp_int num = s.chain_base.minor;
  cpp_int den = s.min_unit.minor;
  for (std::uint32_t k = 1; k <= limit; ++k) {
    if (s.max_depth && k > *s.max_depth) return;
    // Half-up: floor((2n + d) / 2d).
    const cpp_int units = (2 * num + den) / (2 * den);
    if (units == 0) return;
    const Money amount{static_cast<std::int64_t>(units) * s.min_unit.minor};
    if (!sink(k, amount)) return;
    num *= s.decay.num;
    den *= s.decay.den;
    const cpp_int g = gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
}

}  // namespace

Money chain_reward(ChainPosition pos, const PayoutSchedule& schedule) {
  Money out{0};
  walk_series(schedule, pos.d(), [&](std::uint32_t k, Money amount) {
    if (k == pos.d()) out = amount;
    return true;
  });
  return out;
}

std::vector<Money> reward_series(const PayoutSchedule& schedule) {
  std::vector<Money> out;
  walk_series(schedule, UINT32_MAX, [&](std::uint32_t, Money amount) {
    out.push_back(amount);
    return true;
  });
  return out;
}

PayoutLedger compute_payouts(std::span<const VisitorId> winners, const ReferralGraph& graph,
                             const PayoutSchedule& schedule) {
  schedule.validate();
  const std::set<VisitorId> unique(winners.begin(), winners.end());
  for (const auto& w : unique) {
    if (graph.at(w).is_staff) {
      throw Error(ErrorCode::staff_winner, "staff participant '" + w + "' cannot win");
    }
  }

  const std::vector<Money> series = reward_series(schedule);
  PayoutLedger ledger;
  auto credit = [&](const VisitorId& id, Money amount) {
    if (amount.minor <= 0) return;
    ledger.entries[id] += amount;
    ledger.total += amount;
  };
  for (const auto& w : unique) {
    credit(w, schedule.winner_award);
    std::size_t d = 1;
    for (const ReferralEdge* e = graph.parent_edge(w); e != nullptr && d <= series.size();
         e = graph.parent_edge(e->parent), ++d) {
      if (!graph.at(e->parent).is_staff) credit(e->parent, series[d - 1]);
    }
  }
  return ledger;
}

bool ledger_bound_check(const PayoutLedger& ledger, std::size_t winner_count,
                        const PayoutSchedule& schedule) {
  schedule.validate();
  const cpp_int gap = schedule.decay.den - schedule.decay.num;
  const cpp_int lhs = cpp_int(ledger.total.minor) * gap;
  const cpp_int rhs = cpp_int(winner_count) *
                      (cpp_int(schedule.winner_award.minor) * gap +
                       cpp_int(schedule.chain_base.minor) * schedule.decay.den);
  return lhs <= rhs;
}

std::string ledger_csv(const PayoutLedger& ledger, std::string_view currency) {
  std::ostringstream out;
  out << "participant_id,amount_minor_units,currency\n";
  for (const auto& [id, amount] : ledger.entries) {
    out << id << ',' << amount.minor << ',' << currency << '\n';
  }
  return out.str();
}

json ledger_json(const PayoutLedger& ledger, std::string_view currency) {
  json entries = json::array();
  for (const auto& [id, amount] : ledger.entries) {
    entries.push_back({{"participant_id", id},
                       {"amount_minor_units", amount.minor},
                       {"amount", amount.to_string()}});
  }
  return {{"currency", std::string(currency)},
          {"entries", std::move(entries)},
          {"total_minor_units", ledger.total.minor},
          {"total", ledger.total.to_string()}};
}

}  // namespace snp
