#include "snp/contest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "snp/crypto.hpp"
#include "snp/error.hpp"

namespace snp {

using nlohmann::json;

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    out.push_back(item.substr(first, item.find_last_not_of(" \t") - first + 1));
  }
  return out;
}

Money money_from_json(const json& v, const char* field) {
  if (v.is_string()) return Money::parse(v.get<std::string>());
  if (v.is_number_integer()) {
    const auto d = v.get<std::int64_t>();
    if (d < 0) throw Error(ErrorCode::invalid_argument, std::string(field) + " must be >= 0");
    return Money::dollars(d);
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::invalid_argument, std::string(field) + " must be >= 0");
    }
    const double cents = d * 100.0;
    if (std::fabs(cents - std::round(cents)) > 1e-6) {
      throw Error(ErrorCode::invalid_argument, std::string(field) + " has sub-cent precision");
    }
    return {static_cast<std::int64_t>(std::llround(cents))};
  }
  throw Error(ErrorCode::invalid_argument, std::string(field) + " must be a number or decimal string");
}

Rational rational_from_json(const json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v.get<double>());
    std::string text = buf;
    while (text.size() > 1 && text.back() == '0') text.pop_back();
    if (text.back() == '.') text.pop_back();
    return Rational::parse(text);
  }
  throw Error(ErrorCode::invalid_argument, "decay must be a number or fraction string");
}

bool is_country_code(std::string_view c) {
  return c.size() == 2 && std::isalpha(static_cast<unsigned char>(c[0])) &&
         std::isalpha(static_cast<unsigned char>(c[1]));
}

}  // namespace

ServiceConfig ServiceConfig::from_env(const std::string& salt_var) {
  ServiceConfig c;
  if (auto v = env(salt_var.c_str())) c.salt = *v;
  if (auto v = env("SNP_PORT")) c.port = static_cast<std::uint16_t>(std::stoul(*v));
  if (auto v = env("SNP_EVENTS")) c.events_path = *v;
  if (auto v = env("SNP_PUBLIC_URL")) c.public_base_url = *v;
  if (auto v = env("SNP_LANDING_URL")) c.landing_url = *v;
  if (auto v = env("SNP_COOKIE_TTL_DAYS")) c.cookie_ttl_days = std::stoll(*v);
  if (auto v = env("SNP_STAFF_EMAILS")) c.staff_emails = split_list(*v);
  if (auto v = env("SNP_GRAND")) c.payout_defaults.winner_award = Money::parse(*v);
  if (auto v = env("SNP_BASE")) c.payout_defaults.chain_base = Money::parse(*v);
  if (auto v = env("SNP_DECAY")) c.payout_defaults.decay = Rational::parse(*v);
  if (auto v = env("SNP_MIN_UNIT")) c.payout_defaults.min_unit = Money::parse(*v);
  if (auto v = env("SNP_MAX_DEPTH")) c.payout_defaults.max_depth = static_cast<std::uint32_t>(std::stoul(*v));
  c.payout_defaults.validate();
  return c;
}

PayoutSchedule apply_schedule_overrides(PayoutSchedule s, const json& o) {
  if (o.is_null()) return s;
  if (!o.is_object()) throw Error(ErrorCode::invalid_argument, "schedule must be an object");
  for (const auto& [key, value] : o.items()) {
    if (key == "winner_award") {
      s.winner_award = money_from_json(value, "winner_award");
    } else if (key == "chain_base") {
      s.chain_base = money_from_json(value, "chain_base");
    } else if (key == "min_unit") {
      s.min_unit = money_from_json(value, "min_unit");
    } else if (key == "decay") {
      s.decay = rational_from_json(value);
    } else if (key == "max_depth") {
      if (value.is_null()) {
        s.max_depth.reset();
      } else if (value.is_number_unsigned()) {
        s.max_depth = value.get<std::uint32_t>();
      } else {
        throw Error(ErrorCode::invalid_argument, "max_depth must be a nonnegative integer");
      }
    } else {
      throw Error(ErrorCode::invalid_argument, "unknown schedule field '" + key + "'");
    }
  }
  s.validate();
  return s;
}

json schedule_json(const PayoutSchedule& s) {
  json j = {{"winner_award", s.winner_award.to_string()},
            {"chain_base", s.chain_base.to_string()},
            {"decay", std::to_string(s.decay.num) + "/" + std::to_string(s.decay.den)},
            {"min_unit", s.min_unit.to_string()}};
  j["max_depth"] = s.max_depth ? json(*s.max_depth) : json(nullptr);
  return j;
}

Contest::Contest(ServiceConfig config, TokenSource tokens, Clock clock)
    : config_(std::move(config)), tokens_(std::move(tokens)), clock_(std::move(clock)) {
  if (!tokens_) tokens_ = [] { return random_token(16); };
  if (!clock_) clock_ = now_utc;
  config_.payout_defaults.validate();
  for (const auto& e : config_.staff_emails) staff_hashes_.push_back(salted_email_hash(config_.salt, e));
  if (!config_.events_path.empty()) {
    if (std::filesystem::exists(config_.events_path)) state_ = replay_file(config_.events_path);
    writer_.emplace(config_.events_path, config_.durable);
  }
}

void Contest::commit(EventPayload payload) {
  if (broken_) throw Error(ErrorCode::io, "event log is unwritable; restart to recover");
  Timestamp ts = clock_();
  if (state_.last_ts() && ts < *state_.last_ts()) ts = *state_.last_ts();
  EventRecord record{state_.last_seq() + 1, ts, std::move(payload)};
  state_.apply(record);
  if (writer_) {
    try {
      writer_->append(record);
    } catch (...) {
      broken_ = true;
      throw;
    }
  }
}

bool Contest::is_staff_email(const std::string& email_hash) const {
  return std::find(staff_hashes_.begin(), staff_hashes_.end(), email_hash) != staff_hashes_.end();
}

Contest::Redirect Contest::handle_redirect(std::string_view token, std::optional<std::string> cookie,
                                           std::optional<std::string> country) {
  if (!is_well_formed_token(token)) throw Error(ErrorCode::malformed, "malformed referral token");
  if (country) {
    if (!is_country_code(*country)) throw Error(ErrorCode::malformed, "country must be an ISO 3166-1 alpha-2 code");
    std::transform(country->begin(), country->end(), country->begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  }

  std::unique_lock lock(mu_);
  if (state_.graph().find_token(token) == nullptr) {
    throw Error(ErrorCode::unknown_token, "unknown referral token");
  }
  Redirect r;
  if (cookie && is_well_formed_token(*cookie)) {
    r.visitor = *cookie;
  } else {
    r.visitor = tokens_();
    r.new_cookie = true;
  }
  const bool had_parent = state_.graph().parent_edge(r.visitor) != nullptr;
  commit(Click{std::string(token), r.visitor, country});
  const ReferralEdge* edge = state_.graph().parent_edge(r.visitor);
  if (edge != nullptr) r.parent = edge->parent;
  r.outcome = had_parent         ? ClickOutcome::already_attributed
              : edge != nullptr ? ClickOutcome::attributed
                                : ClickOutcome::self_click_ignored;
  return r;
}

Contest::Link Contest::handle_create_link(std::string_view email, std::optional<std::string> cookie,
                                          bool consent) {
  if (!cookie || !is_well_formed_token(*cookie)) {
    throw Error(ErrorCode::malformed, "missing visitor cookie; open a referral link first");
  }
  const auto first = email.find_first_not_of(" \t\r\n");
  const std::string trimmed =
      first == std::string::npos ? std::string() : std::string(email.substr(first, email.find_last_not_of(" \t\r\n") - first + 1));
  if (!is_plausible_email(trimmed)) throw Error(ErrorCode::invalid_argument, "invalid email address");
  const std::string hash = salted_email_hash(config_.salt, email);

  std::unique_lock lock(mu_);
  Link link;
  if (const ReferralToken* existing = state_.graph().token_for(*cookie, hash)) {
    link.token = existing->token;
  } else {
    link.token = state_.graph().fresh_token(tokens_);
    commit(LinkCreated{link.token, *cookie, hash, is_staff_email(hash), consent});
    link.created = true;
  }
  link.share_url = config_.public_base_url + "/r/" + link.token;
  return link;
}

MemberId Contest::handle_register_member(std::optional<std::string> cookie) {
  if (!cookie || !is_well_formed_token(*cookie)) throw Error(ErrorCode::malformed, "missing visitor cookie");
  std::unique_lock lock(mu_);
  if (const Participant* p = state_.graph().find(*cookie); p && p->membership) {
    throw Error(ErrorCode::already_registered, "visitor is already a member");
  }
  MemberId member;
  do {
    member = "m-" + tokens_().substr(0, 12);
  } while (state_.graph().find_member(member) != nullptr);
  commit(MemberRegistered{*cookie, member});
  return member;
}

VisitorId Contest::resolve_visitor(std::string_view id) const {
  const ReferralGraph& g = state_.graph();
  if (const VisitorId* v = g.find_member(id)) return *v;
  if (g.find(id) != nullptr) return VisitorId(id);
  throw Error(ErrorCode::unknown_participant, "unknown participant '" + std::string(id) + "'");
}

json Contest::handle_classification(std::string_view id) const {
  std::shared_lock lock(mu_);
  const VisitorId visitor = resolve_visitor(id);
  const ReferralGraph& g = state_.graph();
  const Participant& p = g.at(visitor);
  const Classification c = g.classify(visitor);
  json j = {{"visitor", visitor},
            {"kind", std::string(to_string(c.kind))},
            {"is_staff", p.is_staff},
            {"chain", g.chain_of(visitor)}};
  j["degrees_from_established"] = c.degrees_from_established ? json(*c.degrees_from_established) : json(nullptr);
  j["member_id"] = p.membership ? json(p.membership->member_id) : json(nullptr);
  j["first_click_at"] = p.first_click_at ? json(format_rfc3339(*p.first_click_at)) : json(nullptr);
  return j;
}

json Contest::handle_payout_preview(const std::vector<std::string>& winners,
                                    const json& overrides) const {
  const PayoutSchedule schedule = apply_schedule_overrides(config_.payout_defaults, overrides);
  std::shared_lock lock(mu_);
  const ReferralGraph& g = state_.graph();
  std::vector<VisitorId> visitors;
  for (const auto& w : winners) {
    const VisitorId* v = g.find_member(w);
    const Participant* p = v ? g.find(*v) : g.find(w);
    if (p == nullptr || !p->membership) {
      throw Error(ErrorCode::unknown_member, "winner '" + w + "' is not a registered member");
    }
    visitors.push_back(p->id);
  }
  const PayoutLedger ledger = compute_payouts(visitors, g, schedule);
  std::sort(visitors.begin(), visitors.end());
  visitors.erase(std::unique(visitors.begin(), visitors.end()), visitors.end());
  json j = ledger_json(ledger);
  j["preview"] = true;
  j["winners"] = visitors;
  j["schedule"] = schedule_json(schedule);
  j["within_bound"] = ledger_bound_check(ledger, visitors.size(), schedule);
  return j;
}

json Contest::handle_stats(std::string_view kind) const {
  std::shared_lock lock(mu_);
  if (kind == "table1") return to_json(build_table1(state_));
  if (kind == "tests") return tests_json(significance_tests(build_table1(state_)));
  if (kind == "summary") return summary_json(state_);
  throw Error(ErrorCode::not_found, "unknown stats report '" + std::string(kind) + "'");
}

std::string Contest::handle_network(GraphFormat format) const {
  std::shared_lock lock(mu_);
  return export_graph(state_.graph(), format);
}

std::string Contest::state_hash() const {
  std::shared_lock lock(mu_);
  return state_.state_hash();
}

std::uint64_t Contest::last_seq() const {
  std::shared_lock lock(mu_);
  return state_.last_seq();
}

ContestState Contest::snapshot() const {
  std::shared_lock lock(mu_);
  return state_;
}

std::string Contest::ensure_staff_link() {
  std::unique_lock lock(mu_);
  for (const auto& [token, rec] : state_.graph().tokens()) {
    if (rec.staff_canonical) return config_.public_base_url + "/r/" + token;
  }
  const std::string token = state_.graph().fresh_token(tokens_);
  commit(LinkCreated{token, "staff-" + tokens_().substr(0, 8), std::nullopt, true, false});
  return config_.public_base_url + "/r/" + token;
}

}  // namespace snp
