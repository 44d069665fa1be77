#include "snp/fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "snp/crypto.hpp"
#include "snp/rng.hpp"

namespace snp::fixtures {

namespace {

class Builder {
 public:
  explicit Builder(Timestamp start) : ts_(start) {}

  void emit(EventPayload payload) {
    events_.push_back(EventRecord{events_.size() + 1, ts_, std::move(payload)});
    ts_ = ts_.plus_micros(1'000'000);
  }
  std::vector<EventRecord> take() { return std::move(events_); }

 private:
  Timestamp ts_;
  std::vector<EventRecord> events_;
};

std::string numbered(const char* prefix, std::uint32_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06u", prefix, i);
  return buf;
}

}  // namespace

std::string fixture_token(const std::string& label) { return sha256_hex(label).substr(0, 22); }

std::vector<EventRecord> balloon_chain() {
  Builder b(parse_rfc3339("2009-12-01T00:00:00Z"));
  b.emit(MemberRegistered{"alice", "m-alice"});
  b.emit(LinkCreated{fixture_token("alice"), "alice", sha256_hex("alice@example.org"), false, true});
  const char* names[] = {"alice", "bob", "carol", "dave"};
  for (int i = 1; i < 4; ++i) {
    const std::string me = names[i];
    b.emit(Click{fixture_token(names[i - 1]), me, std::nullopt});
    b.emit(MemberRegistered{me, "m-" + me});
    if (i < 3) b.emit(LinkCreated{fixture_token(me), me, sha256_hex(me + "@example.org"), false, true});
  }
  b.emit(ProposalAuthored{"m-dave", "balloon-found"});
  b.emit(ProposalResult{"balloon-found", ProposalStatus::grand_prize});
  return b.take();
}

std::vector<EventRecord> field_study(const FieldStudyShape& s, std::uint64_t seed) {
  Rng rng(seed);
  Builder b(parse_rfc3339("2014-04-01T00:00:00Z"));
  auto pick = [&](const std::vector<std::string>& from) -> const std::string& {
    return from[uniform_below(rng, from.size())];
  };

  // Staff links all collapse into one staff root.
  std::vector<std::string> staff_tokens;
  for (std::uint32_t i = 0; i < s.staff_visitors; ++i) {
    staff_tokens.push_back(fixture_token(numbered("staff-link-", i)));
    b.emit(LinkCreated{staff_tokens.back(), numbered("staff-", i), std::nullopt, true, false});
  }

  // Established members: the first existing_clickers of them click later.
  std::vector<std::string> members;  // member id per other member
  members.reserve(s.other_members);
  for (std::uint32_t i = 0; i < s.other_members; ++i) {
    members.push_back(numbered("m-u", i));
    b.emit(MemberRegistered{numbered("u", i), members.back()});
  }

  std::vector<std::string> established_tokens = staff_tokens;
  for (std::uint32_t i = 0; i < s.existing_clickers; ++i) {
    const std::string visitor = numbered("u", i);
    const bool creator = i < s.existing_creators;
    const std::string& via = (creator || established_tokens.size() == staff_tokens.size() ||
                              uniform_below(rng, 10) < 7)
                                 ? pick(staff_tokens)
                                 : pick(established_tokens);
    b.emit(Click{via, visitor, std::nullopt});
    if (creator) {
      established_tokens.push_back(fixture_token("link-" + visitor));
      b.emit(LinkCreated{established_tokens.back(), visitor, sha256_hex(visitor + "@example.org"), false, true});
    }
  }

  // Non-members: the first nonmember_sharers create links of their own.
  std::vector<std::string> sharer_tokens;
  std::vector<std::string> any_tokens = established_tokens;
  for (std::uint32_t i = 0; i < s.nonmember_clickers; ++i) {
    const std::string visitor = numbered("n", i);
    const bool sharer = i < s.nonmember_sharers;
    const std::string via = sharer ? pick(established_tokens) : pick(any_tokens);
    b.emit(Click{via, visitor, std::nullopt});
    if (sharer) {
      sharer_tokens.push_back(fixture_token("link-" + visitor));
      any_tokens.push_back(sharer_tokens.back());
      b.emit(LinkCreated{sharer_tokens.back(), visitor, sha256_hex(visitor + "@example.org"), false, true});
    }
  }

  // Direct recruits click a staff or established member's link, then join.
  std::vector<std::string> direct_members, indirect_members, recruit_tokens;
  for (std::uint32_t i = 0; i < s.direct_recruits; ++i) {
    const std::string visitor = numbered("r", i);
    b.emit(Click{pick(established_tokens), visitor, std::nullopt});
    direct_members.push_back(numbered("m-r", i));
    b.emit(MemberRegistered{visitor, direct_members.back()});
    if (i < s.recruit_creators) {
      recruit_tokens.push_back(fixture_token("link-" + visitor));
      b.emit(LinkCreated{recruit_tokens.back(), visitor, sha256_hex(visitor + "@example.org"), false, true});
    }
  }

  // Indirect recruits arrive through someone who was not a member at their
  // own first click.
  const std::uint32_t indirect = s.indirect_via_sharers + s.indirect_via_recruits;
  for (std::uint32_t i = 0; i < indirect; ++i) {
    const std::string visitor = numbered("q", i);
    b.emit(Click{i < s.indirect_via_sharers ? pick(sharer_tokens) : pick(recruit_tokens), visitor,
                 std::nullopt});
    indirect_members.push_back(numbered("m-q", i));
    b.emit(MemberRegistered{visitor, indirect_members.back()});
  }

  // Proposals. Within each group the first `winners` authors win, the next
  // finalists-winners are finalists, and finalist proposals are first named
  // semifinalists so the best status is what counts.
  std::uint32_t proposal_no = 0;
  const ProposalStatus wins[] = {ProposalStatus::popular_choice, ProposalStatus::judges_choice};
  auto run_group = [&](std::vector<std::string> pool, std::uint32_t authors, std::uint32_t finalists,
                       std::uint32_t winners, bool grand) {
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[uniform_below(rng, i)]);
    }
    pool.resize(authors);
    for (std::uint32_t i = 0; i < authors; ++i) {
      const std::string proposal = numbered("p", proposal_no++);
      b.emit(ProposalAuthored{pool[i], proposal});
      if (i < finalists) {
        b.emit(ProposalResult{proposal, ProposalStatus::semifinalist});
        b.emit(ProposalResult{proposal, ProposalStatus::finalist});
      } else if (i % 3 == 0) {
        b.emit(ProposalResult{proposal, ProposalStatus::semifinalist});
      }
      if (i < winners) {
        b.emit(ProposalResult{proposal, grand && i == 0 ? ProposalStatus::grand_prize : wins[i % 2]});
      }
    }
    // Repeat authorship: a second proposal for some authors, and a joint
    // proposal by two non-finalist authors.
    for (std::uint32_t i = 0; i < authors; i += 4) {
      const std::string proposal = numbered("p", proposal_no++);
      b.emit(ProposalAuthored{pool[i], proposal});
    }
    if (authors >= finalists + 2) {
      const std::string proposal = numbered("p", proposal_no++);
      b.emit(ProposalAuthored{pool[authors - 1], proposal});
      b.emit(ProposalAuthored{pool[authors - 2], proposal});
      b.emit(ProposalResult{proposal, ProposalStatus::semifinalist});
    }
  };
  run_group(direct_members, s.direct_authors, s.direct_finalists, s.direct_winners, false);
  run_group(indirect_members, s.indirect_authors, s.indirect_finalists, s.indirect_winners, true);
  run_group(members, s.other_authors, s.other_finalists, s.other_winners, false);
  return b.take();
}

}  // namespace snp::fixtures
