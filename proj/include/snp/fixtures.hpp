#pragma once

// Deterministic event logs used by tests, the acceptance suite and
// `snp fixture`.

#include <cstdint>
#include <string>
#include <vector>

#include "snp/events.hpp"

namespace snp::fixtures {

/// alice (an organic member) shares a link; bob, carol and dave each click the
/// previous person's link and join; dave's proposal wins the grand prize.
/// Visitor ids are "alice", "bob", "carol", "dave"; member ids "m-<name>".
std::vector<EventRecord> balloon_chain();

/// Group sizes for the field-study log. Defaults give 351 recruits (309
/// direct, 42 indirect) among 78,390 members, 36,200 clickers and 1,050 link
/// creators.
struct FieldStudyShape {
  std::uint32_t staff_visitors = 3;
  std::uint32_t other_members = 78039;
  std::uint32_t existing_clickers = 12000;   ///< members who later clicked a link
  std::uint32_t existing_creators = 400;     ///< of those, shared their own link
  std::uint32_t nonmember_clickers = 23849;
  std::uint32_t nonmember_sharers = 600;     ///< of those, shared their own link
  std::uint32_t direct_recruits = 309;
  std::uint32_t recruit_creators = 50;       ///< direct recruits who shared a link
  std::uint32_t indirect_via_sharers = 30;
  std::uint32_t indirect_via_recruits = 12;

  // Proposal activity: authors, finalists, winners per group.
  std::uint32_t direct_authors = 52, direct_finalists = 13, direct_winners = 7;
  std::uint32_t indirect_authors = 5, indirect_finalists = 3, indirect_winners = 2;
  std::uint32_t other_authors = 1227, other_finalists = 228, other_winners = 120;
};

std::vector<EventRecord> field_study(const FieldStudyShape& shape = {}, std::uint64_t seed = 2014);

/// 22-character token value derived from a label, accepted by the HTTP layer.
std::string fixture_token(const std::string& label);

}  // namespace snp::fixtures
