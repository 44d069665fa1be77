#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "snp/events.hpp"
#include "snp/referral_graph.hpp"

namespace snp {

struct Proposal {
  std::string id;
  std::set<MemberId> authors;
  std::optional<ProposalStatus> best_status;

  bool operator==(const Proposal&) const = default;
};

/// Proposals keyed by id; an author appears once per proposal regardless of
/// how many authoring events name them.
class ProposalBook {
 public:
  void add_author(const std::string& proposal, const MemberId& member);
  void add_result(const std::string& proposal, ProposalStatus status);

  const std::map<std::string, Proposal>& proposals() const { return proposals_; }

  /// Best status reached by any proposal each author contributed to.
  std::map<MemberId, std::optional<ProposalStatus>> author_outcomes() const;

  bool operator==(const ProposalBook&) const = default;

 private:
  std::map<std::string, Proposal> proposals_;
};

/// The complete replayable state: a pure function of the event log.
class ContestState {
 public:
  /// Applies the next record. Requires seq == last_seq() + 1 and a timestamp
  /// no earlier than the previous record.
  void apply(const EventRecord& record);

  const ReferralGraph& graph() const { return graph_; }
  const ProposalBook& proposals() const { return proposals_; }
  std::uint64_t last_seq() const { return last_seq_; }
  std::optional<Timestamp> last_ts() const { return last_ts_; }

  nlohmann::json to_json() const;
  static ContestState from_json(const nlohmann::json& doc);

  /// Hex SHA-256 of the canonical serialization.
  std::string state_hash() const;

 private:
  ReferralGraph graph_;
  ProposalBook proposals_;
  std::uint64_t last_seq_ = 0;
  std::optional<Timestamp> last_ts_;
};

/// Replays JSON Lines from `in` on top of `start`. Blank lines are skipped;
/// any malformed, out-of-order or inapplicable record aborts with
/// snp::Error(corrupt_log) naming the 1-based line number.
ContestState replay(std::istream& in, ContestState start = {});
ContestState replay_file(const std::filesystem::path& path, ContestState start = {});
ContestState replay_records(const std::vector<EventRecord>& records, ContestState start = {});

void write_snapshot(const ContestState& state, const std::filesystem::path& path);
ContestState load_snapshot(const std::filesystem::path& path);

/// Reads and validates records without applying domain rules.
std::vector<EventRecord> read_log(const std::filesystem::path& path);
void write_log(const std::vector<EventRecord>& records, const std::filesystem::path& path);

}  // namespace snp
