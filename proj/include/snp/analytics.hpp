#pragma once

// Recruit-activity tables, significance-test reports and referral network
// exports computed from a contest state snapshot.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "snp/contest_state.hpp"
#include "snp/stats.hpp"

namespace snp {

struct ActivityRow {
  std::uint64_t users = 0;
  std::uint64_t proposal_authors = 0;
  std::uint64_t finalists = 0;
  std::uint64_t winners = 0;

  bool operator==(const ActivityRow&) const = default;
};

struct Table1Report {
  ActivityRow snp_recruits;
  ActivityRow direct;
  ActivityRow indirect;
  ActivityRow other_members;
  ActivityRow total;

  bool operator==(const Table1Report&) const = default;
};

/// Rows over registered members. An author counts once however many
/// proposals they contributed to; finalist and winner columns count members
/// with at least one proposal reaching that status.
Table1Report build_table1(const ContestState& state);

nlohmann::json to_json(const Table1Report& report);
std::string format_table1(const Table1Report& report);

/// The five group comparisons derived from the activity table.
struct NamedTest {
  std::string name;
  std::string description;
  ContingencyTable2x2 table;
  std::optional<TestResult> result;  ///< absent for a degenerate table
};

std::vector<NamedTest> significance_tests(const Table1Report& report);
nlohmann::json tests_json(const std::vector<NamedTest>& tests);
std::string format_tests(const std::vector<NamedTest>& tests);

/// Network counts plus membership and proposal totals.
nlohmann::json summary_json(const ContestState& state);
std::string format_summary(const ContestState& state);

enum class GraphFormat { dot, graphml, json };

/// Throws snp::Error(unsupported_format).
GraphFormat parse_graph_format(std::string_view name);

enum class NodeRole { clicker, link_creator, recruit, staff_root };

std::string_view to_string(NodeRole role);
/// Legend colors: clickers blue, link creators red.
std::string_view role_color(NodeRole role);

struct NetworkNode {
  VisitorId id;
  NodeRole role;
  bool clicked = false;
  bool link_creator = false;
  bool recruit = false;
  Kind kind;
  std::optional<std::uint32_t> degrees;
};

struct NetworkEdge {
  VisitorId child;
  VisitorId parent;
};

/// Nodes are the staff root plus every non-staff participant who clicked or
/// created a link; edges point child to parent. Sorted by id.
struct NetworkView {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkEdge> edges;
};

NetworkView network_view(const ReferralGraph& graph);

std::string export_graph(const ReferralGraph& graph, GraphFormat format);

}  // namespace snp
