#include "snp/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "snp/error.hpp"
#include "snp/kernels.hpp"

namespace snp {

using nlohmann::json;

namespace {

void add_outcome(ActivityRow& row, const std::map<MemberId, std::optional<ProposalStatus>>& outcomes,
                 const MemberId& member) {
  ++row.users;
  const auto it = outcomes.find(member);
  if (it == outcomes.end()) return;
  ++row.proposal_authors;
  if (it->second && counts_as_finalist(*it->second)) ++row.finalists;
  if (it->second && counts_as_winner(*it->second)) ++row.winners;
}

ActivityRow operator+(const ActivityRow& x, const ActivityRow& y) {
  return {x.users + y.users, x.proposal_authors + y.proposal_authors, x.finalists + y.finalists,
          x.winners + y.winners};
}

json row_json(const ActivityRow& r) {
  return {{"users", r.users},
          {"proposal_authors", r.proposal_authors},
          {"finalists", r.finalists},
          {"winners", r.winners}};
}

}  // namespace

Table1Report build_table1(const ContestState& state) {
  const ReferralGraph& g = state.graph();
  const auto outcomes = state.proposals().author_outcomes();

  std::vector<VisitorId> recruits;
  std::vector<const Participant*> others;
  for (const auto& [id, p] : g.participants()) {
    if (!p.membership) continue;
    if (g.is_new_recruit(p)) {
      recruits.push_back(id);
    } else {
      others.push_back(&p);
    }
  }
  const auto kinds = classify_batch(g, recruits);

  Table1Report report;
  for (std::size_t i = 0; i < recruits.size(); ++i) {
    const MemberId& member = g.at(recruits[i]).membership->member_id;
    add_outcome(kinds[i].kind == Kind::direct_recruit ? report.direct : report.indirect, outcomes,
                member);
  }
  for (const Participant* p : others) add_outcome(report.other_members, outcomes, p->membership->member_id);
  report.snp_recruits = report.direct + report.indirect;
  report.total = report.snp_recruits + report.other_members;
  return report;
}

json to_json(const Table1Report& r) {
  return {{"columns", {"users", "proposal_authors", "finalists", "winners"}},
          {"rows",
           {{"snp_recruits", row_json(r.snp_recruits)},
            {"direct", row_json(r.direct)},
            {"indirect", row_json(r.indirect)},
            {"other_members", row_json(r.other_members)},
            {"total", row_json(r.total)}}}};
}

std::string format_table1(const Table1Report& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %10s %18s %10s %10s\n", "", "Users", "Proposal Authors",
                "Finalists", "Winners");
  out << line;
  const std::pair<const char*, const ActivityRow*> rows[] = {
      {"New member recruits", &r.snp_recruits},
      {"  directly recruited", &r.direct},
      {"  indirectly recruited", &r.indirect},
      {"Other members", &r.other_members},
      {"TOTAL members", &r.total},
  };
  for (const auto& [label, row] : rows) {
    std::snprintf(line, sizeof line, "%-28s %10llu %18llu %10llu %10llu\n", label,
                  static_cast<unsigned long long>(row->users),
                  static_cast<unsigned long long>(row->proposal_authors),
                  static_cast<unsigned long long>(row->finalists),
                  static_cast<unsigned long long>(row->winners));
    out << line;
  }
  return out.str();
}

std::vector<NamedTest> significance_tests(const Table1Report& r) {
  const ActivityRow& rec = r.snp_recruits;
  const ActivityRow& oth = r.other_members;
  const ActivityRow& dir = r.direct;
  const ActivityRow& ind = r.indirect;
  std::vector<NamedTest> tests = {
      {"chi2_authorship", "recruits vs other members: authored a proposal",
       {rec.proposal_authors, rec.users - rec.proposal_authors, oth.proposal_authors,
        oth.users - oth.proposal_authors},
       std::nullopt},
      {"chi2_finalists", "recruits vs other members: authored a finalist",
       {rec.finalists, rec.users - rec.finalists, oth.finalists, oth.users - oth.finalists},
       std::nullopt},
      {"chi2", "recruit authors vs other authors: became a finalist",
       {rec.finalists, rec.proposal_authors - rec.finalists, oth.finalists,
        oth.proposal_authors - oth.finalists},
       std::nullopt},
      {"fisher_direct_indirect", "direct vs indirect recruits: authored a proposal",
       {dir.proposal_authors, dir.users - dir.proposal_authors, ind.proposal_authors,
        ind.users - ind.proposal_authors},
       std::nullopt},
      {"fisher_direct_indirect_finalists", "direct vs indirect recruit authors: became a finalist",
       {dir.finalists, dir.proposal_authors - dir.finalists, ind.finalists,
        ind.proposal_authors - ind.finalists},
       std::nullopt},
  };
  for (auto& t : tests) {
    try {
      t.result = t.name.starts_with("fisher") ? fisher_exact_two_sided(t.table) : pearson_chi2(t.table);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_table) throw;
    }
  }
  return tests;
}

json tests_json(const std::vector<NamedTest>& tests) {
  json doc = json::object();
  for (const auto& t : tests) {
    json j = t.result ? to_json(*t.result) : json{{"error", "degenerate table"}};
    j["description"] = t.description;
    j["table"] = {t.table.a, t.table.b, t.table.c, t.table.d};
    doc[t.name] = std::move(j);
  }
  return doc;
}

std::string format_tests(const std::vector<NamedTest>& tests) {
  std::ostringstream out;
  char line[256];
  for (const auto& t : tests) {
    std::snprintf(line, sizeof line, "%-34s (%llu, %llu, %llu, %llu)  ", t.name.c_str(),
                  static_cast<unsigned long long>(t.table.a), static_cast<unsigned long long>(t.table.b),
                  static_cast<unsigned long long>(t.table.c), static_cast<unsigned long long>(t.table.d));
    out << line;
    if (!t.result) {
      out << "degenerate table\n";
      continue;
    }
    if (t.result->statistic) {
      std::snprintf(line, sizeof line, "chi2(%d) = %.2f, p = %.3g\n", t.result->df.value_or(1),
                    *t.result->statistic, t.result->p_value);
    } else {
      std::snprintf(line, sizeof line, "Fisher exact, p = %.3f\n", t.result->p_value);
    }
    out << line;
  }
  return out.str();
}

json summary_json(const ContestState& state) {
  const ReferralGraph& g = state.graph();
  const NetworkCounts c = g.network_counts();
  std::uint64_t members = 0;
  for (const auto& [_, p] : g.participants()) members += p.membership ? 1 : 0;
  return {{"clickers", c.clickers},
          {"link_creators", c.link_creators},
          {"new_recruits", c.new_recruits},
          {"direct", c.direct},
          {"indirect", c.indirect},
          {"members", members},
          {"participants", g.size()},
          {"tokens", g.tokens().size()},
          {"click_events", g.click_events()},
          {"proposals", state.proposals().proposals().size()},
          {"events", state.last_seq()}};
}

std::string format_summary(const ContestState& state) {
  std::ostringstream out;
  const json summary = summary_json(state);
  for (const auto& [key, value] : summary.items()) {
    char line[96];
    std::snprintf(line, sizeof line, "%-14s %llu\n", key.c_str(),
                  static_cast<unsigned long long>(value.get<std::uint64_t>()));
    out << line;
  }
  return out.str();
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "dot") return GraphFormat::dot;
  if (name == "graphml") return GraphFormat::graphml;
  if (name == "json") return GraphFormat::json;
  throw Error(ErrorCode::unsupported_format, "unknown graph format '" + std::string(name) + "'");
}

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::clicker: return "clicker";
    case NodeRole::link_creator: return "link-creator";
    case NodeRole::recruit: return "recruit";
    case NodeRole::staff_root: return "staff-root";
  }
  return "unknown";
}

std::string_view role_color(NodeRole role) {
  switch (role) {
    case NodeRole::clicker: return "blue";
    case NodeRole::link_creator: return "red";
    case NodeRole::recruit: return "green";
    case NodeRole::staff_root: return "gray";
  }
  return "black";
}

NetworkView network_view(const ReferralGraph& g) {
  std::vector<VisitorId> ids;
  for (const auto& id : g.sorted_ids()) {
    const Participant& p = g.at(id);
    if (id == kStaffRoot || (!p.is_staff && (p.first_click_at || g.owns_token(id)))) ids.push_back(id);
  }
  const auto kinds = classify_batch(g, ids);

  NetworkView view;
  view.nodes.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Participant& p = g.at(ids[i]);
    NetworkNode n;
    n.id = ids[i];
    n.clicked = p.first_click_at.has_value();
    n.link_creator = ids[i] != kStaffRoot && g.owns_token(ids[i]);
    n.recruit = g.is_new_recruit(p);
    n.kind = kinds[i].kind;
    n.degrees = kinds[i].degrees_from_established;
    n.role = ids[i] == kStaffRoot ? NodeRole::staff_root
             : n.recruit          ? NodeRole::recruit
             : n.link_creator     ? NodeRole::link_creator
                                  : NodeRole::clicker;
    view.nodes.push_back(std::move(n));
    if (const ReferralEdge* e = g.parent_edge(ids[i])) view.edges.push_back({e->child, e->parent});
  }
  return view;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string to_dot(const NetworkView& v) {
  std::ostringstream out;
  out << "digraph referrals {\n  node [shape=point];\n";
  for (const auto& n : v.nodes) {
    out << "  " << dot_quote(n.id) << " [role=" << dot_quote(to_string(n.role))
        << ", color=" << dot_quote(role_color(n.role)) << ", kind=" << dot_quote(to_string(n.kind))
        << "];\n";
  }
  for (const auto& e : v.edges) out << "  " << dot_quote(e.child) << " -> " << dot_quote(e.parent) << ";\n";
  out << "}\n";
  return out.str();
}

std::string to_graphml(const NetworkView& v) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"role\" for=\"node\" attr.name=\"role\" attr.type=\"string\"/>\n"
         "  <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n"
         "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
         "  <key id=\"clicked\" for=\"node\" attr.name=\"clicked\" attr.type=\"boolean\"/>\n"
         "  <key id=\"link_creator\" for=\"node\" attr.name=\"link_creator\" attr.type=\"boolean\"/>\n"
         "  <key id=\"recruit\" for=\"node\" attr.name=\"recruit\" attr.type=\"boolean\"/>\n"
         "  <graph id=\"referrals\" edgedefault=\"directed\">\n";
  auto flag = [](bool b) { return b ? "true" : "false"; };
  for (const auto& n : v.nodes) {
    out << "    <node id=\"" << xml_escape(n.id) << "\">"
        << "<data key=\"role\">" << to_string(n.role) << "</data>"
        << "<data key=\"color\">" << role_color(n.role) << "</data>"
        << "<data key=\"kind\">" << to_string(n.kind) << "</data>"
        << "<data key=\"clicked\">" << flag(n.clicked) << "</data>"
        << "<data key=\"link_creator\">" << flag(n.link_creator) << "</data>"
        << "<data key=\"recruit\">" << flag(n.recruit) << "</data></node>\n";
  }
  for (const auto& e : v.edges) {
    out << "    <edge source=\"" << xml_escape(e.child) << "\" target=\"" << xml_escape(e.parent)
        << "\"/>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string to_json_document(const NetworkView& v) {
  json nodes = json::array();
  for (const auto& n : v.nodes) {
    json j = {{"id", n.id},
              {"role", std::string(to_string(n.role))},
              {"color", std::string(role_color(n.role))},
              {"kind", std::string(to_string(n.kind))},
              {"clicked", n.clicked},
              {"link_creator", n.link_creator},
              {"recruit", n.recruit}};
    j["degrees"] = n.degrees ? json(*n.degrees) : json(nullptr);
    nodes.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& e : v.edges) edges.push_back({{"source", e.child}, {"target", e.parent}});
  return json{{"directed", true}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}}.dump();
}

}  // namespace

std::string export_graph(const ReferralGraph& graph, GraphFormat format) {
  const NetworkView view = network_view(graph);
  switch (format) {
    case GraphFormat::dot: return to_dot(view);
    case GraphFormat::graphml: return to_graphml(view);
    case GraphFormat::json: return to_json_document(view);
  }
  throw Error(ErrorCode::unsupported_format, "unsupported graph format");
}

}  // namespace snp
