#include <map>
#include <set>

#include "doctest.h"
#include "generators.hpp"
#include "snp/contest_state.hpp"
#include "snp/error.hpp"
#include "snp/kernels.hpp"
#include "snp/referral_graph.hpp"

using namespace snp;

namespace {

Timestamp at_s(std::int64_t s) { return Timestamp::from_seconds(1'400'000'000 + s); }

// alice is an organic member who shares; bob, carol and dave each click the
// previous person's link and then join.
ReferralGraph balloon() {
  ReferralGraph g;
  g.register_member("alice", "m-alice", at_s(0));
  g.add_token("tA", "alice", at_s(1), false);
  g.record_click("tA", "bob", at_s(2));
  g.register_member("bob", "m-bob", at_s(3));
  g.add_token("tB", "bob", at_s(4), false);
  g.record_click("tB", "carol", at_s(5));
  g.register_member("carol", "m-carol", at_s(6));
  g.add_token("tC", "carol", at_s(7), false);
  g.record_click("tC", "dave", at_s(8));
  g.register_member("dave", "m-dave", at_s(9));
  return g;
}

// Independent forest check: every parent walk terminates within |V| steps.
bool walks_terminate(const ReferralGraph& g) {
  std::map<std::string, std::string> parent;
  for (const auto& [child, e] : g.edges()) parent[child] = e.parent;
  for (const auto& [child, _] : parent) {
    std::set<std::string> seen{child};
    for (auto it = parent.find(child); it != parent.end(); it = parent.find(it->second)) {
      if (!seen.insert(it->second).second) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("first click wins, self-clicks never create edges") {
  ReferralGraph g;
  g.add_token("tA", "alice", at_s(0), false);
  g.add_token("tC", "carol", at_s(0), false);

  auto r = g.record_click("tA", "bob", at_s(1));
  CHECK(r.outcome == ClickOutcome::attributed);
  CHECK(r.parent == "alice");

  r = g.record_click("tC", "bob", at_s(2));
  CHECK(r.outcome == ClickOutcome::already_attributed);
  CHECK(r.parent == "alice");
  CHECK(g.parent_edge("bob")->via_token == "tA");
  CHECK(g.at("bob").first_click_at == at_s(1));

  r = g.record_click("tA", "alice", at_s(3));
  CHECK(r.outcome == ClickOutcome::self_click_ignored);
  CHECK(g.parent_edge("alice") == nullptr);
  CHECK_FALSE(g.at("alice").first_click_at);
  CHECK(g.click_events() == 3);
}

TEST_CASE("unknown token is rejected") {
  ReferralGraph g;
  try {
    g.record_click("nope", "bob", at_s(0));
    FAIL("expected unknown_token");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_token);
  }
  CHECK(g.find("bob") == nullptr);
}

TEST_CASE("a root clicking its own descendant's link is ignored") {
  ReferralGraph g;
  g.add_token("tA", "alice", at_s(0), false);
  g.record_click("tA", "bob", at_s(1));
  g.add_token("tB", "bob", at_s(2), false);
  const auto r = g.record_click("tB", "alice", at_s(3));
  CHECK(r.outcome == ClickOutcome::self_click_ignored);
  CHECK(g.parent_edge("alice") == nullptr);
  CHECK_FALSE(g.find_invariant_violation());
}

TEST_CASE("staff links condense into one staff root") {
  ReferralGraph g;
  g.add_token("s1", "staff-ann", at_s(0), true);
  g.add_token("s2", "staff-ben", at_s(0), true);
  g.record_click("s1", "x", at_s(1));
  g.record_click("s2", "y", at_s(1));
  CHECK(g.parent_edge("x")->parent == kStaffRoot);
  CHECK(g.parent_edge("y")->parent == kStaffRoot);
  CHECK(g.find_token("s1")->staff_canonical);
  CHECK_FALSE(g.find_token("s2")->staff_canonical);
  // Staff clicking a staff link is a self-click of the root.
  CHECK(g.record_click("s1", "staff-ben", at_s(2)).outcome == ClickOutcome::self_click_ignored);

  g.register_member("x", "m-x", at_s(3));
  const auto c = g.classify("x");
  CHECK(c.kind == Kind::direct_recruit);
  CHECK(c.degrees_from_established == 1);
}

TEST_CASE("registration") {
  ReferralGraph g;
  g.register_member("a", "m-a", at_s(0));
  SUBCASE("double registration is rejected") {
    CHECK_THROWS_AS(g.register_member("a", "m-a2", at_s(1)), Error);
  }
  SUBCASE("member ids are unique") {
    CHECK_THROWS_AS(g.register_member("b", "m-a", at_s(1)), Error);
  }
  SUBCASE("organic member is outside the referral network") {
    CHECK(g.classify("a").kind == Kind::existing_member);
    CHECK(g.network_counts() == NetworkCounts{});
  }
  CHECK_THROWS_AS(g.register_member("c", "", at_s(1)), Error);
  CHECK_THROWS_AS(g.register_member(std::string(kStaffRoot), "m-root", at_s(1)), Error);
}

TEST_CASE("classification by timestamp comparison") {
  ReferralGraph g;
  g.add_token("s", "staff", at_s(0), true);

  SUBCASE("click then join is a new recruit") {
    g.record_click("s", "v", at_s(1));
    g.register_member("v", "m-v", at_s(2));
    CHECK(g.classify("v").kind == Kind::direct_recruit);
  }
  SUBCASE("join then click is an existing member") {
    g.register_member("v", "m-v", at_s(1));
    g.record_click("s", "v", at_s(2));
    CHECK(g.classify("v").kind == Kind::existing_member);
  }
  SUBCASE("equal timestamps count as existing") {
    g.register_member("v", "m-v", at_s(1));
    g.record_click("s", "v", at_s(1));
    CHECK(g.classify("v").kind == Kind::existing_member);
  }
  SUBCASE("clicked only") {
    g.record_click("s", "v", at_s(1));
    CHECK(g.classify("v").kind == Kind::passive_clicker);
    g.add_token("tv", "v", at_s(2), false);
    CHECK(g.classify("v").kind == Kind::non_member_sharer);
  }
}

TEST_CASE("indirect recruits sit behind a non-member") {
  ReferralGraph g;
  g.register_member("m", "m-m", at_s(0));
  g.add_token("tm", "m", at_s(0), false);
  g.record_click("tm", "x", at_s(1));  // x never joins before clicking
  g.add_token("tx", "x", at_s(2), false);
  g.record_click("tx", "y", at_s(3));
  g.register_member("y", "m-y", at_s(4));
  g.register_member("x", "m-x", at_s(5));

  const auto y = g.classify("y");
  CHECK(y.kind == Kind::indirect_recruit);
  CHECK(y.degrees_from_established == 2);
  // x joined after its click, so it is a recruit itself, and direct.
  CHECK(g.classify("x").kind == Kind::direct_recruit);
  CHECK(g.network_counts() == NetworkCounts{2, 2, 2, 1, 1});
}

TEST_CASE("chain without an established root is indirect at every depth") {
  ReferralGraph g;
  g.add_token("ta", "a", at_s(0), false);  // a never clicks, never joins
  g.record_click("ta", "b", at_s(1));
  g.register_member("b", "m-b", at_s(2));
  const auto c = g.classify("b");
  CHECK(c.kind == Kind::indirect_recruit);
  CHECK(c.degrees_from_established == 2);
}

TEST_CASE("chain_of follows parents to the root") {
  const ReferralGraph g = balloon();
  CHECK(g.chain_of("dave") == std::vector<VisitorId>{"carol", "bob", "alice"});
  CHECK(g.chain_of("alice").empty());
  CHECK(g.classify("bob").kind == Kind::direct_recruit);
  CHECK(g.classify("dave") == Classification{Kind::indirect_recruit, 3});
}

TEST_CASE("network counts") {
  SUBCASE("single staff token, one click") {
    ReferralGraph g;
    g.add_token("s", "staff", at_s(0), true);
    g.record_click("s", "v", at_s(1));
    CHECK(g.network_counts() == NetworkCounts{1, 0, 0, 0, 0});
  }
  SUBCASE("balloon") { CHECK(balloon().network_counts() == NetworkCounts{3, 3, 3, 1, 2}); }
}

TEST_CASE("token lookup helpers") {
  ReferralGraph g;
  g.add_token("t2", "a", at_s(5), false, std::string("h1"));
  g.add_token("t1", "a", at_s(5), false, std::string("h1"));
  g.add_token("t0", "a", at_s(9), false, std::string("h1"));
  CHECK(g.token_for("a", "h1")->token == "t1");
  CHECK(g.token_for("a", "h2") == nullptr);
  CHECK_THROWS_AS(g.add_token("t1", "b", at_s(6), false), Error);

  int calls = 0;
  const std::string fresh = g.fresh_token([&] { return ++calls < 3 ? "t1" : "fresh"; });
  CHECK(fresh == "fresh");
  CHECK_THROWS_AS(g.fresh_token([] { return std::string("t0"); }), Error);
}

TEST_CASE("json round trip is canonical") {
  const ReferralGraph g = balloon();
  const auto doc = g.to_json();
  const ReferralGraph back = ReferralGraph::from_json(doc);
  CHECK(back.to_json() == doc);
  CHECK(back.chain_of("dave") == g.chain_of("dave"));
  CHECK(back.network_counts() == g.network_counts());
}

TEST_CASE("property: random interleavings keep every graph invariant") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto log = gen::random_interleaving(3000, seed);
    ContestState state;
    std::map<VisitorId, ReferralEdge> first_edge;
    for (const auto& e : log.events) {
      state.apply(e);
      if (const auto* c = std::get_if<Click>(&e.payload)) {
        if (const ReferralEdge* edge = state.graph().parent_edge(c->visitor)) {
          auto [it, inserted] = first_edge.emplace(c->visitor, *edge);
          REQUIRE(it->second == *edge);  // attribution never changes
          if (inserted) REQUIRE(edge->established_at == e.ts);
        }
      }
    }
    const ReferralGraph& g = state.graph();
    REQUIRE_FALSE(g.find_invariant_violation());
    REQUIRE(walks_terminate(g));

    const NetworkCounts counts = g.network_counts();
    CHECK(counts.direct + counts.indirect == counts.new_recruits);
    for (const auto& id : g.sorted_ids()) {
      const Participant& p = g.at(id);
      const Classification c = g.classify(id);
      if (c.kind == Kind::direct_recruit) CHECK(c.degrees_from_established == 1);
      if (c.kind == Kind::indirect_recruit) CHECK(*c.degrees_from_established > 1);
      if (!p.is_staff) {
        const bool existing = p.membership && (!p.first_click_at || p.membership->created_at <= *p.first_click_at);
        CHECK((c.kind == Kind::existing_member) == existing);
      }
      const ReferralEdge* e = g.parent_edge(id);
      if (e != nullptr) {
        CHECK(e->child != e->parent);
        CHECK(p.first_click_at == e->established_at);
      }
      CHECK(g.chain_of(id).size() == (e == nullptr ? 0 : g.chain_of(e->parent).size() + 1));
    }
  }
}

TEST_CASE("parallel kernels match their serial references") {
  const auto log = gen::random_interleaving(20000, 77);
  ContestState state;
  for (const auto& e : log.events) state.apply(e);
  const auto ids = state.graph().sorted_ids();
  CHECK(classify_batch(state.graph(), ids) == classify_batch_serial(state.graph(), ids));
  const auto lengths = chain_lengths(state.graph(), ids);
  CHECK(lengths == chain_lengths_serial(state.graph(), ids));
  for (std::size_t i = 0; i < ids.size(); i += 97) CHECK(lengths[i] == state.graph().chain_of(ids[i]).size());
}
