#include "snp/contest_state.hpp"

#include <fstream>
#include <sstream>

#include "snp/crypto.hpp"
#include "snp/error.hpp"

namespace snp {

using nlohmann::json;

void ProposalBook::add_author(const std::string& proposal, const MemberId& member) {
  auto [it, inserted] = proposals_.try_emplace(proposal);
  if (inserted) it->second.id = proposal;
  it->second.authors.insert(member);
}

void ProposalBook::add_result(const std::string& proposal, ProposalStatus status) {
  const auto it = proposals_.find(proposal);
  if (it == proposals_.end()) {
    throw Error(ErrorCode::unknown_proposal, "result for unknown proposal '" + proposal + "'");
  }
  auto& best = it->second.best_status;
  if (!best || status > *best) best = status;
}

std::map<MemberId, std::optional<ProposalStatus>> ProposalBook::author_outcomes() const {
  std::map<MemberId, std::optional<ProposalStatus>> out;
  for (const auto& [_, p] : proposals_) {
    for (const auto& m : p.authors) {
      auto& slot = out[m];
      if (p.best_status && (!slot || *p.best_status > *slot)) slot = p.best_status;
    }
  }
  return out;
}

void ContestState::apply(const EventRecord& record) {
  if (record.seq != last_seq_ + 1) {
    throw Error(ErrorCode::corrupt_log, "expected seq " + std::to_string(last_seq_ + 1) + ", got " +
                                            std::to_string(record.seq));
  }
  if (last_ts_ && record.ts < *last_ts_) {
    throw Error(ErrorCode::corrupt_log, "timestamp " + format_rfc3339(record.ts) +
                                            " precedes previous record " + format_rfc3339(*last_ts_));
  }

  struct Applier {
    ContestState& s;
    Timestamp ts;
    void operator()(const LinkCreated& e) {
      s.graph_.add_token(e.token, e.owner_visitor, ts, e.staff, e.email_hash, e.consent);
    }
    void operator()(const Click& e) { s.graph_.record_click(e.token, e.visitor, ts, e.country); }
    void operator()(const MemberRegistered& e) { s.graph_.register_member(e.visitor, e.member, ts); }
    void operator()(const ProposalAuthored& e) {
      if (s.graph_.find_member(e.member) == nullptr) {
        throw Error(ErrorCode::unknown_member, "proposal by unknown member '" + e.member + "'");
      }
      s.proposals_.add_author(e.proposal, e.member);
    }
    void operator()(const ProposalResult& e) { s.proposals_.add_result(e.proposal, e.status); }
  };
  std::visit(Applier{*this, record.ts}, record.payload);
  last_seq_ = record.seq;
  last_ts_ = record.ts;
}

json ContestState::to_json() const {
  json props = json::array();
  for (const auto& [id, p] : proposals_.proposals()) {
    json j = {{"id", id}, {"authors", p.authors}};
    j["status"] = p.best_status ? json(std::string(to_string(*p.best_status))) : json(nullptr);
    props.push_back(std::move(j));
  }
  json doc = {{"format", "snp-state/1"},
              {"last_seq", last_seq_},
              {"graph", graph_.to_json()},
              {"proposals", std::move(props)}};
  doc["last_ts"] = last_ts_ ? json(format_rfc3339(*last_ts_)) : json(nullptr);
  return doc;
}

ContestState ContestState::from_json(const json& doc) {
  if (doc.value("format", "") != "snp-state/1") {
    throw Error(ErrorCode::malformed, "not an snp-state/1 snapshot");
  }
  ContestState s;
  s.last_seq_ = doc.at("last_seq").get<std::uint64_t>();
  if (!doc.at("last_ts").is_null()) s.last_ts_ = parse_rfc3339(doc["last_ts"].get<std::string>());
  s.graph_ = ReferralGraph::from_json(doc.at("graph"));
  for (const auto& j : doc.at("proposals")) {
    const std::string id = j.at("id").get<std::string>();
    for (const auto& m : j.at("authors")) s.proposals_.add_author(id, m.get<std::string>());
    if (!j.at("status").is_null()) {
      s.proposals_.add_result(id, parse_proposal_status(j["status"].get<std::string>()));
    }
  }
  return s;
}

std::string ContestState::state_hash() const { return sha256_hex(to_json().dump()); }

ContestState replay(std::istream& in, ContestState start) {
  ContestState state = std::move(start);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      state.apply(decode_line(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::corrupt_log, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return state;
}

ContestState replay_file(const std::filesystem::path& path, ContestState start) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open event log " + path.string());
  return replay(in, std::move(start));
}

ContestState replay_records(const std::vector<EventRecord>& records, ContestState start) {
  ContestState state = std::move(start);
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      state.apply(records[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::corrupt_log, "record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return state;
}

void write_snapshot(const ContestState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write snapshot " + path.string());
  out << state.to_json().dump() << '\n';
  if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

ContestState load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open snapshot " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::malformed, "snapshot is not valid JSON");
  return ContestState::from_json(doc);
}

std::vector<EventRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open event log " + path.string());
  std::vector<EventRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      EventRecord rec = decode_line(line);
      if (!out.empty() && rec.seq != out.back().seq + 1) {
        throw Error(ErrorCode::corrupt_log, "seq " + std::to_string(rec.seq) + " does not follow " +
                                                std::to_string(out.back().seq));
      }
      out.push_back(std::move(rec));
    } catch (const Error& e) {
      throw Error(ErrorCode::corrupt_log, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_log(const std::vector<EventRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write event log " + path.string());
  for (const auto& r : records) out << encode_line(r) << '\n';
  if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

}  // namespace snp
