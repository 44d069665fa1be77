#include "snp/error.hpp"

namespace snp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::malformed: return "malformed";
    case ErrorCode::unknown_token: return "unknown_token";
    case ErrorCode::unknown_participant: return "unknown_participant";
    case ErrorCode::unknown_member: return "unknown_member";
    case ErrorCode::unknown_proposal: return "unknown_proposal";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::already_registered: return "already_registered";
    case ErrorCode::staff_winner: return "staff_winner";
    case ErrorCode::degenerate_table: return "degenerate_table";
    case ErrorCode::corrupt_log: return "corrupt_log";
    case ErrorCode::unsupported_format: return "unsupported_format";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace snp
