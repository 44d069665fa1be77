#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snp {

enum class ErrorCode {
  invalid_argument,
  malformed,
  unknown_token,
  unknown_participant,
  unknown_member,
  unknown_proposal,
  not_found,
  already_registered,
  staff_winner,
  degenerate_table,
  corrupt_log,
  unsupported_format,
  io,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-readable code; the HTTP layer maps codes to
/// status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace snp
