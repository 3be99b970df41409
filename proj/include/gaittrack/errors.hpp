#pragma once

#include <stdexcept>
#include <string>

namespace gait {

// Machine-checkable failure categories; the CLI maps these to exit codes.
enum class ErrorCode {
  malformed_row,
  non_monotone_time,
  range_violation,
  rate_gap,
  empty_stream,
  no_overlap,
  rate_mismatch,
  overlapping_annotations,
  unaligned_start,
  too_short,
  shape_mismatch,
  too_few_steps,
  not_enough_subjects,
  diverged,
  empty_windows,
  length_mismatch,
  empty,
  invalid_params,
  range_exceeded,
  invalid_config,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace gait
