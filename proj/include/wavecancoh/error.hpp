#ifndef WAVECANCOH_ERROR_HPP
#define WAVECANCOH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wavecancoh {

/// Specific failure conditions raised by the library.
enum class Errc {
  unsupported_family,
  scale_overflow,
  scale_out_of_range,
  insufficient_length,
  invalid_length,
  invalid_data,
  invalid_argument,
  dimension_mismatch,
  not_psd,
  rank_deficient,
  conditioning,
  window_range,
  empty_group,
  grid_mismatch,
  parse,
  io,
};

/// Coarse failure category; the CLI maps each one to an exit code.
enum class ErrorCategory { parse, validation, numerical, io };

inline ErrorCategory category_of(Errc code) {
  switch (code) {
    case Errc::parse:
      return ErrorCategory::parse;
    case Errc::io:
      return ErrorCategory::io;
    case Errc::not_psd:
    case Errc::rank_deficient:
    case Errc::conditioning:
      return ErrorCategory::numerical;
    default:
      return ErrorCategory::validation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace wavecancoh

#endif  // WAVECANCOH_ERROR_HPP
