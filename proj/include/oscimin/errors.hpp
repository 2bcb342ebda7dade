#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscimin {

enum class Errc {
  undefined_quotient,
  nehari_undefined,
  grid_too_short,
  no_admissible_shot,
  bracket_invalid,
  shot_failed,
  construction_failed,
  parse_error,
};

std::string_view to_string(Errc code);

/// Domain failure of a numerical operation. Precondition violations on
/// arguments are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace oscimin
