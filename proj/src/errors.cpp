#include "oscimin/errors.hpp"

namespace oscimin {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::undefined_quotient: return "undefined quotient";
    case Errc::nehari_undefined: return "Nehari normalization undefined";
    case Errc::grid_too_short: return "grid too short";
    case Errc::no_admissible_shot: return "no admissible shot at this lambda";
    case Errc::bracket_invalid: return "bracket invalid";
    case Errc::shot_failed: return "shot failed";
    case Errc::construction_failed: return "construction failed";
    case Errc::parse_error: return "parse error";
  }
  return "unknown";
}

}  // namespace oscimin
