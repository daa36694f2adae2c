#pragma once

#include <string>
#include <string_view>

#include "wic/util/errors.hpp"

namespace wic {

enum class Mode { monolingual, crosslingual };

inline std::string_view to_string(Mode m) { return m == Mode::monolingual ? "monolingual" : "crosslingual"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "monolingual" || s == "mono") return Mode::monolingual;
  if (s == "crosslingual" || s == "xl") return Mode::crosslingual;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected mono|xl)");
}

}  // namespace wic
