#pragma once

#include <string>
#include <string_view>

#include "gandse/types.hpp"

namespace gandse {

/// One `localparam NAME = {{NAME}};` line per variable the variant populates.
std::string default_rtl_template(Variant variant);

/// Replaces every `{{NAME}}` placeholder with the configuration's decimal value. Bytes
/// outside placeholders are copied unchanged. Throws InputError on unknown names, names
/// the variant does not define, and unterminated placeholders.
std::string emit_rtl_params(std::string_view templ, const Configuration& config, Variant variant);

}  // namespace gandse
