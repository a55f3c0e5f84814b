#include "gandse/types.hpp"

#include <cctype>

#include "gandse/error.hpp"

namespace gandse {

std::string_view to_string(Variant v) {
    return v == Variant::im2col ? "im2col" : "dnnweaver";
}

Variant parse_variant(std::string_view text) {
    if (text == "im2col") return Variant::im2col;
    if (text == "dnnweaver") return Variant::dnnweaver;
    throw InputError("unknown variant '" + std::string(text) + "' (expected im2col or dnnweaver)");
}

std::optional<ConfigVar> parse_config_var(std::string_view name) {
    for (std::size_t i = 0; i < kNumConfigVars; ++i) {
        const auto& ref = kConfigVarNames[i];
        if (ref.size() != name.size()) continue;
        bool same = true;
        for (std::size_t k = 0; k < ref.size() && same; ++k)
            same = std::toupper(static_cast<unsigned char>(name[k])) == ref[k];
        if (same) return static_cast<ConfigVar>(i);
    }
    return std::nullopt;
}

}  // namespace gandse
