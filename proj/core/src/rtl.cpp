#include "gandse/rtl.hpp"

#include "gandse/config_space.hpp"
#include "gandse/error.hpp"

namespace gandse {

std::string default_rtl_template(Variant variant) {
    std::string out;
    for (const auto var : ConfigSpace::variables_of(variant)) {
        const std::string name(name_of(var));
        out += "localparam " + name + " = {{" + name + "}};\n";
    }
    return out;
}

std::string emit_rtl_params(std::string_view templ, const Configuration& config, Variant variant) {
    const auto vars = ConfigSpace::variables_of(variant);
    std::string out;
    out.reserve(templ.size());
    std::size_t pos = 0;
    while (true) {
        const auto open = templ.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(templ.substr(pos));
            break;
        }
        out.append(templ.substr(pos, open - pos));
        const auto close = templ.find("}}", open + 2);
        if (close == std::string_view::npos)
            throw InputError("unreplaced placeholder at offset " + std::to_string(open));
        const auto name = templ.substr(open + 2, close - open - 2);
        const auto var = parse_config_var(name);
        if (!var || name != name_of(*var)) throw InputError("unknown placeholder '" + std::string(name) + "'");
        bool defined = false;
        for (const auto v : vars) defined = defined || v == *var;
        if (!defined)
            throw InputError(std::string(name) + " not defined for " + std::string(to_string(variant)) + " variant");
        if (config[*var] < 1) throw InputError(std::string(name) + " is not populated in the configuration");
        out += std::to_string(config[*var]);
        pos = close + 2;
    }
    return out;
}

}  // namespace gandse
