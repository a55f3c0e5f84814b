#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gandse/types.hpp"

namespace gandse {

struct NamedLayer {
    std::string name;
    ConvLayer layer;

    bool operator==(const NamedLayer&) const = default;
};

/// Convolution layers of a user network, in file order.
struct NetworkDescription {
    std::vector<NamedLayer> layers;

    bool operator==(const NetworkDescription&) const = default;
};

/// Parses one layer per line:
///
///     conv <name> ic=<n> oc=<n> ow=<n> oh=<n> kw=<n> kh=<n>
///
/// `#` starts a comment and blank lines are ignored. Errors carry the line number.
NetworkDescription parse_network(std::string_view text);
NetworkDescription parse_network_file(const std::string& path);

std::string render_network(const NetworkDescription& network);

}  // namespace gandse
