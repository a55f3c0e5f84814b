#include "gandse/network.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"

namespace gandse {

namespace {
constexpr std::array<std::string_view, 6> kKeys = {"ic", "oc", "ow", "oh", "kw", "kh"};
}

NetworkDescription parse_network(std::string_view text) {
    NetworkDescription net;
    std::set<std::string> names;
    std::istringstream lines{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::istringstream tokens{std::string(trim(line))};
        std::string word;
        if (!(tokens >> word)) continue;
        if (word != "conv") throw ParseError("expected 'conv', got '" + word + "'", line_no);
        NamedLayer nl_layer;
        if (!(tokens >> nl_layer.name)) throw ParseError("missing layer name", line_no);
        if (nl_layer.name.find('=') != std::string::npos)
            throw ParseError("missing layer name before '" + nl_layer.name + "'", line_no);

        std::array<std::int64_t, 6> values{};
        std::array<bool, 6> seen{};
        while (tokens >> word) {
            const auto eq = word.find('=');
            if (eq == std::string::npos) throw ParseError("expected key=value, got '" + word + "'", line_no);
            const auto key = word.substr(0, eq);
            std::size_t k = 0;
            while (k < kKeys.size() && kKeys[k] != key) ++k;
            if (k == kKeys.size()) throw ParseError("unknown key '" + key + "'", line_no);
            if (seen[k]) throw ParseError("duplicate key '" + key + "'", line_no);
            values[k] = parse_int(std::string_view(word).substr(eq + 1), key, line_no);
            if (values[k] < 1) throw ParseError(key + " must be >= 1", line_no);
            seen[k] = true;
        }
        for (std::size_t k = 0; k < kKeys.size(); ++k)
            if (!seen[k]) throw ParseError("missing key '" + std::string(kKeys[k]) + "'", line_no);
        if (!names.insert(nl_layer.name).second) throw ParseError("duplicate layer name '" + nl_layer.name + "'", line_no);
        nl_layer.layer = ConvLayer::from_array(values);
        net.layers.push_back(std::move(nl_layer));
    }
    if (net.layers.empty()) throw ParseError("no layers");
    return net;
}

NetworkDescription parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open network description '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string render_network(const NetworkDescription& network) {
    std::string out;
    for (const auto& l : network.layers) {
        out += "conv " + l.name;
        const auto v = l.layer.as_array();
        for (std::size_t k = 0; k < kKeys.size(); ++k) out += " " + std::string(kKeys[k]) + "=" + std::to_string(v[k]);
        out += '\n';
    }
    return out;
}

}  // namespace gandse
