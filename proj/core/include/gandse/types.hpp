#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gandse {

/// Accelerator template the design space and cost model describe.
enum class Variant : std::uint8_t { im2col, dnnweaver };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

/// The six parameters of one stride-1, unpadded convolution layer.
struct ConvLayer {
    std::int64_t ic = 1;  ///< input channels
    std::int64_t oc = 1;  ///< output channels
    std::int64_t ow = 1;  ///< output width
    std::int64_t oh = 1;  ///< output height
    std::int64_t kw = 1;  ///< kernel width
    std::int64_t kh = 1;  ///< kernel height

    std::array<std::int64_t, 6> as_array() const { return {ic, oc, ow, oh, kw, kh}; }
    static ConvLayer from_array(const std::array<std::int64_t, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    bool valid() const { return ic >= 1 && oc >= 1 && ow >= 1 && oh >= 1 && kw >= 1 && kh >= 1; }

    auto operator<=>(const ConvLayer&) const = default;
};

inline constexpr std::array<std::string_view, 6> kLayerFieldNames = {"IC", "OC", "OW", "OH", "KW", "KH"};

/// Configuration variables in dataset column order.
enum class ConfigVar : std::uint8_t { pen, sdb, dsb, iss, wss, oss, tic, toc, tow, toh, tkw, tkh };

inline constexpr std::size_t kNumConfigVars = 12;

inline constexpr std::array<std::string_view, kNumConfigVars> kConfigVarNames = {
    "PEN", "SDB", "DSB", "ISS", "WSS", "OSS", "TIC", "TOC", "TOW", "TOH", "TKW", "TKH"};

inline constexpr std::size_t index_of(ConfigVar v) { return static_cast<std::size_t>(v); }
inline constexpr std::string_view name_of(ConfigVar v) { return kConfigVarNames[index_of(v)]; }

/// Case-insensitive lookup ("pen", "PEN").
std::optional<ConfigVar> parse_config_var(std::string_view name);

/// One point of the design space. A value of 0 marks a variable the variant does not populate.
class Configuration {
public:
    Configuration() = default;

    std::int64_t operator[](ConfigVar v) const { return values_[index_of(v)]; }
    std::int64_t& operator[](ConfigVar v) { return values_[index_of(v)]; }
    bool has(ConfigVar v) const { return values_[index_of(v)] != 0; }

    const std::array<std::int64_t, kNumConfigVars>& values() const { return values_; }

    auto operator<=>(const Configuration&) const = default;

private:
    std::array<std::int64_t, kNumConfigVars> values_{};
};

/// Normalized latency and power objectives for one layer.
struct DseTask {
    ConvLayer layer;
    double lo = 0.0;  ///< latency objective
    double po = 0.0;  ///< power objective
};

}  // namespace gandse
