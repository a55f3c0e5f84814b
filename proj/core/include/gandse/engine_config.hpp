#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "gandse/accel_model.hpp"
#include "gandse/baselines.hpp"
#include "gandse/config_space.hpp"
#include "gandse/dataset.hpp"
#include "gandse/eval.hpp"
#include "gandse/gan_dse.hpp"

namespace gandse {

/// Every tunable of the pipeline. Loaded from a flat `section.key = value` file; keys that
/// are absent keep their defaults. See config/defaults.conf for the full reference.
struct EngineConfig {
    Variant variant = Variant::im2col;
    std::uint64_t seed = 1;
    std::string profile = "desk";

    ConfigSpace space = ConfigSpace::defaults(Variant::im2col);
    PowerCoefficients power;
    std::int64_t dnnweaver_bandwidth = kDnnWeaverBandwidth;
    LayerRanges layers = LayerRanges::defaults();

    std::size_t train_size = 5000;
    std::size_t test_size = 500;

    ArchProfile arch = ArchProfile::desk();
    TrainConfig train;

    std::size_t candidate_cap = kDefaultCandidateCap;
    TaskOptions tasks;
    SaSchedule sa;

    std::string data_dir = "data";
    std::string run_dir = "run";

    static EngineConfig defaults(Variant variant, std::string_view profile = "desk");

    /// Defaults, then every key of the file applied in order. Unknown keys are errors.
    static EngineConfig load(const std::string& path);
    static EngineConfig parse(std::istream& in);

    /// Re-applies the variant's default space and the named profile.
    void set_variant(Variant v);
    void set_profile(std::string_view name);

    DesignModel model() const { return DesignModel(space, power, dnnweaver_bandwidth); }
    ExploreOptions explore_options(std::uint64_t explore_seed) const;

    /// Throws InputError when a field is out of its documented range.
    void validate() const;
};

void write_engine_config(std::ostream& out, const EngineConfig& config);

}  // namespace gandse
