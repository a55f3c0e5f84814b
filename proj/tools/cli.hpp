#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gandse/engine_config.hpp"
#include "gandse/gan_dse.hpp"
#include "gandse/network.hpp"

namespace gandse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

/// Runs one command line (argv[0] is the program name). Diagnostics go to `err` as a
/// single line; normal output to `out`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Independent stream seeds derived from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Artifacts written by `train` into its run directory.
struct RunFiles {
    static constexpr const char* generator = "generator.bin";
    static constexpr const char* discriminator = "discriminator.bin";
    static constexpr const char* stats = "norm.stats";
    static constexpr const char* losses = "losses.txt";
    static constexpr const char* info = "train.info";
};

/// What `explore` decided for one layer.
struct SelectionRecord {
    std::string layer_name;
    Variant variant = Variant::im2col;
    ConvLayer layer;
    double lo = 0.0;
    double po = 0.0;
    SelectionResult result;
};

void write_selection(std::ostream& out, const SelectionRecord& record);
SelectionRecord read_selection(std::istream& in);
SelectionRecord read_selection_file(const std::string& path);

}  // namespace gandse::cli
