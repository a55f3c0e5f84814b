#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "cli.hpp"
#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"
#include "gandse/rtl.hpp"
#include "tempdir.hpp"

using namespace gandse;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run gandse_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gandse");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// A pipeline small enough for a unit test.
std::string tiny_config(const TempDir& dir) {
    const std::string path = dir / "tiny.conf";
    spit(path, "variant = dnnweaver\n"
               "dataset.train_size = 64\n"
               "dataset.test_size = 8\n"
               "model.g_hidden_layers = 1\nmodel.g_width = 16\n"
               "model.d_hidden_layers = 1\nmodel.d_width = 16\n"
               "train.epochs = 3\ntrain.batch_size = 16\n"
               "paths.data_dir = " + (dir / "data") + "\n"
               "paths.run_dir = " + (dir / "run") + "\n");
    return path;
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(gandse_cli({"--help"}).code == cli::kExitOk);
    CHECK(gandse_cli({}).code == cli::kExitUser);
    CHECK(gandse_cli({"train", "--bogus"}).code == cli::kExitUser);
    CHECK(gandse_cli({"--variant", "tpu", "gen-data"}).code == cli::kExitUser);

    const auto missing = gandse_cli({"parse", "/nonexistent/net.txt"});
    CHECK(missing.code == cli::kExitUser);
    CHECK(count_lines(missing.err) == 1);
    CHECK(missing.err.rfind("error: ", 0) == 0);

    TempDir dir;
    const auto cfg = tiny_config(dir);
    const auto no_data = gandse_cli({"--config", cfg, "train"});
    CHECK(no_data.code == cli::kExitUser);
    CHECK(no_data.err.find("training set") != std::string::npos);

    spit(dir / "bad.conf", "train.nonsense = 3\n");
    const auto bad = gandse_cli({"--config", dir / "bad.conf", "gen-data"});
    CHECK(bad.code == cli::kExitUser);
    CHECK(bad.err.find("line 1") != std::string::npos);
}

TEST_CASE("network descriptions") {
    const auto net = parse_network("# two layers\n"
                                   "conv c1 ic=3 oc=64 ow=112 oh=112 kw=7 kh=7\n"
                                   "\n"
                                   "conv c2 ic=64 oc=128 ow=56 oh=56 kw=3 kh=3  # trailing comment\n");
    REQUIRE(net.layers.size() == 2);
    CHECK(net.layers[0].name == "c1");
    CHECK(net.layers[0].layer == ConvLayer{3, 64, 112, 112, 7, 7});
    CHECK(net.layers[1].layer == ConvLayer{64, 128, 56, 56, 3, 3});
    CHECK(parse_network(render_network(net)) == net);

    // Key order is free.
    CHECK(parse_network("conv x kh=1 kw=2 oh=3 ow=4 oc=5 ic=6").layers[0].layer == ConvLayer{6, 5, 4, 3, 2, 1});

    auto message = [](std::string_view text) {
        try {
            parse_network(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("# nothing\n") == "no layers");
    CHECK(message("\nconv c ic=0 oc=1 ow=1 oh=1 kw=1 kh=1") == "line 2: ic must be >= 1");
    CHECK(message("conv c ic=1 oc=1 ow=1 oh=1 kw=1") == "line 1: missing key 'kh'");
    CHECK(message("pool p") == "line 1: expected 'conv', got 'pool'");
    CHECK(message("conv a ic=1 oc=1 ow=1 oh=1 kw=1 kh=1\nconv a ic=1 oc=1 ow=1 oh=1 kw=1 kh=1")
              .find("duplicate layer name") != std::string::npos);

    TempDir dir;
    spit(dir / "net.txt", "conv c1 ic=3 oc=8 ow=8 oh=8 kw=3 kh=3\n");
    const auto r = gandse_cli({"parse", dir / "net.txt"});
    CHECK(r.code == 0);
    CHECK(parse_network(r.out).layers.size() == 1);
}

TEST_CASE("rtl parameter emission") {
    Configuration c;
    c[ConfigVar::pen] = 16;
    c[ConfigVar::iss] = c[ConfigVar::wss] = c[ConfigVar::oss] = 128;
    CHECK(emit_rtl_params("parameter PE = {{PEN}};", c, Variant::dnnweaver) == "parameter PE = 16;");
    CHECK(emit_rtl_params("no placeholders { } }}", c, Variant::dnnweaver) == "no placeholders { } }}");

    auto message = [&](std::string_view t) {
        try {
            emit_rtl_params(t, c, Variant::dnnweaver);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("{{TIC}}") == "TIC not defined for dnnweaver variant");
    CHECK(message("{{FOO}}").find("unknown placeholder") != std::string::npos);
    CHECK(message("{{PEN").find("unreplaced placeholder") != std::string::npos);

    c[ConfigVar::pen] = 8;
    const auto rtl = emit_rtl_params(default_rtl_template(Variant::dnnweaver), c, Variant::dnnweaver);
    CHECK(rtl == "localparam PEN = 8;\nlocalparam ISS = 128;\nlocalparam WSS = 128;\nlocalparam OSS = 128;\n");
    CHECK(count_lines(default_rtl_template(Variant::im2col)) == 12);
}

TEST_CASE("engine configuration files") {
    std::istringstream in("seed = 9\ntrain.epochs = 7\nspace.PEN = 8,16\n");
    const auto c = EngineConfig::parse(in);
    CHECK(c.seed == 9);
    CHECK(c.train.epochs == 7);
    CHECK(c.space.choices(ConfigVar::pen) == std::vector<std::int64_t>{8, 16});

    std::istringstream unknown("train.epocs = 7\n");
    CHECK_THROWS_AS(EngineConfig::parse(unknown), ParseError);
    std::istringstream dnn_only("variant = dnnweaver\nspace.TIC = 1,2\n");
    CHECK_THROWS_AS(EngineConfig::parse(dnn_only), ParseError);

    // Writing the defaults and reading them back is lossless.
    const auto d = EngineConfig::defaults(Variant::im2col);
    std::ostringstream out;
    write_engine_config(out, d);
    std::istringstream back(out.str());
    const auto again = EngineConfig::parse(back);
    std::ostringstream out2;
    write_engine_config(out2, again);
    CHECK(out.str() == out2.str());
}

TEST_CASE("derived seeds are distinct and stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
        for (std::uint64_t stream = 1; stream <= 7; ++stream) seen.insert(cli::derive_seed(seed, stream));
    CHECK(seen.size() == 70);
    CHECK(cli::derive_seed(1, 1) == cli::derive_seed(1, 1));
    CHECK(cli::derive_seed(1, 1) != cli::derive_seed(2, 1));
}

TEST_CASE("selection records round trip") {
    cli::SelectionRecord r;
    r.layer_name = "conv3";
    r.variant = Variant::dnnweaver;
    r.layer = {16, 32, 8, 8, 3, 3};
    r.lo = 0.1;
    r.po = 1.0 / 3.0;
    r.result.config[ConfigVar::pen] = 64;
    r.result.config[ConfigVar::iss] = 512;
    r.result.config[ConfigVar::wss] = 1024;
    r.result.config[ConfigVar::oss] = 2048;
    r.result.latency = 0.0123456789012345;
    r.result.power = 2.5e-7;
    r.result.raw.latency = 123456;
    r.result.raw.power = 77.125;
    r.result.satisfied = true;
    r.result.candidates_examined = 12;

    std::stringstream io;
    cli::write_selection(io, r);
    const auto back = cli::read_selection(io);
    CHECK(back.layer_name == r.layer_name);
    CHECK(back.variant == r.variant);
    CHECK(back.layer == r.layer);
    CHECK(back.lo == r.lo);
    CHECK(back.po == r.po);
    CHECK(back.result.config == r.result.config);
    CHECK(back.result.latency == r.result.latency);
    CHECK(back.result.power == r.result.power);
    CHECK(back.result.raw.latency == r.result.raw.latency);
    CHECK(back.result.raw.power == r.result.raw.power);
    CHECK(back.result.satisfied);
    CHECK(back.result.candidates_examined == 12);

    std::istringstream broken("layer = x\n");
    CHECK_THROWS_AS(cli::read_selection(broken), ParseError);
}

TEST_CASE("small end-to-end pipeline") {
    TempDir dir;
    const auto cfg = tiny_config(dir);
    REQUIRE(gandse_cli({"--config", cfg, "gen-data"}).code == 0);
    const auto train_text = slurp(dir / "data/train.csv");
    CHECK(count_lines(train_text) == 65);

    const auto half = gandse_cli({"--config", cfg, "train", "--w-critic", "0.5", "--out", dir / "run/half"});
    REQUIRE(half.code == 0);
    REQUIRE(gandse_cli({"--config", cfg, "train", "--w-critic", "0", "--out", dir / "run/zero"}).code == 0);
    REQUIRE(gandse_cli({"--config", cfg, "train", "--kind", "mlp"}).code == 0);
    CHECK(slurp(dir / "run/half/generator.bin") != slurp(dir / "run/zero/generator.bin"));
    const auto info = KvText::parse_file(dir / "run/half/train.info");
    CHECK(info.get("kind") == "gan");
    CHECK(info.get_double("w_critic") == 0.5);
    CHECK(count_lines(slurp(dir / "run/half/losses.txt")) >= 3);

    spit(dir / "net.txt", "conv a ic=16 oc=16 ow=8 oh=8 kw=3 kh=3\nconv b ic=32 oc=16 ow=8 oh=8 kw=1 kh=1\n");
    const auto ex = gandse_cli({"--config", cfg, "explore", "--network", dir / "net.txt", "--latency", "1e9",
                                "--power", "1e9", "--run", dir / "run/half", "--out", dir / "sel"});
    REQUIRE(ex.code == 0);
    const auto rec = cli::read_selection_file(dir / "sel/a.sel");
    CHECK(rec.result.satisfied);
    CHECK(rec.layer == ConvLayer{16, 16, 8, 8, 3, 3});
    const auto per_layer = gandse_cli({"--config", cfg, "explore", "--network", dir / "net.txt", "--latency", "1,2,3",
                                       "--power", "1", "--run", dir / "run/half"});
    CHECK(per_layer.code == cli::kExitUser);

    REQUIRE(gandse_cli({"implement", "--selection", dir / "sel/b.sel"}).code == 0);
    const auto vh = slurp(dir / "sel/b.vh");
    CHECK(vh.find("localparam PEN = ") != std::string::npos);
    CHECK(vh.find("{{") == std::string::npos);

    const auto ev = gandse_cli({"--config", cfg, "evaluate", "--methods", "half=" + (dir / "run/half") + ",mlp,sa",
                                "--out", dir / "eval"});
    REQUIRE(ev.code == 0);
    const auto kv = KvText::parse_file(dir / "eval/report.kv");
    for (const std::string m : {"half", "mlp", "sa"}) CHECK(kv.get_int(m + ".tasks") == 8);
    CHECK(!slurp(dir / "eval/difficulty.txt").empty());
    CHECK(!slurp(dir / "eval/report.timing").empty());

    // Runs trained on another dataset are refused.
    CHECK(gandse_cli({"--config", cfg, "--variant", "im2col", "evaluate", "--methods", "gan"}).code == cli::kExitUser);
}
