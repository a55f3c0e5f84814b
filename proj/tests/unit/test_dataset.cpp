#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "gandse/dataset.hpp"
#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"
#include "tempdir.hpp"

using namespace gandse;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Sample row(std::int64_t latency, double power, std::int64_t ic) {
    Sample s;
    s.layer = {ic, 2 * ic, ic + 1, ic + 2, ic % 3 + 1, ic % 5 + 1};
    s.latency = latency;
    s.power = power;
    return s;
}

const DesignModel& im2col_model() {
    static const DesignModel m(ConfigSpace::defaults(Variant::im2col));
    return m;
}

}  // namespace

TEST_CASE("population standard deviation divides by n") {
    std::vector<Sample> rows;
    const std::array<std::int64_t, 6> lat = {1, 1, 1, 3, 3, 3};
    for (std::size_t i = 0; i < 6; ++i) rows.push_back(row(lat[i], 1.0 + double(i), std::int64_t(i) + 1));
    const auto s = compute_norm_stats(rows);
    CHECK(s.latency == 1.0);

    for (auto& r : rows) r.latency += 1000;
    CHECK_THAT(compute_norm_stats(rows).latency, WithinRel(1.0, 1e-12));
}

TEST_CASE("constant features are rejected by name") {
    std::vector<Sample> rows = {row(5, 1.0, 1), row(5, 2.0, 2)};
    CHECK_THROWS_WITH(compute_norm_stats(rows), ContainsSubstring("L"));
    CHECK_THROWS_AS(compute_norm_stats(std::vector<Sample>{row(1, 1, 1)}), InputError);
}

TEST_CASE("CSV headers follow the dataset tables") {
    const auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
        return s;
    };
    CHECK(join(csv_header(Variant::im2col)) == "IC,OC,OW,OH,KW,KH,PEN,SDB,DSB,ISS,WSS,OSS,TIC,TOC,TOW,TOH,TKW,TKH,L,P");
    CHECK(join(csv_header(Variant::dnnweaver)) == "IC,OC,OW,OH,KW,KH,PEN,ISS,WSS,OSS,L,P");
}

TEST_CASE("generated rows are feasible and recomputable") {
    const auto& model = im2col_model();
    const auto ds = generate_dataset(model, LayerRanges::defaults(), 1000, 42);
    REQUIRE(ds.size() == 1000);
    std::set<std::pair<ConvLayer, Configuration>> keys;
    for (const auto& s : ds.samples) {
        const auto m = model.metrics(s.layer, s.config);
        REQUIRE(m);
        CHECK(m->latency == s.latency);
        CHECK(m->power == s.power);
        CHECK(s.latency_norm * ds.stats.latency == Catch::Approx(double(s.latency)).epsilon(1e-14));
        CHECK(s.latency_norm > 0.0);
        CHECK(s.power_norm > 0.0);
        keys.emplace(s.layer, s.config);
    }
    CHECK(keys.size() == ds.size());
    CHECK(compute_norm_stats(ds.samples) == ds.stats);
}

TEST_CASE("normalized objectives have unit deviation") {
    const auto ds = generate_dataset(im2col_model(), LayerRanges::defaults(), 300, 5);
    std::vector<double> l, p;
    for (const auto& s : ds.samples) {
        l.push_back(s.latency_norm);
        p.push_back(s.power_norm);
    }
    const auto sd = [](const std::vector<double>& x) {
        double m = 0, v = 0;
        for (double a : x) m += a;
        m /= double(x.size());
        for (double a : x) v += (a - m) * (a - m);
        return std::sqrt(v / double(x.size()));
    };
    CHECK_THAT(sd(l), WithinAbs(1.0, 1e-9));
    CHECK_THAT(sd(p), WithinAbs(1.0, 1e-9));
}

TEST_CASE("generation is deterministic for a seed") {
    TempDir dir;
    const auto a = generate_dataset(im2col_model(), LayerRanges::defaults(), 1000, 9);
    const auto b = generate_dataset(im2col_model(), LayerRanges::defaults(), 1000, 9);
    write_csv(a, dir / "a.csv");
    write_csv(b, dir / "b.csv");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv.stats") == slurp(dir / "b.csv.stats"));
    const auto c = generate_dataset(im2col_model(), LayerRanges::defaults(), 1000, 10);
    write_csv(c, dir / "c.csv");
    CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
}

TEST_CASE("a single feasible point is found") {
    std::vector<SpaceVariable> vars = {{ConfigVar::pen, {8}}, {ConfigVar::iss, {128}}, {ConfigVar::wss, {128}}, {ConfigVar::oss, {128}}};
    const DesignModel model(ConfigSpace(Variant::dnnweaver, vars));
    LayerRanges r;
    r.dims = {{{16}, {16}, {16}, {16}, {3}, {3}}};
    const auto pts = sample_feasible_points(model, r, 1, 1);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].layer == ConvLayer{16, 16, 16, 16, 3, 3});
    CHECK_THROWS_WITH(sample_feasible_points(model, r, 2, 1), ContainsSubstring("only 1"));
}

TEST_CASE("CSV round trip preserves every sample") {
    TempDir dir;
    for (auto variant : {Variant::im2col, Variant::dnnweaver}) {
        const DesignModel model(ConfigSpace::defaults(variant));
        const auto ds = generate_dataset(model, LayerRanges::defaults(), 100, 3);
        const auto path = dir / "rt.csv";
        write_csv(ds, path);
        const auto back = read_csv(path, model.space());
        REQUIRE(back.size() == ds.size());
        CHECK(back.stats == ds.stats);
        CHECK(back.seed == ds.seed);
        CHECK(back.variant == variant);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(back.samples[i].layer == ds.samples[i].layer);
            CHECK(back.samples[i].config == ds.samples[i].config);
            CHECK(back.samples[i].latency == ds.samples[i].latency);
            CHECK(back.samples[i].latency_norm == ds.samples[i].latency_norm);
            CHECK(back.samples[i].power_norm == ds.samples[i].power_norm);
            CHECK_THAT(back.samples[i].power, WithinRel(ds.samples[i].power, 1e-14));
        }
    }
}

TEST_CASE("malformed CSV rows report their row number") {
    TempDir dir;
    const auto space = ConfigSpace::defaults(Variant::dnnweaver);
    const DesignModel model(space);
    const auto ds = generate_dataset(model, LayerRanges::defaults(), 10, 3);
    const auto path = dir / "bad.csv";
    write_csv(ds, path);
    const auto text = slurp(path);
    const auto header_end = text.find('\n') + 1;

    spit(path, "IC,OC,OW,OH,KW,KH,PEN,ISS,WSS,XSS,L,P\n");
    CHECK_THROWS_WITH(read_csv(path, space), ContainsSubstring("unknown column 'XSS'"));

    spit(path, text.substr(0, header_end) + "16,16,16,16,3,3,9,128,128,128,1.0,1.0\n");
    CHECK_THROWS_WITH(read_csv(path, space), ContainsSubstring("line 2") && ContainsSubstring("PEN"));

    spit(path, text.substr(0, header_end) + "16,16,16,16,3,3,8,128,128,128,1.0,1.0\n16,x,16,16,3,3,8,128,128,128,1,1\n");
    CHECK_THROWS_WITH(read_csv(path, space), ContainsSubstring("line 3"));
    CHECK_THROWS_AS(read_csv(path, space), ParseError);
}

TEST_CASE("split partitions and renormalizes on the training part") {
    const auto ds = generate_dataset(im2col_model(), LayerRanges::defaults(), 400, 21);
    const auto [train, test] = split(ds, 100, 8);
    CHECK(train.size() == 300);
    CHECK(test.size() == 100);
    std::set<std::pair<ConvLayer, Configuration>> a, b;
    for (const auto& s : train.samples) a.emplace(s.layer, s.config);
    for (const auto& s : test.samples) b.emplace(s.layer, s.config);
    for (const auto& k : b) CHECK_FALSE(a.contains(k));
    CHECK(train.stats == compute_norm_stats(train.samples));
    CHECK(test.stats == train.stats);
    for (const auto& s : test.samples) CHECK(s.latency_norm == double(s.latency) / train.stats.latency);

    const auto [train2, test2] = split(ds, 100, 8);
    for (std::size_t i = 0; i < test.size(); ++i) CHECK(test2.samples[i].config == test.samples[i].config);
}

TEST_CASE("split edge cases") {
    const auto ds = generate_dataset(im2col_model(), LayerRanges::defaults(), 50, 2);
    const auto [train, test] = split(ds, 0, 1);
    CHECK(test.size() == 0);
    REQUIRE(train.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(train.samples[i].latency_norm == ds.samples[i].latency_norm);
    CHECK_THROWS_AS(split(ds, 50, 1), InputError);
}
