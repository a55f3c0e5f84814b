#include <catch_amalgamated.hpp>

#include <sstream>

#include "gandse/error.hpp"
#include "gandse/gan_dse.hpp"
#include "oracles.hpp"

using namespace gandse;

namespace {

const ConfigSpace& weaver() {
    static const ConfigSpace s = ConfigSpace::defaults(Variant::dnnweaver);
    return s;
}

NormStats unit_stats() {
    NormStats s;
    s.layer = {1, 1, 1, 1, 1, 1};
    s.latency = s.power = 1;
    return s;
}

// Zero-weight generator whose head is fixed by its output biases.
nn::Mlp biased_generator(const ConfigSpace& space, const std::vector<double>& bias) {
    nn::Mlp g(generator_sizes(space, 1, 4), nn::Head::grouped(space));
    for (std::size_t i = 0; i < bias.size(); ++i) g.biases.back()(static_cast<Eigen::Index>(i)) = bias[i];
    return g;
}

Dataset small_dataset(Variant v, std::size_t n, std::uint64_t seed) {
    const DesignModel model(ConfigSpace::defaults(v));
    return generate_dataset(model, LayerRanges::defaults(), n, seed);
}

TrainConfig quick_config(double w) {
    TrainConfig c;
    c.epochs = 2;
    c.batch_size = 16;
    c.w_critic = w;
    c.lr_g = c.lr_d = 1e-3;
    c.seed = 77;
    return c;
}

bool same_weights(const nn::Mlp& a, const nn::Mlp& b) {
    for (std::size_t l = 0; l < a.num_layers(); ++l)
        if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    return true;
}

}  // namespace

TEST_CASE("running optimum follows the hand trace") {
    const std::vector<MetricPair> m = {{5, 5}, {3, 7}};
    CHECK(select_index(m, 4, 10) == 1);
    CHECK(select_index(std::vector<MetricPair>{{9, 9}}, 1, 1) == 0);
    CHECK_THROWS_AS(select_index(std::vector<MetricPair>{}, 1, 1), InputError);
}

TEST_CASE("scenario rules") {
    // Both satisfied: only a strict improvement in both replaces the optimum.
    CHECK(select_index(std::vector<MetricPair>{{2, 2}, {1, 2}}, 5, 5) == 0);
    CHECK(select_index(std::vector<MetricPair>{{2, 2}, {1, 1}}, 5, 5) == 1);
    // Power missing: lower power with latency within the objective.
    CHECK(select_index(std::vector<MetricPair>{{1, 9}, {4, 8}}, 5, 5) == 1);
    CHECK(select_index(std::vector<MetricPair>{{1, 9}, {6, 8}}, 5, 5) == 0);
    // Latency missing: lower latency with power within the objective.
    CHECK(select_index(std::vector<MetricPair>{{9, 1}, {8, 5}}, 5, 5) == 1);
    CHECK(select_index(std::vector<MetricPair>{{9, 1}, {8, 5.5}}, 5, 5) == 0);
    // Order matters: a later, better-in-one candidate cannot displace a satisfied optimum.
    CHECK(select_index(std::vector<MetricPair>{{3, 3}, {1, 4}, {2, 2}}, 5, 5) == 2);
}

TEST_CASE("selector agrees with the state-machine replay") {
    Rng rng(31);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + rng() % 60;
        std::vector<MetricPair> m;
        std::vector<std::pair<double, double>> o;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse grid so equalities with the objectives occur.
            const double l = std::round(u(rng) * 4) / 4, p = std::round(u(rng) * 4) / 4;
            m.push_back({l, p});
            o.push_back({l, p});
        }
        const double lo = std::round(u(rng) * 4) / 4, po = std::round(u(rng) * 4) / 4;
        const auto k = select_index(m, lo, po);
        CHECK(k == oracle::alg2(o, lo, po));
        const bool any = std::ranges::any_of(m, [&](auto& x) { return x.latency <= lo && x.power <= po; });
        if (any) CHECK((m[k].latency <= lo && m[k].power <= po));
    }
}

TEST_CASE("select_design skips infeasible candidates") {
    const DesignModel model(weaver());
    const ConvLayer layer{16, 16, 16, 16, 3, 3};
    Configuration bad;  // missing fields
    Configuration good;
    good[ConfigVar::pen] = 16;
    good[ConfigVar::iss] = good[ConfigVar::wss] = good[ConfigVar::oss] = 512;
    const auto m = model.metrics(layer, good);
    REQUIRE(m);
    const DseTask task{layer, 1e12, 1e12};
    const std::vector<Configuration> cands = {bad, good};
    const auto r = select_design(cands, task, model, unit_stats());
    CHECK(r.config == good);
    CHECK(r.raw == *m);
    CHECK(r.satisfied);
    CHECK(r.candidates_examined == 2);
    CHECK_THROWS_AS(select_design(std::vector<Configuration>{bad}, task, model, unit_stats()), InputError);
}

TEST_CASE("exact one-hot generator yields one candidate") {
    const DesignModel model(weaver());
    std::vector<double> bias(weaver().onehot_width(), -50.0);
    bias[1] = bias[5 + 2] = bias[11 + 3] = bias[17 + 0] = 50.0;
    const auto g = biased_generator(weaver(), bias);
    const DseTask task{{16, 16, 16, 16, 3, 3}, 1.0, 1.0};
    const auto c = generate_candidates(g, task, unit_stats(), model, {});
    REQUIRE(c.size() == 1);
    CHECK(c[0][ConfigVar::pen] == 16);
    CHECK(c[0][ConfigVar::iss] == 512);
    CHECK(c[0][ConfigVar::wss] == 1024);
    CHECK(c[0][ConfigVar::oss] == 128);
}

TEST_CASE("two open choices in two variables give four candidates") {
    const DesignModel model(weaver());
    std::vector<double> bias(weaver().onehot_width(), -50.0);
    bias[0] = bias[1] = 10.0;          // PEN 8 or 16
    bias[5 + 2] = bias[5 + 4] = 10.0;  // ISS 512 or 2048
    bias[11 + 5] = bias[17 + 5] = 50.0;
    const auto g = biased_generator(weaver(), bias);
    const DseTask task{{16, 16, 16, 16, 3, 3}, 1.0, 1.0};
    const auto c = generate_candidates(g, task, unit_stats(), model, {});
    REQUIRE(c.size() == 4);
    CHECK((c[0][ConfigVar::pen] == 8 && c[0][ConfigVar::iss] == 512));
    CHECK((c[1][ConfigVar::pen] == 8 && c[1][ConfigVar::iss] == 2048));
    CHECK((c[2][ConfigVar::pen] == 16 && c[2][ConfigVar::iss] == 512));
    CHECK((c[3][ConfigVar::pen] == 16 && c[3][ConfigVar::iss] == 2048));
}

TEST_CASE("candidate count equals a brute-force feasible count") {
    const auto space = ConfigSpace::defaults(Variant::im2col);
    const DesignModel model(space);
    Rng rng(19);
    std::normal_distribution<double> n(0.0, 1.5);
    std::uniform_int_distribution<int> dim(0, 4);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> bias(space.onehot_width());
        for (auto& b : bias) b = n(rng);
        const auto g = biased_generator(space, bias);
        const ConvLayer layer{16 << dim(rng), 16 << dim(rng), 8 << dim(rng), 8 << dim(rng), 1 + 2 * (dim(rng) % 4),
                              1 + 2 * (dim(rng) % 4)};
        const DseTask task{layer, 1.0, 1.0};
        ExploreOptions opt;
        opt.seed = 1000 + static_cast<std::uint64_t>(t);

        // Biases fix the head output, so the probabilities are known without the noise.
        std::vector<std::vector<std::int64_t>> open(space.num_variables());
        std::size_t off = 0;
        for (std::size_t p = 0; p < space.num_variables(); ++p) {
            const auto& ch = space.variables()[p].choices;
            double mx = -1e300, sum = 0;
            for (std::size_t k = 0; k < ch.size(); ++k) mx = std::max(mx, bias[off + k]);
            for (std::size_t k = 0; k < ch.size(); ++k) sum += std::exp(bias[off + k] - mx);
            std::size_t best = 0;
            for (std::size_t k = 0; k < ch.size(); ++k) {
                if (std::exp(bias[off + k] - mx) / sum > opt.threshold) open[p].push_back(ch[k]);
                if (bias[off + k] > bias[off + best]) best = k;
            }
            if (open[p].empty()) open[p].push_back(ch[best]);
            off += ch.size();
        }
        std::size_t feasible = 0, total = 1;
        for (const auto& o : open) total *= o.size();
        for (std::size_t idx = 0; idx < total; ++idx) {
            Configuration c;
            std::size_t r = idx;
            for (std::size_t p = space.num_variables(); p-- > 0;) {
                c[space.variables()[p].var] = open[p][r % open[p].size()];
                r /= open[p].size();
            }
            if (model.feasible(layer, c)) ++feasible;
        }
        const auto cands = generate_candidates(g, task, unit_stats(), model, opt);
        CHECK(cands.size() == std::max<std::size_t>(feasible, 1));
        const auto r = explore(g, task, unit_stats(), model, opt);
        CHECK(r.candidates_examined == cands.size());
    }
}

TEST_CASE("a generated configuration meeting both objectives takes the zero branch") {
    // Unit layers fit every SRAM choice, so any decoded configuration is feasible.
    Dataset ds;
    ds.variant = Variant::dnnweaver;
    ds.stats = unit_stats();
    for (int i = 0; i < 2; ++i) {
        Sample s;
        s.layer = {1, 1, 1, 1, 1, 1};
        s.config[ConfigVar::pen] = i ? 8 : 16;
        s.config[ConfigVar::iss] = s.config[ConfigVar::wss] = s.config[ConfigVar::oss] = 128;
        s.latency = 1;
        s.power = 1;
        s.latency_norm = s.power_norm = 1e12;
        ds.samples.push_back(s);
    }
    const DesignModel model(weaver());
    auto gan = make_gan(weaver(), {1, 8, 1, 8, 1e-3, 1e-3}, 5);
    auto cfg = quick_config(0.5);
    cfg.batch_size = 2;
    cfg.epochs = 1;
    Trainer trainer(ds, gan.generator, &gan.discriminator, model, cfg, TrainingMode::adversarial);
    const std::vector<std::size_t> batch = {0, 1};
    const auto trace = trainer.step(batch);
    CHECK(trace.satisfied == std::vector<bool>{true, true});
    CHECK(trace.loss_config == 0.0);
    CHECK(trace.loss_dis == trace.loss_critic);  // both target "True"
    CHECK(trace.loss_critic > 0.0);
}

TEST_CASE("unreachable objectives take the configuration branch") {
    Dataset ds;
    ds.variant = Variant::dnnweaver;
    ds.stats = unit_stats();
    for (int i = 0; i < 2; ++i) {
        Sample s;
        s.layer = {1, 1, 1, 1, 1, 1};
        s.config[ConfigVar::pen] = i ? 8 : 16;
        s.config[ConfigVar::iss] = s.config[ConfigVar::wss] = s.config[ConfigVar::oss] = 128;
        s.latency_norm = s.power_norm = 1e-9;
        ds.samples.push_back(s);
    }
    const DesignModel model(weaver());
    auto gan = make_gan(weaver(), {1, 8, 1, 8, 1e-3, 1e-3}, 5);
    auto cfg = quick_config(0.5);
    cfg.batch_size = 2;
    Trainer trainer(ds, gan.generator, &gan.discriminator, model, cfg, TrainingMode::adversarial);
    const std::vector<std::size_t> batch = {0, 1};
    const auto trace = trainer.step(batch);
    CHECK(trace.satisfied == std::vector<bool>{false, false});
    CHECK(trace.loss_config > 0.0);
    CHECK(trace.loss_dis != trace.loss_critic);
}

TEST_CASE("branches are exclusive and the critic accumulates on every sample") {
    const auto ds = small_dataset(Variant::im2col, 200, 4);
    const DesignModel model(ConfigSpace::defaults(Variant::im2col));
    auto gan = make_gan(model.space(), {2, 32, 2, 32, 1e-3, 1e-3}, 9);
    std::size_t batches = 0;
    const auto hist = train_gan(ds, gan.generator, gan.discriminator, model, quick_config(0.5), [&](const BatchTrace& t) {
        ++batches;
        CHECK(t.satisfied.size() == t.samples.size());
        const bool any_unsat = std::ranges::any_of(t.satisfied, [](bool b) { return !b; });
        CHECK((t.loss_config > 0.0) == any_unsat);
        CHECK(t.loss_critic > 0.0);
    });
    CHECK(hist.size() == 2);
    CHECK(hist[0].epoch == 1);
    CHECK(batches == 2 * 13);
}

TEST_CASE("without the critic weight the discriminator cannot move the generator") {
    const auto ds = small_dataset(Variant::im2col, 100, 4);
    const DesignModel model(ConfigSpace::defaults(Variant::im2col));
    const ArchProfile arch{2, 16, 2, 16, 1e-3, 1e-3};
    auto a = make_gan(model.space(), arch, 1);
    auto b = make_gan(model.space(), arch, 1);
    b.discriminator = make_gan(model.space(), arch, 2).discriminator;
    train_gan(ds, a.generator, a.discriminator, model, quick_config(0.0));
    train_gan(ds, b.generator, b.discriminator, model, quick_config(0.0));
    CHECK(same_weights(a.generator, b.generator));

    auto c = make_gan(model.space(), arch, 1);
    train_gan(ds, c.generator, c.discriminator, model, quick_config(0.5));
    CHECK_FALSE(same_weights(a.generator, c.generator));
}

TEST_CASE("training is reproducible") {
    const auto ds = small_dataset(Variant::dnnweaver, 100, 6);
    const DesignModel model(weaver());
    const ArchProfile arch{2, 16, 2, 16, 1e-3, 1e-3};
    auto a = make_gan(weaver(), arch, 3);
    auto b = make_gan(weaver(), arch, 3);
    const auto ha = train_gan(ds, a.generator, a.discriminator, model, quick_config(0.5));
    const auto hb = train_gan(ds, b.generator, b.discriminator, model, quick_config(0.5));
    CHECK(ha == hb);
    CHECK(same_weights(a.generator, b.generator));
    CHECK(same_weights(a.discriminator, b.discriminator));

    std::ostringstream out;
    write_loss_history(out, ha);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line.starts_with("#"));
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        int cols = 0;
        while (ls >> tok) ++cols;
        CHECK(cols == 4);
        ++rows;
    }
    CHECK(rows == 2);
}

TEST_CASE("trainer rejects mismatched networks") {
    const auto ds = small_dataset(Variant::dnnweaver, 50, 6);
    const DesignModel model(weaver());
    auto wrong = make_gan(ConfigSpace::defaults(Variant::im2col), {1, 8, 1, 8, 1e-3, 1e-3}, 1);
    CHECK_THROWS_AS(train_gan(ds, wrong.generator, wrong.discriminator, model, quick_config(0.5)), InputError);
    auto cfg = quick_config(0.5);
    cfg.threshold = 1.0;
    auto ok = make_gan(weaver(), {1, 8, 1, 8, 1e-3, 1e-3}, 1);
    CHECK_THROWS_AS(train_gan(ds, ok.generator, ok.discriminator, model, cfg), InputError);
}
