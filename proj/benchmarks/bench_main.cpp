#include <benchmark/benchmark.h>

#include <random>

#include "gandse/accel_model.hpp"
#include "gandse/config_space.hpp"
#include "gandse/dataset.hpp"
#include "gandse/gan_dse.hpp"
#include "gandse/neuralnet.hpp"

using namespace gandse;

namespace {

const DesignModel& im2col_model() {
    static const DesignModel m(ConfigSpace::defaults(Variant::im2col));
    return m;
}

const Dataset& small_dataset() {
    static const Dataset d = generate_dataset(im2col_model(), LayerRanges::defaults(), 512, 1);
    return d;
}

void BM_DesignMetrics(benchmark::State& state) {
    const auto& model = im2col_model();
    const auto& samples = small_dataset().samples;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& s = samples[i++ % samples.size()];
        benchmark::DoNotOptimize(model.metrics(s.layer, s.config));
    }
}
BENCHMARK(BM_DesignMetrics);

void BM_DnnWeaverTiling(benchmark::State& state) {
    const DesignModel model(ConfigSpace::defaults(Variant::dnnweaver));
    Configuration c;
    c[ConfigVar::pen] = 64;
    c[ConfigVar::iss] = c[ConfigVar::wss] = c[ConfigVar::oss] = 1024;
    const ConvLayer layer{128, 128, 32, 32, 3, 3};
    for (auto _ : state) benchmark::DoNotOptimize(model.metrics(layer, c));
}
BENCHMARK(BM_DnnWeaverTiling);

// Product of `width` choices for each of the 12 variables, capped.
void BM_CandidateProduct(benchmark::State& state) {
    const auto space = ConfigSpace::defaults(Variant::im2col);
    const auto width = static_cast<std::size_t>(state.range(0));
    ChoiceSets sets;
    for (const auto& v : space.variables()) {
        std::vector<WeightedChoice> s;
        for (std::size_t k = 0; k < std::min(width, v.choices.size()); ++k) s.push_back({k, 1.0 / double(k + 2)});
        sets.push_back(s);
    }
    for (auto _ : state) benchmark::DoNotOptimize(candidate_product(sets, space, kDefaultCandidateCap));
}
BENCHMARK(BM_CandidateProduct)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_GeneratorForwardBackward(benchmark::State& state) {
    const auto space = ConfigSpace::defaults(Variant::im2col);
    auto gan = make_gan(space, ArchProfile::desk(), 1);
    const auto batch = static_cast<Eigen::Index>(state.range(0));
    const nn::Matrix x = nn::Matrix::Random(static_cast<Eigen::Index>(gan.generator.input_size()), batch);
    const nn::Matrix d = nn::Matrix::Random(static_cast<Eigen::Index>(gan.generator.head().width()), batch);
    for (auto _ : state) {
        const auto cache = nn::forward(gan.generator, x);
        benchmark::DoNotOptimize(nn::backward(gan.generator, cache, d));
    }
}
BENCHMARK(BM_GeneratorForwardBackward)->Arg(1)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_TrainStep(benchmark::State& state) {
    const auto space = ConfigSpace::defaults(Variant::im2col);
    auto gan = make_gan(space, ArchProfile::desk(), 1);
    TrainConfig c;
    c.batch_size = 256;
    Trainer t(small_dataset(), gan.generator, &gan.discriminator, im2col_model(), c, TrainingMode::adversarial);
    std::vector<std::size_t> rows(256);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    for (auto _ : state) benchmark::DoNotOptimize(t.step(rows));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_SelectIndex(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::lognormal_distribution<double> d(0, 0.5);
    std::vector<MetricPair> m(static_cast<std::size_t>(state.range(0)));
    for (auto& p : m) p = {d(rng), d(rng)};
    for (auto _ : state) benchmark::DoNotOptimize(select_index(m, 1.0, 1.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelectIndex)->Arg(200)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
