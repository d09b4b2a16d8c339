#include <doctest.h>

#include <fstream>
#include <sstream>

#include "pheno/synth.hpp"

using namespace pheno;

TEST_CASE("degenerate dynamics produce pure baselines") {
    SynthConfig cfg;
    cfg.n_patients = 3;
    cfg.phenotype_count = 1;
    cfg.outcome_mix = {{1.0, 0.0, 0.0, 0.0}};
    cfg.imbalance = {1.0, 0.0, 0.0, 0.0};
    std::array<ChannelDynamics, kNumChannels> dyn{};
    for (int ch = 0; ch < kNumChannels; ++ch) dyn[ch].baseline = 10.0 + ch;
    cfg.dynamics = {dyn};
    cfg.dropout = 0.0;
    cfg.seed = 1;

    auto res = generate(cfg);
    for (const auto& p : res.cohort.patients)
        for (int i = 0; i < p.n_obs(); ++i)
            for (int ch = 0; ch < kNumChannels; ++ch)
                CHECK(p.values(i, ch) == doctest::Approx(10.0 + ch).epsilon(1e-12));
}

TEST_CASE("generation is deterministic given the seed") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.n_patients = 25;
    cfg.seed = 77;
    auto a = generate(cfg);
    auto b = generate(cfg);

    save_cohort(a.cohort, "/tmp/synth_a.csv");
    save_cohort(b.cohort, "/tmp/synth_b.csv");
    std::ifstream fa("/tmp/synth_a.csv"), fb("/tmp/synth_b.csv");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(a.phenotype_ids == b.phenotype_ids);
}

TEST_CASE("empirical outcome proportions match the target") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.n_patients = 10000;
    cfg.seed = 2024;
    auto res = generate(cfg);
    double discharge = 0.0;
    for (const auto& l : res.cohort.labels) discharge += l.one_hot[0];
    discharge /= res.cohort.labels.size();
    CHECK(discharge == doctest::Approx(0.939).epsilon(0.011));
}

TEST_CASE("presets are valid and meet their separation contracts") {
    SynthConfig easy = make_separable_preset(PresetLevel::Easy);
    CHECK_NOTHROW(easy.validate());
    CHECK(preset_separation_ratio(easy) >= 3.0);

    SynthConfig hard = make_separable_preset(PresetLevel::Hard);
    CHECK_NOTHROW(hard.validate());
    CHECK(preset_separation_ratio(hard) <= 1.0);

    // balanced variant: outcome mix rows become one-hot per phenotype
    SynthConfig balanced = make_separable_preset(PresetLevel::Easy, {0.25, 0.25, 0.25, 0.25});
    CHECK_NOTHROW(balanced.validate());
    for (int i = 0; i < 4; ++i) CHECK(balanced.outcome_mix[i][i] == doctest::Approx(1.0));
}

TEST_CASE("preset mixes recover the requested overall imbalance") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    for (int c = 0; c < kNumOutcomes; ++c) {
        double overall = 0.0;
        for (int ph = 0; ph < 4; ++ph) overall += 0.25 * cfg.outcome_mix[ph][c];
        CHECK(overall == doctest::Approx(cfg.imbalance[c]).epsilon(1e-12));
    }
}

TEST_CASE("truth sidecar holds ids and never touches the cohort CSV") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.n_patients = 8;
    cfg.seed = 4;
    auto res = generate(cfg);
    save_truth(res, "/tmp/synth_truth.csv");
    auto truth = load_truth("/tmp/synth_truth.csv");
    REQUIRE(truth.size() == 8);
    for (size_t i = 0; i < truth.size(); ++i) {
        CHECK(truth[i].first == res.cohort.patients[i].patient_id);
        CHECK(truth[i].second == static_cast<int>(i) % 4);
    }

    save_cohort(res.cohort, "/tmp/synth_truthless.csv");
    std::ifstream f("/tmp/synth_truthless.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str().find("phenotype") == std::string::npos);
}

TEST_CASE("invalid configurations are rejected") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.outcome_mix[0] = {0.5, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    SynthConfig cfg2 = make_separable_preset(PresetLevel::Easy);
    cfg2.imbalance = {0.5, 0.5, 0.5, 0.0};
    CHECK_THROWS_AS(cfg2.validate(), ValidationError);

    CHECK_THROWS_AS(make_separable_preset(PresetLevel::Easy, {0.1, 0.5, 0.2, 0.2}), ValidationError);
}
