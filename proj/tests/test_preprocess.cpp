#include <doctest.h>

#include "pheno/preprocess.hpp"
#include "pheno/synth.hpp"

using namespace pheno;

namespace {

PatientSeries one_channel_patient(std::vector<double> times, std::vector<double> hr) {
    PatientSeries ps;
    ps.patient_id = "x";
    const int t = static_cast<int>(times.size());
    ps.times = std::move(times);
    ps.values = Matrix(t, kNumChannels);
    ps.mask.assign(static_cast<size_t>(t) * kNumChannels, 0);
    for (int i = 0; i < t; ++i) {
        ps.values(i, 0) = hr[i];
        ps.set_observed(i, 0, true);
    }
    return ps;
}

}  // namespace

TEST_CASE("clamp_outliers masks out-of-range readings only") {
    PatientSeries ps = one_channel_patient({160.0, 120.0, 80.0}, {500.0, 80.0, 30.0});
    ps.values(1, 4) = 101.0;  // SPO2 over 100
    ps.set_observed(1, 4, true);

    PatientSeries out = clamp_outliers(ps);
    CHECK(out.observed(0, 0) == false);  // HR 500 masked
    CHECK(out.observed(1, 0) == true);   // HR 80 kept
    CHECK(out.observed(2, 0) == true);   // HR 30 in [20,250]
    CHECK(out.observed(1, 4) == false);  // SPO2 101 masked
    CHECK(out.values(0, 0) == 500.0);    // value untouched, only the mask changes
}

TEST_CASE("grid bin mapping and boundaries") {
    GridSpec grid;
    CHECK(grid.num_bins() == 24);
    CHECK(grid.bin_of(71.9) == -1);   // outside the input window
    CHECK(grid.bin_of(72.0) == 23);   // inclusive at the near-outcome edge
    CHECK(grid.bin_of(168.0) == -1);  // exclusive at the far edge
    CHECK(grid.bin_of(167.9) == 0);
    CHECK(grid.bin_center(0) == doctest::Approx(166.0));
    CHECK(grid.bin_center(23) == doctest::Approx(74.0));

    GridSpec bad{4.0, 72.0, 72.0};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    GridSpec ragged{7.0, 168.0, 72.0};
    CHECK_THROWS_AS(ragged.validate(), ValidationError);
}

TEST_CASE("regrid bins by mean and leaves empty bins missing") {
    GridSpec grid;
    // two observations in the same bin average; one observation passes through
    PatientSeries ps = one_channel_patient({166.0, 165.0, 120.0}, {70.0, 90.0, 85.0});
    GriddedSeries g = regrid(ps, grid);
    CHECK(g.values(0, 0) == doctest::Approx(80.0));  // (70+90)/2 in bin 0
    CHECK(g.counts(0, 0) == 2.0);
    int bin_120 = grid.bin_of(120.0);
    CHECK(g.values(bin_120, 0) == doctest::Approx(85.0));
    CHECK(g.counts(1, 0) == 0.0);
}

TEST_CASE("impute forward-fills and falls back to the median") {
    GridSpec grid{4.0, 16.0, 0.0};  // 4 bins
    NormStats stats;
    stats.grid = grid;
    for (int ch = 0; ch < kNumChannels; ++ch) {
        stats.median[ch] = 18.0;
        stats.stdev[ch] = 1.0;
    }

    GriddedSeries g;
    g.values = Matrix(4, kNumChannels);
    g.counts = Matrix(4, kNumChannels);
    g.values(0, 0) = 5.0;
    g.counts(0, 0) = 1.0;
    g.values(3, 0) = 7.0;
    g.counts(3, 0) = 1.0;

    Matrix full = impute(g, stats);
    CHECK(full(0, 0) == 5.0);
    CHECK(full(1, 0) == 5.0);
    CHECK(full(2, 0) == 5.0);
    CHECK(full(3, 0) == 7.0);
    // channel 1 has no observations anywhere: median everywhere
    for (int i = 0; i < 4; ++i) CHECK(full(i, 1) == 18.0);
}

TEST_CASE("fit_norm_stats pools bins and rejects degenerate channels") {
    GridSpec grid{4.0, 8.0, 0.0};  // 2 bins
    auto constant_grid = [&](double v) {
        GriddedSeries g;
        g.values = Matrix(2, kNumChannels, v);
        g.counts = Matrix(2, kNumChannels, 1.0);
        return g;
    };
    std::vector<GriddedSeries> train = {constant_grid(0.0), constant_grid(2.0)};
    NormStats stats = fit_norm_stats(train, grid);
    CHECK(stats.mean[0] == doctest::Approx(1.0));
    CHECK(stats.stdev[0] == doctest::Approx(1.0));

    std::vector<GriddedSeries> degenerate = {constant_grid(3.0), constant_grid(3.0)};
    CHECK_THROWS_AS(fit_norm_stats(degenerate, grid), ValidationError);

    CHECK_THROWS_AS(fit_norm_stats({constant_grid(0.0)}, grid), ValidationError);
}

TEST_CASE("normalize is exact standardization and round-trips") {
    GridSpec grid{4.0, 8.0, 0.0};
    NormStats stats;
    stats.grid = grid;
    for (int ch = 0; ch < kNumChannels; ++ch) {
        stats.mean[ch] = 10.0;
        stats.stdev[ch] = 2.0;
        stats.median[ch] = 10.0;
    }
    Matrix m(2, kNumChannels, 10.0);
    m(0, 0) = 12.0;  // mean + std -> 1
    auto rg = normalize("x", m, stats, {});
    CHECK(rg.values(0, 0) == doctest::Approx(1.0));
    CHECK(rg.values(1, 0) == doctest::Approx(0.0));

    Matrix back = denormalize(rg.values, stats);
    for (size_t i = 0; i < m.d.size(); ++i) CHECK(back.d[i] == doctest::Approx(m.d[i]).epsilon(1e-9));
}

TEST_CASE("preprocess_cohort standardizes its own training set") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.n_patients = 20;
    cfg.seed = 5;
    Cohort c = generate(cfg).cohort;
    PreprocessOptions opts;
    auto pre = preprocess_cohort(c, opts);

    for (int ch = 0; ch < kNumChannels; ++ch) {
        double sum = 0.0, sumsq = 0.0;
        long long n = 0;
        for (const auto& s : pre.series)
            for (int i = 0; i < s.values.rows; ++i) {
                sum += s.values(i, ch);
                sumsq += s.values(i, ch) * s.values(i, ch);
                ++n;
            }
        double mean = sum / n;
        double var = sumsq / n - mean * mean;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
        for (const auto& s : pre.series) CHECK(s.values.all_finite());
    }
}

TEST_CASE("preprocess_cohort drops empty-window patients and recomputes priors") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.n_patients = 12;
    cfg.seed = 9;
    auto res = generate(cfg);
    Cohort c = res.cohort;

    // give one patient observations only outside the input window
    PatientSeries outside;
    outside.patient_id = "outside";
    outside.times = {60.0, 30.0};
    outside.values = Matrix(2, kNumChannels, 80.0);
    outside.mask.assign(2 * kNumChannels, 1);
    c.patients.push_back(outside);
    c.labels.emplace_back(Outcome::Death);
    c.priors = compute_priors(c.labels);

    PreprocessOptions opts;
    auto pre = preprocess_cohort(c, opts);
    CHECK(pre.series.size() == 12);
    for (const auto& id : pre.patient_ids) CHECK(id != "outside");
    CHECK_NOTHROW(pre.priors.validate());

    // surviving patients' values are unaffected by the dropped patient
    Cohort base = res.cohort;
    auto pre_base = preprocess_cohort(base, opts);
    for (size_t i = 0; i < pre_base.series.size(); ++i)
        for (size_t j = 0; j < pre_base.series[i].values.d.size(); ++j)
            CHECK(pre_base.series[i].values.d[j] == pre.series[i].values.d[j]);
}

TEST_CASE("preprocess is deterministic") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Hard);
    cfg.n_patients = 10;
    cfg.seed = 3;
    Cohort c = generate(cfg).cohort;
    PreprocessOptions opts;
    auto a = preprocess_cohort(c, opts);
    auto b = preprocess_cohort(c, opts);
    REQUIRE(a.series.size() == b.series.size());
    for (size_t i = 0; i < a.series.size(); ++i) CHECK(a.series[i].values.d == b.series[i].values.d);
}

TEST_CASE("preprocessed cohort serializes with the normalized marker") {
    SynthConfig cfg = make_separable_preset(PresetLevel::Easy);
    cfg.n_patients = 6;
    cfg.seed = 13;
    Cohort c = generate(cfg).cohort;
    auto pre = preprocess_cohort(c, PreprocessOptions{});
    Cohort flat = to_cohort(pre);
    save_cohort(flat, "/tmp/pre_roundtrip.csv", true);
    Cohort back = load_cohort("/tmp/pre_roundtrip.csv");
    REQUIRE(back.patients.size() == flat.patients.size());
    for (size_t p = 0; p < flat.patients.size(); ++p)
        for (size_t i = 0; i < flat.patients[p].values.d.size(); ++i)
            CHECK(back.patients[p].values.d[i] ==
                  doctest::Approx(flat.patients[p].values.d[i]).epsilon(1e-9));
}
