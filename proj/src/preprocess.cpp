#include "pheno/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace pheno {

int GridSpec::num_bins() const {
    return static_cast<int>(std::llround((window_start_hours - window_end_hours) / bin_hours));
}

void GridSpec::validate() const {
    if (!(bin_hours > 0.0)) throw ValidationError("grid bin_hours must be positive");
    if (!(window_start_hours > window_end_hours) || window_end_hours < 0.0)
        throw ValidationError("grid window must satisfy start > end >= 0");
    double span = window_start_hours - window_end_hours;
    double bins = span / bin_hours;
    if (std::abs(bins - std::llround(bins)) > 1e-9)
        throw ValidationError("grid window span must be divisible by bin_hours");
    if (num_bins() < 1) throw ValidationError("grid has zero bins");
}

int GridSpec::bin_of(double h) const {
    if (h < window_end_hours || h >= window_start_hours) return -1;
    int j = static_cast<int>(std::floor((h - window_end_hours) / bin_hours));
    if (j < 0 || j >= num_bins()) return -1;
    return num_bins() - 1 - j;  // chronological: bin 0 is furthest from outcome
}

double GridSpec::bin_center(int i) const {
    return window_start_hours - (static_cast<double>(i) + 0.5) * bin_hours;
}

void NormStats::validate() const {
    for (int ch = 0; ch < kNumChannels; ++ch) {
        if (!(stdev[ch] > 0.0))
            throw ValidationError(std::string("channel ") + kChannelNames[ch] + " has zero variance");
        if (!std::isfinite(mean[ch]) || !std::isfinite(median[ch]))
            throw ValidationError(std::string("channel ") + kChannelNames[ch] + " has non-finite stats");
    }
}

PatientSeries clamp_outliers(const PatientSeries& series, const ClampRanges& ranges) {
    PatientSeries out = series;
    for (int t = 0; t < out.n_obs(); ++t)
        for (int ch = 0; ch < kNumChannels; ++ch)
            if (out.observed(t, ch)) {
                double v = out.values(t, ch);
                if (v < ranges.lo[ch] || v > ranges.hi[ch]) out.set_observed(t, ch, false);
            }
    return out;
}

GriddedSeries regrid(const PatientSeries& series, const GridSpec& grid) {
    grid.validate();
    const int T = grid.num_bins();
    GriddedSeries g;
    g.patient_id = series.patient_id;
    g.values = Matrix(T, kNumChannels);
    g.counts = Matrix(T, kNumChannels);
    for (int t = 0; t < series.n_obs(); ++t) {
        int bin = grid.bin_of(series.times[t]);
        if (bin < 0) continue;
        for (int ch = 0; ch < kNumChannels; ++ch)
            if (series.observed(t, ch)) {
                g.values(bin, ch) += series.values(t, ch);
                g.counts(bin, ch) += 1.0;
            }
    }
    for (int i = 0; i < T; ++i)
        for (int ch = 0; ch < kNumChannels; ++ch)
            if (g.counts(i, ch) > 0.0) g.values(i, ch) /= g.counts(i, ch);
    return g;
}

Matrix impute(const GriddedSeries& gridded, const NormStats& stats) {
    const int T = gridded.values.rows;
    Matrix out(T, kNumChannels);
    for (int ch = 0; ch < kNumChannels; ++ch) {
        double carry = stats.median[ch];  // covers leading gaps and empty channels
        for (int i = 0; i < T; ++i) {
            if (gridded.counts(i, ch) > 0.0) carry = gridded.values(i, ch);
            out(i, ch) = carry;
        }
    }
    return out;
}

namespace {

double median_of(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::array<double, kNumChannels> coverage_of(const GriddedSeries& g) {
    std::array<double, kNumChannels> cov{};
    for (int ch = 0; ch < kNumChannels; ++ch) {
        int observed = 0;
        for (int i = 0; i < g.values.rows; ++i)
            if (g.counts(i, ch) > 0.0) ++observed;
        cov[ch] = static_cast<double>(observed) / g.values.rows;
    }
    return cov;
}

}  // namespace

NormStats fit_norm_stats(const std::vector<GriddedSeries>& training, const GridSpec& grid) {
    if (training.size() < 2) throw ValidationError("norm stats need at least 2 training patients");
    NormStats stats;
    stats.grid = grid;

    for (int ch = 0; ch < kNumChannels; ++ch) {
        std::vector<double> observed;
        for (const auto& g : training)
            for (int i = 0; i < g.values.rows; ++i)
                if (g.counts(i, ch) > 0.0) observed.push_back(g.values(i, ch));
        if (observed.empty())
            throw ValidationError(std::string("channel ") + kChannelNames[ch] +
                                  " has no observations in the training cohort");
        stats.median[ch] = median_of(observed);
    }

    // mean/std over the imputed training matrices (population convention)
    std::array<double, kNumChannels> sum{}, sumsq{};
    long long n = 0;
    for (const auto& g : training) {
        Matrix complete = impute(g, stats);
        for (int i = 0; i < complete.rows; ++i)
            for (int ch = 0; ch < kNumChannels; ++ch) {
                sum[ch] += complete(i, ch);
                sumsq[ch] += complete(i, ch) * complete(i, ch);
            }
        n += complete.rows;
    }
    for (int ch = 0; ch < kNumChannels; ++ch) {
        stats.mean[ch] = sum[ch] / static_cast<double>(n);
        double var = sumsq[ch] / static_cast<double>(n) - stats.mean[ch] * stats.mean[ch];
        stats.stdev[ch] = std::sqrt(std::max(var, 0.0));
    }
    stats.validate();
    return stats;
}

RegularGridSeries normalize(const std::string& patient_id, const Matrix& complete, const NormStats& stats,
                            const std::array<double, kNumChannels>& observed_fraction) {
    RegularGridSeries out;
    out.patient_id = patient_id;
    out.grid = stats.grid;
    out.observed_fraction = observed_fraction;
    out.values = Matrix(complete.rows, complete.cols);
    for (int i = 0; i < complete.rows; ++i)
        for (int ch = 0; ch < kNumChannels; ++ch)
            out.values(i, ch) = (complete(i, ch) - stats.mean[ch]) / stats.stdev[ch];
    return out;
}

Matrix denormalize(const Matrix& normalized, const NormStats& stats) {
    Matrix out(normalized.rows, normalized.cols);
    for (int i = 0; i < normalized.rows; ++i)
        for (int ch = 0; ch < kNumChannels; ++ch)
            out(i, ch) = normalized(i, ch) * stats.stdev[ch] + stats.mean[ch];
    return out;
}

PreprocessedCohort preprocess_cohort(const Cohort& cohort, const PreprocessOptions& opts,
                                     const std::optional<NormStats>& given_stats) {
    cohort.validate();
    opts.grid.validate();

    std::vector<GriddedSeries> gridded;
    std::vector<std::array<double, kNumChannels>> coverages;
    std::vector<size_t> retained;
    for (size_t p = 0; p < cohort.patients.size(); ++p) {
        PatientSeries clamped = clamp_outliers(cohort.patients[p], opts.clamp);
        GriddedSeries g = regrid(clamped, opts.grid);
        auto cov = coverage_of(g);
        double mean_cov = 0.0;
        for (double c : cov) mean_cov += c;
        mean_cov /= kNumChannels;
        if (mean_cov < opts.min_coverage) continue;
        retained.push_back(p);
        gridded.push_back(std::move(g));
        coverages.push_back(cov);
    }
    if (retained.empty()) throw ValidationError("all patients dropped during preprocessing");

    PreprocessedCohort out;
    out.stats = given_stats ? *given_stats : fit_norm_stats(gridded, opts.grid);
    if (given_stats && !(given_stats->grid == opts.grid))
        throw ValidationError("norm stats grid disagrees with requested grid");

    for (size_t i = 0; i < gridded.size(); ++i) {
        Matrix complete = impute(gridded[i], out.stats);
        out.series.push_back(normalize(gridded[i].patient_id, complete, out.stats, coverages[i]));
        out.patient_ids.push_back(gridded[i].patient_id);
        out.labels.push_back(cohort.labels[retained[i]]);
    }
    out.priors = compute_priors(out.labels);
    return out;
}

Cohort to_cohort(const PreprocessedCohort& pre) {
    std::vector<PatientSeries> patients;
    for (const auto& s : pre.series) {
        PatientSeries ps;
        ps.patient_id = s.patient_id;
        const int T = s.values.rows;
        ps.times.resize(T);
        ps.values = s.values;
        ps.mask.assign(static_cast<size_t>(T) * kNumChannels, 1);
        for (int i = 0; i < T; ++i) ps.times[i] = s.grid.bin_center(i);
        patients.push_back(std::move(ps));
    }
    return make_cohort(std::move(patients), pre.labels);
}

}  // namespace pheno
