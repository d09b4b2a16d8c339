#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pheno/cohort.hpp"
#include "pheno/core.hpp"

namespace pheno {

// Fixed time-to-outcome grid. Defaults: 4-hourly bins from 7 days down to
// 3 days before outcome, 24 bins, stored in calendar order (bin 0 earliest).
struct GridSpec {
    double bin_hours = 4.0;
    double window_start_hours = 168.0;
    double window_end_hours = 72.0;

    int num_bins() const;
    void validate() const;

    // Chronological bin index for an hours-to-outcome value, or -1 when the
    // observation falls outside [window_end, window_start).
    int bin_of(double hours_to_outcome) const;

    // Bin center in hours to outcome for chronological bin index i.
    double bin_center(int i) const;

    bool operator==(const GridSpec&) const = default;
};

// Per-channel clamp bounds; readings outside are treated as spurious.
struct ClampRanges {
    std::array<double, kNumChannels> lo{20.0, 4.0, 20.0, 40.0, 50.0, 30.0, 1.0, 0.21};
    std::array<double, kNumChannels> hi{250.0, 60.0, 150.0, 250.0, 100.0, 43.0, 4.0, 1.0};
};

// Training-split channel statistics used by imputation and normalization.
struct NormStats {
    std::array<double, kNumChannels> mean{};
    std::array<double, kNumChannels> stdev{};
    std::array<double, kNumChannels> median{};
    GridSpec grid;

    void validate() const;
};

struct RegularGridSeries {
    std::string patient_id;
    GridSpec grid;
    Matrix values;  // T x 8, normalized units, complete
    std::array<double, kNumChannels> observed_fraction{};
};

// Intermediate regridded representation: bin means plus observation counts.
struct GriddedSeries {
    std::string patient_id;
    Matrix values;  // T x 8, bin means where count > 0
    Matrix counts;  // T x 8, raw observations per bin
};

// Masks out readings outside the physiological ranges; values are untouched.
PatientSeries clamp_outliers(const PatientSeries& series, const ClampRanges& ranges = {});

GriddedSeries regrid(const PatientSeries& series, const GridSpec& grid);

// Forward-fill per channel from the first observed bin; bins before the
// first observation (or fully empty channels) take the training median.
Matrix impute(const GriddedSeries& gridded, const NormStats& stats);

// Medians come from observed bins only; mean/std are computed over the
// imputed matrices, so standardizing the training set is exact.
NormStats fit_norm_stats(const std::vector<GriddedSeries>& training, const GridSpec& grid);

RegularGridSeries normalize(const std::string& patient_id, const Matrix& complete, const NormStats& stats,
                            const std::array<double, kNumChannels>& observed_fraction);
Matrix denormalize(const Matrix& normalized, const NormStats& stats);

struct PreprocessOptions {
    GridSpec grid;
    ClampRanges clamp;
    double min_coverage = 0.1;  // mean observed fraction below this drops the patient
};

struct PreprocessedCohort {
    std::vector<RegularGridSeries> series;
    std::vector<OutcomeLabel> labels;
    std::vector<std::string> patient_ids;
    ClassPrior priors;  // recomputed on the retained set
    NormStats stats;
};

// Full pipeline: clamp -> regrid -> coverage drop -> impute -> normalize.
// When `stats` is absent they are fitted on this cohort (the training split).
PreprocessedCohort preprocess_cohort(const Cohort& cohort, const PreprocessOptions& opts,
                                     const std::optional<NormStats>& stats = std::nullopt);

// Serializes a preprocessed cohort back to the CSV format with the
// `#normalized=true` marker; bin centers become hours_to_outcome.
Cohort to_cohort(const PreprocessedCohort& pre);

}  // namespace pheno
