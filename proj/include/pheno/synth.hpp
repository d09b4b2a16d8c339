#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pheno/cohort.hpp"

namespace pheno {

// Deterministic per-channel trajectory law. Value at `t` hours to outcome:
// baseline + trend_per_hour * (horizon - t) + amplitude * sin(2*pi*t/period) + noise.
struct ChannelDynamics {
    double baseline = 0.0;
    double trend_per_hour = 0.0;
    double amplitude = 0.0;
    double period_hours = 24.0;
    double noise_std = 0.0;
};

struct SynthConfig {
    int n_patients = 100;
    int phenotype_count = 4;
    // per-phenotype distribution over the 4 outcomes; rows sum to 1
    std::vector<std::array<double, kNumOutcomes>> outcome_mix;
    // target overall outcome proportions (phenotypes are assigned round-robin,
    // so the mixture of outcome_mix rows must equal this)
    std::array<double, kNumOutcomes> imbalance{0.939, 0.030, 0.011, 0.020};
    std::vector<std::array<ChannelDynamics, kNumChannels>> dynamics;  // per phenotype

    double horizon_hours = 168.0;  // observations span [0, horizon)
    double cadence_hours = 4.0;
    double jitter_hours = 1.0;
    double dropout = 0.2;
    uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    Cohort cohort;
    std::vector<int> phenotype_ids;  // ground truth, one per patient; never in the CSV
};

// Fully deterministic given the config; patients use independent substreams
// keyed by patient index.
SynthResult generate(const SynthConfig& config);

enum class PresetLevel { Easy, Hard };

// Easy: 4 phenotypes separated by >= 3 noise stds on at least one channel in
// every pair, with distinct RR trends and one deteriorating phenotype
// (rising RR and HR, falling SPO2 towards the outcome). Hard: <= 1 noise std.
SynthConfig make_separable_preset(PresetLevel level,
                                  std::array<double, kNumOutcomes> imbalance = {0.939, 0.030, 0.011, 0.020});

// min over phenotype pairs of (max over channels of mean |d mean-trajectory| /
// noise std), evaluated on the default 24-bin input window.
double preset_separation_ratio(const SynthConfig& config);

void save_truth(const SynthResult& result, const std::string& path);
std::vector<std::pair<std::string, int>> load_truth(const std::string& path);

}  // namespace pheno
