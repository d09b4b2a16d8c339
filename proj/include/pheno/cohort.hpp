#pragma once

#include <array>
#include <string>
#include <vector>

#include "pheno/core.hpp"

namespace pheno {

// The eight vital-sign channels, in the fixed order used everywhere.
enum class VitalChannel : int { HR = 0, RR, DBP, SBP, SPO2, TEMP, AVPU, FIO2 };

constexpr int kNumChannels = 8;
constexpr int kNumOutcomes = 4;

extern const std::array<const char*, kNumChannels> kChannelNames;

// Returns -1 when the name is not a channel.
int channel_index(const std::string& name);

enum class Outcome : int { Discharge = 0, IcuAdmission = 1, CardiacArrest = 2, Death = 3 };

const char* outcome_name(Outcome o);
// Throws ValidationError on unknown names.
Outcome parse_outcome(const std::string& s);

// One-hot outcome label.
struct OutcomeLabel {
    std::array<double, kNumOutcomes> one_hot{};

    OutcomeLabel() = default;
    explicit OutcomeLabel(Outcome o) { one_hot[static_cast<int>(o)] = 1.0; }

    Outcome outcome() const;
    void validate() const;
};

// Proportion of patients per outcome class.
struct ClassPrior {
    std::array<double, kNumOutcomes> alpha{};

    void validate() const;
};

// One patient's irregular multichannel trajectory. Rows are stored in
// calendar order, so `times` (hours before outcome) strictly decrease.
struct PatientSeries {
    std::string patient_id;
    std::vector<double> times;        // hours to outcome, strictly decreasing
    Matrix values;                    // T x 8, channel units
    std::vector<uint8_t> mask;        // T x 8 row-major, 1 = observed

    int n_obs() const { return static_cast<int>(times.size()); }
    bool observed(int t, int ch) const { return mask[static_cast<size_t>(t) * kNumChannels + ch] != 0; }
    void set_observed(int t, int ch, bool v) { mask[static_cast<size_t>(t) * kNumChannels + ch] = v ? 1 : 0; }

    void validate() const;
};

struct Cohort {
    std::vector<PatientSeries> patients;
    std::vector<OutcomeLabel> labels;
    ClassPrior priors;

    void validate() const;
};

ClassPrior compute_priors(const std::vector<OutcomeLabel>& labels);

// CSV format: header `patient_id,hours_to_outcome,HR,...,FIO2,outcome`,
// one row per observation, empty cells for unobserved readings.
Cohort load_cohort(const std::string& path);
void save_cohort(const Cohort& cohort, const std::string& path, bool normalized = false);

// Assembles a validated cohort, recomputing priors from the labels.
Cohort make_cohort(std::vector<PatientSeries> patients, std::vector<OutcomeLabel> labels);

}  // namespace pheno
