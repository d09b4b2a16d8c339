#include "pheno/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "pheno/preprocess.hpp"

namespace pheno {

namespace {
constexpr double kPi = 3.14159265358979323846;

double mean_value(const ChannelDynamics& d, double t, double horizon) {
    return d.baseline + d.trend_per_hour * (horizon - t) +
           d.amplitude * std::sin(2.0 * kPi * t / d.period_hours);
}
}  // namespace

void SynthConfig::validate() const {
    if (n_patients < 1) throw ValidationError("synth: n_patients must be >= 1");
    if (phenotype_count < 1) throw ValidationError("synth: phenotype_count must be >= 1");
    if (outcome_mix.size() != static_cast<size_t>(phenotype_count))
        throw ValidationError("synth: outcome_mix must have one row per phenotype");
    if (dynamics.size() != static_cast<size_t>(phenotype_count))
        throw ValidationError("synth: dynamics must have one row per phenotype");
    double imb_sum = 0.0;
    for (double v : imbalance) {
        if (v < 0.0) throw ValidationError("synth: imbalance entries must be >= 0");
        imb_sum += v;
    }
    if (std::abs(imb_sum - 1.0) > 1e-9) throw ValidationError("synth: imbalance must sum to 1");
    for (const auto& row : outcome_mix) {
        double s = 0.0;
        for (double v : row) {
            if (v < 0.0) throw ValidationError("synth: outcome_mix entries must be >= 0");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) throw ValidationError("synth: outcome_mix rows must sum to 1");
    }
    if (!(cadence_hours > 0.0) || !(horizon_hours > 0.0))
        throw ValidationError("synth: cadence and horizon must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("synth: dropout must be in [0,1)");
    if (jitter_hours < 0.0 || 2.0 * jitter_hours >= cadence_hours)
        throw ValidationError("synth: jitter must be < cadence/2 to keep rows ordered");
}

SynthResult generate(const SynthConfig& config) {
    config.validate();

    SynthResult result;
    result.phenotype_ids.reserve(config.n_patients);
    std::vector<PatientSeries> patients;
    std::vector<OutcomeLabel> labels;
    patients.reserve(config.n_patients);

    const int slots = static_cast<int>(std::floor(config.horizon_hours / config.cadence_hours)) + 1;

    for (int i = 0; i < config.n_patients; ++i) {
        const int ph = i % config.phenotype_count;
        Rng rng(derive_seed(config.seed, static_cast<uint64_t>(i)));

        // outcome
        double u = rng.uniform();
        int outcome = kNumOutcomes - 1;
        double acc = 0.0;
        for (int c = 0; c < kNumOutcomes; ++c) {
            acc += config.outcome_mix[ph][c];
            if (u < acc) {
                outcome = c;
                break;
            }
        }

        PatientSeries ps;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%06d", i);
        ps.patient_id = buf;

        std::vector<double> times;
        std::vector<std::array<double, kNumChannels>> rows;
        for (int k = 0; k < slots; ++k) {
            double drop_u = rng.uniform();
            double jitter = (2.0 * rng.uniform() - 1.0) * config.jitter_hours;
            std::array<double, kNumChannels> vals;
            for (int ch = 0; ch < kNumChannels; ++ch) {
                const ChannelDynamics& d = config.dynamics[ph][ch];
                double noise = rng.normal();
                double t = config.horizon_hours - k * config.cadence_hours + jitter;
                vals[ch] = mean_value(d, t, config.horizon_hours) + d.noise_std * noise;
            }
            double t = config.horizon_hours - k * config.cadence_hours + jitter;
            if (t < 0.0 || t >= config.horizon_hours + config.cadence_hours) continue;
            if (drop_u < config.dropout) continue;
            times.push_back(t);
            rows.push_back(vals);
        }
        if (times.empty()) {
            // keep one anchor observation so the patient stays valid
            std::array<double, kNumChannels> vals;
            for (int ch = 0; ch < kNumChannels; ++ch)
                vals[ch] = mean_value(config.dynamics[ph][ch], config.horizon_hours / 2.0, config.horizon_hours);
            times.push_back(config.horizon_hours / 2.0);
            rows.push_back(vals);
        }

        const int T = static_cast<int>(times.size());
        ps.times = times;
        ps.values = Matrix(T, kNumChannels);
        ps.mask.assign(static_cast<size_t>(T) * kNumChannels, 1);
        for (int r = 0; r < T; ++r)
            for (int ch = 0; ch < kNumChannels; ++ch) ps.values(r, ch) = rows[r][ch];

        patients.push_back(std::move(ps));
        labels.emplace_back(static_cast<Outcome>(outcome));
        result.phenotype_ids.push_back(ph);
    }

    result.cohort = make_cohort(std::move(patients), std::move(labels));
    return result;
}

SynthConfig make_separable_preset(PresetLevel level, std::array<double, kNumOutcomes> imbalance) {
    SynthConfig cfg;
    cfg.phenotype_count = 4;
    cfg.imbalance = imbalance;

    // outcome_mix rows: phenotype i>0 carries all of minority outcome i,
    // phenotype 0 is pure discharge; equal phenotype shares then mix back to
    // the requested overall proportions.
    cfg.outcome_mix.assign(4, {1.0, 0.0, 0.0, 0.0});
    for (int i = 1; i < 4; ++i) {
        double p = 4.0 * imbalance[i];
        if (p > 1.0 + 1e-12)
            throw ValidationError("preset: minority proportion too large for 4 equal phenotypes");
        p = std::min(p, 1.0);
        cfg.outcome_mix[i][i] = p;
        cfg.outcome_mix[i][0] = 1.0 - p;
    }

    auto flat = [](double base, double noise) {
        ChannelDynamics d;
        d.baseline = base;
        d.noise_std = noise;
        return d;
    };
    auto trended = [](double base, double trend, double noise, double amp = 0.0) {
        ChannelDynamics d;
        d.baseline = base;
        d.trend_per_hour = trend;
        d.noise_std = noise;
        d.amplitude = amp;
        return d;
    };

    const int HR = 0, RR = 1, DBP = 2, SBP = 3, SPO2 = 4, TEMP = 5, AVPU = 6, FIO2 = 7;
    std::array<ChannelDynamics, kNumChannels> common{};
    common[DBP] = flat(70.0, 4.0);
    common[SBP] = flat(120.0, 5.0);
    common[TEMP] = flat(37.0, 0.25);
    common[AVPU] = flat(1.5, 0.2);
    common[FIO2] = flat(0.3, 0.02);

    cfg.dynamics.assign(4, common);
    if (level == PresetLevel::Easy) {
        // stable / elevated / trending / deteriorating
        cfg.dynamics[0][HR] = trended(75.0, 0.0, 3.0, 1.5);
        cfg.dynamics[0][RR] = trended(14.0, 0.0, 1.0, 0.5);
        cfg.dynamics[0][SPO2] = flat(97.0, 1.2);

        cfg.dynamics[1][HR] = trended(90.0, 0.0, 3.0, 1.5);
        cfg.dynamics[1][RR] = trended(20.0, 0.02, 1.0, 0.5);
        cfg.dynamics[1][SPO2] = flat(94.0, 1.2);

        cfg.dynamics[2][HR] = trended(75.0, 0.0, 3.0, 1.5);
        cfg.dynamics[2][RR] = trended(14.0, 0.13, 1.0, 0.5);
        cfg.dynamics[2][SPO2] = flat(96.0, 1.2);

        cfg.dynamics[3][HR] = trended(80.0, 0.40, 3.0, 1.5);
        cfg.dynamics[3][RR] = trended(16.0, 0.10, 1.0, 0.5);
        cfg.dynamics[3][SPO2] = trended(97.0, -0.06, 1.2);
    } else {
        for (int ph = 0; ph < 4; ++ph) {
            cfg.dynamics[ph][HR] = trended(80.0, 0.0, 3.0, 1.5);
            cfg.dynamics[ph][RR] = trended(17.0 + 0.3 * ph, 0.002 * ph, 2.0, 0.5);
            cfg.dynamics[ph][SPO2] = flat(96.0, 1.2);
        }
    }
    return cfg;
}

double preset_separation_ratio(const SynthConfig& config) {
    GridSpec grid;  // default 24-bin input window
    const int T = grid.num_bins();
    double min_pair = std::numeric_limits<double>::infinity();
    for (int a = 0; a < config.phenotype_count; ++a)
        for (int b = a + 1; b < config.phenotype_count; ++b) {
            double best_channel = 0.0;
            for (int ch = 0; ch < kNumChannels; ++ch) {
                const ChannelDynamics& da = config.dynamics[a][ch];
                const ChannelDynamics& db = config.dynamics[b][ch];
                double sigma = 0.5 * (da.noise_std + db.noise_std);
                if (!(sigma > 0.0)) continue;
                double acc = 0.0;
                for (int i = 0; i < T; ++i) {
                    double t = grid.bin_center(i);
                    acc += std::abs(mean_value(da, t, config.horizon_hours) -
                                    mean_value(db, t, config.horizon_hours));
                }
                best_channel = std::max(best_channel, acc / T / sigma);
            }
            min_pair = std::min(min_pair, best_channel);
        }
    return min_pair;
}

void save_truth(const SynthResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write truth file '" + path + "'");
    out << "patient_id,phenotype_id\n";
    for (size_t i = 0; i < result.cohort.patients.size(); ++i)
        out << result.cohort.patients[i].patient_id << ',' << result.phenotype_ids[i] << '\n';
    if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<std::pair<std::string, int>> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open truth file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty truth file");
    std::vector<std::pair<std::string, int>> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected patient_id,phenotype_id");
        std::string id = line.substr(0, comma);
        int ph;
        try {
            ph = std::stoi(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad phenotype id");
        }
        out.emplace_back(id, ph);
    }
    return out;
}

}  // namespace pheno
