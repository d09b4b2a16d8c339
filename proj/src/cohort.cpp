#include "pheno/cohort.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace pheno {

const std::array<const char*, kNumChannels> kChannelNames = {"HR",   "RR",   "DBP",  "SBP",
                                                             "SPO2", "TEMP", "AVPU", "FIO2"};

int channel_index(const std::string& name) {
    for (int i = 0; i < kNumChannels; ++i)
        if (name == kChannelNames[i]) return i;
    return -1;
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Discharge: return "discharge";
        case Outcome::IcuAdmission: return "icu";
        case Outcome::CardiacArrest: return "cardiac_arrest";
        case Outcome::Death: return "death";
    }
    return "?";
}

Outcome parse_outcome(const std::string& s) {
    for (int c = 0; c < kNumOutcomes; ++c)
        if (s == outcome_name(static_cast<Outcome>(c))) return static_cast<Outcome>(c);
    throw ValidationError("unknown outcome '" + s + "'");
}

Outcome OutcomeLabel::outcome() const {
    for (int c = 0; c < kNumOutcomes; ++c)
        if (one_hot[c] == 1.0) return static_cast<Outcome>(c);
    throw ValidationError("label is not one-hot");
}

void OutcomeLabel::validate() const {
    double sum = 0.0;
    for (double v : one_hot) {
        if (v != 0.0 && v != 1.0) throw ValidationError("one-hot entries must be 0 or 1");
        sum += v;
    }
    if (sum != 1.0) throw ValidationError("one-hot entries must sum to 1");
}

void ClassPrior::validate() const {
    double sum = 0.0;
    for (double a : alpha) {
        if (a < 0.0) throw ValidationError("class prior must be non-negative");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("class priors must sum to 1");
}

void PatientSeries::validate() const {
    const int t = n_obs();
    if (t == 0) throw ValidationError("patient '" + patient_id + "' has zero observations");
    if (values.rows != t || values.cols != kNumChannels)
        throw ValidationError("patient '" + patient_id + "' values must be T x 8");
    if (mask.size() != static_cast<size_t>(t) * kNumChannels)
        throw ValidationError("patient '" + patient_id + "' mask shape mismatch");
    bool any_observed = false;
    for (int i = 0; i < t; ++i) {
        if (times[i] < 0.0 || !std::isfinite(times[i]))
            throw ValidationError("patient '" + patient_id + "' has invalid hours_to_outcome");
        if (i > 0 && !(times[i] < times[i - 1]))
            throw ValidationError("patient '" + patient_id + "' rows not in chronological order");
        for (int ch = 0; ch < kNumChannels; ++ch) {
            if (observed(i, ch)) {
                any_observed = true;
                if (!std::isfinite(values(i, ch)))
                    throw ValidationError("patient '" + patient_id + "' has non-finite observed value");
            }
        }
    }
    if (!any_observed) throw ValidationError("patient '" + patient_id + "' has zero observations");
}

void Cohort::validate() const {
    if (patients.empty()) throw ValidationError("cohort is empty");
    if (patients.size() != labels.size()) throw ValidationError("cohort patients/labels size mismatch");
    for (const auto& p : patients) p.validate();
    for (const auto& l : labels) l.validate();
    priors.validate();
    ClassPrior recomputed = compute_priors(labels);
    for (int c = 0; c < kNumOutcomes; ++c)
        if (std::abs(recomputed.alpha[c] - priors.alpha[c]) > 1e-12)
            throw ValidationError("stored priors disagree with labels");
}

ClassPrior compute_priors(const std::vector<OutcomeLabel>& labels) {
    if (labels.empty()) throw ValidationError("cannot compute priors of an empty label list");
    ClassPrior p;
    for (const auto& l : labels)
        for (int c = 0; c < kNumOutcomes; ++c) p.alpha[c] += l.one_hot[c];
    for (int c = 0; c < kNumOutcomes; ++c) p.alpha[c] /= static_cast<double>(labels.size());
    return p;
}

Cohort make_cohort(std::vector<PatientSeries> patients, std::vector<OutcomeLabel> labels) {
    Cohort c;
    c.patients = std::move(patients);
    c.labels = std::move(labels);
    c.priors = compute_priors(c.labels);
    c.validate();
    return c;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

constexpr const char* kHeader = "patient_id,hours_to_outcome,HR,RR,DBP,SBP,SPO2,TEMP,AVPU,FIO2,outcome";

struct RawRow {
    double hours;
    std::array<double, kNumChannels> values;
    std::array<bool, kNumChannels> present;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Cohort load_cohort(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cohort file '" + path + "'");

    std::string line;
    int line_no = 0;
    bool normalized = false;
    // comment lines (e.g. #normalized=true) may precede the header
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '#') {
            if (line.find("normalized=true") != std::string::npos) normalized = true;
            continue;
        }
        break;
    }
    {
        std::string header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != kHeader)
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad header, expected '" +
                             std::string(kHeader) + "'");
    }

    struct Group {
        std::vector<RawRow> rows;
        Outcome outcome = Outcome::Discharge;
        bool has_outcome = false;
    };
    std::vector<std::string> order;
    std::map<std::string, Group> groups;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 11)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 11 columns, got " +
                             std::to_string(cells.size()));
        const std::string& pid = cells[0];
        if (pid.empty()) throw ParseError(path + ":" + std::to_string(line_no) + ": empty patient_id");

        RawRow row{};
        try {
            size_t pos = 0;
            row.hours = std::stod(cells[1], &pos);
            if (pos != cells[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad hours_to_outcome '" + cells[1] + "'");
        }
        if (!std::isfinite(row.hours) || row.hours < 0.0)
            throw ParseError(path + ":" + std::to_string(line_no) + ": hours_to_outcome must be non-negative");

        for (int ch = 0; ch < kNumChannels; ++ch) {
            const std::string& cell = cells[2 + ch];
            if (cell.empty()) {
                row.present[ch] = false;
                row.values[ch] = 0.0;
                continue;
            }
            try {
                size_t pos = 0;
                row.values[ch] = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad " +
                                 std::string(kChannelNames[ch]) + " value '" + cell + "'");
            }
            if (!std::isfinite(row.values[ch]))
                throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite " +
                                 std::string(kChannelNames[ch]));
            row.present[ch] = true;
        }
        // FIO2 arrives either as a fraction or as a percentage; store fractions.
        // Normalized files carry z-scores, which must not be rescaled.
        if (!normalized && row.present[static_cast<int>(VitalChannel::FIO2)] &&
            row.values[static_cast<int>(VitalChannel::FIO2)] > 1.0)
            row.values[static_cast<int>(VitalChannel::FIO2)] /= 100.0;

        Outcome oc;
        try {
            oc = parse_outcome(cells[10]);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }

        auto it = groups.find(pid);
        if (it == groups.end()) {
            order.push_back(pid);
            it = groups.emplace(pid, Group{}).first;
        }
        Group& g = it->second;
        if (g.has_outcome && g.outcome != oc)
            throw ValidationError(path + ":" + std::to_string(line_no) + ": patient '" + pid +
                                  "' has conflicting outcomes");
        g.outcome = oc;
        g.has_outcome = true;
        g.rows.push_back(row);
    }

    if (order.empty()) throw ValidationError(path + ": cohort has no patients");

    std::vector<PatientSeries> patients;
    std::vector<OutcomeLabel> labels;
    patients.reserve(order.size());
    for (const auto& pid : order) {
        Group& g = groups[pid];
        // calendar order = descending hours to outcome
        std::stable_sort(g.rows.begin(), g.rows.end(),
                         [](const RawRow& a, const RawRow& b) { return a.hours > b.hours; });
        PatientSeries ps;
        ps.patient_id = pid;
        const int t = static_cast<int>(g.rows.size());
        ps.times.resize(t);
        ps.values = Matrix(t, kNumChannels);
        ps.mask.assign(static_cast<size_t>(t) * kNumChannels, 0);
        for (int i = 0; i < t; ++i) {
            ps.times[i] = g.rows[i].hours;
            for (int ch = 0; ch < kNumChannels; ++ch) {
                ps.values(i, ch) = g.rows[i].values[ch];
                ps.set_observed(i, ch, g.rows[i].present[ch]);
            }
        }
        patients.push_back(std::move(ps));
        labels.emplace_back(g.outcome);
    }
    return make_cohort(std::move(patients), std::move(labels));
}

void save_cohort(const Cohort& cohort, const std::string& path, bool normalized) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write cohort file '" + path + "'");
    if (normalized) out << "#normalized=true\n";
    out << kHeader << "\n";
    for (size_t p = 0; p < cohort.patients.size(); ++p) {
        const PatientSeries& ps = cohort.patients[p];
        const char* oc = outcome_name(cohort.labels[p].outcome());
        for (int i = 0; i < ps.n_obs(); ++i) {
            out << ps.patient_id << ',' << fmt_double(ps.times[i]);
            for (int ch = 0; ch < kNumChannels; ++ch) {
                out << ',';
                if (ps.observed(i, ch)) out << fmt_double(ps.values(i, ch));
            }
            out << ',' << oc << '\n';
        }
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace pheno
