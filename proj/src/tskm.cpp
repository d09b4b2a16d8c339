#include "pheno/tskm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace pheno {

namespace {

Matrix mean_of(const std::vector<Matrix>& series, const std::vector<int>& members) {
    Matrix out(series[members[0]].rows, series[members[0]].cols);
    for (int idx : members)
        for (size_t i = 0; i < out.d.size(); ++i) out.d[i] += series[idx].d[i];
    for (double& v : out.d) v /= static_cast<double>(members.size());
    return out;
}

}  // namespace

CentroidSet tskm_fit(const std::vector<Matrix>& series, int K, const Metric& metric, uint64_t seed,
                     int max_iter, int dba_iters) {
    metric.validate();
    const int n = static_cast<int>(series.size());
    if (K < 1) throw ValidationError("tskm: K must be >= 1");
    if (n < K) throw ValidationError("tskm: need at least K series");
    if (metric.type == Metric::Type::Euclidean)
        for (const auto& s : series)
            if (!s.same_shape(series[0])) throw ValidationError("tskm: euclidean metric needs equal shapes");

    Rng rng(seed);

    // k-means++ seeding on squared metric distances
    std::vector<Matrix> centroids;
    centroids.push_back(series[rng.uniform_int(0, n - 1)]);
    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) {
        double d = metric.distance(series[i], centroids[0]);
        d2[i] = d * d;
    }
    while (static_cast<int>(centroids.size()) < K) {
        double total = 0.0;
        for (double v : d2) total += v;
        int chosen = -1;
        if (total <= 0.0) {
            for (int i = 0; i < n; ++i)
                if (d2[i] >= 0.0) {  // duplicates everywhere: lowest index wins
                    chosen = i;
                    break;
                }
        } else {
            double r = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (r < acc) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(series[chosen]);
        for (int i = 0; i < n; ++i) {
            double d = metric.distance(series[i], centroids.back());
            d2[i] = std::min(d2[i], d * d);
        }
    }

    std::vector<int> assign(n, -1), prev_assign;
    std::vector<double> dist(n, 0.0);
    double inertia = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                double d = metric.distance(series[i], centroids[k]);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            assign[i] = best;
            dist[i] = best_d;
        }

        // empty-cluster repair: seize the farthest point
        std::vector<int> sizes(K, 0);
        for (int a : assign) ++sizes[a];
        for (int k = 0; k < K; ++k) {
            if (sizes[k] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i)
                if (sizes[assign[i]] > 1 && dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            if (far < 0) continue;
            --sizes[assign[far]];
            assign[far] = k;
            sizes[k] = 1;
            centroids[k] = series[far];
            dist[far] = 0.0;
        }

        inertia = 0.0;
        for (int i = 0; i < n; ++i) inertia += dist[i] * dist[i];

        if (assign == prev_assign) break;
        prev_assign = assign;

        // update
        for (int k = 0; k < K; ++k) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (assign[i] == k) members.push_back(i);
            if (members.empty()) continue;
            if (metric.type == Metric::Type::Euclidean) {
                centroids[k] = mean_of(series, members);
            } else {
                std::vector<Matrix> mats;
                mats.reserve(members.size());
                for (int idx : members) mats.push_back(series[idx]);
                centroids[k] = dtw_barycenter(mats, centroids[k], dba_iters, metric.band);
            }
        }
    }

    CentroidSet out;
    out.metric = metric;
    out.centroids = std::move(centroids);
    out.inertia = inertia;
    out.K = K;
    out.seed = seed;
    return out;
}

int tskm_assign(const CentroidSet& model, const Matrix& series) {
    if (model.centroids.empty()) throw ValidationError("tskm: model has no centroids");
    if (series.cols != model.centroids[0].cols) throw ValidationError("tskm: channel count mismatch");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < model.K; ++k) {
        double d = model.metric.distance(series, model.centroids[k]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::vector<std::pair<int, double>> inertia_curve(const std::vector<Matrix>& series,
                                                  const std::vector<int>& k_range, const Metric& metric,
                                                  uint64_t seed, int restarts, int max_iter) {
    if (k_range.empty()) throw ValidationError("inertia_curve: empty K range");
    for (size_t i = 1; i < k_range.size(); ++i)
        if (k_range[i] <= k_range[i - 1]) throw ValidationError("inertia_curve: K range must ascend");

    std::vector<std::pair<int, double>> curve;
    double running_min = std::numeric_limits<double>::infinity();
    for (int K : k_range) {
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r) {
            uint64_t sub = derive_seed(seed, static_cast<uint64_t>(K) * 1000 + r);
            best = std::min(best, tskm_fit(series, K, metric, sub, max_iter).inertia);
        }
        running_min = std::min(running_min, best);
        curve.emplace_back(K, running_min);
    }
    return curve;
}

int elbow_select(const std::vector<std::pair<int, double>>& curve) {
    if (curve.size() < 3) throw ValidationError("elbow_select: need at least 3 points");
    for (size_t i = 1; i < curve.size(); ++i)
        if (curve[i].first != curve[i - 1].first + 1)
            throw ValidationError("elbow_select: K values must be consecutive");
    int best_k = curve[1].first;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < curve.size(); ++i) {
        double curv = curve[i - 1].second - 2.0 * curve[i].second + curve[i + 1].second;
        if (curv > best_curv) {
            best_curv = curv;
            best_k = curve[i].first;
        }
    }
    return best_k;
}

namespace {

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int i = 0; i < m.rows; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(static_cast<int>(j.size()), j.empty() ? 0 : static_cast<int>(j[0].size()));
    for (int i = 0; i < m.rows; ++i)
        for (int c = 0; c < m.cols; ++c) m(i, c) = j[i][c].get<double>();
    return m;
}

}  // namespace

void save_centroid_set(const CentroidSet& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["model"] = "tskm";
    j["metric"] = {{"type", model.metric.type == Metric::Type::Euclidean ? "euclidean" : "dtw"},
                   {"band", model.metric.band ? nlohmann::json(*model.metric.band) : nlohmann::json()},
                   {"per_channel", model.metric.per_channel}};
    j["K"] = model.K;
    j["T"] = model.centroids.empty() ? 0 : model.centroids[0].rows;
    j["D"] = model.centroids.empty() ? 0 : model.centroids[0].cols;
    nlohmann::ordered_json cents = nlohmann::ordered_json::array();
    for (const auto& c : model.centroids) cents.push_back(matrix_to_json(c));
    j["centroids"] = std::move(cents);
    j["inertia"] = model.inertia;
    j["seed"] = model.seed;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    out << j.dump(2) << "\n";
}

CentroidSet load_centroid_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": bad model JSON: " + e.what());
    }
    if (j.value("model", "") != "tskm") throw ValidationError(path + ": not a tskm model");
    CentroidSet m;
    m.metric.type = j["metric"]["type"] == "euclidean" ? Metric::Type::Euclidean : Metric::Type::Dtw;
    if (!j["metric"]["band"].is_null()) m.metric.band = j["metric"]["band"].get<int>();
    m.metric.per_channel = j["metric"].value("per_channel", false);
    m.K = j["K"].get<int>();
    for (const auto& c : j["centroids"]) m.centroids.push_back(matrix_from_json(c));
    m.inertia = j["inertia"].get<double>();
    m.seed = j["seed"].get<uint64_t>();
    return m;
}

}  // namespace pheno
