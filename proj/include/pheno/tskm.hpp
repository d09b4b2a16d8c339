#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pheno/dtw.hpp"

namespace pheno {

struct CentroidSet {
    Metric metric;
    std::vector<Matrix> centroids;  // K matrices of shape T x D
    double inertia = 0.0;
    int K = 0;
    uint64_t seed = 0;
};

// Lloyd iterations with k-means++ seeding. Centroid updates use the
// elementwise mean under Euclidean and DTW barycenter averaging under DTW.
// Empty clusters are re-seeded with the point farthest from its centroid.
CentroidSet tskm_fit(const std::vector<Matrix>& series, int K, const Metric& metric, uint64_t seed,
                     int max_iter = 50, int dba_iters = 10);

// Nearest centroid; ties resolve to the lowest cluster id.
int tskm_assign(const CentroidSet& model, const Matrix& series);

// Best inertia per K over seeded restarts; enforced non-increasing in K by
// running minimum.
std::vector<std::pair<int, double>> inertia_curve(const std::vector<Matrix>& series,
                                                  const std::vector<int>& k_range, const Metric& metric,
                                                  uint64_t seed, int restarts = 5, int max_iter = 50);

// K with the largest discrete second difference of the inertia curve;
// endpoints are ineligible, ties resolve to the smallest K.
int elbow_select(const std::vector<std::pair<int, double>>& curve);

void save_centroid_set(const CentroidSet& model, const std::string& path);
CentroidSet load_centroid_set(const std::string& path);

}  // namespace pheno
