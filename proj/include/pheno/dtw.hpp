#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pheno/core.hpp"

namespace pheno {

// Similarity measure between fixed-grid multivariate series.
struct Metric {
    enum class Type { Euclidean, Dtw };
    Type type = Type::Dtw;
    std::optional<int> band;  // Sakoe-Chiba radius in bins; absent = unbounded
    bool per_channel = false; // independent per-channel warping (comparison mode)

    static Metric euclidean() { return {Type::Euclidean, std::nullopt, false}; }
    static Metric dtw(std::optional<int> band = std::nullopt, bool per_channel = false) {
        return {Type::Dtw, band, per_channel};
    }

    void validate() const;
    double distance(const Matrix& a, const Matrix& b) const;
};

double euclidean_distance(const Matrix& a, const Matrix& b);

// Dependent multivariate DTW: local cost is the squared Euclidean distance
// across all channels jointly; the reported distance is the square root of
// the minimal accumulated cost, so it shares units with euclidean_distance.
double dtw_distance(const Matrix& a, const Matrix& b, std::optional<int> band = std::nullopt);

// Independent variant: sqrt of the sum over channels of per-channel
// accumulated DTW costs.
double dtw_distance_per_channel(const Matrix& a, const Matrix& b, std::optional<int> band = std::nullopt);

// One optimal monotone alignment; ties prefer diagonal, then vertical
// (advance in `a`), then horizontal.
std::vector<std::pair<int, int>> dtw_path(const Matrix& a, const Matrix& b,
                                          std::optional<int> band = std::nullopt);

// DTW barycenter averaging. Starts from `init`, realigns members each round;
// the sum of squared DTW distances to the members never increases.
Matrix dtw_barycenter(const std::vector<Matrix>& members, const Matrix& init, int iters = 10,
                      std::optional<int> band = std::nullopt);

}  // namespace pheno
