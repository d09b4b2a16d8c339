#include "pheno/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pheno {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_row_dist(const Matrix& a, int i, const Matrix& b, int j) {
    const double* pa = a.row_ptr(i);
    const double* pb = b.row_ptr(j);
    double acc = 0.0;
    for (int d = 0; d < a.cols; ++d) {
        double diff = pa[d] - pb[d];
        acc += diff * diff;
    }
    return acc;
}

void check_pair(const Matrix& a, const Matrix& b, std::optional<int> band) {
    if (a.rows < 1 || b.rows < 1) throw ValidationError("dtw: series must be non-empty");
    if (a.cols != b.cols) throw ValidationError("dtw: channel counts differ");
    if (band) {
        if (*band < 0) throw ValidationError("dtw: band radius must be >= 0");
        if (std::abs(a.rows - b.rows) > *band)
            throw ValidationError("dtw: band disconnects the warping path");
    }
}

// Accumulated-cost table for one channel subset (all channels when chans is
// empty). Returns D(n-1, m-1).
Matrix cost_table(const Matrix& a, const Matrix& b, std::optional<int> band) {
    const int n = a.rows, m = b.rows;
    Matrix D(n, m, kInf);
    for (int i = 0; i < n; ++i) {
        int jlo = 0, jhi = m - 1;
        if (band) {
            jlo = std::max(0, i - *band);
            jhi = std::min(m - 1, i + *band);
        }
        for (int j = jlo; j <= jhi; ++j) {
            double c = sq_row_dist(a, i, b, j);
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else {
                best = kInf;
                if (i > 0) best = std::min(best, D(i - 1, j));
                if (j > 0) best = std::min(best, D(i, j - 1));
                if (i > 0 && j > 0) best = std::min(best, D(i - 1, j - 1));
            }
            D(i, j) = c + best;
        }
    }
    return D;
}

}  // namespace

void Metric::validate() const {
    if (band && *band < 0) throw ValidationError("metric: band radius must be >= 0");
}

double Metric::distance(const Matrix& a, const Matrix& b) const {
    if (type == Type::Euclidean) return euclidean_distance(a, b);
    return per_channel ? dtw_distance_per_channel(a, b, band) : dtw_distance(a, b, band);
}

double euclidean_distance(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ValidationError("euclidean: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.d.size(); ++i) {
        double diff = a.d[i] - b.d[i];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

double dtw_distance(const Matrix& a, const Matrix& b, std::optional<int> band) {
    check_pair(a, b, band);
    Matrix D = cost_table(a, b, band);
    double total = D(a.rows - 1, b.rows - 1);
    if (!std::isfinite(total)) throw ValidationError("dtw: band disconnects the warping path");
    return std::sqrt(total);
}

double dtw_distance_per_channel(const Matrix& a, const Matrix& b, std::optional<int> band) {
    check_pair(a, b, band);
    double total = 0.0;
    for (int ch = 0; ch < a.cols; ++ch) {
        Matrix ca(a.rows, 1), cb(b.rows, 1);
        for (int i = 0; i < a.rows; ++i) ca(i, 0) = a(i, ch);
        for (int j = 0; j < b.rows; ++j) cb(j, 0) = b(j, ch);
        Matrix D = cost_table(ca, cb, band);
        double c = D(a.rows - 1, b.rows - 1);
        if (!std::isfinite(c)) throw ValidationError("dtw: band disconnects the warping path");
        total += c;
    }
    return std::sqrt(total);
}

std::vector<std::pair<int, int>> dtw_path(const Matrix& a, const Matrix& b, std::optional<int> band) {
    check_pair(a, b, band);
    Matrix D = cost_table(a, b, band);
    if (!std::isfinite(D(a.rows - 1, b.rows - 1)))
        throw ValidationError("dtw: band disconnects the warping path");

    std::vector<std::pair<int, int>> rev;
    int i = a.rows - 1, j = b.rows - 1;
    rev.emplace_back(i, j);
    while (i > 0 || j > 0) {
        double diag = (i > 0 && j > 0) ? D(i - 1, j - 1) : kInf;
        double vert = i > 0 ? D(i - 1, j) : kInf;
        double horz = j > 0 ? D(i, j - 1) : kInf;
        double best = std::min(diag, std::min(vert, horz));
        if (diag == best) {
            --i;
            --j;
        } else if (vert == best) {
            --i;
        } else {
            --j;
        }
        rev.emplace_back(i, j);
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

Matrix dtw_barycenter(const std::vector<Matrix>& members, const Matrix& init, int iters,
                      std::optional<int> band) {
    if (members.empty()) throw ValidationError("dtw_barycenter: empty member list");
    for (const auto& m : members)
        if (m.cols != init.cols) throw ValidationError("dtw_barycenter: channel counts differ");

    Matrix bary = init;
    double prev_cost = kInf;
    for (int it = 0; it < iters; ++it) {
        Matrix sums(bary.rows, bary.cols);
        std::vector<double> counts(bary.rows, 0.0);
        double cost = 0.0;
        for (const auto& m : members) {
            auto path = dtw_path(bary, m, band);
            for (const auto& [bi, mi] : path) {
                for (int d = 0; d < bary.cols; ++d) sums(bi, d) += m(mi, d);
                counts[bi] += 1.0;
                cost += sq_row_dist(bary, bi, m, mi);
            }
        }
        for (int i = 0; i < bary.rows; ++i)
            if (counts[i] > 0.0)
                for (int d = 0; d < bary.cols; ++d) bary(i, d) = sums(i, d) / counts[i];
        if (cost == 0.0) break;
        if (prev_cost < kInf && (prev_cost - cost) / prev_cost < 1e-6) break;
        prev_cost = cost;
    }
    return bary;
}

}  // namespace pheno
