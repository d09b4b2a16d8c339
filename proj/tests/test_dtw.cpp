#include <doctest.h>

#include "oracles.hpp"
#include "pheno/dtw.hpp"

using namespace pheno;

namespace {

Matrix col(std::vector<double> v) {
    Matrix m(static_cast<int>(v.size()), 1);
    for (size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
    return m;
}

Matrix random_series(Rng& rng, int rows, int cols) {
    Matrix m(rows, cols);
    for (double& v : m.d) v = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("euclidean distance basics") {
    Matrix a = col({0.0, 0.0});
    Matrix b = col({3.0, 4.0});
    CHECK(euclidean_distance(a, a) == 0.0);
    CHECK(euclidean_distance(a, b) == doctest::Approx(5.0));
    CHECK(euclidean_distance(b, a) == euclidean_distance(a, b));
    CHECK_THROWS_AS(euclidean_distance(a, col({1.0})), ValidationError);
}

TEST_CASE("dtw distance hand cases") {
    CHECK(dtw_distance(col({0, 0, 1}), col({0, 1})) == doctest::Approx(0.0));
    CHECK(dtw_distance(col({0, 1}), col({1, 0})) == doctest::Approx(std::sqrt(2.0)));
    Rng rng(3);
    Matrix x = random_series(rng, 5, 2);
    CHECK(dtw_distance(x, x) == doctest::Approx(0.0));
    CHECK_THROWS_AS(dtw_distance(Matrix(0, 1), col({1.0})), ValidationError);
}

TEST_CASE("dtw symmetry and euclidean upper bound") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        int t = rng.uniform_int(1, 6);
        int d = rng.uniform_int(1, 3);
        Matrix a = random_series(rng, t, d);
        Matrix b = random_series(rng, t, d);
        double ab = dtw_distance(a, b);
        CHECK(ab == doctest::Approx(dtw_distance(b, a)).epsilon(1e-12));
        CHECK(ab <= euclidean_distance(a, b) + 1e-12);
    }
}

TEST_CASE("dtw matches brute-force path enumeration") {
    Rng rng(99);
    for (int rep = 0; rep < 60; ++rep) {
        int ta = rng.uniform_int(1, 6), tb = rng.uniform_int(1, 6);
        int d = rng.uniform_int(1, 3);
        Matrix a = random_series(rng, ta, d);
        Matrix b = random_series(rng, tb, d);
        double dp = dtw_distance(a, b);
        double brute = std::sqrt(oracle::dtw_sq_cost_brute(a, b));
        CHECK(dp == doctest::Approx(brute).epsilon(1e-9));
    }
}

TEST_CASE("dtw band constraints") {
    Matrix a = col({0, 1, 2, 3, 4});
    Matrix b = col({0, 4});
    CHECK_THROWS_AS(dtw_distance(a, b, 1), ValidationError);  // band disconnects
    CHECK_THROWS_AS(Metric::dtw(-1).validate(), ValidationError);
    // generous band reproduces the unbounded distance
    Matrix c = col({0, 1, 2, 3});
    Matrix d = col({0, 2, 2, 3});
    CHECK(dtw_distance(c, d, 10) == doctest::Approx(dtw_distance(c, d)));
}

TEST_CASE("dtw path is monotone, starts and ends at the corners") {
    Rng rng(7);
    Matrix a = random_series(rng, 5, 2);
    Matrix b = random_series(rng, 4, 2);
    auto path = dtw_path(a, b);
    CHECK(path.front() == std::pair<int, int>{0, 0});
    CHECK(path.back() == std::pair<int, int>{4, 3});
    for (size_t i = 1; i < path.size(); ++i) {
        int di = path[i].first - path[i - 1].first;
        int dj = path[i].second - path[i - 1].second;
        CHECK(di >= 0);
        CHECK(dj >= 0);
        CHECK(di + dj >= 1);
        CHECK(di <= 1);
        CHECK(dj <= 1);
    }

    auto self_path = dtw_path(a, a);
    REQUIRE(self_path.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(self_path[i] == std::pair<int, int>{i, i});

    // path cost equals dtw_distance^2 on the zero-alignment example
    auto p2 = dtw_path(col({0, 0, 1}), col({0, 1}));
    double cost = 0.0;
    Matrix x = col({0, 0, 1}), y = col({0, 1});
    for (auto [i, j] : p2) cost += (x(i, 0) - y(j, 0)) * (x(i, 0) - y(j, 0));
    CHECK(cost == doctest::Approx(0.0));
}

TEST_CASE("per-channel dtw differs from joint warping when channels disagree") {
    // channel 0 wants to warp one way, channel 1 the other
    Matrix a(3, 2), b(3, 2);
    a(0, 0) = 0; a(1, 0) = 1; a(2, 0) = 1;
    a(0, 1) = 1; a(1, 1) = 1; a(2, 1) = 0;
    b(0, 0) = 0; b(1, 0) = 0; b(2, 0) = 1;
    b(0, 1) = 1; b(1, 1) = 0; b(2, 1) = 0;
    double joint = dtw_distance(a, b);
    double indep = dtw_distance_per_channel(a, b);
    CHECK(indep <= joint + 1e-12);
}

TEST_CASE("dtw barycenter fixed points and averaging") {
    Matrix m = col({1.0, 2.0, 3.0});
    CHECK(dtw_barycenter({m}, m, 1).d == m.d);
    CHECK(dtw_barycenter({m, m}, m, 5).d == m.d);

    Matrix zeros = col({0, 0, 0, 0});
    Matrix tens = col({10, 10, 10, 10});
    Matrix bary = dtw_barycenter({zeros, tens}, zeros, 10);
    for (int i = 0; i < 4; ++i) CHECK(bary(i, 0) == doctest::Approx(5.0));

    CHECK_THROWS_AS(dtw_barycenter({}, zeros, 10), ValidationError);
}

TEST_CASE("dba objective is non-increasing across iterations") {
    Rng rng(23);
    std::vector<Matrix> members;
    for (int i = 0; i < 5; ++i) members.push_back(random_series(rng, 6, 2));
    auto objective = [&](const Matrix& bary) {
        double acc = 0.0;
        for (const auto& m : members) {
            double d = dtw_distance(m, bary);
            acc += d * d;
        }
        return acc;
    };
    Matrix bary = members[0];
    double prev = objective(bary);
    for (int it = 0; it < 8; ++it) {
        bary = dtw_barycenter(members, bary, 1);
        double cur = objective(bary);
        CHECK(cur <= prev + 1e-9);
        prev = cur;
    }
}
