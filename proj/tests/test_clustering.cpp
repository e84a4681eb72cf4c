#include <doctest.h>

#include <random>

#include "appt/clustering.hpp"
#include "oracles.hpp"

using namespace appt::clustering;

namespace {

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out.emplace_back();
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.back().push_back(m(r, c));
    }
    return out;
}

Eigen::MatrixXd column(std::initializer_list<double> v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index r = 0;
    for (double x : v) m(r++, 0) = x;
    return m;
}

Eigen::MatrixXd blobs(int per_blob, const std::vector<std::pair<double, double>>& centers, double spread,
                      unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    Eigen::MatrixXd m(per_blob * static_cast<int>(centers.size()), 2);
    int r = 0;
    for (const auto& [cx, cy] : centers) {
        for (int k = 0; k < per_blob; ++k, ++r) {
            m(r, 0) = cx + noise(rng);
            m(r, 1) = cy + noise(rng);
        }
    }
    return m;
}

// member sets of every dendrogram merge, by replaying cluster ids
std::vector<std::set<int>> merge_sets(const std::vector<Merge>& dendrogram, int n) {
    std::vector<std::set<int>> members;
    for (int i = 0; i < n; ++i) members.push_back({i});
    std::vector<std::set<int>> out;
    for (const auto& m : dendrogram) {
        std::set<int> u = members.at(static_cast<std::size_t>(m.left));
        const auto& r = members.at(static_cast<std::size_t>(m.right));
        u.insert(r.begin(), r.end());
        members.push_back(u);
        out.push_back(u);
    }
    return out;
}

}  // namespace

TEST_CASE("kmeans with k = rows puts every point alone") {
    const Eigen::MatrixXd d = blobs(3, {{0, 0}, {5, 5}}, 0.3, 1);
    const auto r = kmeans(d, 6, 3);
    CHECK(r.wcss == doctest::Approx(0.0));
    std::set<int> labels(r.labels.begin(), r.labels.end());
    CHECK(labels.size() == 6);
}

TEST_CASE("kmeans with k = 1 gives the column means and total scatter") {
    const Eigen::MatrixXd d = blobs(5, {{0, 0}, {3, 1}}, 0.5, 2);
    const auto r = kmeans(d, 1, 9);
    const Eigen::RowVectorXd mean = d.colwise().mean();
    CHECK((r.centroids.row(0) - mean).norm() < 1e-12);
    const double total = (d.rowwise() - mean).squaredNorm();
    CHECK(r.wcss == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("two separated blobs: labels follow membership and wcss is the exhaustive optimum") {
    const Eigen::MatrixXd d = blobs(3, {{0, 0}, {10, 10}}, 0.4, 4);
    const auto r = kmeans(d, 2, 1);
    CHECK(r.labels[0] == r.labels[1]);
    CHECK(r.labels[1] == r.labels[2]);
    CHECK(r.labels[3] == r.labels[4]);
    CHECK(r.labels[4] == r.labels[5]);
    CHECK(r.labels[0] != r.labels[3]);
    CHECK(r.wcss == doctest::Approx(oracle::exhaustive_min_wcss(rows_of(d), 2)).epsilon(1e-12));
}

TEST_CASE("kmeans rejects k = 0 and k > rows") {
    const Eigen::MatrixXd d = Eigen::MatrixXd::Random(4, 2);
    CHECK_THROWS_AS(kmeans(d, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(d, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(ward_agglomerative(d, 0), std::invalid_argument);
    CHECK_THROWS_AS(ward_agglomerative(d, 5), std::invalid_argument);
}

TEST_CASE("stored wcss matches a from-scratch recomputation and labels are valid") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd d(30, 3);
        for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = u(rng);
        const int k = 2 + trial % 4;
        const auto r = kmeans(d, k, static_cast<std::uint64_t>(trial));
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (int l : r.labels) {
            REQUIRE(l >= 0);
            REQUIRE(l < k);
            ++count[static_cast<std::size_t>(l)];
        }
        for (int c : count) CHECK(c > 0);
        CHECK(r.wcss == doctest::Approx(oracle::wcss(rows_of(d), r.labels, k)).epsilon(1e-9));
        CHECK(within_cluster_ss(d, r.labels, k) == doctest::Approx(r.wcss).epsilon(1e-9));
    }
}

TEST_CASE("kmeans is bit-reproducible for a fixed seed") {
    const Eigen::MatrixXd d = blobs(40, {{0, 0}, {1, 2}, {3, 0}}, 0.8, 8);
    const auto a = kmeans(d, 3, 77);
    const auto b = kmeans(d, 3, 77);
    CHECK(a.labels == b.labels);
    CHECK(a.wcss == b.wcss);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("small instances reach the exhaustive partition optimum") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    KMeansOptions opt;
    opt.restarts = 32;
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 5 + trial % 4;
        Eigen::MatrixXd d(n, 2);
        for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = u(rng);
        for (int k : {2, 3}) {
            const double best = oracle::exhaustive_min_wcss(rows_of(d), k);
            CHECK(kmeans(d, k, static_cast<std::uint64_t>(trial), opt).wcss == doctest::Approx(best).epsilon(1e-9));
        }
    }
}

TEST_CASE("ward splits {0,1,10,11} into its two pairs") {
    const auto r = ward_agglomerative(column({0, 1, 10, 11}), 2);
    CHECK(r.labels[0] == r.labels[1]);
    CHECK(r.labels[2] == r.labels[3]);
    CHECK(r.labels[0] != r.labels[2]);
    REQUIRE(r.dendrogram.size() == 2);
    CHECK(r.dendrogram[0].cost == doctest::Approx(0.5));
    CHECK(r.dendrogram[1].cost == doctest::Approx(0.5));
    CHECK(r.wcss == doctest::Approx(1.0));
}

TEST_CASE("ward with k = rows performs no merges") {
    const auto r = ward_agglomerative(column({3, 1, 4}), 3);
    CHECK(r.dendrogram.empty());
    CHECK(r.wcss == 0.0);
}

TEST_CASE("a duplicated point is merged first at zero cost") {
    const auto r = ward_agglomerative(column({0, 4, 9, 4, 15}), 1);
    REQUIRE_FALSE(r.dendrogram.empty());
    CHECK(r.dendrogram[0].cost == 0.0);
    CHECK(std::set<int>{r.dendrogram[0].left, r.dendrogram[0].right} == std::set<int>{1, 3});
}

TEST_CASE("ward matches brute-force agglomeration and costs never decrease") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> v(0, 40);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 3 + trial % 6;
        std::vector<double> x;
        Eigen::MatrixXd d(n, 1);
        for (int i = 0; i < n; ++i) {
            x.push_back(v(rng) * 0.25);
            d(i, 0) = x.back();
        }
        const auto r = ward_agglomerative(d, 1);
        CHECK(merge_sets(r.dendrogram, n) == oracle::brute_ward_1d(x, 1));
        for (std::size_t s = 1; s < r.dendrogram.size(); ++s) {
            CHECK(r.dendrogram[s].cost >= r.dendrogram[s - 1].cost - 1e-12);
        }
        CHECK(r.warnings.empty());
    }
}

TEST_CASE("silhouette of two far duplicate pairs is 1") {
    const std::vector<int> labels{0, 0, 1, 1};
    const auto s = silhouette(column({0, 0, 1000, 1000}), labels);
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("silhouette on {0,1,9,10} matches hand values") {
    const std::vector<int> labels{0, 0, 1, 1};
    const auto s = silhouette(column({0, 1, 9, 10}), labels);
    // zeta = 1 everywhere; mu = 9.5, 8.5, 8.5, 9.5
    CHECK(s.per_point[0] == doctest::Approx(1 - 1 / 9.5));
    CHECK(s.per_point[1] == doctest::Approx(1 - 1 / 8.5));
    CHECK(s.per_point[2] == doctest::Approx(1 - 1 / 8.5));
    CHECK(s.per_point[3] == doctest::Approx(1 - 1 / 9.5));
    CHECK(s.mean == doctest::Approx((2 * (1 - 1 / 9.5) + 2 * (1 - 1 / 8.5)) / 4));
}

TEST_CASE("silhouette: singleton scores 0, single cluster is an error, values in [-1,1]") {
    const std::vector<int> labels{0, 0, 1};
    const auto s = silhouette(column({0, 1, 5}), labels);
    CHECK(s.per_point[2] == 0.0);
    const std::vector<int> one{0, 0, 0};
    CHECK_THROWS_AS(silhouette(column({0, 1, 5}), one), std::invalid_argument);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> lab(0, 2);
    const Eigen::MatrixXd d = Eigen::MatrixXd::Random(20, 3);
    std::vector<int> random_labels(20);
    for (int i = 0; i < 20; ++i) random_labels[static_cast<std::size_t>(i)] = i < 3 ? i : lab(rng);
    for (double v : silhouette(d, random_labels).per_point) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("elbow with k_max = 1 has knee 1") {
    const auto c = elbow_scan(Eigen::MatrixXd::Random(5, 2), 1, 1);
    CHECK(c.points.size() == 1);
    CHECK(c.knee == 1);
}

TEST_CASE("three blobs give knee 3 by the chord rule") {
    const Eigen::MatrixXd d = blobs(30, {{0, 0}, {6, 0}, {3, 5}}, 0.4, 21);
    const auto c = elbow_scan(d, 8, 4);
    REQUIRE(c.points.size() == 8);
    CHECK(c.monotone);
    for (std::size_t i = 1; i < c.points.size(); ++i) CHECK(c.points[i].wcss <= c.points[i - 1].wcss);
    // hand evaluation of the chord distance
    const auto& p = c.points;
    const double x0 = p.front().k, y0 = p.front().wcss, x1 = p.back().k, y1 = p.back().wcss;
    int best = 1;
    double best_d = -1;
    for (const auto& q : p) {
        const double dist = std::abs((y1 - y0) * q.k - (x1 - x0) * q.wcss + x1 * y0 - y1 * x0) /
                            std::hypot(y1 - y0, x1 - x0);
        if (dist > best_d + 1e-12) {
            best_d = dist;
            best = q.k;
        }
    }
    CHECK(best == 3);
    CHECK(c.knee == 3);
}

TEST_CASE("knee_by_chord on a hand curve") {
    // chord from (1,10) to (5,0); distances ∝ |10k + 4y - 50|... point (2,2) is farthest
    const std::vector<ElbowPoint> pts{{1, 10}, {2, 2}, {3, 1.5}, {4, 1}, {5, 0}};
    CHECK(knee_by_chord(pts) == 2);
    const std::vector<ElbowPoint> flat{{1, 4}, {2, 3}, {3, 2}};
    CHECK(knee_by_chord(flat) == 1);
}

TEST_CASE("cluster_means rejects empty clusters") {
    const std::vector<int> labels{0, 0, 2};
    CHECK_THROWS(cluster_means(column({1, 2, 3}), labels, 3));
}
