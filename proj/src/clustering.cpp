#include "appt/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "appt/parallel.hpp"
#include "appt/rng.hpp"

namespace appt::clustering {

namespace {

void check_k(const Eigen::MatrixXd& data, int k) {
    if (k <= 0) throw std::invalid_argument("cluster count must be positive");
    if (k > data.rows()) {
        throw std::invalid_argument("cluster count " + std::to_string(k) + " exceeds " +
                                    std::to_string(data.rows()) + " rows");
    }
}

struct RunResult {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double wcss = 0.0;
    int iterations = 0;
};

// Distance-weighted seeding: first centre uniform, then each next centre
// drawn with probability proportional to its squared distance to the
// nearest centre chosen so far.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& data, int k, std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd centroids(k, data.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<Eigen::Index> chosen{pick(rng)};
    centroids.row(0) = data.row(chosen[0]);
    Eigen::VectorXd nearest = (data.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = nearest.sum();
        Eigen::Index next = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            next = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= nearest(i);
                if (target < 0.0 && nearest(i) > 0.0) {
                    next = i;
                    break;
                }
            }
            while (nearest(next) == 0.0) --next;  // guard against landing on a chosen point
        } else {
            // all remaining points coincide with a centre; take an unused row
            for (Eigen::Index i = 0; i < n; ++i) {
                if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
                    next = i;
                    break;
                }
            }
        }
        chosen.push_back(next);
        centroids.row(c) = data.row(next);
        nearest = nearest.cwiseMin((data.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x, double& dist) {
    int best = 0;
    dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - x).squaredNorm();
        if (d < dist) {
            dist = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

RunResult lloyd(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const KMeansOptions& opt) {
    std::mt19937_64 rng(seed);
    const Eigen::Index n = data.rows();
    RunResult run;
    run.centroids = seed_centroids(data, k, rng);
    run.labels.assign(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd dist(n);
    double previous = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
        run.iterations = iter;
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = 0.0;
            const int c = nearest_centroid(run.centroids, data.row(i), d);
            run.labels[static_cast<std::size_t>(i)] = c;
            dist(i) = d;
            ++counts[static_cast<std::size_t>(c)];
        }
        // Reseed each empty cluster with the point farthest from its centroid,
        // taken from a cluster that can spare it.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])] < 2) continue;
                if (far < 0 || dist(i) > dist(far)) far = i;
            }
            --counts[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(far)])];
            run.labels[static_cast<std::size_t>(far)] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            dist(far) = 0.0;
        }

        const Eigen::MatrixXd updated = cluster_means(data, run.labels, k);
        const double shift = (updated - run.centroids).rowwise().norm().maxCoeff();
        run.centroids = updated;
        run.wcss = within_cluster_ss(data, run.labels, k);
        // Lloyd steps never increase the objective; allow only rounding noise.
        if (run.wcss > previous * (1.0 + 1e-12) + 1e-15) {
            throw std::logic_error("kmeans: objective increased between iterations");
        }
        previous = run.wcss;
        if (shift <= opt.tolerance) break;
    }
    return run;
}

}  // namespace

std::string_view to_string(Method method) {
    return method == Method::kmeans ? "kmeans" : "ward";
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& data, std::span<const int> labels, int k) {
    if (labels.size() != static_cast<std::size_t>(data.rows())) {
        throw std::invalid_argument("label count does not match row count");
    }
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || c >= k) throw std::invalid_argument("label out of range");
        means.row(c) += data.row(static_cast<Eigen::Index>(i));
        ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) throw std::invalid_argument("empty cluster");
        means.row(c) /= counts[static_cast<std::size_t>(c)];
    }
    return means;
}

double within_cluster_ss(const Eigen::MatrixXd& data, std::span<const int> labels, int k) {
    const Eigen::MatrixXd means = cluster_means(data, labels, k);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += (data.row(static_cast<Eigen::Index>(i)) - means.row(labels[i])).squaredNorm();
    }
    return total;
}

ClusteringResult kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const KMeansOptions& options) {
    check_k(data, k);
    if (options.restarts <= 0) throw std::invalid_argument("restarts must be positive");
    std::vector<RunResult> runs(static_cast<std::size_t>(options.restarts));
    const auto run_one = [&](std::size_t r) { runs[r] = lloyd(data, k, derive_seed(seed, r), options); };
    // Thread start-up dominates on tiny inputs.
    if (data.rows() * data.cols() * options.restarts >= 20000) {
        parallel_for(runs.size(), run_one);
    } else {
        for (std::size_t r = 0; r < runs.size(); ++r) run_one(r);
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].wcss < runs[best].wcss) best = r;
    }
    ClusteringResult result;
    result.labels = std::move(runs[best].labels);
    result.centroids = std::move(runs[best].centroids);
    result.wcss = runs[best].wcss;
    result.k = k;
    result.method = Method::kmeans;
    result.iterations = runs[best].iterations;
    result.best_restart = static_cast<int>(best);
    return result;
}

ClusteringResult ward_agglomerative(const Eigen::MatrixXd& data, int k) {
    check_k(data, k);
    const int n = static_cast<int>(data.rows());

    // Lance-Williams update on the Ward dissimilarity
    //   D(A,B) = |A||B| / (|A|+|B|) * ||mean_A - mean_B||^2,
    // which is exactly the increase in error sum of squares when A and B merge.
    Eigen::MatrixXd dis(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) dis(i, j) = 0.5 * (data.row(i) - data.row(j)).squaredNorm();
    }
    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<int> id(static_cast<std::size_t>(n));
    std::vector<int> min_member(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), 0);
    std::iota(min_member.begin(), min_member.end(), 0);
    std::vector<bool> alive(static_cast<std::size_t>(n), true);
    std::vector<int> owner(static_cast<std::size_t>(n));  // point -> slot
    std::iota(owner.begin(), owner.end(), 0);

    ClusteringResult result;
    result.method = Method::ward;
    result.k = k;

    for (int step = 0; step < n - k; ++step) {
        int bi = -1;
        int bj = -1;
        for (int i = 0; i < n; ++i) {
            if (!alive[static_cast<std::size_t>(i)]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (!alive[static_cast<std::size_t>(j)]) continue;
                if (bi < 0) {
                    bi = i;
                    bj = j;
                    continue;
                }
                const double d = dis(i, j);
                const double best = dis(bi, bj);
                const double tol = 1e-12 * std::max(std::abs(d), std::abs(best));
                if (d < best - tol) {
                    bi = i;
                    bj = j;
                } else if (d <= best + tol) {
                    auto key = [&](int a, int b) {
                        const int ma = min_member[static_cast<std::size_t>(a)];
                        const int mb = min_member[static_cast<std::size_t>(b)];
                        return std::pair{std::min(ma, mb), std::max(ma, mb)};
                    };
                    if (key(i, j) < key(bi, bj)) {
                        bi = i;
                        bj = j;
                    }
                }
            }
        }

        const double ni = size[static_cast<std::size_t>(bi)];
        const double nj = size[static_cast<std::size_t>(bj)];
        Merge merge;
        merge.left = std::min(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
        merge.right = std::max(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
        merge.cost = dis(bi, bj);
        merge.size = static_cast<int>(ni + nj);
        if (!result.dendrogram.empty() && merge.cost < result.dendrogram.back().cost * (1.0 - 1e-9)) {
            result.warnings.push_back("ward merge cost decreased at step " + std::to_string(step));
        }
        result.dendrogram.push_back(merge);

        for (int m = 0; m < n; ++m) {
            if (!alive[static_cast<std::size_t>(m)] || m == bi || m == bj) continue;
            const double nm = size[static_cast<std::size_t>(m)];
            const double updated =
                ((ni + nm) * dis(bi, m) + (nj + nm) * dis(bj, m) - nm * dis(bi, bj)) / (ni + nj + nm);
            dis(bi, m) = updated;
            dis(m, bi) = updated;
        }
        size[static_cast<std::size_t>(bi)] += size[static_cast<std::size_t>(bj)];
        min_member[static_cast<std::size_t>(bi)] =
            std::min(min_member[static_cast<std::size_t>(bi)], min_member[static_cast<std::size_t>(bj)]);
        id[static_cast<std::size_t>(bi)] = n + step;
        alive[static_cast<std::size_t>(bj)] = false;
        for (auto& o : owner) {
            if (o == bj) o = bi;
        }
    }

    // Label clusters by first appearance in row order.
    std::vector<int> label_of_slot(static_cast<std::size_t>(n), -1);
    int next = 0;
    result.labels.resize(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
        int& l = label_of_slot[static_cast<std::size_t>(owner[static_cast<std::size_t>(p)])];
        if (l < 0) l = next++;
        result.labels[static_cast<std::size_t>(p)] = l;
    }
    result.centroids = cluster_means(data, result.labels, k);
    result.wcss = within_cluster_ss(data, result.labels, k);
    return result;
}

SilhouetteReport silhouette(const Eigen::MatrixXd& data, std::span<const int> labels) {
    if (labels.size() != static_cast<std::size_t>(data.rows())) {
        throw std::invalid_argument("label count does not match row count");
    }
    if (labels.empty()) throw std::invalid_argument("silhouette of an empty data set");
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    if (*std::min_element(labels.begin(), labels.end()) < 0) throw std::invalid_argument("negative label");
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    if (k < 2) throw std::invalid_argument("silhouette needs at least two clusters");
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
        throw std::invalid_argument("silhouette: empty cluster");
    }

    const std::size_t n = labels.size();
    SilhouetteReport report;
    report.per_point.resize(n);
    std::vector<double> sums(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(labels[j])] +=
                (data.row(static_cast<Eigen::Index>(i)) - data.row(static_cast<Eigen::Index>(j))).norm();
        }
        const auto own = static_cast<std::size_t>(labels[i]);
        if (counts[own] == 1) {
            report.per_point[i] = 0.0;
            continue;
        }
        const double within = sums[own] / (counts[own] - 1);
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sums.size(); ++c) {
            if (c != own) nearest = std::min(nearest, sums[c] / counts[c]);
        }
        const double denom = std::max(within, nearest);
        report.per_point[i] = denom > 0.0 ? (nearest - within) / denom : 0.0;
    }
    report.mean = std::accumulate(report.per_point.begin(), report.per_point.end(), 0.0) /
                  static_cast<double>(n);
    return report;
}

int knee_by_chord(std::span<const ElbowPoint> points) {
    if (points.empty()) throw std::invalid_argument("knee of an empty curve");
    if (points.size() < 3) return points.front().k;
    const auto& a = points.front();
    const auto& b = points.back();
    const double dx = b.k - a.k;
    const double dy = b.wcss - a.wcss;
    const double len = std::hypot(dx, dy);
    int knee = a.k;
    double best = -1.0;
    for (const auto& p : points) {
        const double d = len > 0.0 ? std::abs(dx * (p.wcss - a.wcss) - dy * (p.k - a.k)) / len : 0.0;
        if (d > best * (1.0 + 1e-12) + 1e-300) {
            best = d;
            knee = p.k;
        }
    }
    return knee;
}

ElbowCurve elbow_scan(const Eigen::MatrixXd& data, int k_max, std::uint64_t seed, int restarts) {
    if (k_max < 1 || k_max > data.rows()) {
        throw std::invalid_argument("k_max must lie in [1, rows]");
    }
    ElbowCurve curve;
    for (int k = 1; k <= k_max; ++k) {
        KMeansOptions opt;
        opt.restarts = restarts;
        double w = kmeans(data, k, derive_seed(seed, static_cast<std::uint64_t>(k)), opt).wcss;
        if (!curve.points.empty() && w > curve.points.back().wcss) {
            curve.rerun.push_back(k);
            opt.restarts = restarts * 4;
            w = std::min(w, kmeans(data, k, derive_seed(seed, 1000u + static_cast<std::uint64_t>(k)), opt).wcss);
            if (w > curve.points.back().wcss * (1.0 + 1e-12)) curve.monotone = false;
        }
        curve.points.push_back({k, w});
    }
    curve.knee = knee_by_chord(curve.points);
    return curve;
}

}  // namespace appt::clustering
