#include "appt/feature_select.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "appt/clustering.hpp"
#include "appt/parallel.hpp"

namespace appt::features {

namespace {

double binary_entropy_term(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return s * std::log(s) + (1.0 - s) * std::log1p(-s);
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& data, std::span<const std::size_t> columns) {
    Eigen::MatrixXd sub(data.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        sub.col(static_cast<Eigen::Index>(j)) = data.col(static_cast<Eigen::Index>(columns[j]));
    }
    return sub;
}

}  // namespace

double similarity(double distance, double mean_distance) {
    const double alpha = std::numbers::ln2 / mean_distance;
    return std::exp(-alpha * distance);
}

double similarity_entropy(const Eigen::MatrixXd& data, std::span<const Eigen::Index> columns,
                          bool* degenerate) {
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = data.col(columns[j]);

    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((sub.row(i) - sub.row(j)).norm());
    }
    const double mean = dist.empty() ? 0.0 : std::accumulate(dist.begin(), dist.end(), 0.0) / dist.size();
    if (degenerate) *degenerate = !(mean > 0.0);
    if (!(mean > 0.0)) return 0.0;

    double sum = 0.0;
    for (double d : dist) sum += binary_entropy_term(similarity(d, mean));
    // each unordered pair appears twice in the ordered double sum
    return -2.0 * sum;
}

EntropyRanking entropy_rank(const Eigen::MatrixXd& data) {
    if (data.rows() < 2 || data.cols() < 2) {
        throw std::invalid_argument("entropy_rank needs at least 2 rows and 2 features");
    }
    const Eigen::Index q = data.cols();
    std::vector<Eigen::Index> all(static_cast<std::size_t>(q));
    std::iota(all.begin(), all.end(), Eigen::Index{0});

    EntropyRanking ranking;
    ranking.entropy_all = similarity_entropy(data, all);
    ranking.per_feature.resize(static_cast<std::size_t>(q));
    parallel_for(static_cast<std::size_t>(q), [&](std::size_t t) {
        std::vector<Eigen::Index> kept;
        for (Eigen::Index c = 0; c < q; ++c) {
            if (c != static_cast<Eigen::Index>(t)) kept.push_back(c);
        }
        auto& f = ranking.per_feature[t];
        f.feature = t;
        f.entropy_without = similarity_entropy(data, kept, &f.degenerate);
        f.importance = f.entropy_without - ranking.entropy_all;
    });

    ranking.order.resize(static_cast<std::size_t>(q));
    std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
    std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](std::size_t a, std::size_t b) {
        return ranking.per_feature[a].importance > ranking.per_feature[b].importance;
    });
    return ranking;
}

ScatterStats scatter_criterion(const Eigen::MatrixXd& data, std::span<const int> labels, double ridge) {
    if (data.cols() == 0) throw std::invalid_argument("scatter_criterion: empty feature subset");
    if (!data.allFinite()) throw std::invalid_argument("scatter_criterion: non-finite data");
    if (labels.size() != static_cast<std::size_t>(data.rows()) || labels.empty()) {
        throw std::invalid_argument("scatter_criterion: label count does not match row count");
    }
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;

    ScatterStats stats;
    stats.cluster_means = clustering::cluster_means(data, labels, k);
    stats.total_mean = data.colwise().mean().transpose();
    const Eigen::Index d = data.cols();
    stats.within = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Eigen::VectorXd dev =
            (data.row(static_cast<Eigen::Index>(i)) - stats.cluster_means.row(labels[i])).transpose();
        stats.within.noalias() += dev * dev.transpose();
    }
    stats.between = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd dev = stats.cluster_means.row(j).transpose() - stats.total_mean;
        stats.between.noalias() += dev * dev.transpose();
    }
    const Eigen::MatrixXd regularized = stats.within + ridge * Eigen::MatrixXd::Identity(d, d);
    stats.criterion = regularized.ldlt().solve(stats.between).trace();
    return stats;
}

double subset_criterion(const Eigen::MatrixXd& data, std::span<const std::size_t> columns, int k,
                        std::uint64_t seed, int restarts) {
    const Eigen::MatrixXd sub = take_columns(data, columns);
    clustering::KMeansOptions opt;
    opt.restarts = restarts;
    const auto clusters = clustering::kmeans(sub, k, seed, opt);
    return scatter_criterion(sub, clusters.labels).criterion;
}

SubsetSelection wrapper_select(const Eigen::MatrixXd& data, const EntropyRanking& ranking, int k,
                               std::uint64_t seed, const WrapperOptions& options) {
    if (ranking.order.size() != static_cast<std::size_t>(data.cols())) {
        throw std::invalid_argument("wrapper_select: ranking does not cover every column");
    }
    SubsetSelection selection;
    std::vector<std::size_t> candidate;
    double current = 0.0;
    for (std::size_t step = 0; step < ranking.order.size(); ++step) {
        candidate.push_back(ranking.order[step]);
        const double score = subset_criterion(data, candidate, k, seed, options.restarts);
        selection.stopped_at = static_cast<int>(step + 1);
        if (!selection.selected.empty() && score - current < options.tolerance) break;
        selection.selected = candidate;
        selection.trace_curve.push_back(score);
        current = score;
    }
    return selection;
}

}  // namespace appt::features
