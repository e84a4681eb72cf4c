#pragma once

// Unsupervised feature ranking by similarity entropy and forward wrapper
// selection scored by the invariant criterion tr(P_W^-1 P_B).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace appt::features {

struct FeatureImportance {
    std::size_t feature = 0;       // column position in the input matrix
    double entropy_without = 0.0;  // entropy with this column removed
    double importance = 0.0;       // entropy_without - entropy_all
    bool degenerate = false;       // all remaining pairwise distances were zero
};

struct EntropyRanking {
    double entropy_all = 0.0;
    std::vector<FeatureImportance> per_feature;  // in column order
    std::vector<std::size_t> order;              // most important first
};

// Pairwise similarity S = exp(-alpha * dist) with alpha = ln 2 / mean distance,
// so S = 1/2 at the mean distance.
double similarity(double distance, double mean_distance);

// Similarity entropy over all ordered pairs i != j of rows, using only the
// listed columns. Natural log, with 0 log 0 = 0. Sets `degenerate` and returns
// 0 when every pairwise distance is zero.
double similarity_entropy(const Eigen::MatrixXd& data, std::span<const Eigen::Index> columns,
                          bool* degenerate = nullptr);

// Requires at least 2 rows and 2 columns. Ties in importance keep column order.
EntropyRanking entropy_rank(const Eigen::MatrixXd& data);

struct ScatterStats {
    Eigen::MatrixXd within;         // P_W
    Eigen::MatrixXd between;        // P_B, unweighted sum over clusters
    Eigen::VectorXd total_mean;     // m
    Eigen::MatrixXd cluster_means;  // m_j as rows
    double criterion = 0.0;         // tr((P_W + ridge I)^-1 P_B)
};

ScatterStats scatter_criterion(const Eigen::MatrixXd& data, std::span<const int> labels,
                               double ridge = 1e-8);

struct WrapperOptions {
    double tolerance = 1e-6;  // minimum criterion gain to keep adding features
    int restarts = 10;        // K-means restarts per candidate subset
};

struct SubsetSelection {
    std::vector<std::size_t> selected;  // prefix of ranking.order
    std::vector<double> trace_curve;    // criterion after each kept addition
    int stopped_at = 0;                 // number of additions evaluated
};

// Forward search along the entropy order: each candidate prefix is
// re-clustered with K-means(k) and scored. Stops at the first addition whose
// gain is below the tolerance and returns the prefix before it.
SubsetSelection wrapper_select(const Eigen::MatrixXd& data, const EntropyRanking& ranking, int k,
                               std::uint64_t seed, const WrapperOptions& options = {});

// Criterion of K-means(k) on the given columns; the scoring step of the wrapper.
double subset_criterion(const Eigen::MatrixXd& data, std::span<const std::size_t> columns, int k,
                        std::uint64_t seed, int restarts);

}  // namespace appt::features
