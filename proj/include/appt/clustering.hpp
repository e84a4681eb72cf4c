#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace appt::clustering {

enum class Method { kmeans, ward };

std::string_view to_string(Method method);

// One agglomeration step. Clusters 0..n-1 are the input points; the cluster
// created by step s gets id n + s.
struct Merge {
    int left = 0;
    int right = 0;
    double cost = 0.0;  // increase in total within-cluster sum of squares
    int size = 0;       // points in the merged cluster
};

struct ClusteringResult {
    std::vector<int> labels;     // in [0, k)
    Eigen::MatrixXd centroids;   // k x cols, cluster means
    double wcss = 0.0;           // sum of squared Euclidean distances to centroids
    int k = 0;
    Method method = Method::kmeans;
    int iterations = 0;          // Lloyd iterations of the winning restart
    int best_restart = 0;
    std::vector<Merge> dendrogram;  // Ward only
    std::vector<std::string> warnings;
};

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
    double tolerance = 1e-9;  // stop once no centroid moves further than this
};

// Lloyd's algorithm with distance-weighted seeding, best of `restarts`
// independent runs (ties go to the lowest restart index). Empty clusters are
// reseeded with the point farthest from its centroid; assignment ties go to
// the lowest centroid index. Throws std::invalid_argument unless 1 <= k <= rows.
ClusteringResult kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

// Ward agglomeration down to k clusters. Equal merge costs (relative 1e-12)
// are resolved in favour of the pair whose smallest member indices are
// lexicographically smallest.
ClusteringResult ward_agglomerative(const Eigen::MatrixXd& data, int k);

// Cluster means for the given labels; throws if a label is out of range or a
// cluster is empty.
Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& data, std::span<const int> labels, int k);

// Total within-cluster sum of squares, recomputed from scratch.
double within_cluster_ss(const Eigen::MatrixXd& data, std::span<const int> labels, int k);

struct SilhouetteReport {
    std::vector<double> per_point;
    double mean = 0.0;
};

// Euclidean silhouette. Points in singleton clusters score 0. Throws
// std::invalid_argument for fewer than two clusters or an empty cluster.
SilhouetteReport silhouette(const Eigen::MatrixXd& data, std::span<const int> labels);

struct ElbowPoint {
    int k = 0;
    double wcss = 0.0;
};

struct ElbowCurve {
    std::vector<ElbowPoint> points;
    int knee = 1;
    // False if some k still had a larger WCSS than k-1 after re-running it
    // with more restarts.
    bool monotone = true;
    std::vector<int> rerun;  // k values that were re-run
};

// Smallest k with maximal perpendicular distance to the chord joining the
// first and last points of the curve.
int knee_by_chord(std::span<const ElbowPoint> points);

ElbowCurve elbow_scan(const Eigen::MatrixXd& data, int k_max, std::uint64_t seed, int restarts = 10);

}  // namespace appt::clustering
