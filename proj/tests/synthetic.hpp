#pragma once

// Two well-separated groups in columns 0 and 1; columns 2 and 3 are
// continuous noise with identical group means, orthogonal (within each group)
// to every other column. Everything is min-max scaled to [0,1].

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace synthetic {

struct Labeled {
    Eigen::MatrixXd data;
    std::vector<int> labels;
};

inline Labeled informative_plus_noise(int per_group, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> small(0.0, 0.05);
    std::uniform_real_distribution<double> wide(0.0, 1.0);
    const int n = 2 * per_group;
    Labeled out;
    out.data.resize(n, 4);
    for (int r = 0; r < n; ++r) {
        const int g = r < per_group ? 0 : 1;
        out.labels.push_back(g);
        const double centre = g == 0 ? 0.15 : 0.85;
        out.data(r, 0) = centre + small(rng);
        out.data(r, 1) = centre + small(rng);
        out.data(r, 2) = wide(rng);
        out.data(r, 3) = wide(rng);
    }
    // group-centred copy; project each noise column off the span of the earlier ones
    Eigen::MatrixXd centred = out.data;
    for (int g = 0; g < 2; ++g) {
        const auto rows = Eigen::seqN(g * per_group, per_group);
        const Eigen::RowVectorXd mean = out.data(rows, Eigen::all).colwise().mean();
        centred(rows, Eigen::all).rowwise() -= mean;
    }
    for (int c = 2; c < 4; ++c) {
        const Eigen::MatrixXd span = centred.leftCols(c);
        Eigen::VectorXd v = centred.col(c);
        v -= span * span.colPivHouseholderQr().solve(v);
        centred.col(c) = v;
        out.data.col(c) = v.array() + 0.5;
    }
    for (int c = 0; c < 4; ++c) {
        const double lo = out.data.col(c).minCoeff();
        const double hi = out.data.col(c).maxCoeff();
        out.data.col(c) = (out.data.col(c).array() - lo) / (hi - lo);
    }
    return out;
}

}  // namespace synthetic
