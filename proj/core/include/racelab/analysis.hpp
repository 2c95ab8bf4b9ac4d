#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "racelab/core_model.hpp"
#include "racelab/stats.hpp"

namespace racelab {

using Point2 = std::array<double, 2>;

struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> labels;
    std::vector<Point2> centers;
    double wcss = 0.0;
    std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` runs by
/// within-cluster sum of squares. An emptied cluster keeps its previous
/// center. Throws std::logic_error if an iteration ever increases the WCSS.
Clustering kmeans(const std::vector<Point2>& points, std::size_t k, Seed seed, std::size_t restarts = 10);

struct Silhouette {
    double mean = 0.0;
    std::vector<double> per_point;
};

/// (b - a) / max(a, b) per point; members of singleton clusters score 0.
Silhouette silhouette(const std::vector<Point2>& points, const std::vector<std::size_t>& labels, std::size_t k);

struct KSelection {
    std::vector<std::size_t> k_values;
    std::vector<double> scores;
    std::size_t best_k = 0;
};

/// Mean silhouette for each k in [k_min, k_max]; best_k maximizes it.
KSelection select_k(const std::vector<Point2>& points, std::size_t k_min, std::size_t k_max, Seed seed,
                    std::size_t restarts = 10);

/// Rescales both coordinates to zero mean and unit variance.
std::vector<Point2> standardized(const std::vector<Point2>& points);

struct ChiSquareResult {
    double statistic;
    double dof;
    double p_value;
};

/// Pearson test of independence on an r x c table of counts. `yates`
/// applies the continuity correction to 2 x 2 tables only. Throws
/// std::domain_error on a zero row or column total.
ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& table, bool yates = false);

/// Counts of each (group, cluster) pair; rows follow `groups` order.
std::vector<std::vector<double>> contingency(const std::vector<std::string>& group_of_point,
                                             const std::vector<std::size_t>& labels, std::size_t k,
                                             const std::vector<std::string>& groups);

/// OLS of mean answer time on theta. Needs three or more points and
/// nonconstant theta.
stats::LinearFit rt_vs_theta(const std::vector<double>& theta, const std::vector<double>& mean_rt);

}  // namespace racelab
