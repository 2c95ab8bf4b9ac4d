#pragma once

#include <cstddef>
#include <vector>

#include "racelab/core_model.hpp"

namespace racelab {

/// Synaptic weights w^{i->j} (indexed feature, category) with the
/// cumulative gains they are the column-wise softmax of.
struct WeightState {
    Matrix weights;
    Matrix cumulative_gains;
    double eta = 0.0;
    std::size_t presented = 0;

    /// Zero cumulative gains, hence uniform 1/|I| weights.
    static WeightState uniform(std::size_t features, std::size_t categories, double eta);
    /// Fixed weights with no learning history (eta = 0). Each column must
    /// lie on the simplex.
    static WeightState fixed(Matrix weights);

    std::size_t feature_count() const { return weights.rows(); }
    std::size_t category_count() const { return weights.cols(); }
    std::vector<double> column(std::size_t category) const { return weights.column(category); }
};

}  // namespace racelab
