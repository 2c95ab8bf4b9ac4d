#pragma once

#include <cmath>
#include <vector>

#include "racelab/core_model.hpp"

namespace racelab::fixtures {

/// Two categories "a" = {o1, o2} and "b" = {o3, o4}; feature f1 fires at
/// `rate` for category a, f2 for category b.
inline TaskSpec two_by_two(double rate = 10.0) {
    return TaskSpec({"o1", "o2", "o3", "o4"}, {{"a", {"o1", "o2"}}, {"b", {"o3", "o4"}}}, {"f1", "f2"},
                    Matrix::from_rows({{rate, rate, 0, 0}, {0, 0, rate, rate}}));
}

/// |mean - expected| within k standard errors of a sample of size n with
/// per-draw variance var.
inline bool within_clt(double mean, double expected, double var, std::size_t n, double k = 3.0) {
    return std::abs(mean - expected) <= k * std::sqrt(var / static_cast<double>(n));
}

}  // namespace racelab::fixtures
