#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racelab {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double> column(std::size_t c) const;

    std::span<const double> data() const { return data_; }

    /// Largest entry; zero for an empty matrix.
    double max_entry() const;
    /// Smallest strictly positive entry, if any.
    std::optional<double> min_positive_entry() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Category {
    std::string name;
    std::vector<std::string> members;
};

/// The categorization universe: natures partitioned into categories, a
/// feature set, and the input rate matrix indexed (feature, nature).
///
/// Construction enforces the partition and the rate-matrix invariants and
/// throws std::domain_error on violation. Immutable afterwards.
class TaskSpec {
public:
    TaskSpec(std::vector<std::string> natures,
             std::vector<Category> categories,
             std::vector<std::string> features,
             Matrix input_rates);

    std::size_t nature_count() const { return natures_.size(); }
    std::size_t category_count() const { return categories_.size(); }
    std::size_t feature_count() const { return features_.size(); }

    const std::vector<std::string>& natures() const { return natures_; }
    const std::vector<Category>& categories() const { return categories_; }
    const std::vector<std::string>& features() const { return features_; }
    const Matrix& input_rates() const { return input_rates_; }

    std::size_t nature_index(std::string_view name) const;
    std::size_t category_index(std::string_view name) const;
    std::size_t category_of(std::size_t nature) const { return category_of_[nature]; }

    /// Nature indices belonging to a category, in nature order.
    const std::vector<std::size_t>& members_of(std::size_t category) const {
        return members_[category];
    }

    /// Input rates gamma^I_o of one nature, one entry per feature.
    std::vector<double> rates_for(std::size_t nature) const;

    /// |O| / n^j per category: the class-balance ratio M/M^j under
    /// balanced presentation.
    std::vector<double> balance_ratios() const;

    /// Same features and rates restricted to a subset of natures. Categories
    /// left empty by the restriction are kept (and must be nonempty for
    /// operations that need them).
    TaskSpec restricted_to(std::span<const std::size_t> natures) const;

private:
    std::vector<std::string> natures_;
    std::vector<Category> categories_;
    std::vector<std::string> features_;
    Matrix input_rates_;
    std::vector<std::size_t> category_of_;
    std::vector<std::vector<std::size_t>> members_;
};

enum class KernelShape { rectangular };

/// Synaptic kernel g. Only the rectangular shape g = height * 1_[0, support]
/// ships; it keeps the conditional intensity piecewise constant.
class Kernel {
public:
    static Kernel rectangular(double support_s, double height);
    /// Rectangular kernel with the given support and L1 norm.
    static Kernel rectangular_with_norm(double support_s, double l1_norm);
    /// 20 ms support, unit L1 norm.
    static Kernel default_kernel() { return rectangular(0.02, 50.0); }

    KernelShape shape() const { return shape_; }
    double support() const { return support_; }
    double height() const { return height_; }
    double l1_norm() const { return support_ * height_; }

    /// g(t); zero outside [0, support).
    double value(double t) const;

    /// Same norm, support shrunk to min(support, new_support).
    Kernel shrunk_to(double new_support) const;

    bool operator==(const Kernel&) const = default;

private:
    Kernel(KernelShape shape, double support, double height)
        : shape_(shape), support_(support), height_(height) {}

    KernelShape shape_;
    double support_;
    double height_;
};

/// Double primitive of the kernel, G(t) = int_0^t int_0^s g(s-u) du ds.
double kernel_cumulative(const Kernel& kernel, double t);

/// Race-to-threshold parameters. `t_min` is only used by the Hawkes model,
/// `dt` only by the diffusion race.
struct RaceParams {
    double theta = 1.0;
    double horizon = 5.0;
    std::optional<double> t_min;
    double dt = 1e-3;

    /// Throws std::domain_error when an invariant does not hold.
    void validate() const;
};

/// Simulation seed. Identical seed and parameters give identical output.
struct Seed {
    std::uint64_t value = 0;

    /// Deterministic child seed for a sub-stream (trial, replication, ...).
    Seed derive(std::uint64_t index) const;

    bool operator==(const Seed&) const = default;
};

}  // namespace racelab
