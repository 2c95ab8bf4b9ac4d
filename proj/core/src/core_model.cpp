#include "racelab/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace racelab {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw std::domain_error("ragged matrix rows");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

double Matrix::max_entry() const {
    if (data_.empty()) return 0.0;
    return *std::max_element(data_.begin(), data_.end());
}

std::optional<double> Matrix::min_positive_entry() const {
    std::optional<double> best;
    for (double v : data_) {
        if (v > 0.0 && (!best || v < *best)) best = v;
    }
    return best;
}

TaskSpec::TaskSpec(std::vector<std::string> natures,
                   std::vector<Category> categories,
                   std::vector<std::string> features,
                   Matrix input_rates)
    : natures_(std::move(natures)),
      categories_(std::move(categories)),
      features_(std::move(features)),
      input_rates_(std::move(input_rates)) {
    if (natures_.empty()) throw std::domain_error("task has no natures");
    if (categories_.empty()) throw std::domain_error("task has no categories");
    if (std::set<std::string>(natures_.begin(), natures_.end()).size() != natures_.size())
        throw std::domain_error("duplicate nature identifier");
    if (std::set<std::string>(features_.begin(), features_.end()).size() != features_.size())
        throw std::domain_error("duplicate feature identifier");
    if (input_rates_.rows() != features_.size() || input_rates_.cols() != natures_.size())
        throw std::domain_error("input rate matrix must be |features| x |natures|");
    for (double v : input_rates_.data()) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::domain_error("input rates must be finite and >= 0");
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t o = 0; o < natures_.size(); ++o) index.emplace(natures_[o], o);

    constexpr auto unassigned = std::numeric_limits<std::size_t>::max();
    category_of_.assign(natures_.size(), unassigned);
    members_.resize(categories_.size());
    std::set<std::string> names;
    for (std::size_t j = 0; j < categories_.size(); ++j) {
        if (!names.insert(categories_[j].name).second)
            throw std::domain_error("duplicate category name: " + categories_[j].name);
        for (const auto& m : categories_[j].members) {
            auto it = index.find(m);
            if (it == index.end())
                throw std::domain_error("category " + categories_[j].name +
                                        " lists unknown nature " + m);
            if (category_of_[it->second] != unassigned)
                throw std::domain_error("categories overlap on nature " + m);
            category_of_[it->second] = j;
        }
    }
    for (std::size_t o = 0; o < natures_.size(); ++o) {
        if (category_of_[o] == unassigned)
            throw std::domain_error("nature " + natures_[o] + " belongs to no category");
        members_[category_of_[o]].push_back(o);
    }
}

std::size_t TaskSpec::nature_index(std::string_view name) const {
    auto it = std::find(natures_.begin(), natures_.end(), name);
    if (it == natures_.end()) throw std::domain_error("unknown nature: " + std::string(name));
    return static_cast<std::size_t>(it - natures_.begin());
}

std::size_t TaskSpec::category_index(std::string_view name) const {
    for (std::size_t j = 0; j < categories_.size(); ++j)
        if (categories_[j].name == name) return j;
    throw std::domain_error("unknown category: " + std::string(name));
}

std::vector<double> TaskSpec::rates_for(std::size_t nature) const {
    if (nature >= natures_.size()) throw std::domain_error("nature index out of range");
    return input_rates_.column(nature);
}

std::vector<double> TaskSpec::balance_ratios() const {
    std::vector<double> out(categories_.size(), 0.0);
    for (std::size_t j = 0; j < categories_.size(); ++j) {
        if (members_[j].empty()) throw std::domain_error("empty category: " + categories_[j].name);
        out[j] = static_cast<double>(natures_.size()) / static_cast<double>(members_[j].size());
    }
    return out;
}

TaskSpec TaskSpec::restricted_to(std::span<const std::size_t> natures) const {
    std::vector<std::string> names;
    Matrix rates(features_.size(), natures.size());
    std::vector<Category> cats;
    for (const auto& c : categories_) cats.push_back({c.name, {}});
    for (std::size_t k = 0; k < natures.size(); ++k) {
        const std::size_t o = natures[k];
        if (o >= natures_.size()) throw std::domain_error("nature index out of range");
        names.push_back(natures_[o]);
        cats[category_of_[o]].members.push_back(natures_[o]);
        for (std::size_t i = 0; i < features_.size(); ++i) rates(i, k) = input_rates_(i, o);
    }
    return TaskSpec(std::move(names), std::move(cats), features_, std::move(rates));
}

Kernel Kernel::rectangular(double support_s, double height) {
    if (!(support_s > 0.0) || !std::isfinite(support_s))
        throw std::domain_error("kernel support must be > 0");
    if (!(height >= 0.0) || !std::isfinite(height))
        throw std::domain_error("kernel height must be >= 0");
    return Kernel(KernelShape::rectangular, support_s, height);
}

Kernel Kernel::rectangular_with_norm(double support_s, double l1_norm) {
    if (!(support_s > 0.0)) throw std::domain_error("kernel support must be > 0");
    return rectangular(support_s, l1_norm / support_s);
}

double Kernel::value(double t) const {
    return (t >= 0.0 && t < support_) ? height_ : 0.0;
}

Kernel Kernel::shrunk_to(double new_support) const {
    if (new_support >= support_) return *this;
    return rectangular_with_norm(new_support, l1_norm());
}

double kernel_cumulative(const Kernel& kernel, double t) {
    if (t < 0.0 || std::isnan(t)) throw std::domain_error("kernel_cumulative needs t >= 0");
    const double s = kernel.support();
    if (t >= s) return kernel.l1_norm() * (t - s / 2.0);
    return kernel.height() / 2.0 * t * t;
}

void RaceParams::validate() const {
    if (!(theta > 0.0)) throw std::domain_error("theta must be > 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::domain_error("T must be > 0");
    if (t_min && !(*t_min > 0.0 && *t_min < horizon))
        throw std::domain_error("T_min must satisfy 0 < T_min < T");
    if (!(dt > 0.0)) throw std::domain_error("dt must be > 0");
    if (dt > horizon / 100.0) throw std::domain_error("dt must be <= T/100");
}

}  // namespace racelab
