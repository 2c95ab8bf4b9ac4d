#include "racelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "racelab/random.hpp"

namespace racelab {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

std::vector<Point2> plus_plus_seeds(const std::vector<Point2>& points, std::size_t k, Rng& rng) {
    std::vector<Point2> centers{points[rng.index(points.size())]};
    std::vector<double> d2(points.size());
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            d2[p] = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) d2[p] = std::min(d2[p], sq_dist(points[p], c));
            total += d2[p];
        }
        if (total == 0.0) {
            centers.push_back(points[rng.index(points.size())]);
            continue;
        }
        double u = rng.uniform() * total;
        std::size_t pick = points.size() - 1;
        for (std::size_t p = 0; p < points.size(); ++p) {
            u -= d2[p];
            if (u < 0.0) {
                pick = p;
                break;
            }
        }
        centers.push_back(points[pick]);
    }
    return centers;
}

double assign(const std::vector<Point2>& points, const std::vector<Point2>& centers,
              std::vector<std::size_t>& labels) {
    double wcss = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        std::size_t best = 0;
        double best_d = sq_dist(points[p], centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c) {
            const double d = sq_dist(points[p], centers[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        labels[p] = best;
        wcss += best_d;
    }
    return wcss;
}

double wcss_of(const std::vector<Point2>& points, const std::vector<Point2>& centers,
               const std::vector<std::size_t>& labels) {
    double w = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) w += sq_dist(points[p], centers[labels[p]]);
    return w;
}

Clustering lloyd(const std::vector<Point2>& points, std::size_t k, Rng& rng) {
    Clustering out;
    out.k = k;
    out.centers = plus_plus_seeds(points, k, rng);
    out.labels.assign(points.size(), 0);
    double previous = assign(points, out.centers, out.labels);
    for (;;) {
        ++out.iterations;
        std::vector<Point2> sums(k, Point2{0.0, 0.0});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t p = 0; p < points.size(); ++p) {
            sums[out.labels[p]][0] += points[p][0];
            sums[out.labels[p]][1] += points[p][1];
            ++counts[out.labels[p]];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0) out.centers[c] = {sums[c][0] / counts[c], sums[c][1] / counts[c]};
        const double after_update = wcss_of(points, out.centers, out.labels);
        auto labels = out.labels;
        const double after_assign = assign(points, out.centers, labels);
        const double slack = 1e-12 * std::max(1.0, previous);
        if (after_update > previous + slack || after_assign > after_update + slack)
            throw std::logic_error("k-means iteration increased the within-cluster sum of squares");
        previous = after_assign;
        if (labels == out.labels) break;
        out.labels = std::move(labels);
    }
    out.wcss = previous;
    return out;
}

}  // namespace

Clustering kmeans(const std::vector<Point2>& points, std::size_t k, Seed seed, std::size_t restarts) {
    if (k < 1) throw std::domain_error("k must be >= 1");
    if (k > points.size()) throw std::domain_error("k exceeds the number of points");
    if (restarts == 0) throw std::domain_error("restarts must be >= 1");
    Clustering best;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(seed.derive(r));
        auto c = lloyd(points, k, rng);
        if (r == 0 || c.wcss < best.wcss) best = std::move(c);
    }
    return best;
}

Silhouette silhouette(const std::vector<Point2>& points, const std::vector<std::size_t>& labels, std::size_t k) {
    if (k < 2) throw std::domain_error("silhouette needs k >= 2");
    if (labels.size() != points.size()) throw std::domain_error("one label per point");
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t l : labels) {
        if (l >= k) throw std::domain_error("label out of range");
        ++sizes[l];
    }
    Silhouette out;
    out.per_point.resize(points.size(), 0.0);
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (sizes[labels[p]] <= 1) continue;
        std::vector<double> total(k, 0.0);
        for (std::size_t q = 0; q < points.size(); ++q)
            if (q != p) total[labels[q]] += std::sqrt(sq_dist(points[p], points[q]));
        const double a = total[labels[p]] / static_cast<double>(sizes[labels[p]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c)
            if (c != labels[p] && sizes[c] > 0) b = std::min(b, total[c] / static_cast<double>(sizes[c]));
        const double denom = std::max(a, b);
        out.per_point[p] = (std::isfinite(b) && denom > 0.0) ? (b - a) / denom : 0.0;
    }
    for (double s : out.per_point) out.mean += s;
    if (!points.empty()) out.mean /= static_cast<double>(points.size());
    return out;
}

KSelection select_k(const std::vector<Point2>& points, std::size_t k_min, std::size_t k_max, Seed seed,
                    std::size_t restarts) {
    if (k_min < 2 || k_max < k_min) throw std::domain_error("need 2 <= k_min <= k_max");
    KSelection sel;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_min; k <= std::min(k_max, points.size()); ++k) {
        const auto c = kmeans(points, k, seed.derive(k), restarts);
        const double s = silhouette(points, c.labels, k).mean;
        sel.k_values.push_back(k);
        sel.scores.push_back(s);
        if (s > best) {
            best = s;
            sel.best_k = k;
        }
    }
    if (sel.k_values.empty()) throw std::domain_error("not enough points for k_min clusters");
    return sel;
}

std::vector<Point2> standardized(const std::vector<Point2>& points) {
    std::vector<Point2> out = points;
    for (std::size_t d = 0; d < 2; ++d) {
        std::vector<double> v;
        for (const auto& p : points) v.push_back(p[d]);
        const double m = stats::mean(v);
        const double sd = v.size() > 1 ? std::sqrt(stats::variance(v)) : 0.0;
        for (auto& p : out) p[d] = sd > 0.0 ? (p[d] - m) / sd : 0.0;
    }
    return out;
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& table, bool yates) {
    const std::size_t rows = table.size();
    if (rows < 2) throw std::domain_error("table needs at least two rows");
    const std::size_t cols = table[0].size();
    if (cols < 2) throw std::domain_error("table needs at least two columns");
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (table[r].size() != cols) throw std::domain_error("ragged table");
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = table[r][c];
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error("counts must be finite and >= 0");
            row_sum[r] += v;
            col_sum[c] += v;
            total += v;
        }
    }
    for (double s : row_sum)
        if (s == 0.0) throw std::domain_error("zero row total");
    for (double s : col_sum)
        if (s == 0.0) throw std::domain_error("zero column total");

    const double dof = static_cast<double>((rows - 1) * (cols - 1));
    const bool correct = yates && dof == 1.0;
    double statistic = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = row_sum[r] * col_sum[c] / total;
            double diff = std::abs(table[r][c] - expected);
            if (correct) diff = std::max(0.0, diff - 0.5);
            statistic += diff * diff / expected;
        }
    return {statistic, dof, stats::chi_square_sf(statistic, dof)};
}

std::vector<std::vector<double>> contingency(const std::vector<std::string>& group_of_point,
                                             const std::vector<std::size_t>& labels, std::size_t k,
                                             const std::vector<std::string>& groups) {
    if (group_of_point.size() != labels.size()) throw std::domain_error("one group per point");
    std::vector<std::vector<double>> table(groups.size(), std::vector<double>(k, 0.0));
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const auto it = std::find(groups.begin(), groups.end(), group_of_point[p]);
        if (it == groups.end()) continue;
        if (labels[p] >= k) throw std::domain_error("label out of range");
        table[static_cast<std::size_t>(it - groups.begin())][labels[p]] += 1.0;
    }
    return table;
}

stats::LinearFit rt_vs_theta(const std::vector<double>& theta, const std::vector<double>& mean_rt) {
    if (theta.size() != mean_rt.size()) throw std::domain_error("theta and rt must pair up");
    if (theta.size() < 3) throw std::domain_error("rt_vs_theta needs at least 3 points");
    return stats::ols(theta, mean_rt);
}

}  // namespace racelab
