#pragma once

// Weight schemes: for each row length L, a row of L nonnegative weights
// summing to 1, plus finite-horizon diagnostics of the regularity conditions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relent/errors.hpp"

namespace relent {

namespace tol {
inline constexpr double row_sum = 1e-12;
}

enum class Family { uniform, triangular, window, fixed_site, geometric, custom };

enum class AnalyticClass { strongly_regular, regular_not_strongly, not_regular, unclassified };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::uniform: return "uniform";
        case Family::triangular: return "triangular";
        case Family::window: return "window";
        case Family::fixed_site: return "fixed_site";
        case Family::geometric: return "geometric";
        case Family::custom: return "custom";
    }
    return "?";
}

inline std::string_view to_string(AnalyticClass c) {
    switch (c) {
        case AnalyticClass::strongly_regular: return "strongly_regular";
        case AnalyticClass::regular_not_strongly: return "regular_not_strongly";
        case AnalyticClass::not_regular: return "not_regular";
        case AnalyticClass::unclassified: return "unclassified";
    }
    return "?";
}

inline std::optional<AnalyticClass> parse_analytic_class(std::string_view s) {
    for (auto c : {AnalyticClass::strongly_regular, AnalyticClass::regular_not_strongly,
                   AnalyticClass::not_regular, AnalyticClass::unclassified}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

/// Neumaier-compensated sum.
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0.0;
    double c = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + c;
}

/// Smallest w with w*w >= n.
inline std::size_t ceil_sqrt(std::size_t n) {
    auto w = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (w * w < n) ++w;
    while (w > 1 && (w - 1) * (w - 1) >= n) --w;
    return w;
}

/// Rows are produced per requested length, so the same scheme serves the
/// single-site mixture (length n) and the k-block mixture (length n-k+1).
class WeightScheme {
public:
    using CustomRows = std::map<std::size_t, std::vector<double>>;

    static WeightScheme uniform() { return WeightScheme(Family::uniform, AnalyticClass::strongly_regular); }

    /// a_i = 2i / (L(L+1)).
    static WeightScheme triangular() {
        return WeightScheme(Family::triangular, AnalyticClass::strongly_regular);
    }

    /// Equal weights 1/w on the last w positions of the row.
    static WeightScheme window(std::size_t width) {
        if (width < 1) throw ArgumentError("window width must be >= 1");
        WeightScheme s(Family::window, AnalyticClass::regular_not_strongly);
        s.width_ = width;
        return s;
    }

    /// Window of width ceil(sqrt(L)) at the end of the row.
    static WeightScheme growing_window() {
        WeightScheme s(Family::window, AnalyticClass::strongly_regular);
        s.width_ = 0;
        return s;
    }

    /// All weight on the first site.
    static WeightScheme fixed_site() { return WeightScheme(Family::fixed_site, AnalyticClass::not_regular); }

    /// a_i = (1-r) r^{i-1} / (1-r^L), r in (0,1).
    static WeightScheme geometric(double ratio) {
        if (!(ratio > 0.0 && ratio < 1.0)) {
            throw ArgumentError("geometric ratio must lie in (0,1), got " + std::to_string(ratio));
        }
        WeightScheme s(Family::geometric, AnalyticClass::not_regular);
        s.ratio_ = ratio;
        return s;
    }

    /// Explicit rows keyed by length. Each row must have matching length,
    /// entries in [0,1], and sum to 1 within 1e-12.
    static WeightScheme custom(CustomRows rows,
                               AnalyticClass declared = AnalyticClass::unclassified) {
        for (const auto& [len, r] : rows) {
            if (len == 0 || r.size() != len) {
                throw ValidationError("custom row keyed " + std::to_string(len) + " has " +
                                      std::to_string(r.size()) + " entries");
            }
            check_row(r);
        }
        WeightScheme s(Family::custom, declared);
        s.rows_ = std::move(rows);
        return s;
    }

    Family family() const { return family_; }
    AnalyticClass analytic_class() const { return class_; }
    std::size_t width() const { return width_; }
    double ratio() const { return ratio_; }
    bool growing() const { return family_ == Family::window && width_ == 0; }

    std::string name() const {
        switch (family_) {
            case Family::window:
                return growing() ? "window(sqrt)" : "window(" + std::to_string(width_) + ")";
            case Family::geometric: return "geometric(" + std::to_string(ratio_) + ")";
            default: return std::string(to_string(family_));
        }
    }

    std::vector<double> row(std::size_t length) const {
        if (length < 1) throw ArgumentError("row length must be >= 1");
        const double len = static_cast<double>(length);
        std::vector<double> out(length, 0.0);
        switch (family_) {
            case Family::uniform:
                std::fill(out.begin(), out.end(), 1.0 / len);
                break;
            case Family::triangular:
                for (std::size_t i = 0; i < length; ++i) {
                    out[i] = 2.0 * static_cast<double>(i + 1) / (len * (len + 1.0));
                }
                break;
            case Family::window: {
                const std::size_t w = std::min(length, growing() ? ceil_sqrt(length) : width_);
                std::fill(out.end() - static_cast<std::ptrdiff_t>(w), out.end(),
                          1.0 / static_cast<double>(w));
                break;
            }
            case Family::fixed_site:
                out[0] = 1.0;
                break;
            case Family::geometric: {
                const double norm = (1.0 - ratio_) / (1.0 - std::pow(ratio_, len));
                for (std::size_t i = 0; i < length; ++i) {
                    out[i] = norm * std::pow(ratio_, static_cast<double>(i));
                }
                break;
            }
            case Family::custom: {
                auto it = rows_.find(length);
                if (it == rows_.end()) {
                    throw ArgumentError("custom scheme has no row of length " +
                                        std::to_string(length));
                }
                out = it->second;
                break;
            }
        }
        return out;
    }

    /// True when every entry of the row is equal, so that the weighted sum is
    /// invariant under site permutations.
    bool exchangeable(std::size_t length) const {
        const auto r = row(length);
        return std::all_of(r.begin(), r.end(), [&](double a) {
            return std::abs(a - r.front()) <= 1e-15 * r.front();
        });
    }

    static void check_row(std::span<const double> r) {
        for (double a : r) {
            if (!(a >= 0.0 && a <= 1.0)) {
                throw ValidationError("weight " + std::to_string(a) + " outside [0,1]");
            }
        }
        const double s = compensated_sum(r);
        if (std::abs(s - 1.0) > tol::row_sum) {
            throw ValidationError("weight row sums to " + std::to_string(s) +
                                  ", must equal 1 within 1e-12");
        }
    }

private:
    WeightScheme(Family f, AnalyticClass c) : family_(f), class_(c) {}

    Family family_;
    AnalyticClass class_;
    std::size_t width_ = 0;
    double ratio_ = 0.0;
    CustomRows rows_;
};

/// Finite-horizon evidence for the regularity conditions, rows 1..horizon.
/// The analytic class is the scheme's declared one; nothing here decides a limit.
struct RegularityReport {
    std::size_t horizon = 0;
    std::vector<double> row_sums;
    std::vector<double> max_entries;
    std::vector<double> variation_sums;  // sum_j |a_{n,j+1} - a_{n,j}|, a_{n,n+1} = 0
    std::vector<double> first_entries;   // a_{n,1}, the first column
    AnalyticClass analytic_class = AnalyticClass::unclassified;

    /// Both max_entries and variation_sums shrink by at least 25% between
    /// n = horizon/2 and n = horizon.
    bool decay_evident() const {
        const std::size_t mid = horizon / 2 - 1;
        const std::size_t last = horizon - 1;
        return max_entries[last] <= 0.75 * max_entries[mid] &&
               variation_sums[last] <= 0.75 * variation_sums[mid];
    }

    /// Whether the finite evidence agrees with the declared class.
    bool consistent() const {
        if (analytic_class == AnalyticClass::unclassified) return true;
        return decay_evident() == (analytic_class == AnalyticClass::strongly_regular);
    }
};

inline double variation_sum(std::span<const double> r) {
    std::vector<double> diffs(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        const double next = j + 1 < r.size() ? r[j + 1] : 0.0;
        diffs[j] = std::abs(next - r[j]);
    }
    return compensated_sum(diffs);
}

inline RegularityReport regularity_diagnostics(const WeightScheme& scheme, std::size_t horizon) {
    if (horizon < 2) throw ArgumentError("horizon must be >= 2");
    RegularityReport rep;
    rep.horizon = horizon;
    rep.analytic_class = scheme.analytic_class();
    for (std::size_t n = 1; n <= horizon; ++n) {
        const auto r = scheme.row(n);
        rep.row_sums.push_back(compensated_sum(r));
        rep.max_entries.push_back(*std::max_element(r.begin(), r.end()));
        rep.variation_sums.push_back(variation_sum(r));
        rep.first_entries.push_back(r.front());
    }
    return rep;
}

}  // namespace relent
