#pragma once

// Large-n evaluation of the Belavkin-Staszewski bound.
//
// In the eigenbasis X = U diag(x) U*, the product basis U^{(x)n} diagonalizes
// Y_n = sum_i a_i gamma^i(X), with eigenvalue sum_i a_i x_{k_i} on the basis
// vector (k_1..k_n), and rho^{(x)n} has diagonal prod_i q_{k_i} there, where
// q_k = (U* rho U)_kk. Hence
//   Tr(rho^{(x)n} phi(Y_n)) = E[phi(sum_i a_i Z_i)],  Z_i i.i.d. ~ (x_k, q_k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "relent/entropies.hpp"
#include "relent/errors.hpp"
#include "relent/linalg.hpp"
#include "relent/states.hpp"
#include "relent/weights.hpp"

namespace relent {

namespace tol {
inline constexpr double eigen_merge = 1e-10;
}

struct ReducedEnsemble {
    std::vector<double> values;  // distinct eigenvalues of X, ascending
    std::vector<double> probs;   // rho's weight on each eigenspace

    std::size_t size() const { return values.size(); }

    double moment(int order) const {
        double s = 0.0;
        for (std::size_t k = 0; k < size(); ++k) s += probs[k] * std::pow(values[k], order);
        return s;
    }
    double mean() const { return moment(1); }
    double variance() const {
        const double m = mean();
        double s = 0.0;
        for (std::size_t k = 0; k < size(); ++k) s += probs[k] * (values[k] - m) * (values[k] - m);
        return s;
    }
};

/// Diagonalizes X and reads off rho's weights in X's eigenbasis. Eigenvalues
/// closer than tol::eigen_merge are merged; probabilities are normalized to sum 1.
inline ReducedEnsemble reduce_to_ensemble(const DensityMatrix& rho, const HermitianOperator& x) {
    if (rho.dim() != x.dim()) {
        throw ArgumentError("reduce_to_ensemble: dimension mismatch " +
                            std::to_string(rho.dim()) + " vs " + std::to_string(x.dim()));
    }
    const SpectralDecomposition xs = clip_psd(spectral_decompose(x));
    const Eigen::RowVectorXd q =
        xs.eigenvectors.conjugate().cwiseProduct(rho.matrix() * xs.eigenvectors).colwise().sum().real();

    ReducedEnsemble ens;
    for (Eigen::Index k = 0; k < xs.dim(); ++k) {
        const double p = std::max(q[k], 0.0);
        if (!ens.values.empty() && xs.eigenvalues[k] - ens.values.back() <= tol::eigen_merge) {
            ens.probs.back() += p;
        } else {
            ens.values.push_back(xs.eigenvalues[k]);
            ens.probs.push_back(p);
        }
    }
    const double total = compensated_sum(ens.probs);
    for (double& p : ens.probs) p /= total;
    return ens;
}

inline ReducedEnsemble reduce_to_ensemble(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return reduce_to_ensemble(rho, x_operator(rho, sigma));
}

/// Uniform weights: sum over occupation counts c (sum c = n) of
/// Multinomial(n; q)(c) * phi(sum_k c_k x_k / n). O(n^{m-1}) terms for m values.
inline EntropyValue bs_exchangeable_exact(const ReducedEnsemble& ens, std::size_t n) {
    if (n < 1) throw ArgumentError("n must be >= 1");
    const std::size_t m = ens.size();
    const double mean = ens.mean();
    const double nd = static_cast<double>(n);
    std::vector<double> log_q(m);
    for (std::size_t k = 0; k < m; ++k) {
        log_q[k] = ens.probs[k] > 0.0 ? std::log(ens.probs[k]) : -std::numeric_limits<double>::infinity();
    }

    // phi(w) - (w - mean) has the same expectation as phi(w) but no first-order
    // cancellation between terms.
    double total = 0.0;
    double comp = 0.0;
    std::vector<std::size_t> counts(m, 0);
    auto visit = [&](auto&& self, std::size_t k, std::size_t left, double log_p,
                     double weighted) -> void {
        if (k + 1 == m) {
            counts[k] = left;
            if (left > 0 && ens.probs[k] == 0.0) return;
            const double lp = log_p - std::lgamma(static_cast<double>(left) + 1.0) +
                              (left > 0 ? static_cast<double>(left) * log_q[k] : 0.0);
            const double w = (weighted + static_cast<double>(left) * ens.values[k]) / nd;
            const double term = std::exp(lp) * (xlogx(w) - (w - mean));
            const double t = total + term;
            comp += std::abs(total) >= std::abs(term) ? (total - t) + term : (term - t) + total;
            total = t;
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            if (c > 0 && ens.probs[k] == 0.0) break;
            counts[k] = c;
            const double cd = static_cast<double>(c);
            self(self, k + 1, left - c,
                 log_p - std::lgamma(cd + 1.0) + (c > 0 ? cd * log_q[k] : 0.0),
                 weighted + cd * ens.values[k]);
        }
    };
    visit(visit, 0, n, std::lgamma(nd + 1.0), 0.0);
    return EntropyValue(total + comp);
}

/// Checked variant: the scheme's row of length n must be exchangeable.
inline EntropyValue bs_exchangeable_exact(const ReducedEnsemble& ens, const WeightScheme& scheme,
                                          std::size_t n) {
    if (!scheme.exchangeable(n)) {
        throw ArgumentError("exact exchangeable evaluation requires equal weights; scheme " +
                            scheme.name() + " is not exchangeable at n = " + std::to_string(n));
    }
    return bs_exchangeable_exact(ens, n);
}

/// E[phi(sum_i a_i Z_i)] by explicit enumeration of all m^n value tuples.
/// Independent of the exchangeable shortcut; any weight row.
inline EntropyValue bs_by_enumeration(const ReducedEnsemble& ens, std::span<const double> weights,
                                      std::size_t cap = kDefaultDenseCap) {
    checked_power(ens.size(), weights.size(), cap);
    double total = 0.0;
    auto visit = [&](auto&& self, std::size_t i, double prob, double w) -> void {
        if (i == weights.size()) {
            total += prob * xlogx(w);
            return;
        }
        for (std::size_t k = 0; k < ens.size(); ++k) {
            if (ens.probs[k] == 0.0) continue;
            self(self, i + 1, prob * ens.probs[k], w + weights[i] * ens.values[k]);
        }
    };
    visit(visit, 0, 1.0, 0.0);
    return EntropyValue(total);
}

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based bit generator: the stream for sample j of (seed, n) is a pure
/// function of (seed, n, j).
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : key_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

namespace detail {

struct WeightGroup {
    double weight;
    std::uint64_t count;
};

// Sites sharing a weight contribute weight * sum_k c_k x_k with c ~ Multinomial(count, q).
inline std::vector<WeightGroup> group_weights(std::span<const double> row) {
    std::map<double, std::uint64_t> groups;
    for (double a : row) {
        if (a != 0.0) ++groups[a];
    }
    std::vector<WeightGroup> out;
    for (const auto& [a, c] : groups) out.push_back({a, c});
    return out;
}

struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        count += 1.0;
        const double delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }

    void merge(const Moments& o) {
        if (o.count == 0.0) return;
        const double total = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * o.count / total;
        m2 += o.m2 + delta * delta * count * o.count / total;
        count = total;
    }
};

inline double sample_weighted_sum(const ReducedEnsemble& ens, std::span<const WeightGroup> groups,
                                  CounterRng& rng) {
    double w = 0.0;
    for (const auto& g : groups) {
        std::uint64_t left = g.count;
        double remaining_p = 1.0;
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < ens.size() && left > 0; ++k) {
            const double p = remaining_p > 0.0 ? std::clamp(ens.probs[k] / remaining_p, 0.0, 1.0) : 0.0;
            std::binomial_distribution<std::uint64_t> bin(left, p);
            const std::uint64_t c = bin(rng);
            acc += static_cast<double>(c) * ens.values[k];
            left -= c;
            remaining_p -= ens.probs[k];
        }
        acc += static_cast<double>(left) * ens.values[ens.size() - 1];
        w += g.weight * acc;
    }
    return w;
}

}  // namespace detail

inline constexpr std::uint64_t kMcBlock = 1u << 14;

/// Monte Carlo estimate of E[phi(sum_i a_i Z_i)] for any scheme. Samples are
/// reduced in fixed blocks of kMcBlock indices in index order, so the result
/// does not depend on the thread count.
inline McEstimate bs_monte_carlo(const ReducedEnsemble& ens, const WeightScheme& scheme,
                                 std::size_t n, std::uint64_t samples, std::uint64_t seed,
                                 unsigned threads = 0) {
    if (samples < 100) throw ArgumentError("Monte Carlo requires at least 100 samples");
    if (n < 1) throw ArgumentError("n must be >= 1");
    const auto row = scheme.row(n);
    const auto groups = detail::group_weights(row);

    const std::uint64_t blocks = (samples + kMcBlock - 1) / kMcBlock;
    std::vector<detail::Moments> partial(blocks);
    auto run_block = [&](std::uint64_t b) {
        detail::Moments m;
        const std::uint64_t end = std::min(samples, (b + 1) * kMcBlock);
        for (std::uint64_t j = b * kMcBlock; j < end; ++j) {
            CounterRng rng(seed, n, j);
            m.add(xlogx(detail::sample_weighted_sum(ens, groups, rng)));
        }
        partial[b] = m;
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
    if (threads <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::uint64_t b = t; b < blocks; b += threads) run_block(b);
            });
        }
    }

    detail::Moments all;
    for (const auto& m : partial) all.merge(m);
    const double var = all.m2 / (all.count - 1.0);
    return McEstimate{all.mean, std::sqrt(std::max(var, 0.0) / all.count), samples, seed};
}

}  // namespace relent
