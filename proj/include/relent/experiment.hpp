#pragma once

// Experiment runner behind the relent CLI: config parsing, sweep routing
// between the dense and reduction evaluators, record rendering, and the
// built-in verification suite.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "relent/entropies.hpp"
#include "relent/errors.hpp"
#include "relent/linalg.hpp"
#include "relent/mixtures.hpp"
#include "relent/random.hpp"
#include "relent/reduction.hpp"
#include "relent/states.hpp"
#include "relent/weights.hpp"

namespace relent {

using json = nlohmann::json;

inline constexpr const char* kDenseCapEnv = "RELENT_DENSE_CAP";

/// A config problem, reported with the offending field path.
class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& path, const std::string& what)
        : ValidationError("config." + path + ": " + what) {}
};

/// Raised when the reduction self-check or the verify suite fails.
class VerificationFailure : public Error {
public:
    using Error::Error;
};

enum class Method { automatic, dense_exact, dense_bs, reduction_exact, reduction_mc };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::automatic: return "auto";
        case Method::dense_exact: return "dense_exact";
        case Method::dense_bs: return "dense_bs";
        case Method::reduction_exact: return "reduction_exact";
        case Method::reduction_mc: return "reduction_mc";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    for (auto m : {Method::automatic, Method::dense_exact, Method::dense_bs,
                   Method::reduction_exact, Method::reduction_mc}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

enum class PerturbationKind { unitary, sigma };

struct ExperimentConfig {
    std::size_t d = 2;
    Matrix hamiltonian;
    double beta = 1.0;
    PerturbationKind perturbation_kind = PerturbationKind::unitary;
    Matrix perturbation;
    WeightScheme scheme = WeightScheme::uniform();
    std::size_t k = 1;
    std::vector<std::size_t> n_values;
    std::vector<Method> methods{Method::automatic};
    std::uint64_t samples = 100000;
    std::uint64_t seed = 0;
    std::size_t dense_cap = kDefaultDenseCap;
    unsigned threads = 1;
};

// ---------------------------------------------------------------------------
// Parsing

/// Flat list of 2*d*d reals, row-major, interleaved (re, im).
inline Matrix parse_matrix(const json& j, std::size_t d, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected a flat array of 2*d*d numbers");
    if (j.size() != 2 * d * d) {
        throw ConfigError(path, "expected " + std::to_string(2 * d * d) + " numbers, got " +
                                    std::to_string(j.size()));
    }
    const auto dd = static_cast<Eigen::Index>(d);
    Matrix m(dd, dd);
    for (std::size_t idx = 0; idx < d * d; ++idx) {
        const json& re = j[2 * idx];
        const json& im = j[2 * idx + 1];
        if (!re.is_number() || !im.is_number()) {
            throw ConfigError(path + "[" + std::to_string(2 * idx) + "]", "expected a number");
        }
        m(static_cast<Eigen::Index>(idx / d), static_cast<Eigen::Index>(idx % d)) =
            Complex(re.get<double>(), im.get<double>());
    }
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out.push_back(m(i, j).real());
            out.push_back(m(i, j).imag());
        }
    }
    return out;
}

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) throw ConfigError(path.empty() ? key : path + "." + key, "missing field");
    return obj.at(key);
}

inline std::uint64_t as_count(const json& j, const std::string& path, std::uint64_t min_value) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < static_cast<std::int64_t>(min_value)) {
        throw ConfigError(path, "expected an integer >= " + std::to_string(min_value));
    }
    return j.get<std::uint64_t>();
}

inline double as_real(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

}  // namespace detail

/// Scheme spec: {"family": NAME, "params": {...}, "rows": [[...], ...], "class": CLASS}.
/// Params: window {"width": w | "sqrt"}, geometric {"ratio": r}. Custom rows are
/// keyed by their own length.
inline WeightScheme make_scheme(const json& spec, const std::string& path = "scheme") {
    if (!spec.is_object()) throw ConfigError(path, "expected an object");
    const json& fam = detail::require(spec, "family", path);
    if (!fam.is_string()) throw ConfigError(path + ".family", "expected a string");
    const std::string name = fam.get<std::string>();
    const json params = spec.value("params", json::object());
    if (!params.is_object()) throw ConfigError(path + ".params", "expected an object");

    for (const auto& [key, _] : params.items()) {
        const bool known = (name == "window" && key == "width") ||
                           (name == "geometric" && key == "ratio");
        if (!known) throw ConfigError(path + ".params." + key, "unknown parameter for " + name);
    }

    if (name == "uniform") return WeightScheme::uniform();
    if (name == "triangular") return WeightScheme::triangular();
    if (name == "fixed_site") return WeightScheme::fixed_site();
    if (name == "window") {
        const json& w = detail::require(params, "width", path + ".params");
        if (w.is_string() && w.get<std::string>() == "sqrt") return WeightScheme::growing_window();
        return WeightScheme::window(detail::as_count(w, path + ".params.width", 1));
    }
    if (name == "geometric") {
        const double r = detail::as_real(detail::require(params, "ratio", path + ".params"),
                                         path + ".params.ratio");
        if (!(r > 0.0 && r < 1.0)) throw ConfigError(path + ".params.ratio", "must lie in (0,1)");
        return WeightScheme::geometric(r);
    }
    if (name == "custom") {
        const json& rows = detail::require(spec, "rows", path);
        if (!rows.is_array() || rows.empty()) throw ConfigError(path + ".rows", "expected a nonempty array of rows");
        WeightScheme::CustomRows parsed;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string rp = path + ".rows[" + std::to_string(i) + "]";
            if (!rows[i].is_array() || rows[i].empty()) throw ConfigError(rp, "expected a nonempty array");
            std::vector<double> r;
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                r.push_back(detail::as_real(rows[i][j], rp + "[" + std::to_string(j) + "]"));
            }
            try {
                WeightScheme::check_row(r);
            } catch (const ValidationError& e) {
                throw ConfigError(rp, e.what());
            }
            if (!parsed.emplace(r.size(), std::move(r)).second) {
                throw ConfigError(rp, "duplicate row length");
            }
        }
        AnalyticClass declared = AnalyticClass::unclassified;
        if (spec.contains("class")) {
            const auto c = spec.at("class").is_string()
                               ? parse_analytic_class(spec.at("class").get<std::string>())
                               : std::nullopt;
            if (!c) throw ConfigError(path + ".class", "unknown analytic class");
            declared = *c;
        }
        return WeightScheme::custom(std::move(parsed), declared);
    }
    throw ConfigError(path + ".family", "unknown family '" + name + "'");
}

/// Dense cap from the environment, if set.
inline std::optional<std::size_t> dense_cap_from_env() {
    const char* v = std::getenv(kDenseCapEnv);
    if (v == nullptr || *v == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long long cap = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0' || cap == 0) {
        throw ValidationError(std::string(kDenseCapEnv) + " must be a positive integer, got '" + v + "'");
    }
    return static_cast<std::size_t>(cap);
}

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("", "top level must be an object");
    static const std::vector<std::string> known{
        "d", "hamiltonian", "beta", "perturbation", "scheme", "k", "n_values",
        "method", "samples", "seed", "dense_cap", "threads"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(key, "unknown field");
        }
    }

    ExperimentConfig c;
    c.d = detail::as_count(detail::require(j, "d", ""), "d", 1);
    c.hamiltonian = parse_matrix(detail::require(j, "hamiltonian", ""), c.d, "hamiltonian");
    c.beta = detail::as_real(detail::require(j, "beta", ""), "beta");
    if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) throw ConfigError("beta", "must be finite and >= 0");

    const json& pert = detail::require(j, "perturbation", "");
    if (!pert.is_object() || pert.size() != 1 ||
        !(pert.contains("unitary") || pert.contains("sigma"))) {
        throw ConfigError("perturbation", "expected exactly one of {\"unitary\": [...]} or {\"sigma\": [...]}");
    }
    if (pert.contains("unitary")) {
        c.perturbation_kind = PerturbationKind::unitary;
        c.perturbation = parse_matrix(pert.at("unitary"), c.d, "perturbation.unitary");
    } else {
        c.perturbation_kind = PerturbationKind::sigma;
        c.perturbation = parse_matrix(pert.at("sigma"), c.d, "perturbation.sigma");
    }

    c.scheme = make_scheme(detail::require(j, "scheme", ""));
    if (j.contains("k")) c.k = detail::as_count(j.at("k"), "k", 1);

    const json& ns = detail::require(j, "n_values", "");
    if (!ns.is_array() || ns.empty()) throw ConfigError("n_values", "expected a nonempty array");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const std::string p = "n_values[" + std::to_string(i) + "]";
        const auto n = static_cast<std::size_t>(detail::as_count(ns[i], p, c.k));
        if (!c.n_values.empty() && n <= c.n_values.back()) throw ConfigError(p, "n_values must be strictly ascending");
        c.n_values.push_back(n);
    }

    if (j.contains("method")) {
        const json& m = j.at("method");
        const json list = m.is_array() ? m : json::array({m});
        if (list.empty()) throw ConfigError("method", "expected a method name or a nonempty list");
        c.methods.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string p = m.is_array() ? "method[" + std::to_string(i) + "]" : "method";
            const auto parsed = list[i].is_string() ? parse_method(list[i].get<std::string>()) : std::nullopt;
            if (!parsed) throw ConfigError(p, "expected one of auto, dense_exact, dense_bs, reduction_exact, reduction_mc");
            if (std::find(c.methods.begin(), c.methods.end(), *parsed) != c.methods.end()) {
                throw ConfigError(p, "duplicate method");
            }
            c.methods.push_back(*parsed);
        }
    }
    if (j.contains("samples")) c.samples = detail::as_count(j.at("samples"), "samples", 100);
    if (j.contains("seed")) c.seed = detail::as_count(j.at("seed"), "seed", 0);
    if (j.contains("dense_cap")) c.dense_cap = detail::as_count(j.at("dense_cap"), "dense_cap", 1);
    if (j.contains("threads")) c.threads = static_cast<unsigned>(detail::as_count(j.at("threads"), "threads", 0));
    if (auto env = dense_cap_from_env()) c.dense_cap = *env;

    for (Method m : c.methods) {
        const bool reduction = m == Method::reduction_exact || m == Method::reduction_mc;
        if (reduction && c.k != 1) throw ConfigError("method", "reduction methods require k = 1");
        if (m == Method::reduction_exact) {
            for (std::size_t n : c.n_values) {
                if (!c.scheme.exchangeable(n)) {
                    throw ConfigError("method", "reduction_exact requires an exchangeable scheme; " +
                                                    c.scheme.name() + " is not exchangeable at n = " +
                                                    std::to_string(n));
                }
            }
        }
    }
    for (std::size_t n : c.n_values) c.scheme.row(n - c.k + 1);  // custom rows must exist
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

/// The running example: d = 2, H = diag(0,1), beta = 1, Hadamard perturbation,
/// uniform weights.
inline const char* default_config_text() {
    return R"({
  "d": 2,
  "hamiltonian": [0, 0, 0, 0, 0, 0, 1, 0],
  "beta": 1.0,
  "perturbation": {"unitary": [0.7071067811865476, 0, 0.7071067811865476, 0,
                               0.7071067811865476, 0, -0.7071067811865476, 0]},
  "scheme": {"family": "uniform"},
  "k": 1,
  "n_values": [1, 2, 4, 6, 8, 10],
  "method": "dense_exact",
  "samples": 100000,
  "seed": 12345
})";
}

// ---------------------------------------------------------------------------
// Model and sweep

struct Model {
    HermitianOperator hamiltonian;
    DensityMatrix rho;
    DensityMatrix sigma;
};

inline Model build_model(const ExperimentConfig& c) {
    HermitianOperator h;
    try {
        h = HermitianOperator(c.hamiltonian);
    } catch (const ValidationError& e) {
        throw ConfigError("hamiltonian", e.what());
    }
    DensityMatrix rho = gibbs({h, c.beta});
    if (c.perturbation_kind == PerturbationKind::unitary) {
        try {
            DensityMatrix sigma = perturb_unitary(rho, c.perturbation);
            return Model{std::move(h), std::move(rho), std::move(sigma)};
        } catch (const ValidationError& e) {
            throw ConfigError("perturbation.unitary", e.what());
        }
    }
    try {
        DensityMatrix sigma(c.perturbation);
        return Model{std::move(h), std::move(rho), std::move(sigma)};
    } catch (const ValidationError& e) {
        throw ConfigError("perturbation.sigma", e.what());
    }
}

struct ConvergenceRecord {
    std::size_t n = 0;
    std::string method;
    std::string quantity;  // "S" or "S_BS"
    EntropyValue value;
    std::optional<double> std_error;
    double runtime_ms = 0.0;
};

inline MixtureSpec mixture_spec(const Model& m, const ExperimentConfig& c, std::size_t n) {
    return MixtureSpec{m.rho, m.sigma, c.scheme, n, c.k, c.dense_cap};
}

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

inline CheckResult make_check(std::string name, double residual, double tolerance) {
    return CheckResult{std::move(name), residual, tolerance, residual <= tolerance};
}

/// Cross-validates the reduction identity against the dense bound on small n
/// for this model and scheme. Reduction results are only reported after this passes.
inline std::vector<CheckResult> reduction_self_check(const Model& m, const WeightScheme& scheme,
                                                     std::size_t dense_cap) {
    std::vector<CheckResult> out;
    const auto d = static_cast<std::size_t>(m.rho.dim());
    const std::size_t cap = std::min<std::size_t>(dense_cap, std::size_t{1} << 12);
    const ReducedEnsemble ens = reduce_to_ensemble(m.rho, m.sigma);
    for (std::size_t n = 1; n <= 6; ++n) {
        std::size_t dim = 0;
        try {
            dim = checked_power(d, n, cap);
        } catch (const CapacityError&) {
            break;
        }
        (void)dim;
        const std::vector<double> row = [&] {
            try {
                return scheme.row(n);
            } catch (const ArgumentError&) {
                return std::vector<double>{};
            }
        }();
        if (row.empty()) continue;
        const MixtureSpec spec{m.rho, m.sigma, scheme, n, 1, cap};
        const double dense = dense_bs_bound(spec).value();
        out.push_back(make_check("reduction(enumeration) vs dense S_BS, n=" + std::to_string(n),
                                 std::abs(bs_by_enumeration(ens, row, cap).value() - dense), 1e-9));
        if (scheme.exchangeable(n)) {
            out.push_back(make_check("reduction(exchangeable) vs dense S_BS, n=" + std::to_string(n),
                                     std::abs(bs_exchangeable_exact(ens, n).value() - dense), 1e-10));
        }
    }
    return out;
}

struct SweepOptions {
    bool timing = false;
    bool force_reduction = false;  // route every point through the reduction evaluator
};

namespace detail {

struct Task {
    std::size_t n;
    Method method;  // resolved, never automatic
};

inline Method resolve(Method m, const ExperimentConfig& c, std::size_t n, bool force_reduction) {
    const auto exchangeable_reduction = [&] {
        return c.scheme.exchangeable(n) ? Method::reduction_exact : Method::reduction_mc;
    };
    if (force_reduction) {
        if (m == Method::reduction_exact || m == Method::reduction_mc) return m;
        return exchangeable_reduction();
    }
    if (m != Method::automatic) return m;
    bool fits = true;
    try {
        checked_power(c.d, n, c.dense_cap);
    } catch (const CapacityError&) {
        fits = false;
    }
    if (fits) return Method::dense_exact;
    if (c.k != 1) throw CapacityError("n = " + std::to_string(n) + " exceeds the dense cap and block mixtures have no reduction path");
    return exchangeable_reduction();
}

inline int quantity_rank(const std::string& q) { return q == "S" ? 0 : 1; }

}  // namespace detail

inline std::vector<ConvergenceRecord> run_sweep(const ExperimentConfig& c, const SweepOptions& opt = {}) {
    const Model model = build_model(c);

    std::vector<detail::Task> tasks;
    for (std::size_t n : c.n_values) {
        for (Method m : c.methods) {
            const Method r = detail::resolve(m, c, n, opt.force_reduction);
            const bool dup = std::any_of(tasks.begin(), tasks.end(), [&](const detail::Task& t) {
                return t.n == n && t.method == r;
            });
            if (!dup) tasks.push_back({n, r});
        }
    }
    if (opt.force_reduction && c.k != 1) throw ConfigError("k", "reduction requires k = 1");

    const bool needs_reduction = std::any_of(tasks.begin(), tasks.end(), [](const detail::Task& t) {
        return t.method == Method::reduction_exact || t.method == Method::reduction_mc;
    });
    std::optional<ReducedEnsemble> ensemble;
    if (needs_reduction) {
        for (const auto& check : reduction_self_check(model, c.scheme, c.dense_cap)) {
            if (!check.passed) {
                throw VerificationFailure("reduction self-check failed: " + check.name + " residual " +
                                          std::to_string(check.residual));
            }
        }
        ensemble = reduce_to_ensemble(model.rho, model.sigma);
    }

    const unsigned inner_threads = c.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : c.threads;
    std::vector<ConvergenceRecord> records(tasks.size());
    auto evaluate = [&](std::size_t idx) {
        const detail::Task& t = tasks[idx];
        const auto start = std::chrono::steady_clock::now();
        ConvergenceRecord rec;
        rec.n = t.n;
        rec.method = std::string(to_string(t.method));
        switch (t.method) {
            case Method::dense_exact:
                rec.quantity = "S";
                rec.value = dense_relative_entropy(mixture_spec(model, c, t.n));
                break;
            case Method::dense_bs:
                rec.quantity = "S_BS";
                rec.value = dense_bs_bound(mixture_spec(model, c, t.n));
                break;
            case Method::reduction_exact:
                rec.quantity = "S_BS";
                rec.value = bs_exchangeable_exact(*ensemble, c.scheme, t.n);
                break;
            case Method::reduction_mc: {
                rec.quantity = "S_BS";
                const McEstimate est = bs_monte_carlo(*ensemble, c.scheme, t.n, c.samples, c.seed, inner_threads);
                rec.value = EntropyValue(est.mean);
                rec.std_error = est.std_error;
                break;
            }
            case Method::automatic: break;
        }
        rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        records[idx] = std::move(rec);
    };

    if (c.threads <= 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) evaluate(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(c.threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < c.threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t i = next++; i < tasks.size(); i = next++) evaluate(i);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::stable_sort(records.begin(), records.end(), [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
        if (a.n != b.n) return a.n < b.n;
        const int qa = detail::quantity_rank(a.quantity);
        const int qb = detail::quantity_rank(b.quantity);
        if (qa != qb) return qa < qb;
        return a.method < b.method;
    });
    return records;
}

// ---------------------------------------------------------------------------
// Rendering

/// 12 significant digits; INFINITE renders as "inf".
inline std::string format_number(double v) {
    if (std::isinf(v) && v > 0) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string format_value(const EntropyValue& v) {
    return v.is_infinite() ? "inf" : format_number(v.value());
}

/// Columns: n, method, quantity, value, std_error, runtime_ms. runtime_ms is
/// left empty unless timing is requested, keeping output byte-reproducible.
inline std::string render_csv(const std::vector<ConvergenceRecord>& records, bool timing = false) {
    std::ostringstream os;
    os << "n,method,quantity,value,std_error,runtime_ms\n";
    for (const auto& r : records) {
        os << r.n << ',' << r.method << ',' << r.quantity << ',' << format_value(r.value) << ','
           << (r.std_error ? format_number(*r.std_error) : "") << ','
           << (timing ? format_number(r.runtime_ms) : "") << '\n';
    }
    return os.str();
}

inline std::string render_json(const std::vector<ConvergenceRecord>& records, bool timing = false) {
    const auto rounded = [](double v) { return std::strtod(format_number(v).c_str(), nullptr); };
    json arr = json::array();
    for (const auto& r : records) {
        json rec;
        rec["n"] = r.n;
        rec["method"] = r.method;
        rec["quantity"] = r.quantity;
        rec["value"] = r.value.is_infinite() ? json("inf") : json(rounded(r.value.value()));
        rec["std_error"] = r.std_error ? json(rounded(*r.std_error)) : json(nullptr);
        rec["runtime_ms"] = timing ? json(rounded(r.runtime_ms)) : json(nullptr);
        arr.push_back(std::move(rec));
    }
    return json{{"records", arr}}.dump(2) + "\n";
}

inline std::string render_ensemble(const ReducedEnsemble& ens) {
    std::ostringstream os;
    os << "value,prob\n";
    for (std::size_t k = 0; k < ens.size(); ++k) {
        os << format_number(ens.values[k]) << ',' << format_number(ens.probs[k]) << '\n';
    }
    os << "# sum q = " << format_number(compensated_sum(ens.probs)) << ", mean = " << format_number(ens.mean())
       << ", second moment = " << format_number(ens.moment(2)) << ", variance = " << format_number(ens.variance())
       << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Weights diagnostics

/// Whether a_{n,1} shrinks by at least 25% between n = horizon/2 and horizon.
inline bool column_decay_evident(const RegularityReport& r) {
    const double mid = r.first_entries[r.horizon / 2 - 1];
    const double last = r.first_entries[r.horizon - 1];
    return last <= 0.75 * mid;
}

inline std::string render_regularity(const WeightScheme& scheme, const RegularityReport& r) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%8s %20s %20s %20s %20s\n", "n", "row_sum", "max_entry", "variation",
                  "first_entry");
    os << "# scheme: " << scheme.name() << "\n" << line;
    for (std::size_t i = 0; i < r.horizon; ++i) {
        std::snprintf(line, sizeof line, "%8zu %20s %20s %20s %20s\n", i + 1, format_number(r.row_sums[i]).c_str(),
                      format_number(r.max_entries[i]).c_str(), format_number(r.variation_sums[i]).c_str(),
                      format_number(r.first_entries[i]).c_str());
        os << line;
    }
    os << "# declared class: " << to_string(r.analytic_class) << "\n";
    os << "# first column decays over horizon: " << (column_decay_evident(r) ? "yes" : "no")
       << (column_decay_evident(r) ? "" : "  (inconsistent with regularity)") << "\n";
    os << "# max entry and variation decay over horizon: " << (r.decay_evident() ? "yes" : "no")
       << (r.decay_evident() ? "" : "  (not strongly regular on this evidence)") << "\n";
    os << "# evidence consistent with declared class: " << (r.consistent() ? "yes" : "no") << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Verify suite

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }

    std::string render() const {
        std::ostringstream os;
        for (const auto& c : checks) {
            os << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  residual=" << format_number(c.residual)
               << "  tol=" << format_number(c.tolerance) << '\n';
        }
        os << (passed() ? "all checks passed" : "verification FAILED") << '\n';
        return os.str();
    }
};

/// Identity suite on the config's model plus fixed-seed random probes.
inline VerifyReport run_verify(const ExperimentConfig& c) {
    VerifyReport rep;
    auto& out = rep.checks;
    const Model m = build_model(c);
    const auto d = static_cast<std::size_t>(m.rho.dim());

    out.push_back(make_check("trace(rho) = 1", std::abs(m.rho.op().trace() - 1.0), 1e-10));
    out.push_back(make_check("trace(sigma) = 1", std::abs(m.sigma.op().trace() - 1.0), 1e-10));

    const HermitianOperator x = x_operator(m.rho, m.sigma);
    out.push_back(make_check("Tr(rho X) = 1", std::abs(trace_product(m.rho.matrix(), x.matrix()) - 1.0), 1e-10));

    const double s_rel = relative_entropy(m.sigma, m.rho).value();
    const double s_bs = bs_entropy(m.sigma, m.rho).value();
    out.push_back(make_check("S(sigma||rho) <= S_BS(sigma||rho)", std::max(0.0, s_rel - s_bs), 1e-9));

    if (c.beta > 0.0) {
        const double de = energy_change(m.hamiltonian, m.rho, m.sigma);
        const double entropy_shift = von_neumann(m.sigma).value() - von_neumann(m.rho).value();
        out.push_back(make_check("dE = (S(sigma||rho) + S(sigma) - S(rho)) / beta",
                                 std::abs(de - (s_rel + entropy_shift) / c.beta), 1e-10));
        if (c.perturbation_kind == PerturbationKind::unitary) {
            out.push_back(make_check("dE = S(sigma||rho) / beta", std::abs(de - s_rel / c.beta), 1e-10));
            out.push_back(make_check("S(U rho U*) = S(rho)", std::abs(entropy_shift), 1e-10));
        }
    }

    const std::size_t cap = std::min<std::size_t>(c.dense_cap, std::size_t{1} << 12);
    for (std::size_t n = 1; n <= 4; ++n) {
        try {
            checked_power(d, n, cap);
        } catch (const CapacityError&) {
            break;
        }
        std::vector<double> row;
        try {
            row = c.scheme.row(n);
        } catch (const ArgumentError&) {
            continue;
        }
        const MixtureSpec spec{m.rho, m.sigma, c.scheme, n, 1, cap};
        const DensityMatrix mix = build_mixture(spec);
        const Matrix half = kron_power(sqrt_psd(m.rho).matrix(), n, cap);
        const HermitianOperator y = build_weighted_sum(x, c.scheme, n, d, cap);
        out.push_back(make_check("reconstruction rho^{1/2} Y rho^{1/2} = rho_n, n=" + std::to_string(n),
                                 max_norm(half * y.matrix() * half - mix.matrix()), 1e-9));
        const double s = relative_entropy_to_product(mix, m.rho, n, cap).value();
        const double b = dense_bs_bound(spec).value();
        out.push_back(make_check("dense sandwich S <= S_BS, n=" + std::to_string(n), std::max(0.0, s - b), 1e-9));
        out.push_back(make_check("Klein S >= 0, n=" + std::to_string(n), std::max(0.0, -s), 1e-9));
    }

    for (auto& check : reduction_self_check(m, c.scheme, c.dense_cap)) out.push_back(std::move(check));

    const ReducedEnsemble ens = reduce_to_ensemble(m.rho, m.sigma);
    out.push_back(make_check("ensemble sum q = 1", std::abs(compensated_sum(ens.probs) - 1.0), 1e-12));
    out.push_back(make_check("ensemble sum q x = 1", std::abs(ens.mean() - 1.0), 1e-10));
    const Matrix second = m.sigma.matrix() * m.rho.matrix().inverse() * m.sigma.matrix();
    out.push_back(make_check("ensemble second moment = Tr(sigma rho^-1 sigma)",
                             std::abs(ens.moment(2) - second.trace().real()), 1e-9));

    probe::Engine rng(20240611);
    double worst_sandwich = 0.0;
    double worst_energy = 0.0;
    double worst_invariance = 0.0;
    for (int i = 0; i < 20; ++i) {
        const DensityMatrix r = probe::random_density(static_cast<Eigen::Index>(d), rng);
        const DensityMatrix s = probe::random_density(static_cast<Eigen::Index>(d), rng);
        worst_sandwich = std::max(worst_sandwich, relative_entropy(s, r).value() - bs_entropy(s, r).value());

        const HermitianOperator h = probe::random_hermitian(static_cast<Eigen::Index>(d), rng);
        const double beta = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
        const DensityMatrix g = gibbs({h, beta});
        const DensityMatrix gs = perturb_unitary(g, probe::random_unitary(static_cast<Eigen::Index>(d), rng));
        worst_energy = std::max(worst_energy,
                                std::abs(energy_change(h, g, gs) - relative_entropy(gs, g).value() / beta));
        worst_invariance = std::max(worst_invariance, std::abs(von_neumann(gs).value() - von_neumann(g).value()));
    }
    out.push_back(make_check("random probes: S <= S_BS (20 pairs)", std::max(0.0, worst_sandwich), 1e-9));
    out.push_back(make_check("random probes: dE = S/beta (20 Gibbs states)", worst_energy, 1e-10));
    out.push_back(make_check("random probes: S(U rho U*) = S(rho)", worst_invariance, 1e-10));
    return rep;
}

}  // namespace relent
