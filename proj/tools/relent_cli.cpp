// relent: sweep, verify, weights-check and reduce subcommands.
//
// Exit codes: 0 success, 1 validation error, 2 capacity error, 3 verification failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relent/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kCapacity = 2, kVerify = 3 };

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw relent::ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

relent::ExperimentConfig load_config(const std::string& path) {
    return relent::parse_config_text(path.empty() ? relent::default_config_text() : read_file(path));
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw relent::ArgumentError("cannot write output file '" + path + "'");
    out << text;
}

// K=V pairs to a params object; numeric values become numbers.
nlohmann::json params_to_json(const std::vector<std::string>& pairs) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw relent::ArgumentError("--params expects KEY=VALUE, got '" + p + "'");
        }
        const std::string key = p.substr(0, eq);
        const std::string value = p.substr(eq + 1);
        char* end = nullptr;
        const long long as_int = std::strtoll(value.c_str(), &end, 10);
        if (!value.empty() && *end == '\0') {
            out[key] = as_int;
            continue;
        }
        const double as_real = std::strtod(value.c_str(), &end);
        if (!value.empty() && *end == '\0') {
            out[key] = as_real;
        } else {
            out[key] = value;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted reservoir mixtures: relative entropy and Belavkin-Staszewski bound sweeps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path = "-";
    std::string format = "csv";
    bool timing = false;
    int threads = -1;

    auto* sweep = app.add_subcommand("sweep", "Evaluate S(rho_n || rho^n) over the configured n values");
    sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sweep->add_option("--out", out_path, "Output path, '-' for stdout");
    sweep->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--threads", threads, "Concurrent sweep points (overrides config)");
    sweep->add_flag("--timing", timing, "Fill the runtime_ms column (output is then not reproducible)");

    std::string verify_config;
    auto* verify = app.add_subcommand("verify", "Run the built-in identity suite");
    verify->add_option("--config", verify_config, "Config to verify (default: shipped running example)");

    std::string scheme_name;
    std::vector<std::string> params;
    std::size_t horizon = 20;
    auto* weights = app.add_subcommand("weights-check", "Finite-horizon regularity diagnostics of a weight scheme");
    weights->add_option("--scheme", scheme_name, "uniform|triangular|window|fixed_site|geometric")->required();
    weights->add_option("--params", params, "Scheme parameters as KEY=VALUE (width=2, width=sqrt, ratio=0.5)");
    weights->add_option("--horizon", horizon, "Number of rows")->check(CLI::Range(2, 100000000));

    std::string reduce_config;
    auto* reduce = app.add_subcommand("reduce", "Print the reduced ensemble and evaluate via the reduction path");
    reduce->add_option("--config", reduce_config, "Experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*sweep) {
            relent::ExperimentConfig cfg = load_config(config_path);
            if (threads >= 0) cfg.threads = static_cast<unsigned>(threads);
            const auto records = relent::run_sweep(cfg);
            write_output(out_path, format == "json" ? relent::render_json(records, timing)
                                                    : relent::render_csv(records, timing));
        } else if (*verify) {
            const auto report = relent::run_verify(load_config(verify_config));
            std::cout << report.render();
            return report.passed() ? kOk : kVerify;
        } else if (*weights) {
            nlohmann::json spec{{"family", scheme_name}, {"params", params_to_json(params)}};
            const relent::WeightScheme scheme = relent::make_scheme(spec);
            std::cout << relent::render_regularity(scheme, relent::regularity_diagnostics(scheme, horizon));
        } else if (*reduce) {
            const relent::ExperimentConfig cfg = load_config(reduce_config);
            const relent::Model model = relent::build_model(cfg);
            std::cout << relent::render_ensemble(relent::reduce_to_ensemble(model.rho, model.sigma));
            relent::SweepOptions opt;
            opt.force_reduction = true;
            std::cout << relent::render_csv(relent::run_sweep(cfg, opt));
        }
    } catch (const relent::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return kCapacity;
    } catch (const relent::VerificationFailure& e) {
        std::cerr << "verification failure: " << e.what() << '\n';
        return kVerify;
    } catch (const relent::Error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    }
    return kOk;
}
