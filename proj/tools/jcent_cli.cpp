// jcent: simulate, validate, figures, flow.

#include <jcent/jcent.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

// Flags are collected as text and applied through RunConfig::set so that the
// command line and the config file share one parser and one set of messages.
struct FlagSet {
    std::map<std::string, std::optional<std::string>> values;

    void add(CLI::App& app, const std::string& key, const std::string& help) {
        auto& slot = values[key];
        app.add_option("--" + key, slot, help);
    }

    void apply(jcent::RunConfig& cfg) const {
        for (const auto& [key, v] : values)
            if (v) cfg.set(key, *v);
    }
};

void add_common(CLI::App& app, FlagSet& flags, std::string& config_path) {
    app.add_option("--config", config_path, "key=value config file; flags override it");
    flags.add(app, "alpha", "coherent amplitude (default 10)");
    flags.add(app, "g", "coupling (default 1)");
    flags.add(app, "omega", "field frequency (default 0)");
    flags.add(app, "n-qubits", "number of qubit/resonator pairs (default 2)");
    flags.add(app, "t-max", "scan horizon in gt units (default 6 pi alpha)");
    flags.add(app, "steps", "grid intervals (default t_max/0.02)");
    flags.add(app, "method", "exact|approx (default approx)");
    flags.add(app, "q3-variant", "general|literal (default general)");
    flags.add(app, "nu-max", "revival terms kept in the approximation");
    flags.add(app, "out", "output path (file, or directory for figures)");
    flags.add(app, "seed", "seed for randomized checks");
    flags.add(app, "threads", "worker threads (0 = all cores)");
}

jcent::RunConfig resolve(const FlagSet& flags, const std::string& config_path) {
    jcent::RunConfig cfg;
    if (!config_path.empty()) jcent::apply_config_file(config_path, cfg);
    flags.apply(cfg);
    cfg.validate();
    return cfg;
}

template <class F>
void with_output(const std::string& path, F&& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw jcent::Error(jcent::ErrorCode::io_failure, "cannot write " + path);
    body(out);
    if (!out) throw jcent::Error(jcent::ErrorCode::io_failure, "write to " + path + " failed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement dynamics of N qubits in independent Jaynes-Cummings cavities"};
    app.require_subcommand(1);

    std::string cfg_sim, cfg_val, cfg_fig, cfg_flow;
    FlagSet f_sim, f_val, f_fig, f_flow;
    auto* sim = app.add_subcommand("simulate", "time series CSV: gt,x,y,I1,I2,C_N,S");
    auto* val = app.add_subcommand("validate", "oracle-versus-approximation report");
    auto* fig = app.add_subcommand("figures", "CSV data for fig1|fig2|fig3|all");
    auto* flow = app.add_subcommand("flow", "entanglement flow diagnostics around the collapse centre");
    add_common(*sim, f_sim, cfg_sim);
    add_common(*val, f_val, cfg_val);
    add_common(*fig, f_fig, cfg_fig);
    add_common(*flow, f_flow, cfg_flow);
    std::string figure = "all";
    fig->add_option("--figure", figure, "fig1|fig2|fig3|all");
    int samples = 10000;
    val->add_option("--samples", samples, "random states for the separability geometry check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto cfg = resolve(f_sim, cfg_sim);
            with_output(cfg.out, [&](std::ostream& os) {
                const auto series = jcent::cmd_simulate(cfg, os);
                for (const auto& w : series.warnings) std::cerr << "warning: " << w << '\n';
            });
        } else if (val->parsed()) {
            const auto cfg = resolve(f_val, cfg_val);
            if (cfg.out.empty()) {
                jcent::cmd_validate(cfg, std::cout, nullptr, samples);
            } else {
                with_output(cfg.out, [&](std::ostream& os) { jcent::cmd_validate(cfg, std::cout, &os, samples); });
            }
        } else if (fig->parsed()) {
            const auto cfg = resolve(f_fig, cfg_fig);
            for (const auto& p : jcent::cmd_figures(figure, cfg, cfg.out.empty() ? "." : cfg.out))
                std::cout << p.string() << '\n';
        } else if (flow->parsed()) {
            const auto cfg = resolve(f_flow, cfg_flow);
            jcent::cmd_flow(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
