#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evc/config.hpp"
#include "evc/error.hpp"
#include "evc/pipeline.hpp"
#include "evc/service.hpp"

// after Eigen: <resolv.h> defines a `_res` macro that clashes with it
#include <httplib.h>

namespace {

struct RunFlags {
    std::string config;
    std::string out;
    std::vector<std::string> policies;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void report_error(const std::exception &e) {
    if (const auto *v = dynamic_cast<const evc::ValidationError *>(&e)) {
        for (const auto &d : v->diagnostics()) {
            std::cerr << "evc: error: " << d << '\n';
        }
        return;
    }
    std::cerr << "evc: error: " << e.what() << '\n';
}

int run_pipeline(const std::string &config_path, const RunFlags &flags) {
    auto cfg = evc::load_config(config_path);
    if (!flags.out.empty()) {
        cfg.output_dir = flags.out;
    }
    if (flags.seed) {
        cfg.seed = *flags.seed;
    }
    if (!flags.policies.empty()) {
        cfg.policies.clear();
        for (const auto &p : flags.policies) {
            const auto policy = evc::parse_policy(p);
            if (!policy) {
                throw evc::ConfigError("--policy: expected earliest, latest or distributed, got '" +
                                       p + "'");
            }
            if (std::find(cfg.policies.begin(), cfg.policies.end(), *policy) ==
                cfg.policies.end()) {
                cfg.policies.push_back(*policy);
            }
        }
    }
    const auto result = evc::run(cfg);
    if (!flags.quiet) {
        std::cout << result.summary << '\n';
        for (const auto &a : result.artifacts) {
            std::cout << "wrote " << a.string() << '\n';
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Commuter electrification scenarios: mode choice, charging demand and grid "
                 "capacity headroom"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto *run = app.add_subcommand("run", "Run the batch pipeline for a config file");
    run->add_option("--config", run_flags.config, "Config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_flags.out, "Output directory (overrides config)");
    run->add_option("--policy", run_flags.policies, "earliest|latest|distributed (repeatable)")
        ->take_all();
    run->add_option("--seed", run_flags.seed, "Scenario seed (overrides config)");
    run->add_flag("--quiet", run_flags.quiet, "Print nothing on success");

    std::string validate_path;
    auto *validate = app.add_subcommand("validate", "Check a config and the files it references");
    validate->add_option("--config", validate_path, "Config JSON")->required();

    RunFlags demo_flags;
    demo_flags.out = "evc-demo";
    auto *demo = app.add_subcommand("demo", "Run the bundled demo end to end");
    demo->add_option("--out", demo_flags.out, "Output directory")->capture_default_str();
    demo->add_option("--policy", demo_flags.policies, "earliest|latest|distributed (repeatable)")
        ->take_all();
    demo->add_option("--seed", demo_flags.seed, "Scenario seed (overrides config)");
    demo->add_flag("--quiet", demo_flags.quiet, "Print nothing on success");

    std::string serve_config = evc::demo_config_path().string();
    int port = 8080;
    std::string host = "127.0.0.1";
    auto *serve = app.add_subcommand("serve", "Start the JSON API");
    serve->add_option("--data", serve_config, "Config JSON describing the datasets")
        ->capture_default_str();
    serve->add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "Bind address")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return run_pipeline(run_flags.config, run_flags);
        }
        if (*demo) {
            return run_pipeline(evc::demo_config_path().string(), demo_flags);
        }
        if (*validate) {
            const auto diagnostics = evc::validate_config(validate_path);
            for (const auto &d : diagnostics) {
                std::cout << d << '\n';
            }
            if (diagnostics.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            return 1;
        }
        if (*serve) {
            evc::Service service;
            service.load_async(evc::load_config(serve_config));
            httplib::Server server;
            service.mount(server);
            std::cerr << "evc: listening on http://" << host << ':' << port << '\n';
            if (!server.listen(host, port)) {
                std::cerr << "evc: error: cannot listen on " << host << ':' << port << '\n';
                return 1;
            }
            return 0;
        }
    } catch (const std::exception &e) {
        report_error(e);
        return 1;
    }
    return 0;
}
