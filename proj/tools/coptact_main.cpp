#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coptact/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"coptact: center-of-pressure tactile contact toolkit"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string config;
        std::vector<std::string> overrides;
        int threads = 1;
    };
    std::vector<std::pair<std::string, SubArgs>> subs;
    subs.reserve(5);
    for (const char* name : {"synth", "calibrate", "map", "sysid", "probe"}) {
        subs.emplace_back(name, SubArgs{});
    }
    const char* descriptions[] = {
        "generate a synthetic layout, contact dataset and manifest",
        "estimate taxel orientations from a calibration dataset",
        "convert between taxel readings and CoP contacts",
        "identify actuator parameters via Bayesian optimization",
        "linear probing, PCA and silhouette analysis of latent trajectories",
    };
    for (size_t i = 0; i < subs.size(); ++i) {
        CLI::App* sub = app.add_subcommand(subs[i].first, descriptions[i]);
        sub->add_option("-c,--config", subs[i].second.config, "JSON config file")->required();
        sub->add_option("--set", subs[i].second.overrides,
                        "override a config entry, e.g. --set contacts.count=100");
        sub->add_option("--threads", subs[i].second.threads, "worker threads (default 1)");
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& [name, args] : subs) {
        if (app.got_subcommand(name)) {
            return coptact::cli::run_subcommand(name, args.config, args.overrides, args.threads);
        }
    }
    return 1;
}
