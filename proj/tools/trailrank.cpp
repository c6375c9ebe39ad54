// trailrank: route descriptions, embedding ranking and cumulative-mean evaluation.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

#include "trailrank/pipeline.hpp"

using namespace trailrank;

int main(int argc, char** argv) {
    CLI::App app{"Describe walking routes, rank them against hiking queries and evaluate the rankings"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    bool force = false;
    int jobs = 0;
    std::uint64_t seed = 0;
    std::string provider;
    bool thin = false;
    std::size_t n_routes = 0;
    bool verbose = false;
    bool quiet = false;

    app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_flag("--force", force, "Rerun stages even when outputs are current");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));
    auto* seed_opt = app.add_option("--seed", seed, "Seed for the synthetic corpus and description word choices");
    app.add_option("--provider", provider, "Embedding provider")->check(CLI::IsMember({"reference", "remote"}));
    app.add_flag("--thin", thin, "Thin the curves CSV to at most 4096 log-spaced ranks per curve");
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"synth", "Write a synthetic corpus into <workdir>/corpus"},
        {"attributes", "Filter routes and compute their attributes"},
        {"describe", "Generate route descriptions"},
        {"embed", "Embed descriptions and queries into the vector cache"},
        {"rank", "Rank every description for every query"},
        {"evaluate", "Write cumulative-mean curves (CSV) and plots (SVG)"},
        {"all", "Run the whole chain"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        if (std::string_view(name) == "synth" || std::string_view(name) == "all") {
            sub->add_option("--routes", n_routes, "Number of synthetic routes");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        PipelineConfig config = config_path.empty() ? PipelineConfig{} : PipelineConfig::from_ini(config_path);
        config.apply_environment();
        if (jobs > 0) config.jobs = jobs;
        if (seed_opt->count() > 0) {
            config.synth.seed = seed;
            config.description.seed = seed;
        }
        if (provider == "reference") config.provider.kind = ProviderKind::Reference;
        if (provider == "remote") config.provider.kind = ProviderKind::Remote;
        if (thin) config.thin = true;
        if (n_routes > 0) config.synth.n_routes = n_routes;
        config.provider.validate();
        config.description.validate();

        Pipeline pipeline(std::move(config));
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "all") {
            pipeline.run_all(force);
        } else {
            pipeline.run(*stage_from_name(name), force);
        }
        return kExitOk;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    }
}
