#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ldplab/app.hpp"

namespace {

struct Flags {
    std::string config;
    std::string seed;
    unsigned jobs = 0;
    std::string out;
    std::string format;
    std::string input;
    std::string target;
};

ldplab::ConfigOverrides overrides_for(const std::string& command, const Flags& f) {
    ldplab::ConfigOverrides o;
    o[{"run", "command"}] = command;
    if (command == "repro") o[{"run", "target"}] = f.target;
    if (!f.seed.empty()) o[{"run", "seed"}] = f.seed;
    if (f.jobs) {
        o[{"run", "jobs"}] = std::to_string(f.jobs);
    } else if (const char* env = std::getenv("LDPLAB_JOBS"); env && *env) {
        o[{"run", "jobs"}] = env;
    }
    if (!f.out.empty()) o[{"run", "out"}] = f.out;
    if (!f.format.empty()) o[{"run", "format"}] = f.format;
    if (!f.input.empty()) o[{"conjugate", "input"}] = f.input;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ldplab: local large deviations and weak Gartner-Ellis duality toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ldplab::kVersion);
    Flags f;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "INI config or a manifest.json from an earlier run");
        sub->add_option("--seed", f.seed, "master seed (64-bit)");
        sub->add_option("--jobs", f.jobs, "worker threads (default: LDPLAB_JOBS, then config)")->check(CLI::Range(1u, 1024u));
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto* conj = app.add_subcommand("conjugate", "discrete Legendre-Fenchel conjugate of a CSV grid function");
    common(conj);
    conj->add_option("--input", f.input, "input CSV grid function");
    for (const char* name : {"wsff", "rate", "duality", "tightness"}) common(app.add_subcommand(name, std::string(name) + " computation"));
    auto* repro = app.add_subcommand("repro", "reproduce a worked example with assertions");
    common(repro);
    repro->add_option("target", f.target, "example1|example2a|example2b|example3")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ldplab::kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto o = overrides_for(command, f);
        const ldplab::RunConfig cfg = f.config.empty() ? ldplab::parse_config("", o) : ldplab::load_config_file(f.config, o);
        return ldplab::run(cfg);
    } catch (const ldplab::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ldplab::kExitConfig;
    }
}
