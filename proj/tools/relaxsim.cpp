// relaxsim: command-line front end for the relaxation sweeps, trajectory dumps and self-checks

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relax/config.hpp"
#include "relax/error.hpp"
#include "relax/harness.hpp"
#include "relax/validate.hpp"

namespace {

using relax::config::Command;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitValidation = 3;

struct Subcommand {
    Command command;
    CLI::App* app{nullptr};
    std::string config_path;
    std::map<std::string, std::string> values;
};

const char* describe(Command c) {
    switch (c) {
        case Command::sweep_nonlocal: return "relaxation-time sweep over N for a nonlocal coupling";
        case Command::sweep_ladder: return "relaxation-time sweep over n for the Hamming-weight ladder";
        case Command::dicke: return "Dicke superradiance intensity curves and peak metrics";
        case Command::simulate: return "single reduced-variable trajectory";
        case Command::validate: return "oracle, invariant and closed-form self-checks (JSON report)";
    }
    return "";
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw relax::ConfigError("cannot open output file '" + path + "'");
    out << text;
    if (!out) throw relax::ConfigError("failed writing output file '" + path + "'");
}

int execute(const Subcommand& sub) {
    relax::config::Config config(sub.command);
    if (!sub.config_path.empty()) config.load_file(sub.config_path);
    for (const auto& [key, value] : sub.values)
        if (sub.app->count("--" + key) > 0) config.set(key, value);

    const std::string output = config.get("output");
    if (sub.command == Command::validate) {
        const long long jobs = relax::config::parse_int("jobs", config.get("jobs"));
        if (jobs < 1) throw relax::ConfigError("jobs: must be at least 1");
        const auto report = relax::validate::run_all(static_cast<std::size_t>(jobs));
        write_output(output, report.to_json());
        return report.pass() ? 0 : kExitValidation;
    }
    write_output(output, relax::harness::run(config));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal relaxation of oracle, ladder and Dicke models under Born-Markov-secular dynamics"};
    app.require_subcommand(1);

    std::vector<Subcommand> subs;
    subs.reserve(5);
    for (auto c : {Command::sweep_nonlocal, Command::sweep_ladder, Command::dicke, Command::simulate,
                   Command::validate}) {
        subs.push_back({c, nullptr, {}, {}});
        auto& s = subs.back();
        s.app = app.add_subcommand(std::string(relax::config::to_string(c)), describe(c));
        s.app->add_option("--config", s.config_path, "key=value file providing defaults");
        for (const auto& k : relax::config::keys(c)) s.app->add_option("--" + k.key, s.values[k.key], k.help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    for (const auto& s : subs) {
        if (!s.app->parsed()) continue;
        try {
            return execute(s);
        } catch (const relax::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        } catch (const relax::Error& e) {
            std::cerr << "numerical failure: " << e.what() << "\n";
            return kExitNumerical;
        } catch (const std::exception& e) {
            std::cerr << "failure: " << e.what() << "\n";
            return kExitNumerical;
        }
    }
    return kExitConfig;
}
