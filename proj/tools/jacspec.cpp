// jacspec command-line front end.
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jacspec/report.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Args {
    std::string config;
    std::optional<long> n_max;
    std::optional<double> tol;
    std::optional<long> N;
    std::string json;
    std::string csv;
    bool timing = false;
};

void add_common(CLI::App* sub, Args& a) {
    sub->add_option("--config", a.config, "run configuration (TOML-like)")->required()->check(CLI::ExistingFile);
    sub->add_option("--n-max", a.n_max, "scan horizon for criteria and defect recursions")->check(CLI::Range(16L, 10000000L));
    sub->add_option("--tol", a.tol, "survival tolerance of the index ladders")->check(CLI::PositiveNumber);
    sub->add_option("--json", a.json, "report path (default: config output.json, else stdout)");
    sub->add_option("--csv", a.csv, "spectrum CSV path (default: config output.csv, else stdout)");
    sub->add_option("--N", a.N, "truncation size for the spectrum")->check(CLI::PositiveNumber);
    sub->add_flag("--timing", a.timing, "print wall time to stderr");
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) return false;
    out << text;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace jacspec;
    CLI::App app{"Deficiency indices and spectral criteria for block Jacobi matrices"};
    app.require_subcommand(1);
    Args args;
    struct Cmd {
        const char* name;
        const char* help;
        std::vector<Stage> stages;
    };
    const std::vector<Cmd> cmds = {
        {"build", "dump the first blocks of the matrix", {Stage::Build}},
        {"criteria", "evaluate every applicable criterion", {Stage::Criteria}},
        {"index", "estimate the deficiency indices", {Stage::Index}},
        {"spectrum", "eigenvalues of a finite truncation", {Stage::Spectrum}},
        {"report", "all of the above", {Stage::Build, Stage::Criteria, Stage::Index, Stage::Spectrum}},
    };
    std::vector<CLI::App*> subs;
    for (const Cmd& c : cmds) {
        CLI::App* s = app.add_subcommand(c.name, c.help);
        add_common(s, args);
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const Cmd& cmd = cmds[which];

    RunConfig cfg;
    try {
        cfg = load_config(args.config);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (args.n_max) cfg.n_max = *args.n_max;
    if (args.tol) cfg.tol = *args.tol;
    if (args.N) cfg.spectrum_N = *args.N;
    if (!args.json.empty()) cfg.json_path = args.json;
    if (!args.csv.empty()) cfg.csv_path = args.csv;

    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome out = run(cfg, cmd.stages, cmd.name);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string json = out.report.dump(2) + "\n";
    const bool spectrum_only = cmd.stages.size() == 1 && cmd.stages[0] == Stage::Spectrum;
    if (!out.slices.empty()) {
        std::ostringstream csv;
        write_spectrum_csv(csv, out.slices);
        if (!cfg.csv_path.empty()) {
            if (!write_file(cfg.csv_path, csv.str())) {
                std::cerr << "cannot write " << cfg.csv_path << '\n';
                return kExitConfig;
            }
        } else if (spectrum_only) {
            std::cout << csv.str();
        }
    }
    if (!cfg.json_path.empty()) {
        if (!write_file(cfg.json_path, json)) {
            std::cerr << "cannot write " << cfg.json_path << '\n';
            return kExitConfig;
        }
    } else if (!(spectrum_only && cfg.csv_path.empty())) {
        std::cout << json;
    }
    if (args.timing) std::cerr << "wall time: " << seconds << " s\n";
    for (const auto& e : out.report["errors"]) std::cerr << "error: " << e["message"].get<std::string>() << '\n';
    return out.numeric_failure ? kExitNumeric : 0;
}
