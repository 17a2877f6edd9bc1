#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jacspec/generators.hpp"
#include "jacspec/jacobi.hpp"

namespace jacspec {

/// Parsed form of a TOML-like document: tables, strings, numbers, booleans, arrays.
struct ConfigDocument {
    nlohmann::ordered_json root = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, int>> lines;  ///< dotted key path -> source line

    int line_of(const std::string& path) const;  ///< 0 when unknown
};

/// Throws Error(Config, "line N: ...") on syntax errors and duplicate keys.
ConfigDocument parse_document(const std::string& text);

struct RunConfig {
    std::string family;
    int p = 1;
    int p1 = 0;
    double c = 1.0;
    InteractionModel model;
    std::optional<PerturbationData> perturbation;
    std::optional<BlockSequence> general_diag;
    std::optional<BlockSequence> general_offdiag;

    long n_max = 10000;
    std::size_t dense_cap = kDefaultDenseCap;
    double tol = 1e-8;
    std::vector<std::complex<double>> z_points = {{0, 1}, {0, -1}, {1, 1}};
    std::vector<std::size_t> ladder;
    int ladder_max_pow = 12;

    double s = 1.0;       ///< power-mean exponent
    double q = 1.0;       ///< Schatten exponent
    long N_start = 0;     ///< first index of the sup scans
    long spectrum_N = 64;
    long build_blocks = 4;

    std::string json_path;
    std::string csv_path;

    nlohmann::ordered_json echo;  ///< the parsed document, for the report
};

/// Parses and validates; errors name the offending field and line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

const std::vector<std::string>& family_names();

/// Matrix of the configured family.
BlockJacobiMatrix build_matrix(const RunConfig& cfg);

}  // namespace jacspec
