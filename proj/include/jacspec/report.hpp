#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "jacspec/config.hpp"
#include "jacspec/criteria.hpp"
#include "jacspec/indices.hpp"
#include "jacspec/spectra.hpp"

namespace jacspec {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Stage { Build, Criteria, Index, Spectrum };

nlohmann::ordered_json to_json(const CriterionReport& r);
nlohmann::ordered_json to_json(const IndexEstimate& e);
nlohmann::ordered_json to_json(const SeriesVerdict& v);
nlohmann::ordered_json spectrum_summary(const SpectrumSlice& s, int p);
nlohmann::ordered_json block_json(const ScaledBlock& b);

/// Every criterion that applies to the configured family, in a fixed order. A criterion that throws
/// is reported Inconclusive and its message appended to `errors`.
std::vector<CriterionReport> run_criteria(const RunConfig& cfg, const BlockJacobiMatrix& J,
                                          std::vector<std::string>* errors = nullptr);

IndexOptions index_options(const RunConfig& cfg);

struct RunOutcome {
    nlohmann::ordered_json report;
    std::vector<SpectrumSlice> slices;
    bool numeric_failure = false;  ///< some stage raised; the report is partial
};

/// Runs the stages in order. Stage failures are recorded under "errors" and do not stop later stages.
RunOutcome run(const RunConfig& cfg, const std::vector<Stage>& stages, const std::string& command);

}  // namespace jacspec
