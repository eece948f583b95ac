#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "qstar/bp.hpp"
#include "qstar/greedy.hpp"
#include "qstar/harness.hpp"
#include "qstar/spectral.hpp"

namespace qstar {

// JSON views of the result types. Non-finite numbers become null.

nlohmann::json to_json(const ModelParams& params, Index num_edges);
nlohmann::json to_json(const EmResult& fit, Index num_edges, bool include_marginals);
nlohmann::json to_json(const CriteriaRecord& record);
nlohmann::json to_json(const SpectralReport& report);
nlohmann::json to_json(const GreedyResult& result, bool include_partition);
nlohmann::json to_json(const GreedySummary& summary);
nlohmann::json to_json(const Selection& selection);
nlohmann::json to_json(const SweepReport& report, bool include_marginals);

/// Header of the per-q CSV table.
const char* rows_csv_header();

/// One line per row, numbers printed with 17 significant digits, "nan" for
/// missing values.
void write_rows_csv(const SweepReport& report, std::ostream& out);

/// Parses a table written by write_rows_csv back into rows (criteria,
/// parameters, and flags; references are restored, errors are not).
std::vector<SweepRow> read_rows_csv(std::istream& in);

/// One label per line.
void write_labels(const std::vector<int>& labels, const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace qstar
