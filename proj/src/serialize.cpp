#include "qstar/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

using nlohmann::json;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json stats_json(const SummaryStats& s) {
  return {{"mean", num(s.mean)},     {"std", num(s.std)}, {"min", num(s.min)}, {"q25", num(s.q25)},
          {"median", num(s.median)}, {"q75", num(s.q75)}, {"max", num(s.max)}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  // Row per vertex (column of the q x N storage).
  json rows = json::array();
  for (Index c = 0; c < m.cols(); ++c) {
    json row = json::array();
    for (Index r = 0; r < m.rows(); ++r) row.push_back(num(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

json to_json(const ModelParams& params, Index num_edges) {
  return {{"omega_in", num(params.omega_in)},
          {"omega_out", num(params.omega_out)},
          {"alpha", num(params.alpha(num_edges))},
          {"beta", num(params.beta())}};
}

json to_json(const EmResult& fit, Index num_edges, bool include_marginals) {
  json j = {{"q", fit.state.q()},
            {"params", to_json(fit.params, num_edges)},
            {"converged", fit.converged},
            {"factorized", fit.factorized},
            {"sweeps_used", fit.sweeps_used},
            {"em_iterations", fit.em_iterations},
            {"bethe_free_energy", num(fit.bethe_free_energy)},
            {"seed", fit.seed},
            {"restart", fit.restart}};
  if (include_marginals) {
    j["marginals"] = matrix_json(fit.marginals().psi);
    std::vector<json> theta;
    for (Index s = 0; s < fit.marginals().theta.size(); ++s) theta.push_back(num(fit.marginals().theta[s]));
    j["theta"] = theta;
  }
  return j;
}

json to_json(const CriteriaRecord& r) {
  return {{"q", r.q_input},
          {"q_eff", r.q_effective},
          {"bethe_f", num(r.bethe_f)},
          {"modularity", num(r.modularity)},
          {"mdl", num(r.mdl_two_level)},
          {"e_bayes", num(r.e_bayes)},
          {"e_gibbs", num(r.e_gibbs)},
          {"e_map", num(r.e_map)},
          {"e_training", num(r.e_training)},
          {"omega_in", num(r.omega_in)},
          {"omega_out", num(r.omega_out)},
          {"alpha", num(r.alpha)},
          {"beta", num(r.beta)},
          {"factorized", r.factorized},
          {"converged", r.converged}};
}

json to_json(const SpectralReport& report) {
  json values = json::array();
  for (double v : report.eigenvalues) values.push_back(num(v));
  json imag = json::array();
  for (double v : report.imag) imag.push_back(num(v));
  return {{"matrix_kind", to_string(report.kind)},
          {"eigenvalues", values},
          {"imag", imag},
          {"band_edge", num(report.band_edge)},
          {"band_edge_note", report.band_edge_note},
          {"isolated", report.isolated},
          {"q_star", report.q_star},
          {"k_requested", report.k_requested},
          {"spectral_radius", num(report.spectral_radius)},
          {"converged", report.converged}};
}

json to_json(const GreedyResult& result, bool include_partition) {
  json j = {{"q_star", result.q_star},
            {"objective", num(result.objective)},
            {"passes", result.passes},
            {"seed", result.seed}};
  if (include_partition) j["labels"] = result.partition.labels;
  return j;
}

json to_json(const GreedySummary& summary) {
  json runs = json::array();
  for (const auto& r : summary.runs) runs.push_back(to_json(r, false));
  return {{"method", to_string(summary.method)},
          {"runs", runs},
          {"q_star", stats_json(summary.q_star)},
          {"objective", stats_json(summary.objective)}};
}

json to_json(const Selection& selection) {
  return {{"q", selection.q ? json(*selection.q) : json(nullptr)}, {"at_boundary", selection.at_boundary}};
}

json to_json(const SweepReport& report, bool include_marginals) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json j = to_json(row.record);
    j["beta0_ref"] = num(row.beta0_ref);
    j["betastar_ref"] = num(row.betastar_ref);
    j["sweeps_used"] = row.sweeps_used;
    j["seed"] = row.seed;
    if (!row.error.empty()) j["error"] = row.error;
    if (include_marginals && row.marginals) j["marginals"] = matrix_json(row.marginals->psi);
    rows.push_back(std::move(j));
  }
  json selections = json::object();
  for (Criterion c : all_criteria()) {
    selections[to_string(c)] = {{"argopt", to_json(select_q(report.rows, c, SelectionRule::argopt))},
                                {"elbow", to_json(select_q(report.rows, c, SelectionRule::elbow))}};
  }
  json j = {{"network", {{"n", report.n}, {"num_edges", report.num_edges}, {"source", report.source}}},
            {"seed", report.seed},
            {"q_min", report.q_min},
            {"q_max", report.q_max},
            {"rows", rows},
            {"selections", selections}};
  json spectral = json::object();
  if (report.modularity_spectrum) spectral["modularity"] = to_json(*report.modularity_spectrum);
  if (report.nb_spectrum) spectral["non_backtracking"] = to_json(*report.nb_spectrum);
  if (!report.spectral_error.empty()) spectral["error"] = report.spectral_error;
  j["spectral"] = spectral;
  json greedy = json::object();
  if (report.louvain) greedy["louvain"] = to_json(*report.louvain);
  if (report.infomap) greedy["infomap"] = to_json(*report.infomap);
  j["greedy"] = greedy;
  return j;
}

const char* rows_csv_header() {
  return "q,q_eff,bethe_f,modularity,mdl,e_bayes,e_gibbs,e_map,e_training,alpha,beta,beta0_ref,betastar_ref,"
         "factorized";
}

void write_rows_csv(const SweepReport& report, std::ostream& out) {
  out << rows_csv_header() << '\n';
  for (const auto& row : report.rows) {
    const auto& r = row.record;
    out << r.q_input << ',' << r.q_effective;
    for (double x : {r.bethe_f, r.modularity, r.mdl_two_level, r.e_bayes, r.e_gibbs, r.e_map, r.e_training, r.alpha,
                     r.beta, row.beta0_ref, row.betastar_ref})
      out << ',' << csv_number(x);
    out << ',' << (r.factorized ? 1 : 0) << '\n';
  }
}

std::vector<SweepRow> read_rows_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != rows_csv_header()) throw ParseError("rows CSV: unexpected header");
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 14) throw ParseError("rows CSV line " + std::to_string(line_no) + ": expected 14 fields");
    auto real = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw ParseError("rows CSV line " + std::to_string(line_no) + ": bad number '" + cells[i] + "'");
      return v;
    };
    SweepRow row;
    auto& r = row.record;
    r.q_input = static_cast<int>(real(0));
    r.q_effective = static_cast<int>(real(1));
    r.bethe_f = real(2);
    r.modularity = real(3);
    r.mdl_two_level = real(4);
    r.e_bayes = real(5);
    r.e_gibbs = real(6);
    r.e_map = real(7);
    r.e_training = real(8);
    r.alpha = real(9);
    r.beta = real(10);
    row.beta0_ref = real(11);
    row.betastar_ref = real(12);
    r.factorized = real(13) != 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (int l : labels) out << l << '\n';
  if (!out) throw IoError("write failure on " + path.string());
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace qstar
