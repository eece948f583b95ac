// qstar: command-line front end for community-count estimation.
//
//   qstar generate  --model sbm --n 2000 --q 2 --c 6 --eps 0.5 --seed 7
//   qstar infer     --input g.txt --q 3
//   qstar sweep     --input g.txt --qmax 6
//   qstar spectral  --input g.txt --matrix nb
//   qstar greedy    --input g.txt --method infomap --runs 30
//   qstar alluvial  --input g.txt --qs 2,3,4
//
// Every subcommand accepts --config FILE, a JSON object whose keys are flag
// names (without dashes); a nested object named after the subcommand holds
// keys for that subcommand only. Command-line flags override the file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qstar/alluvial.hpp"
#include "qstar/bp.hpp"
#include "qstar/criteria.hpp"
#include "qstar/errors.hpp"
#include "qstar/generators.hpp"
#include "qstar/graph.hpp"
#include "qstar/greedy.hpp"
#include "qstar/harness.hpp"
#include "qstar/serialize.hpp"
#include "qstar/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kNumerical = 4 };

// All numeric defaults in one place.
struct Defaults {
  std::uint64_t seed = 1;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  // generate
  std::string model = "sbm";
  qstar::Index n = 1000;
  int q_planted = 2;
  double c = 6.0;
  double eps = 0.5;
  double exponent = 2.0;
  double t_min = 3.0;
  double t_max = 100.0;
  // inference
  int q = 2;
  int qmin = 1;
  int qmax = 0;  // 0: min(30, N/10)
  qstar::EmOptions em;
  // spectral
  std::string matrix = "both";
  qstar::Index k = 0;  // 0: min(N/2, 30)
  double alpha = 1.0;
  int bins = 0;
  // greedy
  std::string method = "both";
  int runs = 30;
};

struct Common {
  std::string input;
  std::string output = ".";
  std::uint64_t seed = 1;
  int jobs = 1;
  bool largest_component = false;
};

void add_common(CLI::App* sub, Common& common, bool needs_input) {
  if (needs_input) sub->add_option("--input,-i", common.input, "edge-list file")->required()->check(CLI::ExistingFile);
  sub->add_option("--output-dir,-o", common.output, "directory for output files");
  sub->add_option("--seed", common.seed, "random seed (echoed into every output)");
  sub->add_option("--jobs", common.jobs, "worker threads");
  if (needs_input)
    sub->add_flag("--largest-component", common.largest_component, "restrict to the largest connected component");
}

void add_em(CLI::App* sub, qstar::EmOptions& em) {
  sub->add_option("--restarts", em.restarts, "EM restarts per q (best Bethe free energy kept)");
  sub->add_option("--max-sweeps", em.max_sweeps, "BP sweeps per E-step");
  sub->add_option("--max-em-iterations", em.max_em_iterations, "EM iterations");
  sub->add_option("--max-unsettled", em.max_unsettled_e_steps,
                  "stop EM after this many consecutive E-steps that reach --max-sweeps");
  sub->add_option("--max-stalled", em.max_stalled_sweeps,
                  "end an E-step after this many sweeps without a new smallest residual (0: off)");
  sub->add_option("--message-tol", em.message_tol, "BP message residual tolerance");
  sub->add_option("--param-tol", em.param_tol, "relative parameter tolerance");
  sub->add_option("--factorized-tol", em.factorized_tol, "tolerance of the factorized-state test");
  sub->add_option("--noise", em.init_noise, "initial message perturbation");
  sub->add_option("--damping", em.damping, "initial BP damping");
  sub->add_flag("--frozen-params", em.frozen_params, "fix alpha = 1, beta = beta* (no parameter learning)");
}

qstar::Graph load_graph(const Common& common) {
  qstar::Graph g = qstar::load_edge_list(common.input);
  return common.largest_component ? qstar::largest_component(g) : g;
}

json network_json(const qstar::Graph& g, const Common& common) {
  return {{"n", g.num_vertices()},
          {"num_edges", g.num_edges()},
          {"source", common.input},
          {"largest_component", common.largest_component}};
}

fs::path output_dir(const Common& common) {
  std::error_code ec;
  fs::create_directories(common.output, ec);
  if (ec) throw qstar::IoError("cannot create " + common.output + ": " + ec.message());
  return common.output;
}

// Rewrites "--config FILE" into flags inserted right after the subcommand
// name, so that flags given explicitly later on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      erase = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + erase));
    std::ifstream in(path);
    if (!in) throw qstar::IoError("cannot open config " + path);
    json config;
    try {
      in >> config;
    } catch (const json::exception& e) {
      throw qstar::ParseError("config " + path + ": " + e.what());
    }
    if (!config.is_object()) throw qstar::ParseError("config " + path + ": expected a JSON object");
    const std::string sub = args.size() > 1 ? args[1] : "";
    std::vector<std::string> flags;
    auto add = [&](const std::string& key, const json& value) {
      if (value.is_boolean()) {
        if (value.get<bool>()) flags.push_back("--" + key);
        return;
      }
      flags.push_back("--" + key);
      if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
        flags.push_back(joined);
      } else {
        flags.push_back(value.is_string() ? value.get<std::string>() : value.dump());
      }
    };
    for (const auto& [key, value] : config.items())
      if (!value.is_object()) add(key, value);
    if (config.contains(sub) && config[sub].is_object())
      for (const auto& [key, value] : config[sub].items()) add(key, value);
    args.insert(args.begin() + 2, flags.begin(), flags.end());
    break;
  }
  return args;
}

int run(int argc, char** argv) {
  const Defaults defaults;
  CLI::App app{"Estimate the number of communities in a network."};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "JSON file with flag values (flags on the command line take precedence)");

  Common common;
  common.seed = defaults.seed;
  common.jobs = defaults.jobs;

  // generate
  auto* gen = app.add_subcommand("generate", "sample a planted-partition network");
  std::string model = defaults.model;
  qstar::Index n = defaults.n;
  int q_planted = defaults.q_planted;
  double c = defaults.c, eps = defaults.eps;
  double exponent = defaults.exponent, t_min = defaults.t_min, t_max = defaults.t_max;
  add_common(gen, common, false);
  gen->add_option("--model", model, "sbm or dcsbm")->check(CLI::IsMember({"sbm", "dcsbm"}));
  gen->add_option("--n", n, "vertex count");
  gen->add_option("--q", q_planted, "planted cluster count");
  gen->add_option("--c", c, "average degree (sbm)");
  gen->add_option("--eps", eps, "omega_out / omega_in");
  gen->add_option("--exponent", exponent, "power-law exponent of the propensities (dcsbm)");
  gen->add_option("--t-min", t_min, "smallest propensity (dcsbm)");
  gen->add_option("--t-max", t_max, "largest propensity (dcsbm)");

  // infer
  auto* infer = app.add_subcommand("infer", "fit the block model at one q");
  qstar::EmOptions em = defaults.em;
  int q = defaults.q;
  bool with_marginals = false;
  add_common(infer, common, true);
  add_em(infer, em);
  infer->add_option("--q", q, "number of clusters");
  infer->add_flag("--marginals", with_marginals, "include vertex marginals in the JSON output");

  // sweep
  auto* sw = app.add_subcommand("sweep", "fit and score every q in a range");
  int qmin = defaults.qmin, qmax = defaults.qmax, runs = defaults.runs;
  double alpha = defaults.alpha;
  qstar::Index k = defaults.k;
  bool no_greedy = false, no_spectral = false;
  add_common(sw, common, true);
  add_em(sw, em);
  sw->add_option("--qmin", qmin, "smallest q");
  sw->add_option("--qmax", qmax, "largest q (0: min(30, N/10))");
  sw->add_option("--runs", runs, "greedy runs per method");
  sw->add_option("--alpha", alpha, "resolution of the modularity column and of the greedy modularity runs");
  sw->add_option("--k", k, "eigenvalues to compute (0: min(N/2, 30))");
  sw->add_flag("--no-greedy", no_greedy, "skip the greedy baselines");
  sw->add_flag("--no-spectral", no_spectral, "skip the spectral estimates");
  sw->add_flag("--marginals", with_marginals, "include vertex marginals in the JSON output");

  // spectral
  auto* spec = app.add_subcommand("spectral", "count isolated eigenvalues");
  std::string matrix = defaults.matrix;
  int bins = defaults.bins;
  add_common(spec, common, true);
  spec->add_option("--matrix", matrix, "mod, nb, or both")->check(CLI::IsMember({"mod", "nb", "both"}));
  spec->add_option("--k", k, "eigenvalues to compute (0: min(N/2, 30))");
  spec->add_option("--alpha", alpha, "resolution of the modularity matrix");
  spec->add_option("--histogram", bins, "also write the full modularity spectrum histogram with this many bins");

  // greedy
  auto* greedy = app.add_subcommand("greedy", "greedy modularity / map-equation baselines");
  std::string method = defaults.method;
  add_common(greedy, common, true);
  greedy->add_option("--method", method, "louvain, infomap, or both")
      ->check(CLI::IsMember({"louvain", "infomap", "both"}));
  greedy->add_option("--runs", runs, "independent runs");
  greedy->add_option("--alpha", alpha, "modularity resolution (louvain)");

  // alluvial
  auto* alluvial = app.add_subcommand("alluvial", "export partitions at several q for alluvial diagrams");
  std::vector<int> qs{2, 3, 4};
  add_common(alluvial, common, true);
  add_em(alluvial, em);
  alluvial->add_option("--qs", qs, "q values")->delimiter(',');

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const qstar::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const qstar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  // CLI11 takes the arguments without the program name, in reverse order.
  args.erase(args.begin());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  em.seed = common.seed;
  em.jobs = common.jobs;

  if (gen->parsed()) {
    const fs::path dir = output_dir(common);
    std::pair<qstar::Graph, qstar::Partition> sample;
    json meta = {{"model", model}, {"n", n}, {"q", q_planted}, {"eps", eps}, {"seed", common.seed}};
    if (model == "sbm") {
      const auto s = qstar::SbmSpec::from_average_degree(n, q_planted, c, eps);
      sample = qstar::generate_sbm(s, common.seed);
      meta["c"] = c;
      meta["omega_in"] = s.omega_in;
      meta["omega_out"] = s.omega_out;
    } else {
      qstar::Rng rng(qstar::derive_seed(common.seed, 0));
      auto props = qstar::power_law_propensities(n, exponent, t_min, t_max, rng);
      const auto s = qstar::DcSbmSpec::with_expected_degrees(std::move(props), q_planted, eps);
      sample = qstar::generate_dcsbm(s, common.seed);
      meta["exponent"] = exponent;
      meta["t_min"] = t_min;
      meta["t_max"] = t_max;
      meta["omega_in"] = s.omega_in;
      meta["omega_out"] = s.omega_out;
    }
    qstar::write_edge_list(sample.first, dir / "graph.txt");
    qstar::write_labels(sample.second.labels, dir / "labels.txt");
    meta["num_edges"] = sample.first.num_edges();
    qstar::write_json(meta, dir / "generate.json");
    std::cout << "wrote " << (dir / "graph.txt").string() << " (N=" << sample.first.num_vertices()
              << ", L=" << sample.first.num_edges() << ", seed=" << common.seed << ")\n";
    return kOk;
  }

  const qstar::Graph g = load_graph(common);
  const fs::path dir = output_dir(common);

  if (infer->parsed()) {
    const qstar::EmResult fit = qstar::em_fit(g, q, em);
    json out = {{"network", network_json(g, common)},
                {"seed", common.seed},
                {"fit", qstar::to_json(fit, g.num_edges(), with_marginals)},
                {"criteria", qstar::to_json(qstar::evaluate_criteria(g, fit))}};
    qstar::write_json(out, dir / "infer.json");
    std::cout << "q=" << q << " converged=" << fit.converged << " factorized=" << fit.factorized
              << " bethe_f=" << fit.bethe_free_energy << " seed=" << common.seed << '\n';
    return kOk;
  }

  if (sw->parsed()) {
    qstar::SweepConfig config;
    config.q_min = qmin;
    config.q_max = qmax;
    config.em = em;
    config.modularity_alpha = alpha;
    config.greedy_alpha = alpha;
    config.run_greedy = !no_greedy;
    config.run_spectral = !no_spectral;
    config.greedy_runs = runs;
    config.spectral.k = k;
    config.keep_marginals = with_marginals;
    config.jobs = common.jobs;
    config.seed = common.seed;
    config.source = common.input;
    const qstar::SweepReport report = qstar::sweep(g, config);
    std::ostringstream csv;
    qstar::write_rows_csv(report, csv);
    qstar::write_text(dir / "sweep.csv", csv.str());
    qstar::write_json(qstar::to_json(report, with_marginals), dir / "sweep.json");
    std::cout << csv.str();
    if (report.modularity_spectrum && report.nb_spectrum)
      std::cout << "q_star_mod=" << report.modularity_spectrum->q_star << " q_star_nb=" << report.nb_spectrum->q_star
                << '\n';
    std::cout << "seed=" << common.seed << '\n';
    return kOk;
  }

  if (spec->parsed()) {
    qstar::SpectralOptions options;
    options.k = k;
    options.krylov.seed = common.seed;
    json out = {{"network", network_json(g, common)}, {"seed", common.seed}};
    if (matrix != "nb") {
      const auto r = qstar::modularity_eigs(g, alpha, options);
      out["modularity"] = qstar::to_json(r);
      std::cout << "modularity q_star=" << r.q_star << '\n';
    }
    if (matrix != "mod") {
      const auto r = qstar::nb_eigs(g, options);
      out["non_backtracking"] = qstar::to_json(r);
      std::cout << "non_backtracking q_star=" << r.q_star << '\n';
    }
    if (bins > 0) {
      std::ostringstream hist;
      qstar::write_histogram_csv(qstar::modularity_spectrum_histogram(g, alpha, bins), hist);
      qstar::write_text(dir / "spectrum_histogram.csv", hist.str());
    }
    qstar::write_json(out, dir / "spectral.json");
    return kOk;
  }

  if (greedy->parsed()) {
    json out = {{"network", network_json(g, common)}, {"seed", common.seed}};
    for (auto m : {qstar::GreedyMethod::louvain, qstar::GreedyMethod::infomap}) {
      if (method != "both" && method != qstar::to_string(m)) continue;
      const auto summary = qstar::greedy_stats(g, m, runs, common.seed, alpha, common.jobs);
      out[qstar::to_string(m)] = qstar::to_json(summary);
      qstar::write_labels(summary.runs.front().partition.labels, dir / (qstar::to_string(m) + "_labels.txt"));
      std::cout << qstar::to_string(m) << " q_star mean=" << summary.q_star.mean << " std=" << summary.q_star.std
                << '\n';
    }
    qstar::write_json(out, dir / "greedy.json");
    return kOk;
  }

  if (alluvial->parsed()) {
    std::vector<qstar::Marginals> marginals;
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    for (int layer_q : qs) {
      qstar::EmOptions layer = em;
      layer.seed = qstar::derive_seed(common.seed, static_cast<std::uint64_t>(layer_q));
      marginals.push_back(qstar::em_fit(g, layer_q, layer).marginals());
    }
    qstar::export_alluvial(qstar::build_bundle(marginals), dir);
    std::cout << "wrote " << qs.size() << " map files to " << dir.string() << " (seed=" << common.seed << ")\n";
    return kOk;
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qstar::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const qstar::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const qstar::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const qstar::DomainError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
