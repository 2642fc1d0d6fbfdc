// Command-line driver: simulate -> fit -> summarize / diagnose / predict.
//
// Exit codes: 0 success, 1 usage error, 2 data or contract error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nestlog/diagnostics.hpp"
#include "nestlog/inference.hpp"
#include "nestlog/io.hpp"
#include "nestlog/likelihood.hpp"
#include "nestlog/model.hpp"
#include "nestlog/posterior.hpp"
#include "nestlog/rng.hpp"
#include "nestlog/simulate.hpp"
#include "nestlog/tree.hpp"

namespace {

using nlohmann::json;
using namespace nestlog;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Inconsistent or missing flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

TwoLayerTree parse_tree_flag(const std::string& text) {
  try {
    return TwoLayerTree::parse(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--tree: ") + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text << "\n";
}

/// Output path of chain i when several chains are written: out.jsonl ->
/// out.chain<i>.jsonl.
std::string chain_path(const std::string& out, std::size_t index, std::size_t count) {
  if (count == 1) return out;
  const std::filesystem::path p(out);
  auto name = p.stem().string() + ".chain" + std::to_string(index) + p.extension().string();
  return (p.parent_path() / name).string();
}

std::vector<ChainTrace> load_chains(const std::vector<std::string>& paths) {
  std::vector<ChainTrace> chains;
  for (const auto& p : paths) chains.push_back(read_chain_file(p));
  for (const auto& c : chains) {
    if (c.header.dimension != chains.front().header.dimension) {
      throw std::runtime_error("chain files disagree on the dimension D");
    }
  }
  return chains;
}

std::size_t effective_burnin(const ChainTrace& chain, std::optional<std::size_t> flag) {
  return flag ? *flag : chain.header.burnin;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string model = "nested-logistic";
  std::string tree;
  double alpha0 = 1.0;
  std::string alphas;
  std::size_t n_blocks = 100;
  std::size_t block_size = 1;
  std::uint64_t seed = 1;
  std::string out;
  double rho0 = 0.0;
  std::string rhos;
  double df = 10.0;
  std::string thetas;
};

MaximaDataset simulate_maxima(const SimulateOptions& o, std::optional<DependenceParams>& params);

int run_simulate(const SimulateOptions& o) {
  std::optional<DependenceParams> params;
  MaximaDataset maxima;
  try {
    maxima = simulate_maxima(o, params);
  } catch (const std::logic_error& e) {
    // Without input files every contract violation comes from the flags.
    throw UsageError(e.what());
  }
  write_csv_file(o.out, maxima);
  if (params) {
    const TwoLayerTree tree = TwoLayerTree::parse(o.tree);
    std::cout << "theoretical extremal coefficient: " << format_double(extremal_coefficient(tree, *params))
              << "\n";
  }
  return 0;
}

MaximaDataset simulate_maxima(const SimulateOptions& o, std::optional<DependenceParams>& params) {
  const TwoLayerTree tree = parse_tree_flag(o.tree);
  const auto K = static_cast<std::size_t>(tree.cluster_count());
  Rng rng(o.seed);
  const BlockSpec spec(o.block_size, o.n_blocks);
  MaximaDataset raw;
  if (o.model == "nested-logistic" || o.model == "nested-clayton") {
    if (o.alphas.empty() && (o.model == "nested-logistic" || o.thetas.empty())) {
      throw UsageError("--alphas is required for model " + o.model);
    }
    if (!o.alphas.empty()) {
      auto alphas = parse_list(o.alphas, "--alphas");
      if (alphas.size() != K) throw UsageError("--alphas needs one value per cluster of --tree");
      params = DependenceParams(o.alpha0, std::move(alphas));
    }
    if (o.model == "nested-logistic") {
      raw = sample_nested_logistic(tree, *params, spec.raw_length(), rng);
    } else {
      ClaytonConfig config;
      if (!o.thetas.empty()) {
        auto thetas = parse_list(o.thetas, "--thetas");
        if (thetas.size() != K) throw UsageError("--thetas needs one value per cluster of --tree");
        config = ClaytonConfig(1.0 / o.alpha0, std::move(thetas));
      } else {
        config = ClaytonConfig::from_params(*params);
      }
      raw = sample_nested_clayton(tree, config, spec.raw_length(), rng);
    }
  } else if (o.model == "student-t") {
    if (o.rhos.empty()) throw UsageError("--rhos is required for model student-t");
    auto rhos = parse_list(o.rhos, "--rhos");
    if (rhos.size() != K) throw UsageError("--rhos needs one value per cluster of --tree");
    const StudentTConfig config(o.df, o.rho0, std::move(rhos), tree);
    raw = sample_student_t(config, spec.raw_length(), rng);
  } else {
    throw UsageError("--model must be nested-logistic, nested-clayton or student-t");
  }
  // Every generator has unit-Frechet raw margins, so dividing the block
  // maxima by n keeps them exactly unit Frechet.
  return block_maxima(raw, spec, MaximaScale::unit_frechet);
}

// --------------------------------------------------------------------- fit

struct FitOptions {
  std::string data;
  std::string mode = "tree-mixture";
  std::string tree;
  std::string likelihood = "recursive";
  std::size_t iters = 15000;
  std::optional<std::size_t> burnin;
  std::uint64_t seed = 1;
  std::string frechet_transform = "none";
  std::string out;
  std::size_t chains = 1;
  double eta = 0.4;
  double epsilon = 0.1;
};

ChainTrace fit_one(const FitOptions& o, const LogLikelihood& loglik, const std::optional<TwoLayerTree>& tree,
                   std::size_t burnin, std::uint64_t seed) {
  Rng rng(seed);
  const LogTarget target = make_target(loglik);
  ProposalConfig proposal;
  proposal.initial_epsilon = o.epsilon;
  proposal.burnin = burnin;
  const int D = static_cast<int>(loglik.data().cols());
  ChainTrace trace;
  if (tree) {
    const DependenceParams init(0.5, std::vector<double>(static_cast<std::size_t>(tree->cluster_count()), 0.5));
    trace = mh_fixed_tree(target, *tree, init, proposal, o.iters, rng);
  } else {
    RjConfig rj;
    rj.eta = o.eta;
    rj.iterations = o.iters;
    rj.burnin = burnin;
    trace = tm_mcmc(target, D, rj, proposal, rng);
  }
  trace.header.seed = seed;
  trace.header.burnin = burnin;
  trace.header.eta = o.eta;
  trace.header.likelihood = loglik.kind();
  trace.header.names = loglik.data().names();
  return trace;
}

int run_fit(const FitOptions& o) {
  LikelihoodKind kind;
  try {
    kind = parse_likelihood_kind(o.likelihood);
  } catch (const std::exception&) {
    throw UsageError("--likelihood must be recursive or stephenson-tawn");
  }
  if (o.mode != "fixed-tree" && o.mode != "tree-mixture") {
    throw UsageError("--mode must be fixed-tree or tree-mixture");
  }
  if (o.frechet_transform != "none" && o.frechet_transform != "rank") {
    throw UsageError("--frechet-transform must be none or rank");
  }
  std::optional<TwoLayerTree> tree;
  if (o.mode == "fixed-tree") {
    if (o.tree.empty()) throw UsageError("--tree is required with --mode fixed-tree");
    tree = parse_tree_flag(o.tree);
  } else if (!o.tree.empty()) {
    throw UsageError("--tree applies only to --mode fixed-tree");
  }
  if (o.chains == 0) throw UsageError("--chains must be at least 1");
  const std::size_t burnin = o.burnin.value_or(o.iters / 5);
  if (burnin > o.iters) throw UsageError("--burnin exceeds --iters");

  MaximaDataset data = read_csv_file(o.data);
  if (kind == LikelihoodKind::stephenson_tawn && !data.has_partitions()) {
    throw UsageError("--likelihood stephenson-tawn needs a partition column in the data");
  }
  if (tree && tree->dimension() != static_cast<int>(data.cols())) {
    throw UsageError("--tree covers " + std::to_string(tree->dimension()) + " variables but the data has " +
                     std::to_string(data.cols()));
  }
  if (o.frechet_transform == "rank") data = to_unit_frechet(data);
  const LogLikelihood loglik(std::move(data), kind);

  std::vector<std::future<ChainTrace>> jobs;
  for (std::size_t c = 0; c < o.chains; ++c) {
    const std::uint64_t seed = o.chains == 1 ? o.seed : derive_seed(o.seed, c);
    jobs.push_back(std::async(std::launch::async, [&, seed] { return fit_one(o, loglik, tree, burnin, seed); }));
  }
  for (std::size_t c = 0; c < o.chains; ++c) {
    const ChainTrace trace = jobs[c].get();
    write_chain_file(chain_path(o.out, c, o.chains), trace);
  }
  return 0;
}

// --------------------------------------------------------------- summarize

struct ReportOptions {
  std::vector<std::string> chains;
  std::optional<std::size_t> burnin;
  std::string out;
  // diagnose
  std::size_t max_lag = 50;
  std::string data;
  // predict
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  std::string probs = "0.5,0.917,0.996";
  std::string functional = "max";
  std::string draws_out;
};

int run_summarize(const ReportOptions& o) {
  const auto chains = load_chains(o.chains);
  std::vector<ChainTrace> trimmed;
  for (const auto& c : chains) {
    ChainTrace t;
    t.header = c.header;
    const std::size_t b = effective_burnin(c, o.burnin);
    for (const auto& r : c.records) {
      if (r.iter > b) t.records.push_back(r);
    }
    trimmed.push_back(std::move(t));
  }
  const PosteriorSummary summary = summarize(std::span<const ChainTrace>(trimmed), 0);
  write_text(o.out, summary_json(summary));
  return 0;
}

// ---------------------------------------------------------------- diagnose

/// Named scalar sub-chains of one trace. Fixed-tree chains expose alpha0 and
/// every cluster alpha; tree-mixture chains, whose cluster parameters change
/// meaning with the tree, expose alpha0 and the within-cluster dependence
/// alpha0 * alpha_k seen by each variable.
std::vector<std::pair<std::string, std::vector<double>>> scalar_series(const ChainTrace& chain, std::size_t burnin,
                                                                       const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  const bool fixed = chain.header.mode == "fixed-tree";
  std::size_t K = 0;
  for (const auto& r : chain.records) {
    if (r.iter > burnin) {
      K = r.params.cluster_count();
      break;
    }
  }
  out.emplace_back("alpha0", std::vector<double>{});
  if (fixed) {
    for (std::size_t k = 0; k < K; ++k) out.emplace_back("alpha" + std::to_string(k + 1), std::vector<double>{});
  } else {
    for (const auto& n : names) out.emplace_back("within_" + n, std::vector<double>{});
  }
  for (const auto& r : chain.records) {
    if (r.iter <= burnin) continue;
    out[0].second.push_back(r.params.alpha0);
    if (fixed) {
      if (r.params.cluster_count() != K) throw std::runtime_error("fixed-tree chain changes its tree");
      for (std::size_t k = 0; k < K; ++k) out[k + 1].second.push_back(r.params.alphas[k]);
    } else {
      for (int d = 1; d <= r.tree.dimension(); ++d) {
        const auto k = static_cast<std::size_t>(r.tree.cluster_of(d));
        out[static_cast<std::size_t>(d)].second.push_back(r.params.within(k));
      }
    }
  }
  return out;
}

std::string subset_key(const std::vector<int>& subset) {
  std::string key;
  for (std::size_t i = 0; i < subset.size(); ++i) key += (i ? "," : "") + std::to_string(subset[i]);
  return key;
}

int run_diagnose(const ReportOptions& o) {
  if (o.chains.size() < 2) throw UsageError("diagnose needs at least two chain files");
  const auto chains = load_chains(o.chains);
  const auto& h0 = chains.front().header;
  for (const auto& c : chains) {
    if (c.header.mode != h0.mode) throw std::runtime_error("chain files mix fixed-tree and tree-mixture runs");
  }
  std::vector<std::string> names = h0.names;
  if (names.size() != static_cast<std::size_t>(h0.dimension)) {
    names = default_names(static_cast<std::size_t>(h0.dimension));
  }
  std::vector<std::vector<std::pair<std::string, std::vector<double>>>> series;
  for (const auto& c : chains) series.push_back(scalar_series(c, effective_burnin(c, o.burnin), names));
  // Gelman-Rubin needs equal lengths: truncate to the shortest chain.
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& s : series) {
    if (s.size() != series.front().size()) throw std::runtime_error("chain files disagree on the parameter count");
    len = std::min(len, s.front().second.size());
  }
  json gr = json::object();
  json acf = json::object();
  for (std::size_t p = 0; p < series.front().size(); ++p) {
    std::vector<std::vector<double>> per_chain;
    for (const auto& s : series) per_chain.emplace_back(s[p].second.begin(), s[p].second.begin() + len);
    const std::string& name = series.front()[p].first;
    gr[name] = gelman_rubin(per_chain);
    if (len > o.max_lag) acf[name] = autocorrelation(per_chain.front(), o.max_lag);
  }
  json report = {{"gr", gr}, {"acf", acf}, {"n_chains", chains.size()}, {"length", len}};
  if (!o.data.empty()) {
    const MaximaDataset data = read_csv_file(o.data);
    json theta = json::object();
    std::vector<int> all;
    for (int d = 1; d <= static_cast<int>(data.cols()); ++d) all.push_back(d);
    for (int a = 1; a <= static_cast<int>(data.cols()); ++a) {
      for (int b = a + 1; b <= static_cast<int>(data.cols()); ++b) {
        const std::vector<int> pair{a, b};
        theta[subset_key(pair)] = empirical_extremal_coefficient(data, pair);
      }
    }
    if (all.size() > 2) theta[subset_key(all)] = empirical_extremal_coefficient(data, all);
    report["theta_hat"] = theta;
  }
  write_text(o.out, report.dump(2));
  return 0;
}

// ----------------------------------------------------------------- predict

double apply_functional(const std::string& functional, std::span<const double> row) {
  if (functional == "max") return *std::max_element(row.begin(), row.end());
  if (functional == "min") return *std::min_element(row.begin(), row.end());
  if (functional == "sum") {
    double s = 0.0;
    for (double x : row) s += x;
    return s;
  }
  const std::string prefix = "component:";
  if (functional.rfind(prefix, 0) == 0) {
    const auto d = static_cast<std::size_t>(std::stoul(functional.substr(prefix.size())));
    if (d < 1 || d > row.size()) throw UsageError("--functional component index out of range");
    return row[d - 1];
  }
  throw UsageError("--functional must be max, min, sum or component:<d>");
}

int run_predict(const ReportOptions& o) {
  const auto probs = parse_list(o.probs, "--probs");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0 && probs[i] < 1.0) || (i > 0 && !(probs[i] > probs[i - 1]))) {
      throw UsageError("--probs must be strictly increasing values in (0, 1)");
    }
  }
  if (o.count == 0) throw UsageError("--count must be positive");
  const auto chains = load_chains(o.chains);
  // Pool post-burn-in records of all chains into one trace.
  ChainTrace pooled;
  pooled.header = chains.front().header;
  std::size_t iter = 0;
  for (const auto& c : chains) {
    const std::size_t b = effective_burnin(c, o.burnin);
    for (const auto& r : c.records) {
      if (r.iter <= b) continue;
      TraceRecord copy = r;
      copy.iter = ++iter;
      pooled.records.push_back(std::move(copy));
    }
  }
  Rng rng(o.seed);
  const MaximaDataset draws = bma_predict(pooled, 0, o.count, rng);
  std::vector<double> values;
  for (std::size_t i = 0; i < draws.rows(); ++i) values.push_back(apply_functional(o.functional, draws.row(i)));
  const auto q = quantile_curve(values, probs);
  if (!o.draws_out.empty()) write_csv_file(o.draws_out, draws);
  const json report = {{"functional", o.functional}, {"count", o.count}, {"probs", probs}, {"quantiles", q}};
  write_text(o.out, report.dump(2));
  return 0;
}

void add_report_flags(CLI::App* cmd, ReportOptions& o) {
  cmd->add_option("chains", o.chains, "Chain files written by fit")->required()->check(CLI::ExistingFile);
  cmd->add_option("--burnin", o.burnin, "Records with iter <= burnin are dropped (default: from the chain header)");
  cmd->add_option("--out", o.out, "Output JSON path (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested logistic dependence modelling for multivariate block maxima"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate block maxima and write them as CSV");
  simulate->add_option("--model", sim.model, "nested-logistic | nested-clayton | student-t");
  simulate->add_option("--tree", sim.tree, "Cluster tree, e.g. \"1,2|3,4\"")->required();
  simulate->add_option("--alpha0", sim.alpha0, "Between-cluster parameter");
  simulate->add_option("--alphas", sim.alphas, "Comma-separated per-cluster parameters");
  simulate->add_option("--n-blocks", sim.n_blocks, "Number of blocks N");
  simulate->add_option("--block-size", sim.block_size, "Observations per block n");
  simulate->add_option("--seed", sim.seed, "64-bit seed");
  simulate->add_option("--out", sim.out, "Output CSV path")->required();
  simulate->add_option("--rho0", sim.rho0, "Student-t between-cluster correlation");
  simulate->add_option("--rhos", sim.rhos, "Student-t within-cluster correlations");
  simulate->add_option("--df", sim.df, "Student-t degrees of freedom");
  simulate->add_option("--thetas", sim.thetas, "Clayton within-cluster powers (theta0 = 1/alpha0)");

  FitOptions fit;
  auto* fitcmd = app.add_subcommand("fit", "Run the sampler and write a chain file");
  fitcmd->add_option("--data", fit.data, "Block maxima CSV")->required()->check(CLI::ExistingFile);
  fitcmd->add_option("--mode", fit.mode, "fixed-tree | tree-mixture");
  fitcmd->add_option("--tree", fit.tree, "Tree for --mode fixed-tree");
  fitcmd->add_option("--likelihood", fit.likelihood, "recursive | stephenson-tawn");
  fitcmd->add_option("--iters", fit.iters, "Iterations R");
  fitcmd->add_option("--burnin", fit.burnin, "Burn-in (default R/5)");
  fitcmd->add_option("--seed", fit.seed, "64-bit seed");
  fitcmd->add_option("--frechet-transform", fit.frechet_transform, "none | rank");
  fitcmd->add_option("--out", fit.out, "Output chain path")->required();
  fitcmd->add_option("--chains", fit.chains, "Independent chains (seeds derived per chain)");
  fitcmd->add_option("--eta", fit.eta, "Split window");
  fitcmd->add_option("--epsilon", fit.epsilon, "Initial proposal half-width");

  ReportOptions summ;
  auto* summarize_cmd = app.add_subcommand("summarize", "Posterior tree probabilities and parameter summaries");
  add_report_flags(summarize_cmd, summ);

  ReportOptions diag;
  auto* diagnose = app.add_subcommand("diagnose", "Gelman-Rubin, autocorrelation and extremal coefficients");
  add_report_flags(diagnose, diag);
  diagnose->add_option("--max-lag", diag.max_lag, "Largest autocorrelation lag");
  diagnose->add_option("--data", diag.data, "Data CSV for empirical extremal coefficients")
      ->check(CLI::ExistingFile);

  ReportOptions pred;
  auto* predict = app.add_subcommand("predict", "Model-averaged predictive quantiles");
  add_report_flags(predict, pred);
  predict->add_option("--count", pred.count, "Predictive draws");
  predict->add_option("--seed", pred.seed, "64-bit seed");
  predict->add_option("--probs", pred.probs, "Comma-separated probabilities");
  predict->add_option("--functional", pred.functional, "max | min | sum | component:<d>");
  predict->add_option("--draws-out", pred.draws_out, "Optional CSV of the predictive draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*fitcmd) return run_fit(fit);
    if (*summarize_cmd) return run_summarize(summ);
    if (*diagnose) return run_diagnose(diag);
    if (*predict) return run_predict(pred);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
