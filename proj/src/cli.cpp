#include "epann/cli.hpp"

#include <omp.h>
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "epann/bench.hpp"
#include "epann/clustering.hpp"
#include "epann/datagen.hpp"
#include "epann/detail/binary_io.hpp"
#include "epann/errors.hpp"
#include "epann/graph.hpp"
#include "epann/hardcase.hpp"
#include "epann/monotonicity.hpp"
#include "epann/search.hpp"
#include "epann/vectors.hpp"

namespace epann {

namespace fs = std::filesystem;

std::string sha256_hex(std::span<const char> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InternalError("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(detail::read_file(path)); }

namespace {

std::vector<char> to_bytes(const json& j) {
  const std::string s = j.dump(2) + "\n";
  return {s.begin(), s.end()};
}

std::vector<char> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

json file_entry(const fs::path& path, std::span<const char> bytes) {
  return {{"path", path.string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}};
}

// Collects a run's outputs in memory and commits them together, so a failure
// before commit() writes nothing at all.
class Run {
 public:
  Run(std::string subcommand, std::vector<std::string> args, std::uint64_t seed, int threads)
      : subcommand_(std::move(subcommand)), args_(std::move(args)), seed_(seed), threads_(threads) {}

  json config = json::object();

  void input(const fs::path& path) {
    if (path.empty()) return;
    inputs_.push_back(file_entry(path, detail::read_file(path)));
  }
  void output(const fs::path& path, std::vector<char> bytes) { outputs_.emplace_back(path, std::move(bytes)); }

  /// Writes every output and then the manifest (skipped when `manifest` is
  /// empty). Returns the list of written paths.
  std::vector<fs::path> commit(const fs::path& manifest) {
    json outs = json::array();
    for (const auto& [path, bytes] : outputs_) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      outs.push_back(file_entry(path, bytes));
    }
    std::vector<fs::path> written;
    for (const auto& [path, bytes] : outputs_) {
      detail::write_file_atomic(path, bytes);
      written.push_back(path);
    }
    if (!manifest.empty()) {
      json m = {{"schema", kManifestSchema},
                {"tool", "epann"},
                {"subcommand", subcommand_},
                {"args", args_},
                {"seed", seed_},
                {"threads", threads_},
                {"config", config},
                {"inputs", inputs_},
                {"outputs", outs}};
      if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
      detail::write_file_atomic(manifest, to_bytes(m));
      written.push_back(manifest);
    }
    return written;
  }

 private:
  std::string subcommand_;
  std::vector<std::string> args_;
  std::uint64_t seed_;
  int threads_;
  json inputs_ = json::array();
  std::vector<std::pair<fs::path, std::vector<char>>> outputs_;
};

fs::path prefixed(const std::string& prefix, const char* name) { return fs::path(prefix + name); }

fs::path manifest_for(const std::string& override_path, const fs::path& primary) {
  if (!override_path.empty()) return override_path;
  if (primary.empty()) return {};
  if (primary.filename().string().ends_with("manifest.json")) return primary;
  return fs::path(primary.string() + ".manifest.json");
}

VectorSet load_vectors(const fs::path& p) { return read_vectors(p, format_from_path(p)); }

std::vector<NeighborList> load_gt(const fs::path& p, std::size_t k) {
  auto lists = to_neighbor_lists(read_ivecs(p));
  for (const auto& l : lists)
    if (l.ids.size() < k) throw UsageError("ground truth " + p.string() + " has fewer than k ids per row");
  return lists;
}

EntryPointIndex load_eps_for(const fs::path& p, const VectorSet& base) {
  auto eps = load_entry_index(p);
  if (eps.vectors.dim() != base.dim()) throw FormatError("entry index dimension differs from the vectors", 8);
  for (NodeId id : eps.ids)
    if (id >= base.size()) throw FormatError("entry index refers to a node outside the vector set", 12);
  return eps;
}

void check_graph_matches(const NavGraph& g, const VectorSet& base) {
  if (g.size() != base.size())
    throw UsageError("graph has " + std::to_string(g.size()) + " nodes but the vector set has " +
                     std::to_string(base.size()));
}

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> args;
};

// ---------------------------------------------------------------------------

struct GenOpts {
  std::string kind = "gaussian";
  std::size_t n = 100000, dim = 0, components = 10, clusters = 256, queries = 1000, gt_k = 100;
  std::string prefix, manifest;
};

void run_gen(const GenOpts& o, const Globals& g, std::ostream& out) {
  Run run("gen", g.args, g.seed, g.threads);
  Dataset ds;
  if (o.kind == "gaussian") {
    MixtureSpec s;
    s.n = o.n;
    s.dim = o.dim ? o.dim : 128;
    s.components = o.components;
    s.seed = g.seed;
    ds = gaussian_mixture(s, o.queries);
    run.config = {{"kind", o.kind}, {"dataset", to_json(s)}};
  } else {
    DeepLikeSpec s;
    s.n = o.n;
    s.dim = o.dim ? o.dim : 96;
    s.clusters = o.clusters;
    s.seed = g.seed;
    ds = deep_like(s, o.queries);
    run.config = {{"kind", o.kind}, {"dataset", to_json(s)}};
  }
  const std::size_t k = std::min(o.gt_k, ds.base.size());
  run.config["queries"] = o.queries;
  run.config["gt_k"] = k;
  const auto gt = brute_force_knn_batch(ds.queries, ds.base, k);

  run.output(prefixed(o.prefix, "base.fvecs"), encode_vectors(ds.base, VectorFormat::fvecs));
  run.output(prefixed(o.prefix, "query.fvecs"), encode_vectors(ds.queries, VectorFormat::fvecs));
  run.output(prefixed(o.prefix, "gt.ivecs"), encode_ivecs(to_id_rows(gt)));
  run.output(prefixed(o.prefix, "spec.json"), to_bytes(run.config));
  run.commit(manifest_for(o.manifest, prefixed(o.prefix, "manifest.json")));
  out << "wrote " << ds.base.size() << " base and " << ds.queries.size() << " query vectors of dim " << ds.base.dim()
      << " to " << o.prefix << "\n";
}

struct GenHardOpts {
  std::size_t n = 100000, queries = 100, dim = 2;
  std::string layout = "collinear", spec_file, prefix, manifest;
};

void run_gen_hard(const GenHardOpts& o, const Globals& g, std::ostream& out) {
  Run run("gen-hard", g.args, g.seed, g.threads);
  HardInstanceSpec spec;
  if (!o.spec_file.empty()) {
    run.input(o.spec_file);
    const auto bytes = detail::read_file(o.spec_file);
    json j;
    try {
      j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("spec file is not valid JSON: ") + e.what(), e.byte);
    }
    spec = hard_spec_from_json(j);
  } else {
    spec = o.layout == "triangle" ? HardInstanceSpec::triangle() : HardInstanceSpec::collinear();
    spec.n_total = o.n;
    spec.n_queries = o.queries;
    spec.dim = o.dim;
    spec.seed = g.seed;
  }
  const auto inst = gen_hard_instance(spec);
  run.config = to_json(spec);

  run.output(prefixed(o.prefix, "base.fvecs"), encode_vectors(inst.base, VectorFormat::fvecs));
  run.output(prefixed(o.prefix, "query.fvecs"), encode_vectors(inst.queries, VectorFormat::fvecs));
  run.output(prefixed(o.prefix, "gt.ivecs"), encode_ivecs(to_id_rows(inst.gt)));
  run.output(prefixed(o.prefix, "spec.json"), to_bytes(to_json(spec)));
  run.commit(manifest_for(o.manifest, prefixed(o.prefix, "manifest.json")));
  out << "wrote hard instance (" << spec.layout << ", " << inst.base.size() << " points, " << inst.queries.size()
      << " queries) to " << o.prefix << "\n";
}

struct EpsOpts {
  std::string vectors, out_file, out_dir, manifest;
  std::vector<std::size_t> ks{64};
  int iters = 25;
  std::size_t max_points_per_center = 0;
};

void run_eps_build(const EpsOpts& o, const Globals& g, std::ostream& out) {
  if (o.out_file.empty() == o.out_dir.empty()) throw UsageError("eps build: give exactly one of --out and --out-dir");
  if (!o.out_file.empty() && o.ks.size() != 1) throw UsageError("eps build: --out takes a single --k; use --out-dir");
  Run run("eps build", g.args, g.seed, g.threads);
  run.input(o.vectors);
  const VectorSet base = load_vectors(o.vectors);
  run.config = {{"k", o.ks}, {"iters", o.iters}, {"max_points_per_center", o.max_points_per_center}};
  json reports = json::array();
  fs::path primary;
  for (std::size_t K : o.ks) {
    EntryBuildOptions eo;
    eo.K = K;
    eo.n_iter = o.iters;
    eo.seed = g.seed;
    eo.max_points_per_center = o.max_points_per_center;
    const auto rep = build_entry_index(base, eo);
    const fs::path path = o.out_file.empty() ? fs::path(o.out_dir) / ("eps_" + std::to_string(K) + ".meps")
                                             : fs::path(o.out_file);
    if (primary.empty()) primary = o.out_file.empty() ? fs::path(o.out_dir) / "eps" : path;
    run.output(path, encode_entry_index(rep.index));
    reports.push_back({{"K", K},
                       {"path", path.string()},
                       {"training_points", rep.training_points},
                       {"iterations", rep.kmeans.iterations_run},
                       {"inertia", rep.kmeans.inertia},
                       {"seconds", rep.seconds}});
  }
  run.commit(manifest_for(o.manifest, primary));
  out << reports.dump(2) << "\n";
}

struct BuildOpts {
  std::string vectors, out, manifest, algo = "nsg", knn_method = "auto";
  std::optional<std::uint32_t> R, L, C;
  std::optional<double> alpha;
};

void run_build(const BuildOpts& o, const Globals& g, std::ostream& out) {
  Run run("build", g.args, g.seed, g.threads);
  run.input(o.vectors);
  const VectorSet base = load_vectors(o.vectors);
  const Algorithm algo = algorithm_from_string(o.algo);
  BuildParams p = algo == Algorithm::vamana ? BuildParams::vamana_defaults() : BuildParams::nsg_defaults();
  p.algorithm = algo;
  if (o.R) p.R = *o.R;
  if (o.L) p.L = *o.L;
  if (o.C) p.C = *o.C;
  if (o.alpha) p.alpha = *o.alpha;
  p.knn_method = o.knn_method == "brute" ? KnnMethod::brute
                 : o.knn_method == "nn-descent" ? KnnMethod::nn_descent
                                                : KnnMethod::automatic;
  p.seed = g.seed;
  p.validate();
  run.config = to_json(p);

  const auto t0 = std::chrono::steady_clock::now();
  const NavGraph graph = build_graph(base, p);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.output(o.out, encode_graph(graph));
  run.commit(manifest_for(o.manifest, o.out));
  out << json{{"nodes", graph.size()},
              {"edges", graph.num_edges()},
              {"max_degree", graph.largest_degree()},
              {"entry", graph.default_entry()},
              {"seconds", secs}}
             .dump(2)
      << "\n";
}

struct SearchOpts {
  std::string graph, vectors, queries, eps = "none", gt, trace, out, manifest;
  std::size_t k = 10, L = 64;
};

void run_search(const SearchOpts& o, const Globals& g, std::ostream& out) {
  Run run("search", g.args, g.seed, g.threads);
  run.input(o.graph);
  run.input(o.vectors);
  run.input(o.queries);
  const NavGraph graph = load_graph(o.graph);
  const VectorSet base = load_vectors(o.vectors);
  const VectorSet queries = load_vectors(o.queries);
  check_graph_matches(graph, base);
  if (queries.dim() != base.dim()) throw UsageError("query and base dimensions differ");
  std::optional<EntryPointIndex> eps;
  if (o.eps != "none") {
    run.input(o.eps);
    eps = load_eps_for(o.eps, base);
  }
  SearchParams sp;
  sp.k = o.k;
  sp.queue_len = o.L;
  sp.capture_trace = !o.trace.empty();
  sp.validate();
  run.config = {{"k", o.k}, {"L", o.L}, {"eps", o.eps}, {"trace", !o.trace.empty()}};

  SearchScratch scratch;
  std::vector<NeighborList> results;
  std::string trace;
  double hops = 0, evals = 0;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    auto r = eps ? adaptive_search(graph, base, *eps, queries[qi], sp, scratch)
                 : greedy_search(graph, base, graph.default_entry(), queries[qi], sp, scratch);
    hops += static_cast<double>(r.hops);
    evals += static_cast<double>(r.dist_evals);
    if (r.trace) trace += json{{"query_id", qi}, {"expanded", r.trace->expanded}}.dump() + "\n";
    results.push_back(std::move(r.topk));
  }
  const double nq = std::max<double>(1.0, static_cast<double>(queries.size()));
  json summary = {{"queries", queries.size()}, {"mean_hops", hops / nq}, {"mean_dist_evals", evals / nq}};
  if (!o.gt.empty()) {
    run.input(o.gt);
    const auto gt = load_gt(o.gt, o.k);
    if (gt.size() != queries.size()) throw UsageError("ground truth row count differs from the query count");
    summary["recall"] = recall_at_k(results, gt, o.k);
  }
  if (!o.out.empty()) run.output(o.out, encode_ivecs(to_id_rows(results)));
  if (!o.trace.empty()) run.output(o.trace, to_bytes(trace));
  run.commit(manifest_for(o.manifest, !o.out.empty() ? fs::path(o.out) : fs::path(o.trace)));
  out << summary.dump(2) << "\n";
}

struct BenchOpts {
  std::string graph, vectors, queries, gt, eps_dir, out, manifest, dataset = "dataset";
  std::vector<std::string> eps_files;
  std::size_t k = 10;
  std::vector<std::size_t> L{16, 24, 32, 48, 64, 96, 128, 256, 512};
  int repeats = 5;
};

void run_bench(const BenchOpts& o, const Globals& g, std::ostream& out) {
  Run run("bench", g.args, g.seed, g.threads);
  run.input(o.graph);
  run.input(o.vectors);
  run.input(o.queries);
  run.input(o.gt);
  const NavGraph graph = load_graph(o.graph);
  const VectorSet base = load_vectors(o.vectors);
  const VectorSet queries = load_vectors(o.queries);
  check_graph_matches(graph, base);
  const auto gt = load_gt(o.gt, o.k);
  if (gt.size() != queries.size()) throw UsageError("ground truth row count differs from the query count");

  std::vector<fs::path> eps_paths(o.eps_files.begin(), o.eps_files.end());
  if (!o.eps_dir.empty()) {
    if (!fs::is_directory(o.eps_dir)) throw UsageError("--eps-dir is not a directory: " + o.eps_dir);
    for (const auto& e : fs::directory_iterator(o.eps_dir))
      if (e.path().extension() == ".meps") eps_paths.push_back(e.path());
  }
  std::sort(eps_paths.begin(), eps_paths.end());
  std::map<std::size_t, EntryPointIndex> eps;
  for (const auto& p : eps_paths) {
    run.input(p);
    auto idx = load_eps_for(p, base);
    const std::size_t K = idx.size();
    if (!eps.emplace(K, std::move(idx)).second) throw UsageError("two entry indexes with K = " + std::to_string(K));
  }

  SweepConfig cfg;
  cfg.dataset = o.dataset;
  cfg.L_list = o.L;
  cfg.k = o.k;
  cfg.threads = g.threads;
  cfg.repeats = o.repeats;
  std::vector<std::size_t> ks;
  for (const auto& [K, _] : eps) ks.push_back(K);
  run.config = {{"dataset", o.dataset}, {"k", o.k}, {"L", o.L}, {"repeats", o.repeats}, {"K", ks}};
  const auto records = sweep(graph, base, eps, queries, gt, cfg);
  run.output(o.out, to_bytes(to_csv(records)));
  run.commit(manifest_for(o.manifest, o.out));
  out << "wrote " << records.size() << " rows to " << o.out << "\n";
}

struct BmsnetOpts {
  std::string graph, vectors, out, manifest;
  bool exact = false, witnesses = false;
  std::optional<std::size_t> sample;
};

void run_analyze_bmsnet(const BmsnetOpts& o, const Globals& g, std::ostream& out) {
  if (o.exact && o.sample) throw UsageError("analyze bmsnet: --exact and --sample are exclusive");
  Run run("analyze bmsnet", g.args, g.seed, g.threads);
  run.input(o.graph);
  run.input(o.vectors);
  const NavGraph graph = load_graph(o.graph);
  const VectorSet base = load_vectors(o.vectors);
  check_graph_matches(graph, base);
  CertifyOptions co;
  co.seed = g.seed;
  co.force_exact = o.exact;
  co.keep_witnesses = o.witnesses;
  if (o.sample) {
    co.exact_threshold = 0;
    co.pair_budget = *o.sample;
  }
  run.config = {{"exact", o.exact}, {"sample", o.sample ? json(*o.sample) : json(nullptr)}, {"witnesses", o.witnesses}};
  const auto cert = certify_bmsnet(graph, base, co);
  const json report = to_json(cert);
  if (!o.out.empty()) run.output(o.out, to_bytes(report));
  run.commit(manifest_for(o.manifest, o.out));
  out << (o.out.empty() ? report.dump(2)
                        : json{{"B", cert.B}, {"exact", cert.exact}, {"pairs_evaluated", cert.pairs_evaluated}}.dump(2))
      << "\n";
}

struct TheoremOpts {
  std::string graph, vectors, eps, queries, gt, out, manifest;
  std::optional<std::uint32_t> B;
};

void run_analyze_theorem(const TheoremOpts& o, const Globals& g, std::ostream& out) {
  Run run("analyze theorem", g.args, g.seed, g.threads);
  run.input(o.graph);
  run.input(o.vectors);
  run.input(o.eps);
  run.input(o.queries);
  const NavGraph graph = load_graph(o.graph);
  const VectorSet base = load_vectors(o.vectors);
  check_graph_matches(graph, base);
  const VectorSet queries = load_vectors(o.queries);
  if (queries.dim() != base.dim()) throw UsageError("query and base dimensions differ");
  const EntryPointIndex eps = load_eps_for(o.eps, base);

  std::vector<NodeId> gt;
  if (!o.gt.empty()) {
    run.input(o.gt);
    const auto lists = load_gt(o.gt, 1);
    if (lists.size() != queries.size()) throw UsageError("ground truth row count differs from the query count");
    for (const auto& l : lists) gt.push_back(l.ids.front());
  } else {
    for (const auto& l : brute_force_knn_batch(queries, base, 1)) gt.push_back(l.ids.front());
  }

  std::uint32_t B = 0;
  bool B_exact = true;
  if (o.B) {
    B = *o.B;
  } else {
    CertifyOptions co;
    co.seed = g.seed;
    const auto cert = certify_bmsnet(graph, base, co);
    B = cert.B;
    B_exact = cert.exact;
  }
  TheoremInputs in;
  in.graph = &graph;
  in.base = &base;
  in.queries = &queries;
  in.eps = &eps;
  in.gt = gt;
  in.B = B;
  run.config = {{"B", B}, {"B_source", o.B ? "flag" : (B_exact ? "exact" : "sampled")}};
  json report = to_json(theorem_quantities(in));
  report["B_source"] = run.config["B_source"];
  if (!o.out.empty()) run.output(o.out, to_bytes(report));
  run.commit(manifest_for(o.manifest, o.out));
  out << (o.out.empty() ? report.dump(2) : std::string("wrote ") + o.out) << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-based nearest-neighbor search with adaptive entry points", "epann"};
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  for (int i = 1; i < argc; ++i) globals.args.emplace_back(argv[i]);
  app.add_option("--seed", globals.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--threads", globals.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  const auto existing = CLI::ExistingFile;

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a synthetic dataset with exact ground truth");
  c_gen->add_option("--kind", gen.kind, "gaussian | deep")->check(CLI::IsMember({"gaussian", "deep"}))->capture_default_str();
  c_gen->add_option("--n", gen.n, "Database size")->check(CLI::PositiveNumber)->capture_default_str();
  c_gen->add_option("--dim", gen.dim, "Dimension (0: 128 for gaussian, 96 for deep)")->capture_default_str();
  c_gen->add_option("--components", gen.components, "Gaussian mixture components")->capture_default_str();
  c_gen->add_option("--clusters", gen.clusters, "Deep-like clusters")->capture_default_str();
  c_gen->add_option("--queries", gen.queries, "Query count")->check(CLI::PositiveNumber)->capture_default_str();
  c_gen->add_option("--gt-k", gen.gt_k, "Ground-truth neighbors per query")->check(CLI::PositiveNumber)->capture_default_str();
  c_gen->add_option("--out-prefix", gen.prefix, "Output prefix, e.g. data/")->required();
  c_gen->add_option("--manifest", gen.manifest, "Manifest path (default <prefix>manifest.json)");

  GenHardOpts hard;
  auto* c_hard = app.add_subcommand("gen-hard", "Generate an adversarial islands instance");
  c_hard->add_option("--n", hard.n, "Total point count")->check(CLI::PositiveNumber)->capture_default_str();
  c_hard->add_option("--queries", hard.queries, "Query count")->check(CLI::PositiveNumber)->capture_default_str();
  c_hard->add_option("--dim", hard.dim, "Dimension (>= 2)")->capture_default_str();
  c_hard->add_option("--layout", hard.layout, "collinear | triangle")
      ->check(CLI::IsMember({"collinear", "triangle"}))
      ->capture_default_str();
  c_hard->add_option("--spec", hard.spec_file, "Full instance spec as JSON (overrides the other flags)")->check(existing);
  c_hard->add_option("--out-prefix", hard.prefix, "Output prefix, e.g. hard/")->required();
  c_hard->add_option("--manifest", hard.manifest, "Manifest path (default <prefix>manifest.json)");

  EpsOpts eps;
  auto* c_eps = app.add_subcommand("eps", "Entry-point index tools");
  c_eps->require_subcommand(1);
  auto* c_eps_build = c_eps->add_subcommand("build", "Cluster the database and snap centers to entry candidates");
  c_eps_build->add_option("--vectors", eps.vectors, "Database vectors (.fvecs or .mann)")->required()->check(existing);
  c_eps_build->add_option("--k", eps.ks, "Candidate count(s), comma separated")->delimiter(',')->capture_default_str();
  c_eps_build->add_option("--iters", eps.iters, "Lloyd iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_eps_build->add_option("--max-points-per-center", eps.max_points_per_center,
                          "Train on at most K * this many sampled points (0: all)")
      ->capture_default_str();
  c_eps_build->add_option("--out", eps.out_file, "Output file for a single K");
  c_eps_build->add_option("--out-dir", eps.out_dir, "Output directory; writes eps_<K>.meps per K");
  c_eps_build->add_option("--manifest", eps.manifest, "Manifest path");

  BuildOpts build;
  auto* c_build = app.add_subcommand("build", "Build a navigation graph");
  c_build->add_option("--vectors", build.vectors, "Database vectors (.fvecs or .mann)")->required()->check(existing);
  c_build->add_option("--algo", build.algo, "nsg | vamana")->check(CLI::IsMember({"nsg", "vamana"}))->capture_default_str();
  c_build->add_option("--r", build.R, "Maximum out-degree");
  c_build->add_option("--l", build.L, "Construction queue length");
  c_build->add_option("--c", build.C, "Candidate pool cap");
  c_build->add_option("--alpha", build.alpha, "Pruning slack (>= 1)");
  c_build->add_option("--knn-method", build.knn_method, "Base graph for nsg: auto | brute | nn-descent")
      ->check(CLI::IsMember({"auto", "brute", "nn-descent"}))
      ->capture_default_str();
  c_build->add_option("--out", build.out, "Output graph file")->required();
  c_build->add_option("--manifest", build.manifest, "Manifest path (default <out>.manifest.json)");

  SearchOpts search;
  auto* c_search = app.add_subcommand("search", "Run queries against a graph");
  c_search->add_option("--graph", search.graph, "Graph file")->required()->check(existing);
  c_search->add_option("--vectors", search.vectors, "Database vectors")->required()->check(existing);
  c_search->add_option("--queries", search.queries, "Query vectors")->required()->check(existing);
  c_search->add_option("--eps", search.eps, "Entry-point index file, or none for the fixed entry")->capture_default_str();
  c_search->add_option("-k", search.k, "Neighbors returned")->check(CLI::PositiveNumber)->capture_default_str();
  c_search->add_option("-L", search.L, "Queue length")->check(CLI::PositiveNumber)->capture_default_str();
  c_search->add_option("--gt", search.gt, "Ground truth ivecs; adds recall to the summary")->check(existing);
  c_search->add_option("--trace", search.trace, "Write expansion order per query as JSON lines");
  c_search->add_option("--out", search.out, "Write result ids as ivecs");
  c_search->add_option("--manifest", search.manifest, "Manifest path (default <out>.manifest.json)");

  BenchOpts bench;
  auto* c_bench = app.add_subcommand("bench", "Sweep queue lengths and entry indexes; write CSV");
  c_bench->add_option("--graph", bench.graph, "Graph file")->required()->check(existing);
  c_bench->add_option("--vectors", bench.vectors, "Database vectors")->required()->check(existing);
  c_bench->add_option("--queries", bench.queries, "Query vectors")->required()->check(existing);
  c_bench->add_option("--gt", bench.gt, "Ground truth ivecs")->required()->check(existing);
  c_bench->add_option("--eps-dir", bench.eps_dir, "Directory of .meps files (one per K)");
  c_bench->add_option("--eps", bench.eps_files, "Additional .meps files")->check(existing);
  c_bench->add_option("--k", bench.k, "Recall depth")->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--L", bench.L, "Queue lengths, comma separated")->delimiter(',')->capture_default_str();
  c_bench->add_option("--repeats", bench.repeats, "Timed passes per cell")->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--dataset", bench.dataset, "Dataset label for the CSV")->capture_default_str();
  c_bench->add_option("--out", bench.out, "Output CSV")->required();
  c_bench->add_option("--manifest", bench.manifest, "Manifest path (default <out>.manifest.json)");

  auto* c_an = app.add_subcommand("analyze", "Backward-hop analysis");
  c_an->require_subcommand(1);
  BmsnetOpts bms;
  auto* c_bms = c_an->add_subcommand("bmsnet", "Certify the backward-hop bound B of a graph");
  c_bms->add_option("--graph", bms.graph, "Graph file")->required()->check(existing);
  c_bms->add_option("--vectors", bms.vectors, "Database vectors")->required()->check(existing);
  c_bms->add_flag("--exact", bms.exact, "Evaluate every ordered pair regardless of size");
  c_bms->add_option("--sample", bms.sample, "Evaluate this many sampled pairs")->check(CLI::PositiveNumber);
  c_bms->add_flag("--witnesses", bms.witnesses, "Include a witness path per evaluated pair");
  c_bms->add_option("--out", bms.out, "Report JSON (default: stdout)");
  c_bms->add_option("--manifest", bms.manifest, "Manifest path (default <out>.manifest.json)");

  TheoremOpts thm;
  auto* c_thm = c_an->add_subcommand("theorem", "Cell and global hop bounds for adaptive vs fixed entry");
  c_thm->add_option("--graph", thm.graph, "Graph file")->required()->check(existing);
  c_thm->add_option("--vectors", thm.vectors, "Database vectors")->required()->check(existing);
  c_thm->add_option("--eps", thm.eps, "Entry-point index (Voronoi sites)")->required()->check(existing);
  c_thm->add_option("--queries", thm.queries, "Query vectors")->required()->check(existing);
  c_thm->add_option("--gt", thm.gt, "Ground truth ivecs (default: brute force)")->check(existing);
  c_thm->add_option("--B", thm.B, "Backward-hop bound (default: certified)");
  c_thm->add_option("--out", thm.out, "Report JSON (default: stdout)");
  c_thm->add_option("--manifest", thm.manifest, "Manifest path (default <out>.manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  omp_set_num_threads(globals.threads);
  try {
    if (c_gen->parsed()) run_gen(gen, globals, out);
    else if (c_hard->parsed()) run_gen_hard(hard, globals, out);
    else if (c_eps_build->parsed()) run_eps_build(eps, globals, out);
    else if (c_build->parsed()) run_build(build, globals, out);
    else if (c_search->parsed()) run_search(search, globals, out);
    else if (c_bench->parsed()) run_bench(bench, globals, out);
    else if (c_bms->parsed()) run_analyze_bmsnet(bms, globals, out);
    else if (c_thm->parsed()) run_analyze_theorem(thm, globals, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("epann");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace epann
