// stitchwalk: distributed random-walk sampling on a synchronous
// bandwidth-constrained network simulator.
//
//   stitchwalk generate      build a graph, write its edge list
//   stitchwalk walk          one walk (naive baseline or stitched)
//   stitchwalk continuous    serve a stream of requests, log per-request cost
//   stitchwalk kappa-sweep   table-utilization experiment across families
//   stitchwalk message-sweep amortized message-complexity experiment
//   stitchwalk dist-check    stitched destinations vs the exact walk law

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stitchwalk/stitchwalk.hpp"

#ifndef STITCHWALK_BUILD_ID
#define STITCHWALK_BUILD_ID "dev"
#endif

namespace {

using namespace stitchwalk;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitIo = 3;

struct GraphOptions {
  std::string family = "gnp-expander";
  std::string edge_list_path;
  std::uint32_t n = 1000;
  std::optional<double> p, alpha, radius;
};

struct CommonOptions {
  std::uint64_t seed = 12345;
  std::string out_dir;
  std::string routing = "shortest-path";
  std::string engine = "sim";  // sweeps override to "fast"
  std::string capacity = "1";
};

void add_graph_options(CLI::App* cmd, GraphOptions& g) {
  cmd->add_option("--family", g.family,
                  "graph family: gnp-expander|two-tier|power-law|geometric|grid")
      ->default_val(g.family);
  cmd->add_option("--graph", g.edge_list_path,
                  "read the graph from an edge-list file instead");
  cmd->add_option("--n", g.n, "target node count")->default_val(g.n);
  cmd->add_option("--p", g.p, "edge probability (gnp/two-tier); default log n/n");
  cmd->add_option("--alpha", g.alpha, "attachment exponent; default 1");
  cmd->add_option("--r", g.radius, "geometric radius; default sqrt(log n/n)");
}

void add_common_options(CLI::App* cmd, CommonOptions& c,
                        bool with_out_dir = true,
                        const char* engine_default = "sim") {
  cmd->add_option("--seed", c.seed, "experiment seed (echoed in outputs)")
      ->default_val(c.seed);
  if (with_out_dir)
    cmd->add_option("-o,--out-dir", c.out_dir,
                    "output directory (default: $STITCHWALK_OUT or .)");
  cmd->add_option("--routing", c.routing, "shortest-path|bfs-tree")
      ->default_val(c.routing);
  cmd->add_option("--engine", c.engine,
                  "sim (token-level kernel) | fast (direct accounting)")
      ->default_val(engine_default);
  cmd->add_option("--capacity", c.capacity,
                  "per-edge tokens per round for --engine sim: a number or inf")
      ->default_val(c.capacity);
}

std::filesystem::path resolve_out_dir(const CommonOptions& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("STITCHWALK_OUT")) return env;
  return ".";
}

RoutingMode parse_routing(const std::string& s) {
  if (s == "shortest-path" || s == "sp") return RoutingMode::ShortestPath;
  if (s == "bfs-tree") return RoutingMode::BfsTree;
  throw CLI::ValidationError("--routing", "unknown routing mode " + s);
}

std::uint64_t parse_capacity(const std::string& s) {
  if (s == "inf" || s == "idealized") return kUnboundedCapacity;
  return std::stoull(s);
}

GeneratedGraph load_or_generate(const GraphOptions& gopt, std::uint64_t seed) {
  if (!gopt.edge_list_path.empty()) {
    std::ifstream in(gopt.edge_list_path);
    if (!in) throw std::ios_base::failure("cannot read " + gopt.edge_list_path);
    GeneratedGraph gg{read_edge_list(in), {}};
    gg.info.requested_n = gg.info.effective_n = gg.graph.n;
    gg.info.attempts = 0;
    if (auto why = check_graph_invariants(gg.graph))
      throw std::runtime_error("loaded graph invalid: " + *why);
    return gg;
  }
  auto fam = family_from_name(gopt.family);
  if (!fam)
    throw CLI::ValidationError("--family", "unknown family " + gopt.family);
  GeneratorSpec spec;
  spec.family = *fam;
  spec.n = gopt.n;
  spec.p = gopt.p;
  spec.alpha = gopt.alpha;
  spec.radius = gopt.radius;
  spec.seed = seed;
  return generate(spec);
}

std::string provenance_line(const CommonOptions& c, const std::string& extra) {
  std::ostringstream s;
  s << "stitchwalk build=" << STITCHWALK_BUILD_ID << " seed=" << c.seed;
  if (!extra.empty()) s << ' ' << extra;
  return s.str();
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<Family> parse_families(const std::string& csv) {
  std::vector<Family> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto f = family_from_name(item);
    if (!f) throw CLI::ValidationError("--families", "unknown family " + item);
    out.push_back(*f);
  }
  return out;
}

// default l grid: n^0.5, n^0.6, ..., n^1.2
std::vector<double> default_length_grid(std::uint32_t n) {
  std::vector<double> grid;
  for (double e = 0.5; e <= 1.2 + 1e-9; e += 0.1)
    grid.push_back(static_cast<double>(
        std::llround(std::pow(static_cast<double>(n), e))));
  return grid;
}

int cmd_generate(const GraphOptions& gopt, const CommonOptions& copt,
                 std::string out_file) {
  GeneratedGraph gg = load_or_generate(gopt, copt.seed);
  if (out_file.empty()) {
    std::ostringstream name;
    name << gopt.family << "-n" << gg.info.effective_n << ".edges";
    out_file = (resolve_out_dir(copt) / std::filesystem::path(name.str()))
                   .string();
  }
  std::filesystem::path path(out_file);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + out_file);
  write_edge_list(gg.graph, out);
  out.close();
  std::cout << "# " << provenance_line(copt, "") << "\n"
            << "family=" << gopt.family << " n=" << gg.graph.n
            << " m=" << gg.graph.m << " attempts=" << gg.info.attempts
            << (gg.info.largest_component_fallback ? " largest-component-fallback"
                                                   : "")
            << "\nwrote " << out_file << "\n";
  return kExitOk;
}

int cmd_walk(const GraphOptions& gopt, const CommonOptions& copt, bool naive,
             std::uint32_t len, double eta, std::uint32_t lambda,
             std::optional<std::uint32_t> source) {
  GeneratedGraph gg = load_or_generate(gopt, copt.seed);
  const Graph& g = gg.graph;
  Rng source_rng(derive_key(copt.seed, stream::source_draw, 0));
  NodeId s = source ? static_cast<NodeId>(*source)
                    : sample_source_by_degree(g, source_rng);
  if (s >= g.n) throw CLI::ValidationError("--source", "node out of range");

  std::cout << "# " << provenance_line(copt, "l=" + std::to_string(len)) << "\n";
  WalkResult res;
  if (naive) {
    SimState sim(g, SimConfig{parse_capacity(copt.capacity), false});
    Rng rng(derive_key(copt.seed, stream::naive_walk, 0));
    res = naive_walk(g, s, len, rng, &sim);
  } else {
    ContinuousConfig cfg;
    cfg.eta = eta;
    if (lambda > 0) {
      cfg.lambda_mode = LambdaMode::Explicit;
      cfg.lambda_explicit = lambda;
    }
    cfg.routing = parse_routing(copt.routing);
    cfg.simulate = copt.engine == "sim";
    cfg.capacity = parse_capacity(copt.capacity);
    ContinuousWalkServer server(g, len, cfg, copt.seed);
    res = server.serve(s);
    std::cout << "lambda=" << server.lambda()
              << " table_entries=" << server.table().total_entries() << "\n";
  }
  std::cout << "source=" << s << " destination=" << res.destination
            << " stitches=" << res.stitches << " status="
            << (res.status == WalkStatus::Ok ? "ok" : "failed-needs-rebuild")
            << "\n"
            << "rounds=" << res.cost.total_rounds()
            << " messages=" << res.cost.total_messages() << "\n";
  return kExitOk;
}

int cmd_continuous(const GraphOptions& gopt, const CommonOptions& copt,
                   std::uint32_t len_opt, double eta, std::uint32_t lambda,
                   std::uint64_t requests, bool until_failure,
                   const std::string& dump_table, bool delivery_log) {
  GeneratedGraph gg = load_or_generate(gopt, copt.seed);
  const Graph& g = gg.graph;
  std::uint32_t len = len_opt ? len_opt : g.n;

  ContinuousConfig cfg;
  cfg.eta = eta;
  if (lambda > 0) {
    cfg.lambda_mode = LambdaMode::Explicit;
    cfg.lambda_explicit = lambda;
  }
  cfg.routing = parse_routing(copt.routing);
  cfg.simulate = copt.engine == "sim";
  cfg.capacity = parse_capacity(copt.capacity);
  cfg.record_delivery_log = delivery_log && cfg.simulate;

  auto out_dir = resolve_out_dir(copt);
  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "requests.csv");
  if (!log) throw std::ios_base::failure("cannot write requests.csv");
  log << "# " << provenance_line(copt, "l=" + std::to_string(len)) << "\n";
  log << "epoch,request_index,source,destination,rounds,messages,stitches,"
         "status\n";

  ContinuousWalkServer server(g, len, cfg, copt.seed);
  server.set_result_observer([&](const WalkResult& r, std::uint64_t epoch,
                                 std::uint64_t request) {
    bool ok = r.status == WalkStatus::Ok;
    log << epoch << ',' << request << ',' << r.request.source << ','
        << (ok ? std::to_string(r.destination) : std::string("-")) << ','
        << r.cost.total_rounds() << ',' << r.cost.total_messages() << ','
        << r.stitches << ',' << (ok ? "ok" : "failed-needs-rebuild") << '\n';
  });

  std::uint64_t served = 0;
  while (until_failure ? server.completed_epochs().empty() : served < requests) {
    server.serve_next();
    ++served;
  }
  for (const auto& e : server.completed_epochs())
    std::cout << "epoch=" << e.epoch << " kappa=" << e.kappa
              << " walks_served=" << e.walks_served
              << " messages=" << e.cost.total_messages()
              << " rounds=" << e.cost.total_rounds() << "\n";
  std::cout << "served=" << served << " lambda=" << server.lambda()
            << " current_epoch=" << server.epoch() << " current_kappa="
            << server.table().kappa() << "\n";

  if (!dump_table.empty()) {
    std::ofstream dump(dump_table);
    if (!dump) throw std::ios_base::failure("cannot write " + dump_table);
    server.table().dump(dump);
  }
  if (cfg.record_delivery_log) {
    std::ofstream dl(out_dir / "delivery_log.csv");
    server.sim()->write_delivery_log_csv(dl);
  }
  return kExitOk;
}

int cmd_sweep(const CommonOptions& copt, bool message_flavor,
              const std::string& swept, const std::string& grid_csv,
              const std::string& families_csv, std::uint32_t n,
              std::uint32_t len, double eta, std::uint32_t replicas,
              unsigned threads, bool svg, const std::string& config_path) {
  SweepSpec spec;
  spec.n = n;
  spec.eta = eta;
  spec.replicas = replicas;
  spec.seed = copt.seed;
  spec.routing = parse_routing(copt.routing);
  spec.simulate = copt.engine == "sim";
  spec.threads = threads;
  if (len > 0) spec.walk_length = len;

  std::string swept_name = swept, grid_text = grid_csv,
              families_text = families_csv;
  if (!config_path.empty()) {
    for (const auto& [key, value] : parse_config_file(config_path)) {
      if (key == "sweep") swept_name = value;
      else if (key == "grid") grid_text = value;
      else if (key == "families") families_text = value;
      else if (key == "n") spec.n = std::stoul(value);
      else if (key == "l") spec.walk_length = std::stoul(value);
      else if (key == "eta") spec.eta = std::stod(value);
      else if (key == "lambda") spec.lambda = std::stoul(value);
      else if (key == "replicas") spec.replicas = std::stoul(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "threads") spec.threads = std::stoul(value);
      else throw std::runtime_error("unknown config key: " + key);
    }
  }

  if (swept_name == "l") spec.param = SweptParam::WalkLength;
  else if (swept_name == "n") spec.param = SweptParam::NodeCount;
  else if (swept_name == "eta") spec.param = SweptParam::Eta;
  else if (swept_name == "lambda") spec.param = SweptParam::Lambda;
  else throw CLI::ValidationError("--sweep", "unknown parameter " + swept_name);

  if (!grid_text.empty()) spec.grid = parse_grid(grid_text);
  else if (spec.param == SweptParam::WalkLength)
    spec.grid = default_length_grid(spec.n);
  else if (spec.param == SweptParam::NodeCount)
    spec.grid = {1000, 2000, 4000, 7000, 10000};
  else if (spec.param == SweptParam::Eta)
    spec.grid = {0.25, 0.5, 1, 2, 4};
  else
    spec.grid = {0.25, 0.5, 1.0};  // factors of sqrt(l)
  if (!families_text.empty()) spec.families = parse_families(families_text);

  auto records = message_flavor ? run_message_sweep(spec) : run_kappa_sweep(spec);

  ReportOptions opt;
  opt.directory = resolve_out_dir(copt);
  opt.basename = std::string(message_flavor ? "message" : "kappa") + "_sweep_" +
                 swept_param_name(spec.param);
  opt.svg = svg;
  std::ostringstream extra;
  extra << "sweep=" << swept_param_name(spec.param) << " n=" << spec.n
        << " eta=" << spec.eta << " replicas=" << spec.replicas;
  opt.provenance = provenance_line(copt, extra.str());
  auto written = emit_report(records, opt);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";

  for (const auto& rec : records)
    std::cout << family_name(rec.family) << " " << swept_param_name(rec.param)
              << "=" << rec.value << " kappa=" << rec.kappa_mean << "±"
              << rec.kappa_stddev << " msgs/walk=" << rec.messages_mean
              << " walks=" << rec.walks_mean << "\n";
  return kExitOk;
}

int cmd_dist_check(const GraphOptions& gopt, const CommonOptions& copt,
                   std::uint32_t len, std::uint64_t samples,
                   std::optional<std::uint32_t> source, std::uint32_t lambda,
                   double tv_max, bool all, const std::string& dump_dist) {
  std::cout << "# " << provenance_line(copt, "l=" + std::to_string(len)) << "\n";
  bool failed = false;

  if (all) {
    // small-graph battery: every family at n <= 20, l in {4, 8}
    for (const char* fam : {"gnp-expander", "two-tier", "power-law",
                            "geometric", "grid"}) {
      GraphOptions cell = gopt;
      cell.family = fam;
      cell.edge_list_path.clear();
      cell.n = std::string(fam) == "two-tier" ? 20 : 16;
      GeneratedGraph gg = load_or_generate(cell, copt.seed);
      for (std::uint32_t cell_len : {4u, 8u}) {
        auto check = destination_distribution_check(gg.graph, 0, cell_len,
                                                    samples, copt.seed, 0);
        bool ok = check.tv <= tv_max;
        failed = failed || !ok;
        std::cout << (ok ? "pass" : "FAIL") << " family=" << fam
                  << " n=" << gg.graph.n << " l=" << cell_len
                  << " tv=" << check.tv << " threshold=" << tv_max << "\n";
      }
    }
  } else {
    GeneratedGraph gg = load_or_generate(gopt, copt.seed);
    const Graph& g = gg.graph;
    NodeId s = source ? static_cast<NodeId>(*source) : 0;
    if (s >= g.n) throw CLI::ValidationError("--source", "node out of range");
    auto check =
        destination_distribution_check(g, s, len, samples, copt.seed, lambda);
    std::cout << "family=" << gopt.family << " n=" << g.n << " l=" << len
              << " lambda=" << check.lambda << " samples=" << samples
              << " tv=" << check.tv << " threshold=" << tv_max << "\n";
    failed = check.tv > tv_max;
    if (!dump_dist.empty()) {
      std::ofstream out(dump_dist);
      if (!out) throw std::ios_base::failure("cannot write " + dump_dist);
      write_distribution_csv(exact_walk_distribution(g, s, len), out);
      std::cout << "wrote " << dump_dist << "\n";
    }
  }
  std::cout << (failed ? "FAIL\n" : "PASS\n");
  return failed ? kExitCheckFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-walk sampling in bandwidth-constrained networks"};
  app.require_subcommand(1);

  GraphOptions gopt;
  CommonOptions copt;

  auto* gen = app.add_subcommand("generate", "build a graph and write it");
  add_graph_options(gen, gopt);
  add_common_options(gen, copt, /*with_out_dir=*/false);
  std::string gen_out;
  gen->add_option("-o,--out-file", gen_out, "edge-list output path");

  auto* walk = app.add_subcommand("walk", "perform one walk");
  add_graph_options(walk, gopt);
  add_common_options(walk, copt);
  bool walk_naive = false;
  std::uint32_t walk_len = 10, walk_lambda = 0;
  double walk_eta = 1.0;
  std::optional<std::uint32_t> walk_source;
  walk->add_flag("--naive", walk_naive, "naive token walk with return");
  walk->add_option("--l,--length", walk_len, "walk length")->default_val(10);
  walk->add_option("--eta", walk_eta, "short walks per unit degree*log2(n)")
      ->default_val(1.0);
  walk->add_option("--lambda", walk_lambda,
                   "short-walk length (0: ceil(sqrt(l)))");
  walk->add_option("--source", walk_source, "source node (default: degree draw)");

  auto* cont = app.add_subcommand("continuous", "serve a request stream");
  add_graph_options(cont, gopt);
  add_common_options(cont, copt);
  std::uint32_t cont_len = 0, cont_lambda = 0;
  double cont_eta = 1.0;
  std::uint64_t cont_requests = 100;
  bool cont_until_failure = false, cont_delivery_log = false;
  std::string cont_dump;
  cont->add_option("--l,--length", cont_len, "walk length (0: n)");
  cont->add_option("--eta", cont_eta)->default_val(1.0);
  cont->add_option("--lambda", cont_lambda, "short-walk length (0: ceil(sqrt(l)))");
  cont->add_option("--requests", cont_requests, "how many requests to serve")
      ->default_val(100);
  cont->add_flag("--until-failure", cont_until_failure,
                 "stop after the first table rebuild");
  cont->add_option("--dump-table", cont_dump, "write the table dump here");
  cont->add_flag("--delivery-log", cont_delivery_log,
                 "write delivery_log.csv (sim engine only)");

  auto add_sweep = [&](const char* name, const char* desc) {
    auto* cmd = app.add_subcommand(name, desc);
    add_common_options(cmd, copt, /*with_out_dir=*/true,
                       /*engine_default=*/"fast");
    return cmd;
  };
  std::string sweep_param = "l", sweep_grid, sweep_families, sweep_config;
  std::uint32_t sweep_n = 1000, sweep_len = 0, sweep_replicas = 10;
  double sweep_eta = 1.0;
  unsigned sweep_threads = 0;
  bool sweep_svg = true;
  for (auto* cmd : {add_sweep("kappa-sweep", "table-utilization experiment"),
                    add_sweep("message-sweep", "message-complexity experiment")}) {
    cmd->add_option("--sweep", sweep_param, "swept parameter: l|n|eta|lambda")
        ->default_val("l");
    cmd->add_option("--grid", sweep_grid, "comma-separated grid values");
    cmd->add_option("--families", sweep_families,
                    "comma-separated family subset (default: all five)");
    cmd->add_option("--n", sweep_n, "node count")->default_val(1000);
    cmd->add_option("--l,--length", sweep_len, "walk length (0: n)");
    cmd->add_option("--eta", sweep_eta)->default_val(1.0);
    cmd->add_option("--replicas", sweep_replicas)->default_val(10);
    cmd->add_option("--threads", sweep_threads, "worker threads (0: auto)");
    cmd->add_flag("--svg,!--no-svg", sweep_svg, "emit SVG plots")
        ->default_val(true);
    cmd->add_option("--config", sweep_config, "key=value config file");
  }

  auto* dist = app.add_subcommand("dist-check",
                                  "stitched walk vs exact distribution");
  add_graph_options(dist, gopt);
  add_common_options(dist, copt);
  std::uint32_t dist_len = 8, dist_lambda = 0;
  std::uint64_t dist_samples = 100000;
  std::optional<std::uint32_t> dist_source;
  double dist_tv_max = 0.02;
  bool dist_all = false;
  std::string dist_dump;
  dist->add_option("--l,--length", dist_len)->default_val(8);
  dist->add_option("--samples", dist_samples)->default_val(100000);
  dist->add_option("--source", dist_source, "source node (default 0)");
  dist->add_option("--lambda", dist_lambda, "short-walk length (0: ceil(sqrt(l)))");
  dist->add_option("--tv-max", dist_tv_max, "failure threshold")
      ->default_val(0.02);
  dist->add_flag("--all", dist_all,
                 "run the small-graph battery over all five families");
  dist->add_option("--dump-dist", dist_dump,
                   "write the exact distribution as node,probability CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(gopt, copt, gen_out);
    if (walk->parsed())
      return cmd_walk(gopt, copt, walk_naive, walk_len, walk_eta, walk_lambda,
                      walk_source);
    if (cont->parsed())
      return cmd_continuous(gopt, copt, cont_len, cont_eta, cont_lambda,
                            cont_requests, cont_until_failure, cont_dump,
                            cont_delivery_log);
    if (app.get_subcommand("kappa-sweep")->parsed())
      return cmd_sweep(copt, false, sweep_param, sweep_grid, sweep_families,
                       sweep_n, sweep_len, sweep_eta, sweep_replicas,
                       sweep_threads, sweep_svg, sweep_config);
    if (app.get_subcommand("message-sweep")->parsed())
      return cmd_sweep(copt, true, sweep_param, sweep_grid, sweep_families,
                       sweep_n, sweep_len, sweep_eta, sweep_replicas,
                       sweep_threads, sweep_svg, sweep_config);
    if (dist->parsed())
      return cmd_dist_check(gopt, copt, dist_len, dist_samples, dist_source,
                            dist_lambda, dist_tv_max, dist_all, dist_dump);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
