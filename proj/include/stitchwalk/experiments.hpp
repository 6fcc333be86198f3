#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stitchwalk/generators.hpp"
#include "stitchwalk/graph.hpp"
#include "stitchwalk/routing.hpp"
#include "stitchwalk/walk_engine.hpp"

namespace stitchwalk {

enum class SweptParam { WalkLength, NodeCount, Eta, Lambda };

inline const char* swept_param_name(SweptParam p) {
  switch (p) {
    case SweptParam::WalkLength: return "l";
    case SweptParam::NodeCount: return "n";
    case SweptParam::Eta: return "eta";
    case SweptParam::Lambda: return "lambda";
  }
  return "?";
}

// One sweep: vary a single parameter over a grid, everything else held at
// the defaults (n=10000, l=n, eta=1, lambda=ceil(sqrt(l)) unless overridden).
// Lambda grid values are factors of sqrt(l).
struct SweepSpec {
  SweptParam param = SweptParam::WalkLength;
  std::vector<double> grid;
  std::vector<Family> families{Family::GnpExpander, Family::TwoTier,
                               Family::PowerLaw, Family::Geometric,
                               Family::Grid};
  std::uint32_t n = 10000;
  std::optional<std::uint32_t> walk_length;  // default: n
  double eta = 1.0;
  std::optional<std::uint32_t> lambda;  // default: ceil(sqrt(l))
  std::uint32_t replicas = 10;
  std::uint64_t seed = 0;
  bool simulate = false;  // token-level kernel instead of direct accounting
  RoutingMode routing = RoutingMode::ShortestPath;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ReplicaMeasurement {
  std::uint32_t replica = 0;
  double kappa = 0.0;
  double amortized_rounds = 0.0;
  double amortized_messages = 0.0;
  std::uint64_t walks_served = 0;
  std::uint64_t epoch_rounds = 0;    // phase-summed totals for the epoch
  std::uint64_t epoch_messages = 0;
  std::uint32_t diameter = 0;
  std::string error;  // nonempty when this cell failed
};

struct ExperimentRecord {
  Family family = Family::GnpExpander;
  SweptParam param = SweptParam::WalkLength;
  double value = 0.0;
  std::vector<ReplicaMeasurement> replicas;
  double kappa_mean = 0.0, kappa_stddev = 0.0;
  double rounds_mean = 0.0, rounds_stddev = 0.0;
  double messages_mean = 0.0, messages_stddev = 0.0;
  double walks_mean = 0.0;
};

namespace detail {

inline void mean_stddev(const std::vector<double>& xs, double& mean,
                        double& stddev) {
  mean = stddev = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) stddev += (x - mean) * (x - mean);
  stddev = std::sqrt(stddev / static_cast<double>(xs.size()));
}

// Runs one (family, value, replica) cell: build the graph, serve requests
// with degree-proportional sources until the table first fails, and report
// that epoch's utilization and amortized costs.
inline ReplicaMeasurement run_cell(const SweepSpec& spec, Family family,
                                   double value, std::uint32_t replica,
                                   std::uint64_t cell_seed) {
  ReplicaMeasurement meas;
  meas.replica = replica;
  try {
    std::uint32_t n = spec.param == SweptParam::NodeCount
                          ? static_cast<std::uint32_t>(value)
                          : spec.n;
    GeneratorSpec gen;
    gen.family = family;
    gen.n = n;
    gen.seed = cell_seed;
    GeneratedGraph gg = generate(gen);
    const Graph& g = gg.graph;

    std::uint32_t len = spec.param == SweptParam::WalkLength
                            ? static_cast<std::uint32_t>(value)
                            : spec.walk_length.value_or(g.n);
    ContinuousConfig cfg;
    cfg.eta = spec.param == SweptParam::Eta ? value : spec.eta;
    if (spec.param == SweptParam::Lambda) {
      cfg.lambda_mode = LambdaMode::Explicit;
      cfg.lambda_explicit = std::max<std::uint32_t>(
          1, static_cast<std::uint32_t>(
                 std::ceil(value * std::sqrt(static_cast<double>(len)))));
    } else if (spec.lambda) {
      cfg.lambda_mode = LambdaMode::Explicit;
      cfg.lambda_explicit = *spec.lambda;
    } else {
      cfg.lambda_mode = LambdaMode::SqrtLen;
    }
    cfg.routing = spec.routing;
    cfg.simulate = spec.simulate;

    ContinuousWalkServer server(g, len, cfg, cell_seed);
    while (server.completed_epochs().empty()) server.serve_next();
    const auto& epoch = server.completed_epochs().front();
    meas.kappa = epoch.kappa;
    meas.walks_served = epoch.walks_served;
    meas.epoch_rounds = epoch.cost.total_rounds();
    meas.epoch_messages = epoch.cost.total_messages();
    double walks = static_cast<double>(std::max<std::uint64_t>(1, epoch.walks_served));
    meas.amortized_rounds = static_cast<double>(meas.epoch_rounds) / walks;
    meas.amortized_messages = static_cast<double>(meas.epoch_messages) / walks;
    meas.diameter = server.oracle().graph_diameter();
  } catch (const std::exception& e) {
    meas.error = e.what();
  }
  return meas;
}

inline void run_pool(std::size_t jobs, unsigned threads,
                     const std::function<void(std::size_t)>& fn) {
  unsigned hw = threads ? threads : std::thread::hardware_concurrency();
  hw = std::max(1u, std::min<unsigned>(hw, static_cast<unsigned>(jobs)));
  if (hw == 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(hw);
  for (unsigned t = 0; t < hw; ++t)
    workers.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= jobs) return;
        fn(i);
      }
    });
  for (auto& w : workers) w.join();
}

}  // namespace detail

inline std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep grid is empty");
  if (spec.replicas == 0) throw std::invalid_argument("replicas must be >= 1");
  if (spec.families.empty()) throw std::invalid_argument("no families selected");

  struct Cell {
    std::size_t record;
    std::uint32_t replica;
    std::uint64_t seed;
  };
  std::vector<ExperimentRecord> records;
  std::vector<Cell> cells;
  for (std::size_t fi = 0; fi < spec.families.size(); ++fi)
    for (std::size_t vi = 0; vi < spec.grid.size(); ++vi) {
      ExperimentRecord rec;
      rec.family = spec.families[fi];
      rec.param = spec.param;
      rec.value = spec.grid[vi];
      rec.replicas.resize(spec.replicas);
      records.push_back(std::move(rec));
      for (std::uint32_t r = 0; r < spec.replicas; ++r)
        cells.push_back({records.size() - 1, r,
                         derive_key(spec.seed, stream::sweep_cell,
                                    (fi << 20) | vi, r)});
    }

  detail::run_pool(cells.size(), spec.threads, [&](std::size_t i) {
    const Cell& c = cells[i];
    const ExperimentRecord& rec = records[c.record];
    records[c.record].replicas[c.replica] =
        detail::run_cell(spec, rec.family, rec.value, c.replica, c.seed);
  });

  // deterministic fold in cell order
  for (auto& rec : records) {
    std::vector<double> kappas, rounds, messages;
    double walks = 0.0;
    std::size_t ok = 0;
    for (const auto& m : rec.replicas) {
      if (!m.error.empty()) continue;
      kappas.push_back(m.kappa);
      rounds.push_back(m.amortized_rounds);
      messages.push_back(m.amortized_messages);
      walks += static_cast<double>(m.walks_served);
      ++ok;
    }
    detail::mean_stddev(kappas, rec.kappa_mean, rec.kappa_stddev);
    detail::mean_stddev(rounds, rec.rounds_mean, rec.rounds_stddev);
    detail::mean_stddev(messages, rec.messages_mean, rec.messages_stddev);
    rec.walks_mean = ok ? walks / static_cast<double>(ok) : 0.0;
  }
  return records;
}

// The two experiment surfaces measure the same first-epoch quantities; the
// split mirrors the two figure sets (utilization vs message complexity).
inline std::vector<ExperimentRecord> run_kappa_sweep(const SweepSpec& spec) {
  return run_sweep(spec);
}
inline std::vector<ExperimentRecord> run_message_sweep(const SweepSpec& spec) {
  return run_sweep(spec);
}

// ---- reporting ----

struct ReportOptions {
  std::filesystem::path directory;
  std::string basename = "sweep";
  bool svg = true;
  std::string provenance;  // written as leading '#' lines / SVG comment
};

namespace detail {

inline std::string svg_line_plot(const std::vector<ExperimentRecord>& records,
                                 bool kappa_axis, const std::string& title) {
  // group by family, x = swept value, y = replica-averaged measurement
  std::vector<Family> fams;
  for (const auto& r : records)
    if (std::find(fams.begin(), fams.end(), r.family) == fams.end())
      fams.push_back(r.family);

  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  for (const auto& r : records) {
    double y = kappa_axis ? r.kappa_mean : r.messages_mean;
    xmin = std::min(xmin, r.value);
    xmax = std::max(xmax, r.value);
    ymax = std::max(ymax, y);
  }
  if (kappa_axis) ymax = 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  bool logx = xmin > 0.0 && xmax / xmin > 50.0;
  auto xt = [&](double v) {
    double lo = logx ? std::log10(xmin) : xmin;
    double hi = logx ? std::log10(xmax) : xmax;
    double x = logx ? std::log10(v) : v;
    if (hi <= lo) return 80.0;
    return 80.0 + (x - lo) / (hi - lo) * 560.0;
  };
  auto yt = [&](double v) { return 420.0 - (v - ymin) / (ymax - ymin) * 360.0; };

  static const char* colors[] = {"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                                 "#775b9f"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
         "height=\"480\" viewBox=\"0 0 720 480\">\n";
  svg << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
  svg << "<text x=\"360\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  svg << "<line x1=\"80\" y1=\"420\" x2=\"640\" y2=\"420\" stroke=\"black\"/>\n";
  svg << "<line x1=\"80\" y1=\"60\" x2=\"80\" y2=\"420\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double v = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"72\" y=\"" << yt(v) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << std::setprecision(3)
        << v << "</text>\n";
  }
  std::size_t ci = 0;
  for (Family f : fams) {
    std::ostringstream pts;
    for (const auto& r : records)
      if (r.family == f)
        pts << xt(r.value) << ',' << yt(kappa_axis ? r.kappa_mean
                                                   : r.messages_mean)
            << ' ';
    const char* color = colors[ci % 5];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    svg << "<text x=\"650\" y=\"" << 70 + 18 * ci << "\" font-size=\"12\" fill=\""
        << color << "\">" << family_name(f) << "</text>\n";
    ++ci;
  }
  // x tick labels at each grid value
  std::vector<double> xs;
  for (const auto& r : records)
    if (std::find(xs.begin(), xs.end(), r.value) == xs.end())
      xs.push_back(r.value);
  for (double v : xs)
    svg << "<text x=\"" << xt(v)
        << "\" y=\"436\" text-anchor=\"middle\" font-size=\"10\">"
        << std::setprecision(4) << v << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace detail

// CSV (always) and optionally a self-contained SVG line plot per figure.
inline std::vector<std::filesystem::path> emit_report(
    const std::vector<ExperimentRecord>& records, const ReportOptions& opt) {
  if (records.empty()) throw std::invalid_argument("no records to report");
  std::filesystem::create_directories(opt.directory);
  std::vector<std::filesystem::path> written;

  std::filesystem::path csv_path = opt.directory / (opt.basename + ".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  if (!opt.provenance.empty()) {
    std::istringstream lines(opt.provenance);
    std::string line;
    while (std::getline(lines, line)) csv << "# " << line << '\n';
  }
  csv << "family,param_name,param_value,replica,kappa,amortized_rounds,"
         "amortized_messages,walks_served,diameter\n";
  for (const auto& rec : records)
    for (const auto& m : rec.replicas) {
      if (!m.error.empty()) continue;
      csv << family_name(rec.family) << ',' << swept_param_name(rec.param)
          << ',' << rec.value << ',' << m.replica << ',' << m.kappa << ','
          << m.amortized_rounds << ',' << m.amortized_messages << ','
          << m.walks_served << ',' << m.diameter << '\n';
    }
  csv.close();
  written.push_back(csv_path);

  if (opt.svg) {
    for (bool kappa_axis : {true, false}) {
      std::string title =
          std::string(kappa_axis ? "utilization vs " : "amortized messages vs ") +
          swept_param_name(records.front().param);
      std::filesystem::path svg_path =
          opt.directory /
          (opt.basename + (kappa_axis ? "_kappa.svg" : "_messages.svg"));
      std::ofstream svg(svg_path);
      if (!svg) throw std::runtime_error("cannot write " + svg_path.string());
      if (!opt.provenance.empty()) svg << "<!-- " << opt.provenance << " -->\n";
      svg << detail::svg_line_plot(records, kappa_axis, title);
      svg.close();
      written.push_back(svg_path);
    }
  }
  return written;
}

// Flat key=value config file; '#' starts a comment line.
inline std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("bad config line: " + line);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace stitchwalk
