// nanoflow: simulate raw nanodevice reports, benchmark localizers, draw
// target-event samples and compute sampling convergence curves.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nanoflow/config.hpp"
#include "nanoflow/csv_io.hpp"
#include "nanoflow/errors.hpp"
#include "nanoflow/harness.hpp"
#include "nanoflow/localizer.hpp"
#include "nanoflow/rng.hpp"
#include "nanoflow/sampling.hpp"
#include "nanoflow/simcore.hpp"
#include "nanoflow/vasculature.hpp"

namespace fs = std::filesystem;
using namespace nanoflow;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kIo = 2, kExternal = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = benchmark::default_workers();
  std::string out = "nanoflow_out";
  std::optional<double> duration_s;
  std::optional<int> devices;
  std::string strategy;
  std::optional<std::size_t> k;
  std::string localizer = "baseline";
  std::string sizes;
  std::string raw_dir;
  std::string dense_results;
};

RunConfig resolve(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig::from_json(nlohmann::json::object())
                                 : RunConfig::load(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.duration_s) c.duration_s = *o.duration_s;
  if (o.devices) c.device_count = *o.devices;
  if (o.k) c.k = *o.k;
  if (!o.strategy.empty() && o.strategy.find(',') == std::string::npos) {
    const auto s = benchmark::parse_strategy(o.strategy);
    if (!s) throw ConfigError("--strategy", "unknown strategy '" + o.strategy + "'");
    c.strategy = *s;
  }
  if (o.workers < 1) throw ConfigError("--workers", "must be >= 1");
  c.validate();
  return c;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_resolved(const fs::path& dir, const RunConfig& c) {
  const fs::path p = dir / "resolved_config.json";
  auto out = open_out(p);
  out << c.to_json().dump(2) << '\n';
  close_out(out, p);
}

std::vector<benchmark::TargetEvent> sampled_events(const RunConfig& c,
                                                   const vasculature::VesselGraph& g) {
  const auto dense = benchmark::build_dense_set(g, c.dense_count);
  return benchmark::sample_locations(dense, c.strategy, c.k, derive_seed(c.seed, 0x5A3F));
}

std::string csv_number(double v) { return std::isnan(v) ? "nan" : csv::fixed6(v); }

std::string format_mean(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

int cmd_simulate(const Options& o) {
  RunConfig c = resolve(o);
  const auto g = c.load_graph();
  const fs::path dir = prepare_out(o.out);
  write_resolved(dir, c);

  auto traces = vasculature::simulate_mobility(g, c.device_count, c.duration_s,
                                               derive_seed(c.seed, 0));
  for (auto& tr : traces) {
    vasculature::UpsampleParams p{c.upsample_factor, c.upsample_sigma_cm,
                                  derive_seed(derive_seed(c.seed, 1), static_cast<std::uint64_t>(tr.device_id))};
    tr = vasculature::upsample_trace(tr, p);
  }
  simcore::SimulationInput in;
  in.graph = &g;
  in.traces = traces;
  in.anchors = c.anchors;
  in.scenario = {c.target, c.detection_radius_cm, c.sense_rate_hz};
  in.energy = c.energy;
  in.channel = c.channel;
  in.protocol = c.protocol;
  in.duration_s = c.duration_s;
  in.seed = derive_seed(c.seed, 2);
  const auto result = simcore::run_simulation(in);

  {
    const fs::path p = dir / "raw.csv";
    auto out = open_out(p);
    simcore::write_raw_csv(out, result.records);
    close_out(out, p);
  }
  {
    const fs::path p = dir / "energy.csv";
    auto out = open_out(p);
    simcore::write_energy_csv(out, result.timeline);
    close_out(out, p);
  }
  {
    const fs::path p = dir / "trace.csv";
    auto out = open_out(p);
    vasculature::write_trace_csv(out, traces);
    close_out(out, p);
  }
  std::size_t positives = 0;
  for (const auto& r : result.records) positives += r.event_bit;
  std::cout << "records " << result.records.size() << " (event-positive " << positives
            << ") from " << c.device_count << " devices over " << c.duration_s << " s\n";
  return kOk;
}

std::unique_ptr<benchmark::Localizer> make_localizer(const std::string& spec, const RunConfig& c,
                                                     const vasculature::VesselGraph& g) {
  if (spec == "baseline") {
    benchmark::BaselineOptions opt;
    opt.detection_radius_cm = c.detection_radius_cm;
    opt.sense_rate_hz = c.sense_rate_hz;
    return std::make_unique<benchmark::BaselineLocalizer>(g, opt);
  }
  const std::string prefix = "external:";
  if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) {
    auto ext = std::make_unique<benchmark::ExternalLocalizer>(
        benchmark::ExternalLocalizer::from_csv(fs::path(spec.substr(prefix.size()))));
    ext->check_against(g);
    return ext;
  }
  throw ConfigError("--localizer", "expected baseline or external:PATH, got '" + spec + "'");
}

void write_raw_dir(const std::string& dir, std::span<const benchmark::EventRun> runs,
                   std::span<const benchmark::TargetEvent> events) {
  const fs::path d = prepare_out(dir);
  {
    const fs::path p = d / "events.csv";
    auto out = open_out(p);
    benchmark::write_events_csv(out, events);
    close_out(out, p);
  }
  for (const auto& run : runs) {
    const fs::path p = d / ("raw_event_" + std::to_string(run.truth.id) + ".csv");
    auto out = open_out(p);
    simcore::write_raw_csv(out, run.records);
    close_out(out, p);
  }
}

int cmd_benchmark(const Options& o) {
  RunConfig c = resolve(o);
  const auto g = c.load_graph();
  const auto localizer = make_localizer(o.localizer, c, g);
  const fs::path dir = prepare_out(o.out);
  write_resolved(dir, c);

  const auto events = sampled_events(c, g);
  const auto runs =
      benchmark::run_event_simulations(g, c.scenario_settings(), events, o.workers, c.seed);
  if (!o.raw_dir.empty()) write_raw_dir(o.raw_dir, runs, events);
  auto report = benchmark::evaluate_runs(g, runs, *localizer, c.sim_times_s, c.seed,
                                         c.point_errors_correct_only);
  report.config_fingerprint = c.fingerprint();

  const fs::path p = dir / "report.json";
  auto out = open_out(p);
  out << report.to_json().dump(2) << '\n';
  close_out(out, p);
  std::cout << "region_accuracy " << report.overall.region_accuracy << " ("
            << report.overall.n_correct << "/" << report.overall.n_total << ")\n"
            << "mean_point_error_cm "
            << format_mean(report.overall.mean_point_error_cm(c.point_errors_correct_only)) << "\n";
  return kOk;
}

int cmd_sample(const Options& o) {
  RunConfig c = resolve(o);
  const auto g = c.load_graph();
  const fs::path dir = prepare_out(o.out);
  const auto events = sampled_events(c, g);
  write_resolved(dir, c);
  const fs::path p = dir / "sample.csv";
  auto out = open_out(p);
  benchmark::write_events_csv(out, events);
  close_out(out, p);
  std::cout << "sampled " << events.size() << " events with " << benchmark::to_string(c.strategy)
            << "\n";
  return kOk;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("--sizes", "expected positive integers, got '" + item + "'");
    }
  }
  return out;
}

std::vector<benchmark::Strategy> parse_strategies(const std::string& text) {
  if (text.empty()) return {std::begin(benchmark::kAllStrategies), std::end(benchmark::kAllStrategies)};
  std::vector<benchmark::Strategy> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto s = benchmark::parse_strategy(item);
    if (!s) throw ConfigError("--strategy", "unknown strategy '" + item + "'");
    out.push_back(*s);
  }
  return out;
}

int cmd_convergence(const Options& o) {
  RunConfig c = resolve(o);
  const auto g = c.load_graph();
  const auto strategies = parse_strategies(o.strategy);
  const fs::path dir = prepare_out(o.out);
  write_resolved(dir, c);

  std::vector<benchmark::EventOutcome> outcomes;
  if (!o.dense_results.empty()) {
    std::ifstream in(o.dense_results, std::ios::binary);
    if (!in) throw IoError("cannot read " + o.dense_results);
    outcomes = benchmark::read_outcomes_csv(in);
  } else {
    const auto dense = benchmark::build_dense_set(g, c.dense_count);
    const auto localizer = make_localizer(o.localizer, c, g);
    const auto runs =
        benchmark::run_event_simulations(g, c.scenario_settings(), dense, o.workers, c.seed);
    outcomes = benchmark::localize_runs(g, runs, *localizer, c.seed);
    const fs::path p = dir / "dense_results.csv";
    auto out = open_out(p);
    benchmark::write_outcomes_csv(out, outcomes);
    close_out(out, p);
  }
  if (outcomes.empty()) throw ExternalDataError("dense results are empty");

  std::vector<std::size_t> sizes = parse_sizes(o.sizes);
  if (sizes.empty()) sizes = c.convergence_sizes;
  if (sizes.empty()) {
    for (int pct = 10; pct <= 100; pct += 10) {
      sizes.push_back(std::max<std::size_t>(1, outcomes.size() * static_cast<std::size_t>(pct) / 100));
    }
  }

  const fs::path p = dir / "convergence.csv";
  auto out = open_out(p);
  out << "strategy,k,region_acc,mean_err_cm\n";
  for (auto s : strategies) {
    for (const auto& pt : benchmark::convergence_curve(outcomes, s, sizes, c.seed, g,
                                                       c.point_errors_correct_only)) {
      out << benchmark::to_string(s) << ',' << pt.k << ',' << csv_number(pt.region_accuracy)
          << ',' << csv_number(pt.mean_point_error_cm) << '\n';
    }
  }
  close_out(out, p);
  std::cout << "convergence curves for " << strategies.size() << " strategies written to "
            << p.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nanoflow: flow-guided nanoscale localization simulator and benchmark"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run configuration JSON");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--workers", o.workers, "Concurrent simulation runs (default NANOFLOW_WORKERS or cores)");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--duration-s", o.duration_s, "Simulated seconds");
    sub->add_option("--devices", o.devices, "Number of nanodevices");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate raw, energy and trace CSVs");
  common(simulate);

  auto* bench = app.add_subcommand("benchmark", "Score a localizer on sampled target events");
  common(bench);
  bench->add_option("--strategy", o.strategy, "SRS, SSRS, CRS, RGS or SCS");
  bench->add_option("--k", o.k, "Number of target events");
  bench->add_option("--localizer", o.localizer, "baseline or external:PATH");
  bench->add_option("--raw-dir", o.raw_dir, "Also write per-event raw CSVs here");

  auto* sample = app.add_subcommand("sample", "Draw target-event locations");
  common(sample);
  sample->add_option("--strategy", o.strategy, "SRS, SSRS, CRS, RGS or SCS");
  sample->add_option("--k", o.k, "Sample size");

  auto* conv = app.add_subcommand("convergence", "Metric convergence per sampling strategy");
  common(conv);
  conv->add_option("--strategy", o.strategy, "Comma-separated strategies (default all)");
  conv->add_option("--sizes", o.sizes, "Comma-separated sample sizes");
  conv->add_option("--localizer", o.localizer, "baseline or external:PATH");
  conv->add_option("--dense-results", o.dense_results, "Cached dense outcomes CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*bench) return cmd_benchmark(o);
    if (*sample) return cmd_sample(o);
    if (*conv) return cmd_convergence(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InvalidGraph& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SampleTooLarge& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ConfigMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ExternalDataError& e) {
    std::cerr << "external data error: " << e.what() << "\n";
    return kExternal;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kConfig;
}
