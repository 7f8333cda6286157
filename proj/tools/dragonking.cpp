// dragonking: tail fitting and dragon-king / black-swan tests from the command line.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dragonking/dragonking.hpp"

namespace dk = dragonking;
namespace io = dragonking::io;

namespace {

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    io::write_file(path, content);
  }
}

struct TailFlags {
  std::string family = "power";
  std::string window = "0.10:0.01";
  std::string side = "right";
  std::string weibull_method = "probability_space";

  void add(CLI::App* cmd) {
    cmd->add_option("--family", family, "Tail family to fit")->check(CLI::IsMember({"power", "weibull"}));
    cmd->add_option("--window", window, "Calibration window UPPER:CUT, e.g. 0.10:0.01 or 0.25:0.025");
    cmd->add_option("--side", side, "Tail to analyse")->check(CLI::IsMember({"left", "right"}));
    cmd->add_option("--weibull-method", weibull_method, "Weibull tail least-squares variant")
        ->check(CLI::IsMember({"probability_space", "double_log"}));
  }
  dk::TailWindow tail_window() const { return io::parse_window(window, io::parse_side(side)); }
};

// -- fit-tail ---------------------------------------------------------------

struct FitTailCmd {
  std::string input, output;
  TailFlags tail;
  bool mle = false;
  std::optional<double> fixed_tau;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit-tail", "Fit a tail model to a sample (CSV with a 'value' column)");
    cmd->add_option("--input,-i", input, "Sample CSV")->required();
    cmd->add_option("--output,-o", output, "Model JSON (default stdout)");
    tail.add(cmd);
    cmd->add_flag("--mle", mle, "Whole-sample Weibull maximum likelihood instead of a tail-window fit");
    cmd->add_option("--fixed-tau", fixed_tau, "With --mle: hold the shape fixed and estimate the scale only");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto sample = io::read_sample_csv(input);
    const auto window = tail.tail_window();
    dk::TailModel model;
    if (mle) {
      model = dk::fit_weibull_mle(window.side == dk::Side::left ? sample.negated() : sample, fixed_tau);
      model.side = window.side;
    } else {
      model = dk::fit_tail(sample, window, io::parse_family(tail.family), io::parse_weibull_method(tail.weibull_method));
    }
    dk::json j = io::to_json(model);
    j["input"] = {{"digest", dk::digest(sample)}, {"n", sample.size()}};
    j["tool"] = {{"name", dk::tool_name}, {"version", dk::tool_version}};
    emit(output, io::canonical_json(j));
  }
};

// -- test -------------------------------------------------------------------

struct TestCmd {
  std::string input, output, plot_data, preprocessing, from_report;
  std::string format = "json";
  TailFlags tail;
  std::vector<double> alphas{0.05, 0.01};
  std::vector<std::size_t> ranks{4, 8, 12};
  std::size_t grid = 64;
  CLI::App* cmd = nullptr;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("test", "Fit the tail and classify the largest observations");
    cmd->add_option("--input,-i", input, "Sample CSV")->required();
    cmd->add_option("--output,-o", output, "Report file (default stdout)");
    cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    tail.add(cmd);
    cmd->add_option("--alpha", alphas, "Significance levels, comma separated")->delimiter(',');
    cmd->add_option("--ranks", ranks, "Ranks of the observations to test, comma separated")->delimiter(',');
    cmd->add_option("--grid", grid, "Log-spaced plot grid size");
    cmd->add_option("--plot-data", plot_data, "Write band curves as CSV");
    cmd->add_option("--preprocessing", preprocessing, "Metadata JSON from 'deseasonalize' to embed in the report");
    cmd->add_option("--from-report", from_report, "Reuse the settings embedded in an earlier JSON report");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto sample = io::read_sample_csv(input);
    io::ReportSettings s;
    if (!from_report.empty()) {
      s = io::settings_from_json(io::parse_json(io::read_file(from_report), from_report));
    } else {
      s.family = io::parse_family(tail.family);
      s.window = tail.tail_window();
      s.config.alphas = alphas;
      s.config.ranks = ranks;
      s.grid_points = grid;
      s.weibull_method = io::parse_weibull_method(tail.weibull_method);
    }
    std::optional<dk::json> meta;
    if (!preprocessing.empty()) meta = io::parse_json(io::read_file(preprocessing), preprocessing);
    const auto report = io::run_report(sample, s);
    const auto j = io::report_to_json(report, s, meta);
    emit(output, format == "json" ? io::canonical_json(j) : io::render_text(j));
    if (!plot_data.empty()) io::write_file(plot_data, io::plot_csv(j));
  }
};

// -- simulate ---------------------------------------------------------------

struct SimulateCmd {
  std::string preset, config, model, output, dump_sample;
  std::string reference = "fitted";
  std::string format = "text";
  TailFlags tail;
  std::size_t n = 1000;
  std::size_t reps = 2000;
  std::vector<double> alphas{0.10, 0.05, 0.01};
  std::size_t rank = 4;
  std::uint64_t seed = 20110101;
  unsigned threads = 0;
  CLI::App* cmd = nullptr;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("simulate", "Monte Carlo rejection rates of the test");
    cmd->add_option("--preset", preset, "Published grid layout")->check(CLI::IsMember({"table1", "table2"}));
    cmd->add_option("--config", config, "Declarative study file (JSON)");
    cmd->add_option("--model", model, "Generating law, e.g. cauchy:0,1 pareto:2,1 hyp:2,1 weibull:1,0.5");
    cmd->add_option("--reference", reference, "Compare against the fitted or the true tail")
        ->check(CLI::IsMember({"fitted", "true"}));
    tail.add(cmd);
    cmd->add_option("--n", n, "Sample size");
    cmd->add_option("--reps", reps, "Replications per cell");
    cmd->add_option("--alpha", alphas, "Significance levels, comma separated")->delimiter(',');
    cmd->add_option("--rank", rank, "Rank of the tested observation");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
    cmd->add_option("--output,-o", output, "Output file (default stdout)");
    cmd->add_option("--dump-sample", dump_sample, "Write replication 0 of the first cell as a sample CSV");
    cmd->callback([this] { run(); });
  }

  std::vector<dk::StudyConfig> grid() const {
    const int sources = (preset.empty() ? 0 : 1) + (config.empty() ? 0 : 1) + (model.empty() ? 0 : 1);
    if (sources != 1) throw dk::config_error("simulate: give exactly one of --preset, --config or --model");
    std::vector<dk::StudyConfig> cells;
    if (!model.empty()) {
      dk::StudyConfig c;
      c.model = io::parse_model(model);
      c.family = io::parse_family(tail.family);
      c.reference = io::parse_reference(reference);
      c.window = tail.tail_window();
      c.n = n;
      c.replications = reps;
      c.alphas = alphas;
      c.rank = rank;
      c.master_seed = dk::Seed{seed};
      c.threads = threads;
      c.weibull_method = io::parse_weibull_method(tail.weibull_method);
      return {c};
    }
    dk::json j = preset.empty() ? io::parse_json(io::read_file(config), config) : dk::json{{"preset", preset}};
    // Explicit flags override the file.
    if (cmd->count("--reps")) j["replications"] = reps;
    if (cmd->count("--seed")) j["master_seed"] = seed;
    if (cmd->count("--threads")) j["threads"] = threads;
    if (cmd->count("--rank")) j["rank"] = rank;
    if (cmd->count("--alpha")) j["alphas"] = alphas;
    if (preset.empty()) return io::study_configs_from_json(j);
    if (!j.contains("replications")) j["replications"] = reps;
    if (!j.contains("master_seed")) j["master_seed"] = seed;
    return io::study_configs_from_json(j);
  }

  void run() const {
    const auto cells = grid();
    if (!dump_sample.empty()) {
      const auto& c = cells.front();
      const auto values = dk::Sampler(c.model).draw(c.n, dk::derive_seed(c.master_seed, 0));
      io::write_file(dump_sample, io::sample_csv(values));
    }
    const auto results = dk::study_grid(cells);
    std::string out;
    if (format == "json") out = io::canonical_json(io::study_to_json(results));
    else if (format == "csv") out = io::study_csv(results);
    else out = io::study_text(results);
    emit(output, out);
  }
};

// -- drawdowns --------------------------------------------------------------

struct DrawdownsCmd {
  std::string input, output, details;
  bool positive = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("drawdowns", "Drawdowns of a price series as a sample CSV");
    cmd->add_option("--input,-i", input, "Time series CSV (date,value)")->required();
    cmd->add_option("--output,-o", output, "Sample CSV of drawdown magnitudes (default stdout)");
    cmd->add_option("--details", details, "CSV with the start and end date of each drawdown");
    cmd->add_flag("--positive", positive, "Write losses as positive fractions (right tail)");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto series = io::read_timeseries_csv(input);
    if (series.size() != 1) throw dk::config_error("drawdowns: input has several hour series; split it first");
    const auto dd = dk::drawdowns(series.front());
    if (dd.empty()) throw dk::domain_error("drawdowns: the series has no decline period");
    std::vector<double> values;
    for (const auto& d : dd) values.push_back(positive ? -d.magnitude : d.magnitude);
    emit(output, io::sample_csv(values));
    if (!details.empty()) io::write_file(details, io::drawdown_csv(dd, &series.front()));
  }
};

// -- deseasonalize ----------------------------------------------------------

struct DeseasonalizeCmd {
  std::string input, output, changes, metadata, holidays;
  std::string ltsc = "wavelet";
  std::string stat = "mean";
  double bandwidth = 64.0;
  std::size_t level = 6;
  std::optional<int> hour;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("deseasonalize", "Remove trend and weekly pattern; emit price changes");
    cmd->add_option("--input,-i", input, "Time series CSV (date,value[,hour])")->required();
    cmd->add_option("--ltsc", ltsc, "Long-term seasonal component smoother")->check(CLI::IsMember({"kernel", "wavelet"}));
    cmd->add_option("--bandwidth", bandwidth, "Kernel bandwidth in days");
    cmd->add_option("--level", level, "Wavelet decomposition level");
    cmd->add_option("--stat", stat, "Weekly statistic")->check(CLI::IsMember({"mean", "median"}));
    cmd->add_option("--holidays", holidays, "Holiday list (one ISO date per line); holidays form an 8th day class");
    cmd->add_option("--output,-o", output, "Decomposition CSV (default stdout)");
    cmd->add_option("--changes", changes, "Sample CSV of the price changes of the stochastic component");
    cmd->add_option("--hour", hour, "Hour series to use for --changes when the input is hourly");
    cmd->add_option("--metadata", metadata, "Decomposition metadata JSON");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto series = io::read_timeseries_csv(input);
    dk::DeseasonalizeOptions opt;
    opt.method = ltsc == "kernel" ? dk::LtscMethod::kernel : dk::LtscMethod::wavelet;
    opt.bandwidth = bandwidth;
    opt.level = level;
    opt.stat = stat == "median" ? dk::WeeklyStat::median : dk::WeeklyStat::mean;
    if (!holidays.empty()) opt.holidays = io::read_holidays(holidays);
    std::vector<dk::SeasonalDecomposition> parts;
    for (const auto& s : series) parts.push_back(dk::deseasonalize(s, opt));
    emit(output, io::decomposition_csv(parts));
    if (!metadata.empty()) io::write_file(metadata, io::canonical_json(io::decomposition_metadata_json(parts)));
    if (!changes.empty()) {
      const dk::SeasonalDecomposition* chosen = nullptr;
      if (parts.size() == 1 && !hour) chosen = &parts.front();
      for (const auto& p : parts)
        if (hour && p.series.hour == hour) chosen = &p;
      if (chosen == nullptr)
        throw dk::config_error(hour ? "deseasonalize: no series for hour " + std::to_string(*hour)
                                    : std::string("deseasonalize: input is hourly; pick a series with --hour"));
      const auto delta = dk::price_changes(*chosen);
      io::write_file(changes, io::sample_csv(delta.values()));
    }
  }
};

// -- report -----------------------------------------------------------------

struct ReportCmd {
  std::string input, output, plot_data;
  std::string format = "text";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("report", "Re-render a stored JSON report");
    cmd->add_option("--input,-i", input, "Report JSON")->required();
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--output,-o", output, "Output file (default stdout)");
    cmd->add_option("--plot-data", plot_data, "Write band curves as CSV");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto j = io::parse_json(io::read_file(input), input);
    emit(output, format == "json" ? io::canonical_json(j) : io::render_text(j));
    if (!plot_data.empty()) io::write_file(plot_data, io::plot_csv(j));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dragon king and black swan tests for heavy-tailed samples"};
  app.set_version_flag("--version", std::string(dk::tool_version));
  app.require_subcommand(1);

  FitTailCmd fit_tail;
  TestCmd test;
  SimulateCmd simulate;
  DrawdownsCmd drawdowns;
  DeseasonalizeCmd deseasonalize;
  ReportCmd report;
  fit_tail.add(app);
  test.add(app);
  simulate.add(app);
  drawdowns.add(app);
  deseasonalize.add(app);
  report.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const dk::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const dk::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
