// Command-line front end: estimate, select, benchmark, frozen, trajectory,
// stream. Every run is deterministic given its flags and seed; runs that
// write files also emit a <out>.config sidecar that reproduces them via
// --config.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wwkde/density.hpp"
#include "wwkde/estimator.hpp"
#include "wwkde/experiments.hpp"
#include "wwkde/io.hpp"
#include "wwkde/kernel.hpp"
#include "wwkde/selection.hpp"

namespace {

using namespace wwkde;

struct CommonOpts {
  std::string kernel = "K1";
  std::string density = "f1";
  std::string method;
  std::string input;
  std::string out;
  std::string format;  // "", "csv" or "json"
  double gamma = 0.2;
  double constant_h = 0.0;
  std::size_t grid_size = 40;
  double gamma_max = 0.5;
  std::string grid_kind;
  std::size_t n = 1000;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  double upsilon = 1.0;
  std::vector<double> range;
  std::size_t points = 100;
  std::size_t n0 = 500;
  std::size_t n1 = 500;
  std::size_t n_start = 50;
  std::size_t n_end = 1000;
  std::size_t snapshot_every = 0;
  std::string snapshot_out;
  bool curves = false;
  bool gamma_mean = false;
  std::vector<std::size_t> n_values;
};

Sample load_sample(const std::string& input) {
  Sample sample = input.empty() ? read_sample(std::cin) : read_sample_file(input);
  if (sample.empty())
    throw std::runtime_error(input.empty()
                                 ? "parse error: no observations on standard input"
                                 : "parse error: no observations in " + input);
  return sample;
}

EvaluationGrid resolve_grid(const CommonOpts& opts, const Sample& sample) {
  if (!opts.range.empty())
    return EvaluationGrid::linspace(opts.range[0], opts.range[1], opts.points);
  const auto [lo, hi] =
      std::minmax_element(sample.observations.begin(), sample.observations.end());
  return EvaluationGrid::right_riemann(*lo, *hi, opts.points);
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

void write_config_sidecar(const CLI::App& sub, const std::string& out_base) {
  std::istringstream in(sub.config_to_str(true, false));
  std::ostringstream body;
  body << "[" << sub.get_name() << "]\n";
  std::string line;
  while (std::getline(in, line)) {
    // unset string options serialize as empty and would fail validation on
    // the way back in
    if (line.ends_with("=\"\"") || line.ends_with("=''")) continue;
    body << line << '\n';
  }
  write_file(out_base + ".config", body.str());
}

bool wants(const CommonOpts& opts, const char* kind) {
  return opts.format.empty() || opts.format == kind;
}

int cmd_estimate(const CLI::App& sub, const CommonOpts& opts) {
  const auto sample = load_sample(opts.input);
  const auto kernel = GaussianMixtureKernel::from_name(opts.kernel);
  const auto schedule = opts.constant_h > 0.0
                            ? BandwidthSchedule::constant(opts.constant_h)
                            : BandwidthSchedule::power(opts.gamma);
  const auto grid = resolve_grid(opts, sample);
  const auto values = ww_evaluate(sample, kernel, schedule, grid.points());

  std::ostringstream csv;
  write_estimate_csv(csv, grid.points(), values);
  if (opts.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(opts.out + ".csv", csv.str());
    write_config_sidecar(sub, opts.out);
  }
  return 0;
}

int cmd_select(const CLI::App& sub, const CommonOpts& opts) {
  const auto sample = load_sample(opts.input);
  const auto kernel = GaussianMixtureKernel::from_name(opts.kernel);
  const auto grid = resolve_grid(opts, sample);
  const std::size_t n = sample.size();

  std::string kind = opts.grid_kind;
  if (kind.empty())
    kind = opts.method == "gl" ? "sqrt-log"
                               : (opts.method == "lmr_fixed" ? "fixed-h" : "equispaced");
  GammaGrid candidates = [&] {
    if (kind == "equispaced")
      return make_grid(GammaGrid::Kind::equispaced_lmr, n, opts.grid_size,
                       opts.gamma_max);
    if (kind == "sqrt-log")
      return make_grid(GammaGrid::Kind::sqrt_log_gl, n, opts.grid_size,
                       opts.gamma_max);
    if (kind == "fixed-h")
      return make_grid(GammaGrid::Kind::fixed_h_lmr, n, opts.grid_size, 1.0);
    throw std::runtime_error("unknown grid kind: " + kind);
  }();

  SelectionResult result;
  std::vector<double> candidate_rows;  // per-candidate curves on the grid
  if (opts.method == "lmr") {
    auto detailed = lmr_select_detailed(sample, kernel, candidates, grid);
    result = std::move(detailed.result);
    candidate_rows = std::move(detailed.rows_base);
  } else if (opts.method == "lmr_fixed") {
    auto detailed = lmr_select_fixed_h_detailed(sample, kernel, candidates, grid);
    result = std::move(detailed.result);
    candidate_rows = std::move(detailed.rows_base);
  } else if (opts.method == "gl") {
    result = gl_select(sample, kernel, candidates, opts.upsilon, grid);
  } else {
    throw std::runtime_error("select: method must be lmr, lmr_fixed or gl");
  }
  if (!result.assumption_ok && result.method == SelectionResult::Method::lmr)
    std::cerr << "warning: ||K||_inf ||K||_1 / (n h_n) = "
              << format_double(result.assumption_value) << " exceeds 1\n";

  std::ostringstream csv;
  write_selection_csv(csv, result);
  const std::string json = selection_to_json(result);
  if (opts.out.empty()) {
    std::cout << json;
  } else {
    if (wants(opts, "csv")) write_file(opts.out + ".csv", csv.str());
    if (wants(opts, "json")) write_file(opts.out + ".json", json);
    if (opts.curves) {
      if (candidate_rows.empty())
        throw std::runtime_error("select: --curves is not available for gl");
      std::ostringstream body;
      body << "gamma";
      for (double x : grid.points()) body << ',' << format_double(x);
      body << '\n';
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        body << format_double(candidates.values[j]);
        for (std::size_t i = 0; i < grid.size(); ++i)
          body << ',' << format_double(candidate_rows[j * grid.size() + i]);
        body << '\n';
      }
      write_file(opts.out + ".curves.csv", body.str());
    }
    write_config_sidecar(sub, opts.out);
  }
  return 0;
}

int cmd_benchmark(const CLI::App& sub, const CommonOpts& opts) {
  const auto model = DensityModel::by_name(opts.density);
  const auto kernel = GaussianMixtureKernel::from_name(opts.kernel);
  ExperimentConfig config;
  config.grid_size = opts.grid_size;
  config.gamma_max = opts.gamma_max;
  config.ise_points = opts.points;

  if (opts.gamma_mean) {
    std::vector<std::size_t> ns = opts.n_values;
    if (ns.empty()) ns.push_back(opts.n);
    const auto rows =
        gamma_mean_experiment(model, kernel, ns, opts.reps, config, opts.seed);
    std::ostringstream csv;
    write_gamma_mean_csv(csv, rows);
    write_file(opts.out + ".csv", csv.str());
    write_config_sidecar(sub, opts.out);
    return 0;
  }

  const auto method =
      bench_method_from_string(opts.method.empty() ? "ww_lmr" : opts.method);
  const auto report =
      mise_protocol(model, method, kernel, opts.n, opts.reps, config, opts.seed);
  const std::vector<MiseReport> reports = {report};

  std::ostringstream csv;
  write_mise_csv(csv, reports);
  if (wants(opts, "csv")) write_file(opts.out + ".csv", csv.str());
  if (wants(opts, "json")) write_file(opts.out + ".json", mise_to_json(reports));
  if (opts.curves) {
    // beam data: the selected estimate of every replication on a common grid
    const auto [lo, hi] = model.nominal_range();
    const auto grid = EvaluationGrid::linspace(lo, hi, opts.points);
    std::ostringstream body;
    body << "rep,gamma";
    for (double x : grid.points()) body << ',' << format_double(x);
    body << '\n';
    for (std::size_t j = 0; j < report.replications; ++j) {
      const auto sample = model.sample({opts.seed, j}, opts.n);
      const auto schedule =
          method == BenchMethod::lmr_fixed
              ? BandwidthSchedule::constant(report.per_rep_gamma[j])
              : BandwidthSchedule::power(report.per_rep_gamma[j]);
      const auto values = ww_evaluate(sample, kernel, schedule, grid.points());
      body << j << ',' << format_double(report.per_rep_gamma[j]);
      for (double v : values) body << ',' << format_double(v);
      body << '\n';
    }
    write_file(opts.out + ".curves.csv", body.str());
  }
  write_config_sidecar(sub, opts.out);
  return 0;
}

int cmd_frozen(const CLI::App& sub, const CommonOpts& opts) {
  const auto model = DensityModel::by_name(opts.density);
  const auto kernel = GaussianMixtureKernel::from_name(opts.kernel);
  ExperimentConfig config;
  config.grid_size = opts.grid_size;
  config.gamma_max = opts.gamma_max;
  config.ise_points = opts.points;

  const auto [phase1, phase2] = frozen_gamma_protocol(model, kernel, opts.n0,
                                                      opts.n1, opts.reps, config,
                                                      opts.seed);
  const std::vector<MiseReport> reports = {phase1, phase2};
  std::ostringstream csv;
  write_mise_csv(csv, reports);
  if (wants(opts, "csv")) write_file(opts.out + ".csv", csv.str());
  if (wants(opts, "json")) write_file(opts.out + ".json", mise_to_json(reports));
  write_config_sidecar(sub, opts.out);
  return 0;
}

int cmd_trajectory(const CLI::App& sub, const CommonOpts& opts) {
  const auto model = DensityModel::by_name(opts.density);
  const auto kernel = GaussianMixtureKernel::from_name(opts.kernel);
  const auto record = online_selection_protocol(
      model, kernel, opts.n_start, opts.n_end, opts.grid_size, opts.points,
      {opts.seed, 0}, opts.gamma_max);

  std::ostringstream csv;
  write_trajectory_csv(csv, record);
  if (opts.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(opts.out + ".csv", csv.str());
    write_config_sidecar(sub, opts.out);
  }
  return 0;
}

int cmd_stream(const CLI::App& sub, const CommonOpts& opts) {
  const auto kernel = GaussianMixtureKernel::from_name(opts.kernel);
  if (opts.range.size() != 2)
    throw std::runtime_error("stream: --range LO HI is required");
  EstimatorMatrix matrix(
      kernel,
      make_grid(GammaGrid::Kind::equispaced_lmr, 1, opts.grid_size, opts.gamma_max),
      EvaluationGrid::linspace(opts.range[0], opts.range[1], opts.points));

  std::ifstream file;
  std::istream* in = &std::cin;
  if (!opts.input.empty()) {
    file.open(opts.input);
    if (!file) throw std::runtime_error("cannot open input file: " + opts.input);
    in = &file;
  }

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!opts.out.empty()) {
    out_file.open(opts.out + ".csv", std::ios::binary);
    if (!out_file) throw std::runtime_error("cannot write " + opts.out + ".csv");
    out = &out_file;
  }

  auto snapshot = [&](const std::string& tag) {
    if (opts.snapshot_out.empty()) return;
    std::ostringstream body;
    write_matrix_csv(body, matrix);
    write_file(opts.snapshot_out + "_" + tag + ".csv", body.str());
  };

  *out << "n,gamma\n";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    std::string_view body(line);
    while (!body.empty() && (body.front() == ' ' || body.front() == '\t')) body.remove_prefix(1);
    while (!body.empty() && (body.back() == ' ' || body.back() == '\t' || body.back() == '\r'))
      body.remove_suffix(1);
    if (body.empty() || body.front() == '#') continue;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc{} || ptr != body.data() + body.size())
      throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                               ": expected one decimal number, got '" +
                               std::string(body) + "'");
    matrix.absorb(value);
    const auto selection = lmr_select_from_matrix(matrix);
    *out << matrix.count() << ',' << format_double(selection.chosen_gamma) << '\n';
    if (opts.snapshot_every > 0 && matrix.count() % opts.snapshot_every == 0)
      snapshot("n" + std::to_string(matrix.count()));
  }
  if (matrix.count() > 0) snapshot("final");
  if (!opts.out.empty() || !opts.snapshot_out.empty())
    write_config_sidecar(sub, opts.out.empty() ? opts.snapshot_out : opts.out);
  return 0;
}

void add_common_flags(CLI::App* sub, CommonOpts& opts, bool with_density) {
  sub->add_option("--kernel", opts.kernel, "Kernel name: K1, K3, K5 or K7")
      ->capture_default_str();
  if (with_density)
    sub->add_option("--density", opts.density,
                    "Benchmark density: f1, fm1, f2, fm2, f3, fm3, f4")
        ->capture_default_str();
  sub->add_option("--seed", opts.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", opts.out, "Output base path (no extension)");
  sub->add_option("--format", opts.format, "Restrict outputs to csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive variable-bandwidth kernel density estimation with "
               "data-driven bandwidth-exponent selection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file");

  CommonOpts opts;

  auto* estimate = app.add_subcommand(
      "estimate", "Evaluate the recursive estimate of a sample on a grid");
  add_common_flags(estimate, opts, false);
  estimate->add_option("--input", opts.input, "Sample file (default: stdin)");
  estimate->add_option("--gamma", opts.gamma, "Bandwidth exponent: h_k = k^-gamma")
      ->capture_default_str();
  estimate->add_option("--bandwidth", opts.constant_h,
                       "Constant bandwidth (overrides --gamma)");
  estimate->add_option("--range", opts.range, "Grid range LO HI")->expected(2);
  estimate->add_option("--points", opts.points, "Grid point count")
      ->capture_default_str();

  auto* select = app.add_subcommand(
      "select", "Select the bandwidth exponent from a sample");
  add_common_flags(select, opts, false);
  select->add_option("--input", opts.input, "Sample file (default: stdin)");
  select->add_option("--method", opts.method, "lmr, lmr_fixed or gl")
      ->required();
  select->add_option("--grid-size", opts.grid_size, "Candidate count")
      ->capture_default_str();
  select->add_option("--gamma-max", opts.gamma_max, "Largest gamma candidate")
      ->capture_default_str();
  select->add_option("--grid-kind", opts.grid_kind,
                     "equispaced, sqrt-log or fixed-h (default per method)");
  select->add_option("--upsilon", opts.upsilon, "GL penalty constant")
      ->capture_default_str();
  select->add_option("--range", opts.range, "Evaluation range LO HI")->expected(2);
  select->add_option("--points", opts.points, "Evaluation point count")
      ->capture_default_str();
  select->add_flag("--curves", opts.curves,
                   "Also write the per-candidate estimate curves");

  auto* benchmark = app.add_subcommand(
      "benchmark", "Monte-Carlo MISE of the selected estimator");
  add_common_flags(benchmark, opts, true);
  benchmark->add_option("--method", opts.method, "ww_lmr or lmr_fixed")
      ->capture_default_str();
  benchmark->add_option("--n", opts.n, "Sample size")->capture_default_str();
  benchmark->add_option("--reps", opts.reps, "Replication count")
      ->capture_default_str();
  benchmark->add_option("--grid-size", opts.grid_size, "Candidate count")
      ->capture_default_str();
  benchmark->add_option("--gamma-max", opts.gamma_max, "Largest gamma candidate")
      ->capture_default_str();
  benchmark->add_option("--points", opts.points, "ISE integration points")
      ->capture_default_str();
  benchmark->add_flag("--curves", opts.curves,
                      "Also write every replication's selected estimate");
  benchmark->add_flag("--gamma-mean", opts.gamma_mean,
                      "Report mean/std of the selected gamma instead of MISE");
  benchmark->add_option("--n-values", opts.n_values,
                        "Sample sizes for --gamma-mean (default: --n)");

  auto* frozen = app.add_subcommand(
      "frozen", "Select on n0 observations, then update with the frozen gamma");
  add_common_flags(frozen, opts, true);
  frozen->add_option("--n0", opts.n0, "Selection sample size")->capture_default_str();
  frozen->add_option("--n1", opts.n1, "Update sample size")->capture_default_str();
  frozen->add_option("--reps", opts.reps, "Replication count")->capture_default_str();
  frozen->add_option("--grid-size", opts.grid_size, "Candidate count")
      ->capture_default_str();
  frozen->add_option("--gamma-max", opts.gamma_max, "Largest gamma candidate")
      ->capture_default_str();
  frozen->add_option("--points", opts.points, "ISE integration points")
      ->capture_default_str();

  auto* trajectory = app.add_subcommand(
      "trajectory", "Per-observation selected gamma from a maintained matrix");
  add_common_flags(trajectory, opts, true);
  trajectory->add_option("--n-start", opts.n_start, "First recorded step")
      ->capture_default_str();
  trajectory->add_option("--n-end", opts.n_end, "Last recorded step")
      ->capture_default_str();
  trajectory->add_option("--grid-size", opts.grid_size, "Candidate count M")
      ->capture_default_str();
  trajectory->add_option("--gamma-max", opts.gamma_max, "Largest gamma candidate")
      ->capture_default_str();
  trajectory->add_option("--points", opts.points, "Matrix grid points K")
      ->capture_default_str();

  auto* stream = app.add_subcommand(
      "stream", "Consume observations, emit (n, selected gamma) per observation");
  add_common_flags(stream, opts, false);
  stream->add_option("--input", opts.input, "Sample file (default: stdin)");
  stream->add_option("--grid-size", opts.grid_size, "Candidate count M")
      ->capture_default_str();
  stream->add_option("--gamma-max", opts.gamma_max, "Largest gamma candidate")
      ->capture_default_str();
  stream->add_option("--points", opts.points, "Matrix grid points K")
      ->capture_default_str();
  stream->add_option("--range", opts.range, "Matrix grid range LO HI")->expected(2);
  stream->add_option("--snapshot-every", opts.snapshot_every,
                     "Write a matrix snapshot every N observations");
  stream->add_option("--snapshot-out", opts.snapshot_out,
                     "Snapshot output base path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return cmd_estimate(*estimate, opts);
    if (select->parsed()) return cmd_select(*select, opts);
    if (benchmark->parsed()) {
      if (opts.out.empty()) throw std::runtime_error("benchmark: --out is required");
      return cmd_benchmark(*benchmark, opts);
    }
    if (frozen->parsed()) {
      if (opts.out.empty()) throw std::runtime_error("frozen: --out is required");
      return cmd_frozen(*frozen, opts);
    }
    if (trajectory->parsed()) return cmd_trajectory(*trajectory, opts);
    if (stream->parsed()) return cmd_stream(*stream, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
