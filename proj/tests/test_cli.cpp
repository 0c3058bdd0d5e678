#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "wwkde/density.hpp"
#include "wwkde/experiments.hpp"
#include "wwkde/io.hpp"
#include "wwkde/selection.hpp"

#ifndef WWKDE_CLI_PATH
#error "WWKDE_CLI_PATH must point at the built binary"
#endif

namespace {

namespace fs = std::filesystem;
using namespace wwkde;

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string command = std::string(WWKDE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  std::array<char, 4096> buffer;
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    output.append(buffer.data(), got);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), std::move(output)};
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "wwkde_cli_tests";
  fs::create_directories(dir);
  return dir;
}

void write_sample_file(const fs::path& path, const Sample& sample) {
  std::ofstream out(path);
  for (double x : sample.observations) out << format_double(x) << '\n';
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// cells: pairs (x, value) from a two-column CSV with a header
std::vector<std::pair<double, double>> parse_two_column_csv(const std::string& text) {
  std::vector<std::pair<double, double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    rows.emplace_back(std::stod(line.substr(0, comma)),
                      std::stod(line.substr(comma + 1)));
  }
  return rows;
}

}  // namespace

TEST_CASE("sample text format round-trips") {
  const auto sample = DensityModel::by_name("f4").sample({19, 0}, 25);
  std::ostringstream out;
  write_sample(out, sample);
  std::istringstream in(out.str());
  const auto back = read_sample(in);
  REQUIRE(back.size() == sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    CHECK(back.observations[i] == sample.observations[i]);
}

TEST_CASE("estimate: single observation evaluates the kernel") {
  const auto dir = temp_dir();
  const auto input = dir / "one.txt";
  write_sample_file(input, Sample{{0.0}});

  const auto result = run("estimate --input " + input.string() +
                          " --kernel K1 --gamma 0.2 --range -3 3 --points 61");
  CHECK(result.exit_code == 0);
  const auto rows = parse_two_column_csv(result.output);
  REQUIRE(rows.size() == 61);
  CHECK(rows[30].first == 0.0);
  CHECK(rows[30].second == doctest::Approx(0.398942).epsilon(1e-5));

  // byte-identical on repeat
  const auto again = run("estimate --input " + input.string() +
                         " --kernel K1 --gamma 0.2 --range -3 3 --points 61");
  CHECK(again.output == result.output);
}

TEST_CASE("estimate: empty and malformed inputs fail with nonzero exit") {
  const auto dir = temp_dir();
  const auto empty = dir / "empty.txt";
  std::ofstream(empty.string()) << "# only a comment\n";
  CHECK(run("estimate --input " + empty.string()).exit_code != 0);

  const auto bad = dir / "bad.txt";
  std::ofstream(bad.string()) << "0.5\nnot-a-number\n";
  CHECK(run("estimate --input " + bad.string()).exit_code != 0);

  CHECK(run("estimate --input " + (dir / "missing.txt").string()).exit_code != 0);
}

TEST_CASE("select: singleton grid echoes its candidate") {
  const auto dir = temp_dir();
  const auto input = dir / "f1_small.txt";
  write_sample_file(input, DensityModel::by_name("f1").sample({3, 0}, 50));

  const auto result = run("select --input " + input.string() +
                          " --method lmr --grid-size 1 --gamma-max 0.3");
  CHECK(result.exit_code == 0);
  const auto j = nlohmann::json::parse(result.output);
  CHECK(j["chosen_gamma"].get<double>() == 0.3);
  CHECK(j["method"] == "lmr");
  CHECK(j["per_candidate"].size() == 1);
}

TEST_CASE("select: lmr choice matches an independent criterion recomputation") {
  const auto dir = temp_dir();
  const auto input = dir / "f1_n1000.txt";
  const auto sample = DensityModel::by_name("f1").sample({27, 0}, 1000);
  write_sample_file(input, sample);

  const auto out_base = (dir / "sel").string();
  const auto result = run("select --input " + input.string() +
                          " --method lmr --kernel K7 --grid-size 40"
                          " --gamma-max 0.5 --out " + out_base);
  CHECK(result.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(out_base + ".json"));
  const double cli_choice = j["chosen_gamma"].get<double>();

  // independent reimplementation with naive loops
  const double lo = *std::min_element(sample.observations.begin(),
                                      sample.observations.end());
  const double hi = *std::max_element(sample.observations.begin(),
                                      sample.observations.end());
  const std::size_t base_points = 100;
  const double spacing = (hi - lo) / double(base_points);
  const double sigma_max = 2.0;  // widest component of the order-7 kernel
  const auto extra = std::size_t(std::ceil(3.0 * sigma_max / spacing)) + 1;
  std::vector<double> xs;
  for (std::size_t i = 0; i < base_points + 2 * extra; ++i)
    xs.push_back(lo + spacing * (double(i + 1) - double(extra)));

  const double weights[] = {4.0, -6.0, 4.0, -1.0};
  auto kernel_at = [&](double u, double h) {
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double v = (c + 1) * h * h;
      sum += weights[c] * std::exp(-0.5 * u * u / v) /
             std::sqrt(2.0 * std::numbers::pi * v);
    }
    return sum;
  };
  auto row_for = [&](double gamma) {
    std::vector<double> row(xs.size(), 0.0);
    for (std::size_t k = 0; k < sample.size(); ++k) {
      const double h = std::pow(double(k + 1), -gamma);
      for (std::size_t i = 0; i < xs.size(); ++i)
        row[i] += kernel_at(sample.observations[k] - xs[i], h);
    }
    for (double& v : row) v /= double(sample.size());
    return row;
  };
  std::vector<double> gammas;
  for (int i = 1; i <= 40; ++i) gammas.push_back(0.5 * i / 40.0);
  const auto ref = row_for(gammas.back());
  double best = 1e300, chosen = 0.0;
  for (double gamma : gammas) {
    const auto row = row_for(gamma);
    double dist = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      dist += (row[i] - ref[i]) * (row[i] - ref[i]);
    dist *= spacing;
    double pen = 0.0;
    for (std::size_t k = 1; k <= sample.size(); ++k) {
      const double ha = std::pow(double(k), -gammas.back());
      const double hb = std::pow(double(k), -gamma);
      for (int ci = 0; ci < 4; ++ci)
        for (int cj = 0; cj < 4; ++cj) {
          const double v = (ci + 1) * ha * ha + (cj + 1) * hb * hb;
          pen += weights[ci] * weights[cj] /
                 std::sqrt(2.0 * std::numbers::pi * v);
        }
    }
    pen *= 2.0 / (double(sample.size()) * double(sample.size()));
    const double crit = dist + 2.0 * pen;
    if (crit < best) {
      best = crit;
      chosen = gamma;
    }
  }
  CHECK(std::abs(cli_choice - chosen) <= 0.0125 + 1e-12);

  // criterion CSV has the documented columns
  const auto csv = slurp(out_base + ".csv");
  CHECK(csv.rfind("gamma,criterion,penalty\n", 0) == 0);
}

TEST_CASE("select: gl with a huge constant picks the smallest candidate") {
  const auto dir = temp_dir();
  const auto input = dir / "f1_n200.txt";
  write_sample_file(input, DensityModel::by_name("f1").sample({5, 0}, 200));

  const auto result = run("select --input " + input.string() +
                          " --method gl --upsilon 1e6");
  CHECK(result.exit_code == 0);
  const auto j = nlohmann::json::parse(result.output);
  // floor(log 200) = 5, so the smallest sqrt-log candidate is sqrt(1/5)
  CHECK(j["chosen_gamma"].get<double>() ==
        doctest::Approx(std::sqrt(0.2)).epsilon(1e-12));
}

TEST_CASE("benchmark: smoke run writes consistent files") {
  const auto dir = temp_dir();
  const auto out_base = (dir / "bench").string();
  const std::string args =
      "benchmark --density f1 --method ww_lmr --kernel K1 --n 50 --reps 2"
      " --grid-size 8 --seed 42 --out " + out_base;
  CHECK(run(args).exit_code == 0);

  const auto csv = slurp(out_base + ".csv");
  CHECK(csv.rfind("density,n,method,kernel,mise,std\n", 0) == 0);
  CHECK(csv.find("f1,50,ww_lmr,K1,") != std::string::npos);

  const auto j = nlohmann::json::parse(slurp(out_base + ".json"));
  REQUIRE(j.is_array());
  CHECK(j[0]["replications"] == 2);
  CHECK(j[0]["per_rep_ise"].size() == 2);

  // identical seed, identical bytes
  const auto out_base2 = (dir / "bench2").string();
  CHECK(run("benchmark --density f1 --method ww_lmr --kernel K1 --n 50 --reps 2"
            " --grid-size 8 --seed 42 --out " + out_base2).exit_code == 0);
  CHECK(slurp(out_base2 + ".csv") == csv);

  // resolved config reproduces the run
  const auto config_path = out_base + ".config";
  REQUIRE(fs::exists(config_path));
  const auto out_base3 = (dir / "bench3").string();
  const auto rerun = run("--config " + config_path + " benchmark --out " + out_base3);
  CHECK(rerun.exit_code == 0);
  CHECK(slurp(out_base3 + ".csv") == csv);
}

TEST_CASE("frozen: writes both phases") {
  const auto dir = temp_dir();
  const auto out_base = (dir / "frozen").string();
  CHECK(run("frozen --density f1 --kernel K3 --n0 40 --n1 20 --reps 2"
            " --grid-size 6 --seed 7 --out " + out_base).exit_code == 0);
  const auto csv = slurp(out_base + ".csv");
  CHECK(csv.find("f1,40,ww_lmr,K3,") != std::string::npos);
  CHECK(csv.find("f1,60,ww_frozen,K3,") != std::string::npos);
}

TEST_CASE("trajectory: single-step record") {
  const auto result = run("trajectory --density f2 --kernel K1 --n-start 25"
                          " --n-end 25 --grid-size 10 --points 40 --seed 3");
  CHECK(result.exit_code == 0);
  const auto rows = parse_two_column_csv(result.output);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].first == 25.0);
}

TEST_CASE("stream: empty input exits cleanly with an empty trajectory") {
  const auto dir = temp_dir();
  const auto empty = dir / "none.txt";
  std::ofstream(empty.string()) << "";
  const auto result = run("stream --input " + empty.string() +
                          " --kernel K1 --grid-size 10 --points 40 --range 0 1");
  CHECK(result.exit_code == 0);
  CHECK(result.output == "n,gamma\n");
}

TEST_CASE("stream: matches the online protocol and the batch estimate") {
  const auto dir = temp_dir();
  const auto model = DensityModel::by_name("f2");
  const SeededStream stream{321, 0};
  const std::size_t n = 400;
  const auto sample = model.sample(stream, n);
  const auto input = dir / "f2_stream.txt";
  write_sample_file(input, sample);

  const auto snap_base = (dir / "snap").string();
  const auto result = run("stream --input " + input.string() +
                          " --kernel K1 --grid-size 50 --points 100"
                          " --gamma-max 0.5 --range 0 1 --snapshot-out " + snap_base);
  CHECK(result.exit_code == 0);

  // last emitted gamma equals the library protocol's final selection
  const auto record = online_selection_protocol(model,
                                                GaussianMixtureKernel::standard(1),
                                                n, n, 50, 100, stream);
  const auto rows = parse_two_column_csv(result.output);
  REQUIRE(rows.size() == n);
  CHECK(rows.back().first == double(n));
  CHECK(rows.back().second == record.selected.back());

  // snapshot row for the selected gamma equals the batch estimate via the CLI
  const auto snapshot = slurp(snap_base + "_final.csv");
  std::istringstream snap_in(snapshot);
  std::string header;
  std::getline(snap_in, header);
  const double chosen = rows.back().second;
  std::string line;
  std::vector<double> matrix_row;
  while (std::getline(snap_in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    if (std::stod(cell) != chosen) continue;
    while (std::getline(cells, cell, ',')) matrix_row.push_back(std::stod(cell));
    break;
  }
  REQUIRE(matrix_row.size() == 100);

  const auto estimate = run("estimate --input " + input.string() +
                            " --kernel K1 --gamma " + format_double(chosen) +
                            " --range 0 1 --points 100");
  CHECK(estimate.exit_code == 0);
  const auto est_rows = parse_two_column_csv(estimate.output);
  REQUIRE(est_rows.size() == 100);
  for (std::size_t i = 0; i < 100; ++i)
    CHECK(std::abs(est_rows[i].second - matrix_row[i]) < 1e-10);
}
