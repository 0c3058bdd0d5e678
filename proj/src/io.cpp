#include "wwkde/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

namespace wwkde {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

nlohmann::json selection_json_object(const SelectionResult& result) {
  nlohmann::json j;
  j["method"] = result.method == SelectionResult::Method::lmr ? "lmr" : "gl";
  j["chosen_gamma"] = result.chosen_gamma;
  j["tie_broken"] = result.tie_broken;
  if (result.method == SelectionResult::Method::lmr) {
    j["assumption_ok"] = result.assumption_ok;
    j["assumption_value"] = result.assumption_value;
  }
  // heuristic smoothness read-out from the selected exponent
  if (!result.candidates_are_bandwidths && result.chosen_gamma > 0.0 &&
      result.chosen_gamma < 1.0)
    j["beta_hat_heuristic"] = beta_hat_from_gamma(result.chosen_gamma);
  auto& table = j["per_candidate"];
  table = nlohmann::json::array();
  for (const auto& c : result.per_candidate) {
    table.push_back({{"gamma", c.gamma},
                     {"criterion", c.criterion},
                     {"penalty_or_vn", c.penalty_or_vn},
                     {"distance_term", c.distance_term}});
  }
  return j;
}

nlohmann::json mise_json_object(const MiseReport& report) {
  nlohmann::json j;
  j["density"] = report.density;
  j["method"] = to_string(report.method);
  j["kernel_order"] = report.kernel_order;
  j["n"] = report.n;
  j["replications"] = report.replications;
  j["mise_times_100"] = report.mise_times_100;
  j["std_times_100"] = report.std_times_100;
  j["per_rep_ise"] = report.per_rep_ise;
  j["per_rep_gamma"] = report.per_rep_gamma;
  return j;
}

}  // namespace

Sample read_sample(std::istream& in) {
  Sample sample;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc{} || ptr != body.data() + body.size())
      throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                               ": expected one decimal number, got '" +
                               std::string(body) + "'");
    sample.observations.push_back(value);
  }
  return sample;
}

Sample read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return read_sample(in);
}

void write_sample(std::ostream& out, const Sample& sample) {
  for (double x : sample.observations) out << format_double(x) << '\n';
}

void write_estimate_csv(std::ostream& out, std::span<const double> xs,
                        std::span<const double> values) {
  out << "x,fhat\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    out << format_double(xs[i]) << ',' << format_double(values[i]) << '\n';
}

void write_selection_csv(std::ostream& out, const SelectionResult& result) {
  out << "gamma,criterion,penalty\n";
  for (const auto& c : result.per_candidate)
    out << format_double(c.gamma) << ',' << format_double(c.criterion) << ','
        << format_double(c.penalty_or_vn) << '\n';
}

std::string selection_to_json(const SelectionResult& result) {
  return selection_json_object(result).dump(2) + "\n";
}

void write_mise_csv(std::ostream& out, std::span<const MiseReport> reports) {
  out << "density,n,method,kernel,mise,std\n";
  for (const auto& r : reports)
    out << r.density << ',' << r.n << ',' << to_string(r.method) << ",K"
        << r.kernel_order << ',' << format_double(r.mise_times_100) << ','
        << format_double(r.std_times_100) << '\n';
}

std::string mise_to_json(std::span<const MiseReport> reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(mise_json_object(r));
  return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  out << "k,gamma\n";
  for (std::size_t i = 0; i < record.selected.size(); ++i)
    out << record.n_start + i << ',' << format_double(record.selected[i]) << '\n';
}

void write_gamma_mean_csv(std::ostream& out, std::span<const GammaMeanRow> rows) {
  out << "n,mean_gamma,std_gamma\n";
  for (const auto& row : rows)
    out << row.n << ',' << format_double(row.mean) << ','
        << format_double(row.stddev) << '\n';
}

void write_matrix_csv(std::ostream& out, const EstimatorMatrix& matrix) {
  out << "gamma";
  for (double x : matrix.eval_grid().points()) out << ',' << format_double(x);
  out << '\n';
  for (std::size_t j = 0; j < matrix.candidate_count(); ++j) {
    out << format_double(matrix.gamma_grid().values[j]);
    for (double v : matrix.row(j)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace wwkde
