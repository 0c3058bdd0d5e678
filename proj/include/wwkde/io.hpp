#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "wwkde/estimator.hpp"
#include "wwkde/experiments.hpp"
#include "wwkde/selection.hpp"

namespace wwkde {

// Shortest decimal form that round-trips to the same double. Keeps every
// emitted file byte-reproducible.
std::string format_double(double value);

// One observation per line; blank lines and lines starting with '#' are
// skipped. Throws std::runtime_error naming the offending line on malformed
// input.
Sample read_sample(std::istream& in);
Sample read_sample_file(const std::string& path);
void write_sample(std::ostream& out, const Sample& sample);

void write_estimate_csv(std::ostream& out, std::span<const double> xs,
                        std::span<const double> values);
void write_selection_csv(std::ostream& out, const SelectionResult& result);
std::string selection_to_json(const SelectionResult& result);

void write_mise_csv(std::ostream& out, std::span<const MiseReport> reports);
std::string mise_to_json(std::span<const MiseReport> reports);

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
void write_gamma_mean_csv(std::ostream& out, std::span<const GammaMeanRow> rows);

// Snapshot: header "gamma,<x1>,...,<xK>", one row per candidate.
void write_matrix_csv(std::ostream& out, const EstimatorMatrix& matrix);

}  // namespace wwkde
