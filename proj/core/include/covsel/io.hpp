#pragma once

// CSV ingestion and emission.
//
// Sample files: the first row holds the grid values t_1,...,t_p; every
// following row is one replication x_i. Numbers are written in shortest
// round-trip form, so read(write(x)) == x exactly.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "covsel/estimator.hpp"

namespace covsel::io {

std::string format_double(double v);

/// Throws InputError (naming the path and line) on I/O or parse failure and
/// on any violation of the SampleSet invariants.
est::SampleSet read_samples_csv(const std::filesystem::path& path);
est::SampleSet parse_samples_csv(std::string_view text, std::string_view source = "<memory>");

std::string samples_to_csv(const est::SampleSet& samples);

/// Dense row-major matrix with the grid echoed as the header row.
std::string matrix_to_csv(const dict::Grid& grid, const linalg::Matrix& m);

/// Writes `content` to `path`, creating parent directories. Throws InputError.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace covsel::io
