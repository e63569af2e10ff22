#include "covsel/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "covsel/error.hpp"

namespace covsel::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_row(std::string_view line, std::string_view source, std::size_t line_no) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    double v = 0.0;
    // from_chars rejects a leading '+', which some writers emit.
    const auto body = !field.empty() && field.front() == '+' ? field.substr(1) : field;
    const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
    if (body.empty() || res.ec != std::errc() || res.ptr != body.data() + body.size()) {
      throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": field '" +
                       std::string(field) + "' is not a number");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

est::SampleSet parse_samples_csv(std::string_view text, std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    ++line_no;
    if (!line.empty()) {
      rows.push_back(parse_row(line, source, line_no));
      if (rows.size() > 1 && rows.back().size() != rows.front().size()) {
        throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(rows.front().size()) + " fields, got " +
                         std::to_string(rows.back().size()));
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (rows.empty()) throw InputError(std::string(source) + ": no grid header row");
  dict::Grid grid = rows.front();
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto p = static_cast<Eigen::Index>(grid.size());
  linalg::Matrix data(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      data(i, j) = rows[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)];
  try {
    return est::SampleSet(std::move(grid), std::move(data));
  } catch (const InputError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
}

est::SampleSet read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_samples_csv(buf.str(), path.string());
}

namespace {

void append_row(std::string& out, const auto& values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_double(v);
    first = false;
  }
  out += '\n';
}

}  // namespace

std::string samples_to_csv(const est::SampleSet& samples) {
  std::string out;
  append_row(out, samples.grid());
  for (Eigen::Index i = 0; i < samples.data().rows(); ++i) append_row(out, samples.data().row(i));
  return out;
}

std::string matrix_to_csv(const dict::Grid& grid, const linalg::Matrix& m) {
  std::string out;
  append_row(out, grid);
  for (Eigen::Index i = 0; i < m.rows(); ++i) append_row(out, m.row(i));
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write output file '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace covsel::io
