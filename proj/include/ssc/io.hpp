#pragma once

// Plain-text file formats.
//
//   features.csv     one sample per line, comma-separated, no header
//   labels.txt       one 0-based cluster id per line
//   annotations.txt  "i j t" per line, 0-based, t = 1 must-link / -1 cannot-link;
//                    repeated lines are repeated annotations
//   params.csv       K lines of D comma-separated means, then one line of K variances
//
// Reals are written with 17 significant digits so they read back exactly.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ssc/types.hpp"

namespace ssc::io {

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw InvalidInput("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidInput("cannot write '" + path.string() + "'");
  }
}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  // Trailing blank lines are tolerated; interior ones are not.
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

[[noreturn]] inline void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw InvalidInput(path.string() + ":" + std::to_string(line) + ": " + what);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_integer(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::vector<double> parse_csv_row(const std::filesystem::path& path, std::size_t line_no, std::string_view line) {
  std::vector<double> row;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    double v = 0.0;
    if (!parse_real(field, v)) fail(path, line_no, "invalid number '" + std::string(trim(field)) + "'");
    row.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return row;
}

inline std::string csv_row(std::span<const double> values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) s += ',';
    s += format_real(values[k]);
  }
  s += '\n';
  return s;
}

}  // namespace detail

inline std::string features_to_string(const Dataset& data) {
  std::string s;
  for (std::size_t i = 0; i < data.n_samples(); ++i) s += detail::csv_row(data.sample(i));
  return s;
}

inline void write_features(const std::filesystem::path& path, const Dataset& data) {
  write_file_atomic(path, features_to_string(data));
}

inline Dataset read_features(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw InvalidInput(path.string() + ": no samples");
  std::vector<std::vector<double>> rows;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    rows.push_back(detail::parse_csv_row(path, l + 1, lines[l]));
    if (rows.back().size() != rows.front().size())
      detail::fail(path, l + 1, "expected " + std::to_string(rows.front().size()) + " features, found " +
                                    std::to_string(rows.back().size()));
  }
  Matrix<double> x(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), x.row(i).begin());
  return Dataset(std::move(x));
}

inline std::string labels_to_string(std::span<const std::size_t> labels) {
  std::string s;
  for (auto y : labels) s += std::to_string(y) + '\n';
  return s;
}

inline void write_labels(const std::filesystem::path& path, std::span<const std::size_t> labels) {
  write_file_atomic(path, labels_to_string(labels));
}

inline std::vector<std::size_t> read_labels(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::vector<std::size_t> labels;
  labels.reserve(lines.size());
  for (std::size_t l = 0; l < lines.size(); ++l) {
    long long v = 0;
    if (!detail::parse_integer(lines[l], v) || v < 0) detail::fail(path, l + 1, "expected a non-negative cluster id");
    labels.push_back(static_cast<std::size_t>(v));
  }
  if (labels.empty()) throw InvalidInput(path.string() + ": no labels");
  return labels;
}

inline std::string annotations_to_string(const AnnotationGraphs& graphs) {
  std::string s;
  for (const auto& a : graphs.annotations())
    s += std::to_string(a.i) + ' ' + std::to_string(a.j) + ' ' + (a.link == Link::must ? "1" : "-1") + '\n';
  return s;
}

inline void write_annotations(const std::filesystem::path& path, const AnnotationGraphs& graphs) {
  write_file_atomic(path, annotations_to_string(graphs));
}

inline AnnotationGraphs read_annotations(const std::filesystem::path& path, std::size_t n_samples) {
  const auto lines = detail::read_lines(path);
  std::vector<Annotation> ann;
  ann.reserve(lines.size());
  for (std::size_t l = 0; l < lines.size(); ++l) {
    std::istringstream fields(lines[l]);
    std::string fi, fj, ft, extra;
    if (!(fields >> fi >> fj >> ft) || (fields >> extra)) detail::fail(path, l + 1, "expected 'i j t'");
    long long i = 0, j = 0, t = 0;
    if (!detail::parse_integer(fi, i) || !detail::parse_integer(fj, j) || !detail::parse_integer(ft, t))
      detail::fail(path, l + 1, "expected integers");
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_samples || static_cast<std::size_t>(j) >= n_samples)
      detail::fail(path, l + 1, "sample index out of range [0, " + std::to_string(n_samples) + ")");
    if (i == j) detail::fail(path, l + 1, "self-annotation");
    if (t != 1 && t != -1) detail::fail(path, l + 1, "link type must be 1 or -1");
    ann.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), t == 1 ? Link::must : Link::cannot});
  }
  return AnnotationGraphs(n_samples, ann);
}

struct MixtureParams {
  Matrix<double> means;
  std::vector<double> variances;
};

inline std::string params_to_string(const Matrix<double>& means, std::span<const double> variances) {
  std::string s;
  for (std::size_t r = 0; r < means.rows(); ++r) s += detail::csv_row(means.row(r));
  s += detail::csv_row(variances);
  return s;
}

inline void write_params(const std::filesystem::path& path, const Matrix<double>& means,
                         std::span<const double> variances) {
  require(means.rows() == variances.size(), "means and variances disagree on K");
  write_file_atomic(path, params_to_string(means, variances));
}

inline MixtureParams read_params(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2) throw InvalidInput(path.string() + ": expected K mean rows and a variance row");
  const std::size_t k = lines.size() - 1;
  MixtureParams p;
  for (std::size_t r = 0; r < k; ++r) {
    const auto row = detail::parse_csv_row(path, r + 1, lines[r]);
    if (r == 0) p.means = Matrix<double>(k, row.size());
    if (row.size() != p.means.cols()) detail::fail(path, r + 1, "inconsistent mean dimension");
    std::copy(row.begin(), row.end(), p.means.row(r).begin());
  }
  p.variances = detail::parse_csv_row(path, k + 1, lines[k]);
  if (p.variances.size() != k)
    detail::fail(path, k + 1, "expected " + std::to_string(k) + " variances, found " + std::to_string(p.variances.size()));
  for (double v : p.variances)
    if (v <= 0.0) detail::fail(path, k + 1, "variances must be positive");
  return p;
}

}  // namespace ssc::io
