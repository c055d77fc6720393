#pragma once

// Domain types shared by every module: feature data, annotation graphs,
// assignments and the closed-form parameter containers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssc {

/// Caller broke a documented precondition (dimension mismatch, index out of range, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input data that cannot be processed (N < K, malformed files, ...).
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation would leave a cluster without samples.
class EmptyClusterError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

inline void require(bool condition, const char* what) {
  if (!condition) throw ContractViolation(what);
}

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T value = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

/// N samples of D finite real features.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(Matrix<double> samples) : samples_(std::move(samples)) {
    if (samples_.rows() == 0 || samples_.cols() == 0)
      throw InvalidInput("dataset must have at least one sample and one feature");
    for (double v : samples_.values())
      if (!std::isfinite(v)) throw InvalidInput("dataset contains a non-finite feature value");
  }

  std::size_t n_samples() const { return samples_.rows(); }
  std::size_t n_features() const { return samples_.cols(); }
  std::span<const double> sample(std::size_t i) const { return samples_.row(i); }
  const Matrix<double>& samples() const { return samples_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Matrix<double> samples_;
};

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  std::int64_t count = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Link : int { must = 1, cannot = -1 };

/// One expert annotation as it appears in an annotations file.
struct Annotation {
  std::size_t i = 0;
  std::size_t j = 0;
  Link link = Link::must;
};

/// Neighbour entry in the per-sample adjacency of one graph.
struct Neighbor {
  std::size_t sample = 0;
  std::int64_t count = 0;
};

/// Must-link and cannot-link multigraphs over sample pairs. Edges are stored
/// once per unordered pair with i < j; repeated annotations accumulate counts.
class AnnotationGraphs {
 public:
  AnnotationGraphs() = default;

  explicit AnnotationGraphs(std::size_t n_samples) : n_samples_(n_samples) { build_adjacency(); }

  AnnotationGraphs(std::size_t n_samples, std::span<const Annotation> annotations)
      : n_samples_(n_samples) {
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> must, cannot;
    for (const auto& a : annotations) {
      auto key = normalize(a.i, a.j);
      (a.link == Link::must ? must : cannot)[key] += 1;
    }
    for (auto& [k, c] : must) must_.push_back({k.first, k.second, c});
    for (auto& [k, c] : cannot) cannot_.push_back({k.first, k.second, c});
    finish();
  }

  AnnotationGraphs(std::size_t n_samples, std::vector<Edge> must_edges, std::vector<Edge> cannot_edges)
      : n_samples_(n_samples) {
    must_ = merge(std::move(must_edges));
    cannot_ = merge(std::move(cannot_edges));
    finish();
  }

  std::size_t n_samples() const { return n_samples_; }
  const std::vector<Edge>& must_edges() const { return must_; }
  const std::vector<Edge>& cannot_edges() const { return cannot_; }
  std::int64_t m_plus() const { return m_plus_; }
  std::int64_t m_minus() const { return m_minus_; }
  std::int64_t m_total() const { return m_plus_ + m_minus_; }

  std::span<const Neighbor> must_neighbors(std::size_t i) const {
    return {must_adj_.data() + must_offsets_[i], must_offsets_[i + 1] - must_offsets_[i]};
  }
  std::span<const Neighbor> cannot_neighbors(std::size_t i) const {
    return {cannot_adj_.data() + cannot_offsets_[i], cannot_offsets_[i + 1] - cannot_offsets_[i]};
  }

  bool is_annotated(std::size_t i) const {
    return must_offsets_[i + 1] > must_offsets_[i] || cannot_offsets_[i + 1] > cannot_offsets_[i];
  }

  /// Expands the multigraphs back into single annotations, ordered by (i, j),
  /// must-links before cannot-links.
  std::vector<Annotation> annotations() const {
    std::vector<Annotation> out;
    out.reserve(static_cast<std::size_t>(m_total()));
    std::size_t a = 0, b = 0;
    auto emit = [&out](const Edge& e, Link link) {
      for (std::int64_t c = 0; c < e.count; ++c) out.push_back({e.i, e.j, link});
    };
    while (a < must_.size() || b < cannot_.size()) {
      const bool take_must =
          b == cannot_.size() ||
          (a < must_.size() && std::pair(must_[a].i, must_[a].j) <= std::pair(cannot_[b].i, cannot_[b].j));
      if (take_must) emit(must_[a++], Link::must);
      else emit(cannot_[b++], Link::cannot);
    }
    return out;
  }

  friend bool operator==(const AnnotationGraphs& x, const AnnotationGraphs& y) {
    return x.n_samples_ == y.n_samples_ && x.must_ == y.must_ && x.cannot_ == y.cannot_;
  }

 private:
  std::pair<std::size_t, std::size_t> normalize(std::size_t i, std::size_t j) const {
    if (i >= n_samples_ || j >= n_samples_) throw InvalidInput("annotation index out of range");
    if (i == j) throw InvalidInput("self-annotation (i == j) is not allowed");
    return {std::min(i, j), std::max(i, j)};
  }

  std::vector<Edge> merge(std::vector<Edge> edges) const {
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> acc;
    for (const auto& e : edges) {
      if (e.count <= 0) throw InvalidInput("edge count must be positive");
      acc[normalize(e.i, e.j)] += e.count;
    }
    std::vector<Edge> out;
    for (auto& [k, c] : acc) out.push_back({k.first, k.second, c});
    return out;
  }

  void finish() {
    m_plus_ = m_minus_ = 0;
    for (const auto& e : must_) m_plus_ += e.count;
    for (const auto& e : cannot_) m_minus_ += e.count;
    build_adjacency();
  }

  static void build_csr(std::size_t n, const std::vector<Edge>& edges, std::vector<std::size_t>& offsets,
                        std::vector<Neighbor>& adj) {
    offsets.assign(n + 1, 0);
    for (const auto& e : edges) {
      ++offsets[e.i + 1];
      ++offsets[e.j + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    adj.resize(offsets[n]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& e : edges) {
      adj[fill[e.i]++] = {e.j, e.count};
      adj[fill[e.j]++] = {e.i, e.count};
    }
  }

  void build_adjacency() {
    build_csr(n_samples_, must_, must_offsets_, must_adj_);
    build_csr(n_samples_, cannot_, cannot_offsets_, cannot_adj_);
  }

  std::size_t n_samples_ = 0;
  std::vector<Edge> must_;
  std::vector<Edge> cannot_;
  std::int64_t m_plus_ = 0;
  std::int64_t m_minus_ = 0;
  std::vector<std::size_t> must_offsets_{0};
  std::vector<Neighbor> must_adj_;
  std::vector<std::size_t> cannot_offsets_{0};
  std::vector<Neighbor> cannot_adj_;
};

/// Hard membership: one cluster index in [0, K) per sample.
struct Assignment {
  std::vector<std::size_t> labels;
  std::size_t n_clusters = 0;

  Assignment() = default;
  Assignment(std::vector<std::size_t> l, std::size_t k) : labels(std::move(l)), n_clusters(k) {
    for (auto y : labels) require(y < n_clusters, "label out of range");
  }

  std::size_t size() const { return labels.size(); }
  std::size_t operator[](std::size_t i) const { return labels[i]; }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> n(n_clusters, 0);
    for (auto y : labels) ++n[y];
    return n;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct GaussianParams {
  Matrix<double> means;          // K x D
  std::vector<double> variances; // K, each >= variance floor
};

/// Expected edge counts between cluster pairs, one K x K matrix per graph.
struct BlockRates {
  Matrix<double> omega_plus;
  Matrix<double> omega_minus;
};

inline constexpr double kAccuracyClamp = 1e-6;

struct PriorConfig {
  bool enabled = false;
  double expert_accuracy = 0.9;

  /// Accuracy pulled into the open interval (0, 1).
  double clamped_accuracy() const {
    if (!(expert_accuracy >= 0.0 && expert_accuracy <= 1.0))
      throw ContractViolation("expert accuracy must lie in [0, 1]");
    return std::clamp(expert_accuracy, kAccuracyClamp, 1.0 - kAccuracyClamp);
  }
};

/// Exponential-prior rates on the block rates: one rate for within-cluster
/// entries and one for between-cluster entries, per graph.
struct PriorRates {
  double lambda_plus_diag = 0.0;
  double lambda_plus_offdiag = 0.0;
  double lambda_minus_diag = 0.0;
  double lambda_minus_offdiag = 0.0;
  // Expected edge counts per pair, kept for diagnostics and identity checks.
  double f_plus_in = 0.0;
  double f_plus_out = 0.0;
  double f_minus_in = 0.0;
  double f_minus_out = 0.0;

  double plus(std::size_t r, std::size_t s) const { return r == s ? lambda_plus_diag : lambda_plus_offdiag; }
  double minus(std::size_t r, std::size_t s) const { return r == s ? lambda_minus_diag : lambda_minus_offdiag; }
};

}  // namespace ssc
