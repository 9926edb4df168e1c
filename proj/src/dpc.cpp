#include "keyframe_dpc/dpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "keyframe_dpc/error.hpp"
#include "keyframe_dpc/parallel.hpp"
#include "keyframe_dpc/rounding.hpp"

namespace kfdpc::dpc {
namespace {

constexpr double kGapEpsilon = 1e-12;

double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double norm(std::span<const double> a) {
  double sum = 0.0;
  for (double v : a) sum += v * v;
  return std::sqrt(sum);
}

// Positions 0..n-1 ordered by gamma descending, lower index first on ties.
std::vector<std::size_t> rank_by_gamma(std::span<const double> gamma) {
  std::vector<std::size_t> order(gamma.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gamma[a] > gamma[b]; });
  return order;
}

}  // namespace

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::euclidean;
  if (text == "cosine") return Metric::cosine;
  throw InvalidArgument("unknown metric '" + std::string(text) + "'");
}

Kernel parse_kernel(std::string_view text) {
  if (text == "gaussian") return Kernel::gaussian;
  if (text == "cutoff") return Kernel::cutoff;
  throw InvalidArgument("unknown kernel '" + std::string(text) + "'");
}

std::string_view to_string(Metric metric) { return metric == Metric::euclidean ? "euclidean" : "cosine"; }
std::string_view to_string(Kernel kernel) { return kernel == Kernel::gaussian ? "gaussian" : "cutoff"; }

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> upper, Metric metric)
    : n_(n), upper_(std::move(upper)), metric_(metric) {
  if (n_ == 0) throw InvalidArgument("distance matrix needs at least one point");
  if (upper_.size() != n_ * (n_ - 1) / 2) throw InvalidArgument("packed distance count does not match n");
  for (double d : upper_) {
    if (!std::isfinite(d) || d < 0.0) throw InvalidArgument("distances must be finite and non-negative");
  }
}

void DpcConfig::validate() const {
  if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in (0, 1], got " + std::to_string(t));
  if (n_c_override && *n_c_override == 0) throw InvalidArgument("n_c override must be positive");
}

DistanceMatrix compute_distances(const FeatureMatrix& features, Metric metric, unsigned threads) {
  const std::size_t n = features.rows();
  std::vector<double> norms;
  if (metric == Metric::cosine) {
    norms.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      norms[i] = norm(features.row(i));
      if (norms[i] == 0.0) throw InvalidArgument("cosine distance undefined for zero-norm row " + std::to_string(i));
    }
  }
  std::vector<double> upper(n * (n - 1) / 2);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto a = features.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = features.row(j);
      double d = 0.0;
      if (metric == Metric::euclidean) {
        d = euclidean(a, b);
      } else {
        double dot = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
        d = std::clamp(1.0 - dot / (norms[i] * norms[j]), 0.0, 2.0);
      }
      upper[DistanceMatrix::packed_index(n, i, j)] = d;
    }
  });
  return {n, std::move(upper), metric};
}

double select_cutoff(const DistanceMatrix& distances, double t) {
  if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in (0, 1]");
  const std::size_t m = distances.pair_count();
  if (m == 0) throw DegenerateInput("cutoff distance needs at least two points");
  const double position = round_half_up(static_cast<double>(m) * t);
  const std::size_t rank = static_cast<std::size_t>(std::clamp(position, 1.0, static_cast<double>(m)));
  std::vector<double> sorted(distances.pairs().begin(), distances.pairs().end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

std::vector<double> local_density_cutoff(const DistanceMatrix& distances, double d_c) {
  if (!(d_c >= 0.0)) throw InvalidArgument("cutoff distance must be non-negative");
  const std::size_t n = distances.size();
  std::vector<double> rho(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distances(i, j) < d_c) {
        rho[i] += 1.0;
        rho[j] += 1.0;
      }
    }
  }
  return rho;
}

std::vector<double> local_density_gaussian(const DistanceMatrix& distances, double d_c) {
  if (!(d_c > 0.0) || !std::isfinite(d_c)) throw InvalidArgument("gaussian bandwidth d_c must be positive");
  const std::size_t n = distances.size();
  std::vector<double> rho(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = distances(i, j) / d_c;
      sum += std::exp(-r * r);
    }
    rho[i] = sum;
  }
  return rho;
}

bool outranks(std::span<const double> rho, std::size_t k, std::size_t i) {
  return rho[k] > rho[i] || (rho[k] == rho[i] && k < i);
}

DeltaResult compute_delta(const DistanceMatrix& distances, std::span<const double> rho) {
  const std::size_t n = distances.size();
  if (rho.size() != n) throw InvalidArgument("rho length does not match the distance matrix");
  DeltaResult out{std::vector<double>(n, 0.0), std::vector<std::size_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = i;
    double farthest = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double d = distances(i, k);
      farthest = std::max(farthest, d);
      if (outranks(rho, k, i) && d < best) {
        best = d;
        best_index = k;
      }
    }
    if (best_index == i) {
      out.delta[i] = farthest;
      out.nhd[i] = i;
    } else {
      out.delta[i] = best;
      out.nhd[i] = best_index;
    }
  }
  return out;
}

std::vector<double> compute_gamma(std::span<const double> rho, std::span<const double> delta) {
  if (rho.size() != delta.size()) throw InvalidArgument("rho and delta lengths differ");
  std::vector<double> gamma(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) gamma[i] = rho[i] * delta[i];
  return gamma;
}

std::size_t largest_gap_count(std::span<const double> gamma) {
  if (gamma.empty()) throw InvalidArgument("empty decision graph");
  std::vector<double> sorted(gamma.begin(), gamma.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>{});
  std::size_t best_k = 1;
  double best_gap = -1.0;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    const double gap = (sorted[k - 1] - sorted[k]) / (sorted[k - 1] + kGapEpsilon);
    if (gap > best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  return best_k;
}

std::size_t auto_center_count(std::span<const double> gamma) {
  const std::size_t cap = (gamma.size() + 3) / 4;
  return std::clamp<std::size_t>(largest_gap_count(gamma), 1, std::max<std::size_t>(cap, 1));
}

std::vector<std::size_t> select_centers(std::span<const double> gamma, std::optional<std::size_t> n_c_override) {
  if (gamma.empty()) throw InvalidArgument("empty decision graph");
  std::size_t n_c = 0;
  if (n_c_override) {
    n_c = *n_c_override;
    if (n_c < 1 || n_c > gamma.size()) {
      throw InvalidArgument("n_c override " + std::to_string(n_c) + " outside [1, " + std::to_string(gamma.size()) + "]");
    }
  } else {
    n_c = auto_center_count(gamma);
  }
  auto order = rank_by_gamma(gamma);
  order.resize(n_c);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> select_centers(const DecisionGraph& graph, std::optional<std::size_t> n_c_override) {
  return select_centers(std::span<const double>(graph.gamma), n_c_override);
}

ClusterResult cluster(const DistanceMatrix& distances, const DpcConfig& config) {
  config.validate();
  if (distances.size() < 2) throw DegenerateInput("clustering needs at least two points");
  double d_c = select_cutoff(distances, config.t);
  if (d_c == 0.0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (double d : distances.pairs())
      if (d > 0.0) smallest = std::min(smallest, d);
    if (!std::isfinite(smallest)) throw DegenerateInput("all points coincide");
    d_c = smallest;
  }

  ClusterResult result;
  result.cutoff = d_c;
  auto& g = result.graph;
  g.rho = config.kernel == Kernel::gaussian ? local_density_gaussian(distances, d_c)
                                            : local_density_cutoff(distances, d_c);
  auto delta = compute_delta(distances, g.rho);
  g.delta = std::move(delta.delta);
  g.nhd = std::move(delta.nhd);
  g.gamma = compute_gamma(g.rho, g.delta);
  std::optional<std::size_t> n_c = config.n_c_override;
  if (n_c) n_c = std::min(*n_c, g.size());
  result.centers = select_centers(g, n_c);
  return result;
}

void write_decision_graph_csv(std::ostream& out, const DecisionGraph& graph, std::size_t index_offset) {
  out << "index,rho,delta,gamma,nhd\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out << i + index_offset << ',' << graph.rho[i] << ',' << graph.delta[i] << ',' << graph.gamma[i] << ','
        << graph.nhd[i] + index_offset << '\n';
  }
  out.precision(old_precision);
}

}  // namespace kfdpc::dpc
