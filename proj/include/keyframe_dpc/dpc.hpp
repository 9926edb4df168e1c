#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "keyframe_dpc/feature_matrix.hpp"

namespace kfdpc::dpc {

enum class Metric { euclidean, cosine };
enum class Kernel { cutoff, gaussian };

Metric parse_metric(std::string_view text);
Kernel parse_kernel(std::string_view text);
std::string_view to_string(Metric metric);
std::string_view to_string(Kernel kernel);

/// Pairwise distances d_ij for i < j, stored as a packed upper triangle.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t n, std::vector<double> upper, Metric metric);

  std::size_t size() const { return n_; }
  /// Number of stored pairs, n(n-1)/2.
  std::size_t pair_count() const { return upper_.size(); }
  Metric metric() const { return metric_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return upper_[packed_index(n_, i, j)];
  }

  std::span<const double> pairs() const { return upper_; }

  static std::size_t packed_index(std::size_t n, std::size_t i, std::size_t j) {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

 private:
  std::size_t n_;
  std::vector<double> upper_;
  Metric metric_;
};

struct DpcConfig {
  double t = 0.2;
  Kernel kernel = Kernel::gaussian;
  Metric metric = Metric::euclidean;
  std::optional<std::size_t> n_c_override;

  /// Throws InvalidArgument if t is outside (0, 1] or the override is 0.
  void validate() const;
};

/// Diagnostic state of one clustering run.
struct DecisionGraph {
  std::vector<double> rho;
  std::vector<double> delta;
  std::vector<double> gamma;
  std::vector<std::size_t> nhd;  // nearest higher-density point; self for the maximum

  std::size_t size() const { return rho.size(); }
};

struct DeltaResult {
  std::vector<double> delta;
  std::vector<std::size_t> nhd;
};

/// Euclidean is the L2 norm of the row difference; cosine is
/// 1 - cos(x_i, x_j) clamped to [0, 2] and rejects zero-norm rows.
DistanceMatrix compute_distances(const FeatureMatrix& features, Metric metric,
                                 unsigned threads = 1);

/// The round_half_up(M*t)-th smallest pairwise distance (1-based), with the
/// index clamped to [1, M]. Throws DegenerateInput when M = 0.
double select_cutoff(const DistanceMatrix& distances, double t);

/// rho_i = #{ j != i : d_ij < d_c }.
std::vector<double> local_density_cutoff(const DistanceMatrix& distances, double d_c);

/// rho_i = sum_{j != i} exp(-(d_ij / d_c)^2), summed in ascending j.
std::vector<double> local_density_gaussian(const DistanceMatrix& distances, double d_c);

/// Point k outranks point i when rho_k > rho_i, or rho_k == rho_i and k < i.
bool outranks(std::span<const double> rho, std::size_t k, std::size_t i);

/// delta_i is the distance to the closest outranking point (lowest index on
/// distance ties); the top-ranked point gets its largest distance and
/// nhd = itself.
DeltaResult compute_delta(const DistanceMatrix& distances, std::span<const double> rho);

std::vector<double> compute_gamma(std::span<const double> rho, std::span<const double> delta);

/// Center count picked by the largest relative gap in descending gamma,
/// before the ceil(n/4) cap. Exposed for diagnostics.
std::size_t largest_gap_count(std::span<const double> gamma);

/// Automatic n_c: largest_gap_count capped at ceil(n/4), at least 1.
std::size_t auto_center_count(std::span<const double> gamma);

/// Indices of the n_c largest gamma values (lower index wins ties), sorted
/// ascending. n_c comes from the override or from auto_center_count.
std::vector<std::size_t> select_centers(std::span<const double> gamma,
                                        std::optional<std::size_t> n_c_override = {});
std::vector<std::size_t> select_centers(const DecisionGraph& graph,
                                        std::optional<std::size_t> n_c_override = {});

struct ClusterResult {
  DecisionGraph graph;
  double cutoff = 0.0;  // d_c actually used for the densities
  std::vector<std::size_t> centers;
};

/// Full pipeline over an existing distance matrix: cutoff, density, delta,
/// gamma, centers. Requires at least two points. When the cutoff order
/// statistic is 0 (duplicate points) the smallest positive distance is
/// used; if every distance is 0 this throws DegenerateInput.
ClusterResult cluster(const DistanceMatrix& distances, const DpcConfig& config);

/// Writes "index,rho,delta,gamma,nhd" rows; indices are shifted by
/// `index_offset` so segment graphs can carry global frame numbers.
void write_decision_graph_csv(std::ostream& out, const DecisionGraph& graph,
                              std::size_t index_offset = 0);

}  // namespace kfdpc::dpc
