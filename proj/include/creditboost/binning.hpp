#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "creditboost/data.hpp"

namespace creditboost {

inline constexpr int kDefaultMaxBin = 255;

/// Quantile discretization of each feature.
///
/// Bin b of a feature covers (upper_edges[b-1], upper_edges[b]]; bin 0 is
/// unbounded below and the last bin absorbs everything above its edge.
class BinMapper {
 public:
  BinMapper() = default;
  BinMapper(std::vector<std::vector<double>> upper_edges, int max_bin);

  std::size_t n_features() const { return edges_.size(); }
  int n_bins(std::size_t feature) const { return static_cast<int>(edges_[feature].size()); }
  int max_bin() const { return max_bin_; }
  const std::vector<double>& upper_edges(std::size_t feature) const { return edges_[feature]; }

  /// Index of the first bin whose upper edge is >= value, clamped to the last bin.
  int bin_of(std::size_t feature, double value) const;

  bool operator==(const BinMapper&) const = default;

 private:
  std::vector<std::vector<double>> edges_;
  int max_bin_ = kDefaultMaxBin;
};

/// Quantile bin edges per column. Features with at most `max_bin` distinct
/// values get one bin per distinct value.
BinMapper fit_bins(const Dataset& d, int max_bin = kDefaultMaxBin);

/// Edges for a single feature; exposed for testing.
std::vector<double> fit_feature_bins(std::span<const double> values, int max_bin);

/// Column-major bin indices. Stored in 8 bits when every feature has at most
/// 256 bins and 16 bits otherwise.
class BinnedDataset {
 public:
  BinnedDataset() = default;
  BinnedDataset(const Dataset& d, BinMapper mapper);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return mapper_.n_features(); }
  const BinMapper& mapper() const { return mapper_; }
  const std::vector<double>& target() const { return target_; }
  bool is_compact() const { return std::holds_alternative<std::vector<std::uint8_t>>(bins_); }

  int bin(std::size_t row, std::size_t feature) const {
    return std::visit([&](const auto& v) { return static_cast<int>(v[feature * n_rows_ + row]); },
                      bins_);
  }

  /// Calls `fn(std::span<const T>)` with the feature's column, T = uint8/uint16.
  template <typename Fn>
  decltype(auto) with_column(std::size_t feature, Fn&& fn) const {
    return std::visit(
        [&](const auto& v) -> decltype(auto) {
          using T = typename std::decay_t<decltype(v)>::value_type;
          return fn(std::span<const T>(v.data() + feature * n_rows_, n_rows_));
        },
        bins_);
  }

 private:
  std::size_t n_rows_ = 0;
  BinMapper mapper_;
  std::variant<std::vector<std::uint8_t>, std::vector<std::uint16_t>> bins_;
  std::vector<double> target_;
};

BinnedDataset apply_bins(const Dataset& d, const BinMapper& mapper);

}  // namespace creditboost
