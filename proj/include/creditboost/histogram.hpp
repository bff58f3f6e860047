#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "creditboost/binning.hpp"

namespace creditboost {

struct HistogramBin {
  double grad = 0.0;
  double hess = 0.0;
  std::int64_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

/// Gradient statistics of one feature over the rows of one tree node.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(std::size_t n_bins) : bins_(n_bins) {}

  std::size_t size() const { return bins_.size(); }
  HistogramBin& operator[](std::size_t b) { return bins_[b]; }
  const HistogramBin& operator[](std::size_t b) const { return bins_[b]; }
  std::span<const HistogramBin> bins() const { return bins_; }

  HistogramBin total() const;

  bool operator==(const Histogram&) const = default;

 private:
  std::vector<HistogramBin> bins_;
};

/// Accumulates grad/hess/count of `rows` into the bins of `feature`.
Histogram build_histogram(const BinnedDataset& bd, std::span<const std::size_t> rows,
                          std::size_t feature, std::span<const double> grad,
                          std::span<const double> hess);

/// parent - sibling, bin by bin. Throws InvalidArgument on a bin-count mismatch
/// and ConsistencyError if any resulting count is negative.
Histogram subtract_histogram(const Histogram& parent, const Histogram& sibling);

}  // namespace creditboost
