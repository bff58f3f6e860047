#include "creditboost/histogram.hpp"

#include <string>

#include "creditboost/errors.hpp"

namespace creditboost {

HistogramBin Histogram::total() const {
  HistogramBin t;
  for (const auto& b : bins_) {
    t.grad += b.grad;
    t.hess += b.hess;
    t.count += b.count;
  }
  return t;
}

Histogram build_histogram(const BinnedDataset& bd, std::span<const std::size_t> rows,
                          std::size_t feature, std::span<const double> grad,
                          std::span<const double> hess) {
  Histogram h(static_cast<std::size_t>(bd.mapper().n_bins(feature)));
  bd.with_column(feature, [&](auto column) {
    for (const std::size_t r : rows) {
      auto& bin = h[column[r]];
      bin.grad += grad[r];
      bin.hess += hess[r];
      ++bin.count;
    }
  });
  return h;
}

Histogram subtract_histogram(const Histogram& parent, const Histogram& sibling) {
  if (parent.size() != sibling.size()) {
    throw InvalidArgument("histogram bin counts differ: " + std::to_string(parent.size()) +
                          " vs " + std::to_string(sibling.size()));
  }
  Histogram out(parent.size());
  for (std::size_t b = 0; b < parent.size(); ++b) {
    out[b].grad = parent[b].grad - sibling[b].grad;
    out[b].hess = parent[b].hess - sibling[b].hess;
    out[b].count = parent[b].count - sibling[b].count;
    if (out[b].count < 0) {
      throw ConsistencyError("histogram subtraction produced a negative count in bin " +
                             std::to_string(b));
    }
  }
  return out;
}

}  // namespace creditboost
