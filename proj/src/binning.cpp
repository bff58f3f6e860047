#include "creditboost/binning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "creditboost/errors.hpp"

namespace creditboost {

BinMapper::BinMapper(std::vector<std::vector<double>> upper_edges, int max_bin)
    : edges_(std::move(upper_edges)), max_bin_(max_bin) {
  if (max_bin_ < 2 || max_bin_ > 65536) {
    throw InvalidArgument("max_bin must lie in [2, 65536]");
  }
  for (std::size_t f = 0; f < edges_.size(); ++f) {
    const auto& e = edges_[f];
    if (e.empty() || static_cast<int>(e.size()) > max_bin_) {
      throw InvalidArgument("feature " + std::to_string(f) + " has " +
                            std::to_string(e.size()) + " bins, allowed 1.." +
                            std::to_string(max_bin_));
    }
    if (std::adjacent_find(e.begin(), e.end(), std::greater_equal<>()) != e.end()) {
      throw InvalidArgument("bin edges of feature " + std::to_string(f) +
                            " are not strictly increasing");
    }
  }
}

int BinMapper::bin_of(std::size_t feature, double value) const {
  const auto& e = edges_[feature];
  const auto it = std::lower_bound(e.begin(), e.end(), value);
  const auto b = static_cast<int>(it - e.begin());
  return std::min(b, static_cast<int>(e.size()) - 1);
}

std::vector<double> fit_feature_bins(std::span<const double> values, int max_bin) {
  if (max_bin < 2 || max_bin > 65536) {
    throw InvalidArgument("max_bin must lie in [2, 65536]");
  }
  if (values.empty()) throw InvalidArgument("cannot fit bins on an empty column");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  std::vector<std::size_t> counts;
  for (double v : sorted) {
    if (!std::isfinite(v)) throw InvalidArgument("cannot fit bins on non-finite values");
    if (distinct.empty() || v != distinct.back()) {
      distinct.push_back(v);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }

  const std::size_t k = distinct.size();
  const auto midpoint = [&](std::size_t i) {
    return distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0;
  };

  std::vector<double> edges;
  if (k <= static_cast<std::size_t>(max_bin)) {
    edges.reserve(k);
    for (std::size_t i = 0; i + 1 < k; ++i) edges.push_back(midpoint(i));
    edges.push_back(distinct.back());
    return edges;
  }

  // Greedy equal-frequency cuts: close a bin once it holds its share of the
  // rows still unassigned, re-targeting after every cut.
  std::size_t remaining_rows = sorted.size();
  auto remaining_bins = static_cast<std::size_t>(max_bin);
  std::size_t in_bin = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    in_bin += counts[i];
    const double target =
        static_cast<double>(remaining_rows) / static_cast<double>(remaining_bins);
    const double with_next = static_cast<double>(in_bin + counts[i + 1]);
    // Cut here if this bin is full, or if adding the next value would
    // overshoot the target by more than stopping now undershoots it.
    const bool full = static_cast<double>(in_bin) >= target;
    const bool closer_now = with_next - target > target - static_cast<double>(in_bin);
    const std::size_t distinct_left = k - i - 1;
    const bool must_cut = distinct_left <= remaining_bins - 1;
    if (remaining_bins > 1 && (full || closer_now || must_cut)) {
      edges.push_back(midpoint(i));
      remaining_rows -= in_bin;
      --remaining_bins;
      in_bin = 0;
    }
  }
  edges.push_back(distinct.back());
  return edges;
}

BinMapper fit_bins(const Dataset& d, int max_bin) {
  std::vector<std::vector<double>> edges(d.n_cols());
  // Per-feature work is independent; each iteration writes its own slot.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d.n_cols()); ++j) {
    edges[static_cast<std::size_t>(j)] =
        fit_feature_bins(d.column(static_cast<std::size_t>(j)), max_bin);
  }
  return BinMapper(std::move(edges), max_bin);
}

namespace {

template <typename T>
std::vector<T> bin_columns(const Dataset& d, const BinMapper& mapper) {
  std::vector<T> out(d.n_rows * d.n_cols());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(d.n_cols()); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto col = d.column(j);
    T* dst = out.data() + j * d.n_rows;
    for (std::size_t i = 0; i < d.n_rows; ++i) {
      dst[i] = static_cast<T>(mapper.bin_of(j, col[i]));
    }
  }
  return out;
}

}  // namespace

BinnedDataset::BinnedDataset(const Dataset& d, BinMapper mapper)
    : n_rows_(d.n_rows), mapper_(std::move(mapper)), target_(d.target) {
  if (d.n_cols() != mapper_.n_features()) {
    throw SchemaError("dataset has " + std::to_string(d.n_cols()) +
                      " columns, bin mapper expects " +
                      std::to_string(mapper_.n_features()));
  }
  int widest = 1;
  for (std::size_t f = 0; f < mapper_.n_features(); ++f) {
    widest = std::max(widest, mapper_.n_bins(f));
  }
  if (widest <= 256) {
    bins_ = bin_columns<std::uint8_t>(d, mapper_);
  } else {
    bins_ = bin_columns<std::uint16_t>(d, mapper_);
  }
}

BinnedDataset apply_bins(const Dataset& d, const BinMapper& mapper) {
  return BinnedDataset(d, mapper);
}

}  // namespace creditboost
