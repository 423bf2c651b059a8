#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace groupanno {

/// Elements per reduction block. Fixed independently of the thread count so
/// floating-point accumulation order (and therefore every result bit) is the
/// same no matter how many threads run.
inline constexpr std::size_t kReductionBlock = 256;

/// Number of fixed-size blocks covering n elements.
inline std::size_t num_reduction_blocks(std::size_t n) {
  return (n + kReductionBlock - 1) / kReductionBlock;
}

/// Accumulate per-element contributions into a dim-length vector.
///
/// `add(i, acc)` must add element i's contribution into acc (a dim-length
/// array). Elements are summed serially within each fixed-size block and block
/// partials are combined in block order, so the result is bit-identical for
/// the serial and parallel paths and for any OpenMP thread count.
///
/// AddFn is called concurrently from multiple threads in the parallel path and
/// must be safe to invoke on disjoint accumulators.
template <typename AddFn>
std::vector<double> blocked_accumulate_serial(std::size_t n, std::size_t dim, const AddFn& add) {
  const std::size_t nblocks = num_reduction_blocks(n);
  std::vector<double> total(dim, 0.0);
  std::vector<double> partial(dim);
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::fill(partial.begin(), partial.end(), 0.0);
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t i = lo; i < hi; ++i) add(i, partial.data());
    for (std::size_t d = 0; d < dim; ++d) total[d] += partial[d];
  }
  return total;
}

/// Parallel variant of blocked_accumulate_serial with the identical
/// block-ordered combination, hence bit-identical output.
template <typename AddFn>
std::vector<double> blocked_accumulate(std::size_t n, std::size_t dim, const AddFn& add) {
#ifndef _OPENMP
  return blocked_accumulate_serial(n, dim, add);
#else
  const std::size_t nblocks = num_reduction_blocks(n);
  if (nblocks <= 1) return blocked_accumulate_serial(n, dim, add);
  std::vector<std::vector<double>> partials(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bs = 0; bs < static_cast<std::ptrdiff_t>(nblocks); ++bs) {
    const auto b = static_cast<std::size_t>(bs);
    auto& partial = partials[b];
    partial.assign(dim, 0.0);
    const std::size_t lo = b * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t i = lo; i < hi; ++i) add(i, partial.data());
  }
  std::vector<double> total(dim, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (std::size_t d = 0; d < dim; ++d) total[d] += partials[b][d];
  }
  return total;
#endif
}

/// Apply fn(i) for i in [0, n), in parallel when OpenMP is available.
/// fn must write only to locations owned by element i.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    fn(static_cast<std::size_t>(i));
  }
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

/// Serial twin of parallel_for, kept as the reference implementation.
template <typename Fn>
void serial_for(std::size_t n, const Fn& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

/// Set the OpenMP thread count (no-op without OpenMP). 0 keeps the default.
inline void set_num_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace groupanno
