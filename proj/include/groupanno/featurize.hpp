#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace groupanno {

/// Bag-of-words text featurizer using the hashing trick.
///
/// Tokenizes on runs of non-alphanumeric characters, hashes each token with
/// FNV-1a (64-bit) into one of num_buckets counts, then L2-normalizes the
/// count vector (so the output norm is 1 for non-empty text, 0 otherwise,
/// always <= sqrt(num_buckets)). Identical text always maps to the identical
/// vector and token order does not matter.
struct HashingFeaturizer {
  std::size_t num_buckets = 1024;
  bool lowercase = true;

  std::vector<double> transform(const std::string& text) const;
};

/// FNV-1a 64-bit hash, exposed for tests.
std::uint64_t fnv1a64(const std::string& s);

}  // namespace groupanno
