#include "groupanno/featurize.hpp"

#include <cctype>
#include <cmath>

namespace groupanno {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> HashingFeaturizer::transform(const std::string& text) const {
  std::vector<double> counts(num_buckets, 0.0);
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    counts[fnv1a64(token) % num_buckets] += 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      token.push_back(lowercase ? static_cast<char>(std::tolower(c))
                                : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  double norm_sq = 0.0;
  for (double v : counts) norm_sq += v * v;
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : counts) v *= inv;
  }
  return counts;
}

}  // namespace groupanno
