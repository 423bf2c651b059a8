// Benchmark: serial reference kernels vs the OpenMP kernels on one EM fit,
// verifying that both produce bit-identical posteriors and objectives.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "groupanno/em.hpp"
#include "groupanno/parallel.hpp"
#include "groupanno/synthgen.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t instances_per_class = 10000;
  std::size_t num_annotators = 200;
  std::size_t epochs = 20;
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    const auto next = [&](const char* name) {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", name);
        std::exit(2);
      }
      return std::string(argv[++i]);
    };
    if (std::strcmp(argv[i], "--instances-per-class") == 0) {
      instances_per_class = std::stoull(next("--instances-per-class"));
    } else if (std::strcmp(argv[i], "--num-annotators") == 0) {
      num_annotators = std::stoull(next("--num-annotators"));
    } else if (std::strcmp(argv[i], "--epochs") == 0) {
      epochs = std::stoull(next("--epochs"));
    } else if (std::strcmp(argv[i], "--threads") == 0) {
      threads = std::stoi(next("--threads"));
    } else {
      std::fprintf(stderr,
                   "usage: bench_em [--instances-per-class N] [--num-annotators R] "
                   "[--epochs E] [--threads T]\n");
      return 2;
    }
  }
  groupanno::set_num_threads(threads);

  groupanno::SynthConfig synth = groupanno::SynthConfig::defaults("moon");
  synth.instances_per_class = instances_per_class;
  synth.num_annotators = num_annotators;
  synth.seed = 12345;
  std::printf("generating %zu instances, %zu annotators ...\n", 2 * instances_per_class,
              num_annotators);
  const groupanno::GroundTruthBundle bundle = groupanno::generate(synth);

  groupanno::EmConfig config;
  config.epochs = epochs;
  config.concentration = 100.0;

  config.use_parallel_kernels = false;
  auto start = std::chrono::steady_clock::now();
  const groupanno::EmState serial = groupanno::run(bundle.dataset, bundle.table, config);
  const double serial_s = seconds_since(start);

  config.use_parallel_kernels = true;
  start = std::chrono::steady_clock::now();
  const groupanno::EmState parallel = groupanno::run(bundle.dataset, bundle.table, config);
  const double parallel_s = seconds_since(start);

  bool identical = serial.posteriors.mu.size() == parallel.posteriors.mu.size() &&
                   serial.objective_trace == parallel.objective_trace;
  if (identical) {
    for (const auto& [id, mu] : serial.posteriors.mu) {
      auto it = parallel.posteriors.mu.find(id);
      if (it == parallel.posteriors.mu.end() || it->second != mu) {
        identical = false;
        break;
      }
    }
  }

  std::printf("serial reference: %8.3f s  (%zu epochs)\n", serial_s, epochs);
  std::printf("openmp kernels:   %8.3f s  (speedup %.2fx)\n", parallel_s, serial_s / parallel_s);
  std::printf("bit-identical posteriors and objective trace: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
