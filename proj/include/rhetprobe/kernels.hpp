#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rhetprobe/probe.hpp"

// Batch kernels over documents. The serial versions are the reference; the
// OpenMP versions parallelize across documents and reduce in document-index
// order, so both produce bit-identical results.
namespace rhetprobe::kernels {

struct GradSum {
  double loss_sum = 0.0;
  MatrixD grad_wd;
  MatrixD grad_wp;
};

GradSum batch_grads_serial(const ProbeSet& set, std::span<const std::size_t> indices, const ProbeModel& model);
GradSum batch_grads_omp(const ProbeSet& set, std::span<const std::size_t> indices, const ProbeModel& model);

std::vector<std::vector<double>> batch_forward_serial(const ProbeSet& set, const ProbeModel& model);
std::vector<std::vector<double>> batch_forward_omp(const ProbeSet& set, const ProbeModel& model);

inline GradSum batch_grads(Backend b, const ProbeSet& set, std::span<const std::size_t> indices,
                           const ProbeModel& model) {
  return b == Backend::Serial ? batch_grads_serial(set, indices, model) : batch_grads_omp(set, indices, model);
}

inline std::vector<std::vector<double>> batch_forward(Backend b, const ProbeSet& set, const ProbeModel& model) {
  return b == Backend::Serial ? batch_forward_serial(set, model) : batch_forward_omp(set, model);
}

int max_threads();

}  // namespace rhetprobe::kernels
