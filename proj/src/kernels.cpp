#include "rhetprobe/kernels.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rhetprobe::kernels {

namespace {

void accumulate(GradSum& sum, const LossGrads& g) {
  sum.loss_sum += g.loss;
  auto dwd = sum.grad_wd.flat();
  auto swd = g.grad_wd.flat();
  for (std::size_t i = 0; i < dwd.size(); ++i) dwd[i] += swd[i];
  auto dwp = sum.grad_wp.flat();
  auto swp = g.grad_wp.flat();
  for (std::size_t i = 0; i < dwp.size(); ++i) dwp[i] += swp[i];
}

GradSum zero_sum(const ProbeModel& model) {
  return {0.0, MatrixD(model.D, model.d), MatrixD(model.d * model.d, model.m)};
}

}  // namespace

GradSum batch_grads_serial(const ProbeSet& set, std::span<const std::size_t> indices, const ProbeModel& model) {
  GradSum sum = zero_sum(model);
  for (std::size_t i : indices) accumulate(sum, loss_and_grads(set.inputs[i], set.targets[i], model));
  return sum;
}

GradSum batch_grads_omp(const ProbeSet& set, std::span<const std::size_t> indices, const ProbeModel& model) {
  const long n = static_cast<long>(indices.size());
  std::vector<LossGrads> per_doc(indices.size());
  std::vector<std::exception_ptr> errors(indices.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    try {
      const std::size_t i = indices[static_cast<std::size_t>(k)];
      per_doc[static_cast<std::size_t>(k)] = loss_and_grads(set.inputs[i], set.targets[i], model);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  GradSum sum = zero_sum(model);
  for (const auto& g : per_doc) accumulate(sum, g);
  return sum;
}

std::vector<std::vector<double>> batch_forward_serial(const ProbeSet& set, const ProbeModel& model) {
  std::vector<std::vector<double>> out;
  out.reserve(set.size());
  for (const auto& x : set.inputs) out.push_back(probe_forward(x, model));
  return out;
}

std::vector<std::vector<double>> batch_forward_omp(const ProbeSet& set, const ProbeModel& model) {
  const long n = static_cast<long>(set.size());
  std::vector<std::vector<double>> out(set.size());
  std::vector<std::exception_ptr> errors(set.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = probe_forward(set.inputs[static_cast<std::size_t>(k)], model);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rhetprobe::kernels
