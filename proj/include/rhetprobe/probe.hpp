#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rhetprobe/matrix.hpp"
#include "rhetprobe/record.hpp"

namespace rhetprobe {

// Two-matrix probe: project tokens D -> d, pool with the d x d Gram matrix,
// read m features off the row-major flattened pool.
struct ProbeModel {
  std::size_t D = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  MatrixD wd;  // D x d
  MatrixD wp;  // d*d x m

  static ProbeModel zeros(std::size_t D, std::size_t d, std::size_t m);
  // Entries i.i.d. N(0, 1/fan_in): fan_in is D for wd and d*d for wp.
  static ProbeModel gaussian(std::size_t D, std::size_t d, std::size_t m, std::uint64_t seed);

  std::size_t parameter_count() const noexcept { return D * d + d * d * m; }

  friend bool operator==(const ProbeModel&, const ProbeModel&) = default;
};

void check_probe_dims(std::size_t D, std::size_t d, std::size_t m);

struct TrainConfig {
  int max_epochs = 40;
  double stall_tol = 1e-3;
  double rise_factor = 1.10;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t probe_dim = 10;
  std::uint64_t seed = 20201;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

// Documents paired with target vectors.
struct ProbeSet {
  std::vector<MatrixF> inputs;
  std::vector<std::vector<double>> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  bool empty() const noexcept { return inputs.empty(); }
};

// A = (X Wd)^T (X Wd).
MatrixD attention_pool(const MatrixF& x, const MatrixD& wd);
std::vector<double> probe_forward(const MatrixF& x, const ProbeModel& model);

// Mean over documents of |v_hat - v|^2 / m.
double difficulty(std::span<const std::vector<double>> predicted, std::span<const std::vector<double>> targets,
                  std::size_t m);

struct LossGrads {
  double loss = 0.0;
  MatrixD grad_wd;
  MatrixD grad_wp;
};

// Per-document loss |W_p^T vec(A) - v|^2 / m and its analytic gradients.
LossGrads loss_and_grads(const MatrixF& x, std::span<const double> target, const ProbeModel& model);

struct AdamState {
  MatrixD m_wd, v_wd, m_wp, v_wp;
  std::uint64_t step = 0;

  static AdamState for_model(const ProbeModel& model);
};

// One bias-corrected Adam update over a flat parameter block.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
                 std::span<double> second_moment, std::uint64_t step, const TrainConfig& config);

void adam_step(ProbeModel& model, const LossGrads& grads, AdamState& state, const TrainConfig& config);

// Decision after epoch t = losses.size() (1-based). Stall and rise need
// t >= 2; max_epochs fires at t == config.max_epochs.
std::optional<StopReason> check_stop(std::span<const double> epoch_losses, const TrainConfig& config);

struct TrainResult {
  ProbeModel model;
  RunRecord record;
};

enum class Backend { Serial, OpenMP };

TrainResult train_probe(const ProbeSet& train, const TrainConfig& config, ProbeModel initial,
                        Backend backend = Backend::OpenMP);
TrainResult train_probe(const ProbeSet& train, const TrainConfig& config, std::size_t D, std::size_t d,
                        std::size_t m, Backend backend = Backend::OpenMP);

double eval_probe(const ProbeModel& model, const ProbeSet& eval, Backend backend = Backend::OpenMP);

void write_probe_model(const ProbeModel& model, const std::string& path);
ProbeModel read_probe_model(const std::string& path);

}  // namespace rhetprobe
