#include <cmath>
#include <numeric>

#include "rhetprobe/error.hpp"
#include "rhetprobe/kernels.hpp"
#include "rhetprobe/probe.hpp"
#include "rhetprobe/rng.hpp"

namespace rhetprobe {

namespace {

void check_set(const ProbeSet& set, std::size_t D, std::size_t m) {
  if (set.inputs.size() != set.targets.size()) throw ShapeError("inputs and targets differ in count");
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.inputs[i].cols() != D) throw ShapeError("document " + std::to_string(i) + " has the wrong width");
    if (set.targets[i].size() != m) throw ShapeError("target " + std::to_string(i) + " has the wrong width");
  }
}

}  // namespace

TrainResult train_probe(const ProbeSet& train, const TrainConfig& config, ProbeModel model, Backend backend) {
  config.validate();
  if (train.empty()) throw EmptyBatch("training set is empty");
  check_set(train, model.D, model.m);

  RunRecord record;
  record.train_docs = train.size();
  AdamState state = AdamState::for_model(model);
  Rng order_rng(derive_seed(config.seed, "epoch-order"));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::span<const std::size_t> batch(order.data() + start, count);
      kernels::GradSum sum;
      try {
        sum = kernels::batch_grads(backend, train, batch, model);
      } catch (const NonFiniteError&) {
        throw NonFiniteError("training diverged", epoch);
      }
      loss_sum += sum.loss_sum;
      const double inv = 1.0 / static_cast<double>(count);
      LossGrads mean{sum.loss_sum * inv, std::move(sum.grad_wd), std::move(sum.grad_wp)};
      for (double& g : mean.grad_wd.flat()) g *= inv;
      for (double& g : mean.grad_wp.flat()) g *= inv;
      adam_step(model, mean, state, config);
    }
    const double epoch_loss = loss_sum / static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss)) throw NonFiniteError("non-finite epoch loss", epoch);
    record.train_difficulty_per_epoch.push_back(epoch_loss);
    if (auto stop = check_stop(record.train_difficulty_per_epoch, config)) {
      record.stop_reason = *stop;
      break;
    }
  }
  record.epochs_run = static_cast<int>(record.train_difficulty_per_epoch.size());
  return {std::move(model), std::move(record)};
}

TrainResult train_probe(const ProbeSet& train, const TrainConfig& config, std::size_t D, std::size_t d,
                        std::size_t m, Backend backend) {
  return train_probe(train, config, ProbeModel::gaussian(D, d, m, derive_seed(config.seed, "init")), backend);
}

double eval_probe(const ProbeModel& model, const ProbeSet& eval, Backend backend) {
  if (eval.empty()) throw EmptyBatch("evaluation set is empty");
  check_set(eval, model.D, model.m);
  const auto predicted = kernels::batch_forward(backend, eval, model);
  return difficulty(predicted, eval.targets, model.m);
}

}  // namespace rhetprobe
