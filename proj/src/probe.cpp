#include "rhetprobe/probe.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rhetprobe/error.hpp"
#include "rhetprobe/rng.hpp"

namespace rhetprobe {

namespace {

// Y = X Wd, L x d.
MatrixD project(const MatrixF& x, const MatrixD& wd) {
  if (x.cols() != wd.rows())
    throw ShapeError("X has width " + std::to_string(x.cols()) + " but W_d has " + std::to_string(wd.rows()) +
                     " rows");
  if (x.rows() == 0) throw ShapeError("X has no rows");
  const std::size_t L = x.rows(), D = x.cols(), d = wd.cols();
  MatrixD y(L, d);
  for (std::size_t t = 0; t < L; ++t) {
    double* yt = y.row(t).data();
    const float* xt = x.row(t).data();
    for (std::size_t k = 0; k < D; ++k) {
      const double xtk = xt[k];
      if (xtk == 0.0) continue;
      const double* wk = wd.row(k).data();
      for (std::size_t j = 0; j < d; ++j) yt[j] += xtk * wk[j];
    }
  }
  return y;
}

MatrixD gram(const MatrixD& y) {
  const std::size_t L = y.rows(), d = y.cols();
  MatrixD a(d, d);
  for (std::size_t t = 0; t < L; ++t) {
    const double* yt = y.row(t).data();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) a(i, j) += yt[i] * yt[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
  return a;
}

std::vector<double> read_out(const MatrixD& a, const MatrixD& wp) {
  const std::size_t q = a.size(), m = wp.cols();
  if (wp.rows() != q) throw ShapeError("W_p rows must equal d*d");
  std::vector<double> out(m, 0.0);
  auto flat = a.flat();
  for (std::size_t r = 0; r < q; ++r) {
    const double ar = flat[r];
    const double* w = wp.row(r).data();
    for (std::size_t j = 0; j < m; ++j) out[j] += ar * w[j];
  }
  return out;
}

void check_model(const ProbeModel& model) {
  if (model.wd.rows() != model.D || model.wd.cols() != model.d || model.wp.rows() != model.d * model.d ||
      model.wp.cols() != model.m)
    throw ShapeError("probe matrices do not match declared dimensions");
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void check_probe_dims(std::size_t D, std::size_t d, std::size_t m) {
  if (d < 1 || m < 1 || D < d)
    throw ShapeError("probe dimensions need d >= 1, m >= 1, D >= d (got D=" + std::to_string(D) +
                     ", d=" + std::to_string(d) + ", m=" + std::to_string(m) + ")");
}

ProbeModel ProbeModel::zeros(std::size_t D, std::size_t d, std::size_t m) {
  check_probe_dims(D, d, m);
  return {D, d, m, MatrixD(D, d), MatrixD(d * d, m)};
}

ProbeModel ProbeModel::gaussian(std::size_t D, std::size_t d, std::size_t m, std::uint64_t seed) {
  ProbeModel model = zeros(D, d, m);
  Rng rng(seed);
  const double sd_wd = 1.0 / std::sqrt(static_cast<double>(D));
  const double sd_wp = 1.0 / static_cast<double>(d);
  for (double& w : model.wd.flat()) w = rng.normal() * sd_wd;
  for (double& w : model.wp.flat()) w = rng.normal() * sd_wp;
  return model;
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw PlanError("max_epochs must be >= 1");
  if (!(stall_tol > 0.0)) throw PlanError("stall_tol must be > 0");
  if (!(rise_factor > 1.0)) throw PlanError("rise_factor must be > 1");
  if (!(learning_rate > 0.0)) throw PlanError("learning_rate must be > 0");
  if (batch_size < 1) throw PlanError("batch_size must be >= 1");
  if (probe_dim < 1) throw PlanError("probe_dim must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw PlanError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw PlanError("adam_eps must be > 0");
}

MatrixD attention_pool(const MatrixF& x, const MatrixD& wd) { return gram(project(x, wd)); }

std::vector<double> probe_forward(const MatrixF& x, const ProbeModel& model) {
  check_model(model);
  return read_out(attention_pool(x, model.wd), model.wp);
}

double difficulty(std::span<const std::vector<double>> predicted, std::span<const std::vector<double>> targets,
                  std::size_t m) {
  if (predicted.empty() || targets.empty()) throw EmptyBatch("difficulty of an empty batch");
  if (predicted.size() != targets.size()) throw ShapeError("prediction and target batches differ in size");
  if (m == 0) throw ShapeError("feature dimension m must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    if (predicted[k].size() != m || targets[k].size() != m) throw ShapeError("vector width differs from m");
    double sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double r = predicted[k][j] - targets[k][j];
      sq += r * r;
    }
    total += sq / static_cast<double>(m);
  }
  return total / static_cast<double>(predicted.size());
}

LossGrads loss_and_grads(const MatrixF& x, std::span<const double> target, const ProbeModel& model) {
  check_model(model);
  const std::size_t d = model.d, m = model.m, D = model.D, L = x.rows();
  if (target.size() != m) throw ShapeError("target width differs from m");

  const MatrixD y = project(x, model.wd);
  const MatrixD a = gram(y);
  std::vector<double> r = read_out(a, model.wp);
  double sq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    r[j] -= target[j];
    sq += r[j] * r[j];
  }
  const double scale = 2.0 / static_cast<double>(m);

  LossGrads out{sq / static_cast<double>(m), MatrixD(D, d), MatrixD(d * d, m)};

  // dL/dW_p = (2/m) vec(A) r^T ; dL/dvec(A) = (2/m) W_p r.
  auto flat_a = a.flat();
  MatrixD g(d, d);
  auto flat_g = g.flat();
  for (std::size_t q = 0; q < d * d; ++q) {
    const double* w = model.wp.row(q).data();
    double* gw = out.grad_wp.row(q).data();
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      gw[j] = scale * flat_a[q] * r[j];
      acc += w[j] * r[j];
    }
    flat_g[q] = scale * acc;
  }

  // dL/dW_d = X^T Y (G + G^T).
  MatrixD sym(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) sym(i, j) = g(i, j) + g(j, i);
  MatrixD b(L, d);
  for (std::size_t t = 0; t < L; ++t)
    for (std::size_t i = 0; i < d; ++i) {
      const double yti = y(t, i);
      for (std::size_t j = 0; j < d; ++j) b(t, j) += yti * sym(i, j);
    }
  for (std::size_t t = 0; t < L; ++t) {
    const float* xt = x.row(t).data();
    const double* bt = b.row(t).data();
    for (std::size_t k = 0; k < D; ++k) {
      const double xtk = xt[k];
      if (xtk == 0.0) continue;
      double* gk = out.grad_wd.row(k).data();
      for (std::size_t j = 0; j < d; ++j) gk[j] += xtk * bt[j];
    }
  }

  if (!std::isfinite(out.loss) || !all_finite(out.grad_wd.flat()) || !all_finite(out.grad_wp.flat()))
    throw NonFiniteError("non-finite loss or gradient");
  return out;
}

AdamState AdamState::for_model(const ProbeModel& model) {
  return {MatrixD(model.D, model.d), MatrixD(model.D, model.d), MatrixD(model.d * model.d, model.m),
          MatrixD(model.d * model.d, model.m), 0};
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
                 std::span<double> second_moment, std::uint64_t step, const TrainConfig& config) {
  if (params.size() != grads.size() || params.size() != first_moment.size() ||
      params.size() != second_moment.size())
    throw ShapeError("Adam parameter, gradient and moment blocks differ in size");
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_moment[i] = b1 * first_moment[i] + (1.0 - b1) * grads[i];
    second_moment[i] = b2 * second_moment[i] + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = first_moment[i] / c1;
    const double v_hat = second_moment[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
  }
}

void adam_step(ProbeModel& model, const LossGrads& grads, AdamState& state, const TrainConfig& config) {
  ++state.step;
  adam_update(model.wd.flat(), grads.grad_wd.flat(), state.m_wd.flat(), state.v_wd.flat(), state.step, config);
  adam_update(model.wp.flat(), grads.grad_wp.flat(), state.m_wp.flat(), state.v_wp.flat(), state.step, config);
}

std::optional<StopReason> check_stop(std::span<const double> losses, const TrainConfig& config) {
  const std::size_t t = losses.size();
  if (t >= 2) {
    const double prev = losses[t - 2], cur = losses[t - 1];
    if (std::abs(cur - prev) < config.stall_tol) return StopReason::Stall;
    if (cur > config.rise_factor * prev) return StopReason::Rise;
  }
  if (t >= static_cast<std::size_t>(config.max_epochs)) return StopReason::MaxEpochs;
  return std::nullopt;
}

namespace {

constexpr char kProbeMagic[4] = {'P', 'R', 'B', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (in.size() - pos < 4) throw FormatError("truncated probe model file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

void write_probe_model(const ProbeModel& model, const std::string& path) {
  check_model(model);
  std::vector<std::uint8_t> bytes(kProbeMagic, kProbeMagic + 4);
  put_u32(bytes, static_cast<std::uint32_t>(model.D));
  put_u32(bytes, static_cast<std::uint32_t>(model.d));
  put_u32(bytes, static_cast<std::uint32_t>(model.m));
  for (double w : model.wd.flat()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(w)));
  for (double w : model.wp.flat()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(w)));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path);
}

ProbeModel read_probe_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kProbeMagic, 4) != 0) throw FormatError("bad PRB1 magic");
  std::size_t pos = 4;
  const std::size_t D = get_u32(bytes, pos), d = get_u32(bytes, pos), m = get_u32(bytes, pos);
  ProbeModel model = ProbeModel::zeros(D, d, m);
  if (bytes.size() - pos != 4 * (model.wd.size() + model.wp.size()))
    throw FormatError("PRB1 payload size does not match dimensions");
  for (double& w : model.wd.flat()) w = std::bit_cast<float>(get_u32(bytes, pos));
  for (double& w : model.wp.flat()) w = std::bit_cast<float>(get_u32(bytes, pos));
  return model;
}

}  // namespace rhetprobe
