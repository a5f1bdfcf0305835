#include "fpsrl/mlp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fpsrl/activation.hpp"
#include "fpsrl/error.hpp"

namespace fpsrl {

std::size_t mlp_parameter_count(const std::vector<std::size_t>& sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * (sizes[l] + 1);
  return n;
}

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2 || sizes_.back() != 1)
    throw ContractViolation("Mlp: need at least input and a scalar output layer");
  for (std::size_t w : sizes_)
    if (w == 0 || w > kMaxWidth) throw ContractViolation("Mlp: layer width out of range");
  params_.assign(mlp_parameter_count(sizes_), 0.0);
}

Mlp Mlp::random(std::vector<std::size_t> sizes, Rng& rng) {
  Mlp net(std::move(sizes));
  std::size_t k = 0;
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    const std::size_t count = net.sizes_[l + 1] * (net.sizes_[l] + 1);
    for (std::size_t i = 0; i < count; ++i) net.params_[k++] = rng.uniform(-bound, bound);
  }
  return net;
}

std::vector<std::size_t> Mlp::shape(std::size_t inputs, std::size_t hidden_layers,
                                    std::size_t width) {
  std::vector<std::size_t> s{inputs};
  for (std::size_t i = 0; i < hidden_layers; ++i) s.push_back(width);
  s.push_back(1);
  return s;
}

double Mlp::forward(std::span<const double> input) const {
  if (input.size() != input_size())
    throw ContractViolation("Mlp::forward: expected " + std::to_string(input_size()) +
                            " inputs, got " + std::to_string(input.size()));
  std::array<double, kMaxWidth> a{}, b{};
  std::copy(input.begin(), input.end(), a.begin());
  const double* p = params_.data();
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double* bias = p + out * in;
    for (std::size_t o = 0; o < out; ++o) {
      double z = bias[o];
      const double* w = p + o * in;
      for (std::size_t i = 0; i < in; ++i) z += w[i] * a[i];
      b[o] = (l + 1 < layers) ? activation::arctan(z) : z;
    }
    p = bias + out;
    std::swap(a, b);
  }
  return a[0];
}

void Mlp::forward_batch(std::span<const double> inputs, std::span<double> outputs) const {
  const std::size_t n = outputs.size();
  const std::size_t in0 = input_size();
  if (inputs.size() != n * in0) throw ContractViolation("Mlp::forward_batch: size mismatch");
  // Feature-major buffers so the inner loop runs over samples.
  thread_local std::vector<double> cur, nxt;
  cur.resize(kMaxWidth * n);
  nxt.resize(kMaxWidth * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < in0; ++i) cur[i * n + k] = inputs[k * in0 + i];

  const double* p = params_.data();
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double* bias = p + out * in;
    const bool hidden = l + 1 < layers;
    for (std::size_t o = 0; o < out; ++o) {
      double* z = nxt.data() + o * n;
      std::fill(z, z + n, bias[o]);
      const double* w = p + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        const double wi = w[i];
        const double* x = cur.data() + i * n;
        for (std::size_t k = 0; k < n; ++k) z[k] += wi * x[k];
      }
      if (hidden) activation::arctan_inplace({z, n});
    }
    p = bias + out;
    std::swap(cur, nxt);
  }
  std::copy(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(n), outputs.begin());
}

double Mlp::output_gradient(std::span<const double> input, std::span<double> grad) const {
  if (input.size() != input_size()) throw ContractViolation("Mlp::output_gradient: bad input");
  if (grad.size() != params_.size()) throw ContractViolation("Mlp::output_gradient: bad grad");
  const std::size_t layers = sizes_.size() - 1;
  // acts[l] = input of layer l; pre[l] = pre-activation of layer l
  std::array<std::array<double, kMaxWidth>, 8> acts{}, pre{};
  if (layers >= acts.size()) throw ContractViolation("Mlp: too many layers");
  std::copy(input.begin(), input.end(), acts[0].begin());
  std::array<std::size_t, 8> offset{};
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offset[l] = off;
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double* w = params_.data() + off;
    const double* bias = w + out * in;
    for (std::size_t o = 0; o < out; ++o) {
      double z = bias[o];
      for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * acts[l][i];
      pre[l][o] = z;
      acts[l + 1][o] = (l + 1 < layers) ? activation::arctan(z) : z;
    }
    off += out * (in + 1);
  }
  // Backward pass of d output.
  std::array<double, kMaxWidth> delta{}, prev{};
  delta[0] = 1.0;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    double* gw = grad.data() + offset[l];
    double* gb = gw + out * in;
    const double* w = params_.data() + offset[l];
    std::fill(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(in), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] = delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        gw[o * in + i] = delta[o] * acts[l][i];
        prev[i] += w[o * in + i] * delta[o];
      }
    }
    if (l > 0)
      for (std::size_t i = 0; i < in; ++i) delta[i] = prev[i] * activation::arctan_derivative(pre[l - 1][i]);
  }
  return acts[layers][0];
}

Normalizer Normalizer::fit(std::span<const double> rows, std::size_t features) {
  if (features == 0 || rows.size() % features != 0)
    throw ContractViolation("Normalizer::fit: rows are not a multiple of the feature count");
  const std::size_t n = rows.size() / features;
  Normalizer z;
  z.mean.assign(features, 0.0);
  z.stddev.assign(features, 1.0);
  if (n == 0) return z;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < features; ++j) z.mean[j] += rows[k * features + j];
  for (double& m : z.mean) m /= static_cast<double>(n);
  std::vector<double> var(features, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < features; ++j) {
      const double d = rows[k * features + j] - z.mean[j];
      var[j] += d * d;
    }
  for (std::size_t j = 0; j < features; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    z.stddev[j] = sd > kMinStd * std::max(1.0, std::abs(z.mean[j])) ? sd : 1.0;
  }
  return z;
}

void Normalizer::normalize(std::span<double> row) const {
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = normalize(j, row[j]);
}

void Normalizer::denormalize(std::span<double> row) const {
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = denormalize(j, row[j]);
}

void Dataset::add(std::span<const double> in, double target) {
  if (inputs == 0) inputs = in.size();
  if (in.size() != inputs) throw ContractViolation("Dataset::add: inconsistent input width");
  x.insert(x.end(), in.begin(), in.end());
  y.push_back(target);
}

double mean_squared_error(const Mlp& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::vector<double> pred(data.size());
  net.forward_batch(data.x, pred);
  double sum = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double e = pred[k] - data.y[k];
    sum += e * e;
  }
  return sum / static_cast<double>(data.size());
}

TrainResult train_mlp(Mlp net, const Dataset& train, const Dataset& validation,
                      const Dataset& generalization, const TrainConfig& config) {
  if (train.size() == 0) throw ContractViolation("train_mlp: empty training set");
  if (train.inputs != net.input_size()) throw ContractViolation("train_mlp: input width mismatch");
  if (config.batch_size == 0) throw ConfigError("train_mlp: batch size must be positive");

  const std::size_t n = train.size();
  const std::size_t np = net.parameter_count();
  const std::size_t batch = std::min(config.batch_size, n);
  const std::size_t per_epoch = (n + batch - 1) / batch;
  const std::size_t per_check = std::max<std::size_t>(1, std::min(per_epoch, config.max_updates_per_check));

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad(np), sample_grad(np), m(np, 0.0), v(np, 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = config.learning_rate;
  double b1t = 1.0, b2t = 1.0;

  const Dataset& val = validation.size() ? validation : train;
  TrainResult result;
  result.net = net;
  result.validation_mse = mean_squared_error(net, val);
  std::size_t stale = 0, decays = 0, updates = 0, epoch = 0, cursor = n;
  bool done = false;

  while (!done) {
    // One validation round of `per_check` updates.
    for (std::size_t u = 0; u < per_check; ++u) {
      if (cursor >= n) {
        if (epoch >= config.max_epochs) {
          done = true;
          break;
        }
        // Fisher-Yates with our own generator for portable shuffles.
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        cursor = 0;
        ++epoch;
      }
      const std::size_t end = std::min(n, cursor + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t k = cursor; k < end; ++k) {
        const std::size_t idx = order[k];
        const double out = net.output_gradient(train.row(idx), sample_grad);
        const double err = out - train.y[idx];
        loss += err * err;
        for (std::size_t p = 0; p < np; ++p) grad[p] += err * sample_grad[p];
      }
      const double scale = 2.0 / static_cast<double>(end - cursor);
      cursor = end;
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "train_mlp: loss diverged at update " << updates << " (epoch " << epoch
            << ", step size " << lr << ")";
        throw ModelError(msg.str());
      }
      b1t *= beta1;
      b2t *= beta2;
      auto params = net.parameters();
      for (std::size_t p = 0; p < np; ++p) {
        const double g = grad[p] * scale;
        m[p] = beta1 * m[p] + (1.0 - beta1) * g;
        v[p] = beta2 * v[p] + (1.0 - beta2) * g * g;
        const double mhat = m[p] / (1.0 - b1t);
        const double vhat = v[p] / (1.0 - b2t);
        params[p] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
      if (++updates >= config.max_updates) {
        done = true;
        break;
      }
    }
    const double val_mse = mean_squared_error(net, val);
    if (!std::isfinite(val_mse)) throw ModelError("train_mlp: validation error is not finite");
    result.final_validation_mse = val_mse;
    if (val_mse < result.validation_mse) {
      result.validation_mse = val_mse;
      result.net = net;
      stale = 0;
    } else if (++stale >= config.patience) {
      lr *= 0.5;
      stale = 0;
      if (++decays >= config.max_decays) done = true;
    }
  }
  result.epochs = epoch;
  result.updates = updates;
  result.train_mse = mean_squared_error(result.net, train);
  result.generalization_mse =
      generalization.size() ? mean_squared_error(result.net, generalization) : 0.0;
  return result;
}

GradientCheckReport gradient_check(const Mlp& net, std::span<const double> input,
                                   double tolerance, const GradientFn& analytic) {
  const std::size_t np = net.parameter_count();
  std::vector<double> g(np);
  if (analytic)
    analytic(net, input, g);
  else
    net.output_gradient(input, g);

  GradientCheckReport report;
  Mlp probe = net;
  auto params = probe.parameters();
  for (std::size_t p = 0; p < np; ++p) {
    const double orig = params[p];
    const double h = 1e-6 * std::max(1.0, std::abs(orig));
    params[p] = orig + h;
    const double up = probe.forward(input);
    params[p] = orig - h;
    const double down = probe.forward(input);
    params[p] = orig;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(g[p]), 1e-6});
    const double rel = std::abs(fd - g[p]) / denom;
    if (rel > report.worst_relative_error) {
      report.worst_relative_error = rel;
      report.worst_parameter = p;
    }
  }
  report.passed = report.worst_relative_error <= tolerance;
  std::ostringstream msg;
  msg << (report.passed ? "gradient check passed" : "gradient check FAILED")
      << ": worst relative error " << report.worst_relative_error << " at parameter "
      << report.worst_parameter << " (tolerance " << tolerance << ")";
  report.message = msg.str();
  return report;
}

}  // namespace fpsrl
