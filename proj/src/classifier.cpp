#include "gafx/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "gafx/binary_io.hpp"
#include "gafx/kernels.hpp"

namespace gafx {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.height) + ", " + std::to_string(s.width) + ", " +
         std::to_string(s.channels) + ")";
}

Tensor3 to_input(const GasfTensor& t) {
  Tensor3 x(Shape{kSide, kSide, kChannels});
  for (std::size_t i = 0; i < kSide; ++i) {
    for (std::size_t j = 0; j < kSide; ++j) {
      for (std::size_t c = 0; c < kChannels; ++c) {
        x.at(i, j, c) = t.at(c, i, j);
      }
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(Shape input, std::vector<LayerSpec> layers)
    : input_(input), layers_(std::move(layers)) {
  if (input_.size() == 0) {
    throw ShapeError("model input shape " + to_string(input_) + " is empty");
  }
  if (layers_.empty()) {
    throw ShapeError("model needs at least one layer");
  }
  Shape cur = input_;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    switch (l.kind) {
      case LayerKind::kConv: {
        if (l.units == 0 || l.kernel == 0 || cur.height + 2 * l.pad < l.kernel ||
            cur.width + 2 * l.pad < l.kernel) {
          throw ShapeError("conv layer " + std::to_string(k) + " does not fit input " +
                           to_string(cur));
        }
        ParamBlock b;
        b.layer = k;
        b.weight_offset = offset;
        b.weight_size = l.units * l.kernel * l.kernel * cur.channels;
        b.bias_offset = offset + b.weight_size;
        b.bias_size = l.units;
        offset = b.bias_offset + b.bias_size;
        blocks_.push_back(b);
        cur = Shape{cur.height + 2 * l.pad - l.kernel + 1, cur.width + 2 * l.pad - l.kernel + 1,
                    l.units};
        break;
      }
      case LayerKind::kRelu:
        break;
      case LayerKind::kFlatten:
        cur = Shape{1, 1, cur.size()};
        break;
      case LayerKind::kDense: {
        if (cur.height != 1 || cur.width != 1) {
          throw ShapeError("dense layer " + std::to_string(k) + " needs a flattened input, got " +
                           to_string(cur));
        }
        if (l.units == 0) {
          throw ShapeError("dense layer " + std::to_string(k) + " has zero units");
        }
        ParamBlock b;
        b.layer = k;
        b.weight_offset = offset;
        b.weight_size = l.units * cur.channels;
        b.bias_offset = offset + b.weight_size;
        b.bias_size = l.units;
        offset = b.bias_offset + b.bias_size;
        blocks_.push_back(b);
        cur = Shape{1, 1, l.units};
        break;
      }
      default:
        throw ShapeError("unknown layer kind at " + std::to_string(k));
    }
    shapes_.push_back(cur);
  }
  params_.assign(offset, 0.0);
}

Model Model::gasf_cnn() {
  return Model(Shape{kSide, kSide, kChannels},
               {LayerSpec::conv(16), LayerSpec::relu(), LayerSpec::conv(16), LayerSpec::relu(),
                LayerSpec::flatten(), LayerSpec::dense(128), LayerSpec::relu(),
                LayerSpec::dense(kNumClasses)});
}

void Model::initialize(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x1A17);
  std::fill(params_.begin(), params_.end(), 0.0);
  for (const auto& b : blocks_) {
    const auto& l = layers_[b.layer];
    const std::size_t fan_out = b.bias_size;
    const std::size_t fan_in = b.weight_size / fan_out;
    const bool feeds_relu =
        b.layer + 1 < layers_.size() && layers_[b.layer + 1].kind == LayerKind::kRelu;
    double limit = 0.0;
    if (feeds_relu) {
      limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    } else {
      const std::size_t out_fan =
          l.kind == LayerKind::kConv ? fan_out * l.kernel * l.kernel : fan_out;
      limit = std::sqrt(6.0 / static_cast<double>(fan_in + out_fan));
    }
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < b.weight_size; ++i) {
      params_[b.weight_offset + i] = dist(rng);
    }
  }
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

void check_input(const Model& m, const Tensor3& x) {
  if (!(x.shape == m.input_shape()) || x.data.size() != x.shape.size()) {
    throw ShapeError("input shape mismatch: expected " + to_string(m.input_shape()) + ", got " +
                     to_string(x.shape));
  }
}

void conv_forward(const LayerSpec& l, const Shape& in_s, const Shape& out_s, const double* in,
                  const double* w, const double* bias, double* out) {
  const std::size_t K = l.kernel, C = in_s.channels, O = out_s.channels;
  const auto pad = static_cast<std::ptrdiff_t>(l.pad);
  for (std::size_t y = 0; y < out_s.height; ++y) {
    for (std::size_t x = 0; x < out_s.width; ++x) {
      double* o_ptr = out + (y * out_s.width + x) * O;
      std::copy(bias, bias + O, o_ptr);
      for (std::size_t ky = 0; ky < K; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - pad;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_s.height)) {
          continue;
        }
        for (std::size_t kx = 0; kx < K; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) - pad;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_s.width)) {
            continue;
          }
          const double* i_ptr = in + (static_cast<std::size_t>(iy) * in_s.width + static_cast<std::size_t>(ix)) * C;
          for (std::size_t o = 0; o < O; ++o) {
            const double* w_ptr = w + ((o * K + ky) * K + kx) * C;
            double acc = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
              acc += w_ptr[c] * i_ptr[c];
            }
            o_ptr[o] += acc;
          }
        }
      }
    }
  }
}

// d_in may be null for the first layer.
void conv_backward(const LayerSpec& l, const Shape& in_s, const Shape& out_s, const double* in,
                   const double* w, const double* d_out, double* d_w, double* d_b, double* d_in) {
  const std::size_t K = l.kernel, C = in_s.channels, O = out_s.channels;
  const auto pad = static_cast<std::ptrdiff_t>(l.pad);
  for (std::size_t y = 0; y < out_s.height; ++y) {
    for (std::size_t x = 0; x < out_s.width; ++x) {
      const double* g_ptr = d_out + (y * out_s.width + x) * O;
      for (std::size_t o = 0; o < O; ++o) {
        d_b[o] += g_ptr[o];
      }
      for (std::size_t ky = 0; ky < K; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - pad;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_s.height)) {
          continue;
        }
        for (std::size_t kx = 0; kx < K; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) - pad;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_s.width)) {
            continue;
          }
          const std::size_t in_off = (static_cast<std::size_t>(iy) * in_s.width + static_cast<std::size_t>(ix)) * C;
          const double* i_ptr = in + in_off;
          for (std::size_t o = 0; o < O; ++o) {
            const double g = g_ptr[o];
            const std::size_t w_off = ((o * K + ky) * K + kx) * C;
            double* dw_ptr = d_w + w_off;
            for (std::size_t c = 0; c < C; ++c) {
              dw_ptr[c] += g * i_ptr[c];
            }
            if (d_in != nullptr) {
              const double* w_ptr = w + w_off;
              double* di_ptr = d_in + in_off;
              for (std::size_t c = 0; c < C; ++c) {
                di_ptr[c] += g * w_ptr[c];
              }
            }
          }
        }
      }
    }
  }
}

void dense_forward(std::size_t in_n, std::size_t out_n, const double* in, const double* w,
                   const double* bias, double* out) {
  for (std::size_t o = 0; o < out_n; ++o) {
    const double* w_row = w + o * in_n;
    double acc = 0.0;
    for (std::size_t i = 0; i < in_n; ++i) {
      acc += w_row[i] * in[i];
    }
    out[o] = bias[o] + acc;
  }
}

void dense_backward(std::size_t in_n, std::size_t out_n, const double* in, const double* w,
                    const double* d_out, double* d_w, double* d_b, double* d_in) {
  for (std::size_t o = 0; o < out_n; ++o) {
    const double g = d_out[o];
    d_b[o] += g;
    double* dw_row = d_w + o * in_n;
    for (std::size_t i = 0; i < in_n; ++i) {
      dw_row[i] += g * in[i];
    }
    if (d_in != nullptr) {
      const double* w_row = w + o * in_n;
      for (std::size_t i = 0; i < in_n; ++i) {
        d_in[i] += g * w_row[i];
      }
    }
  }
}

const ParamBlock* block_for(const Model& m, std::size_t layer) {
  for (const auto& b : m.blocks()) {
    if (b.layer == layer) {
      return &b;
    }
  }
  return nullptr;
}

// acts[0] is the input; acts[k + 1] the output of layer k.
std::vector<std::vector<double>> forward_trace(const Model& m, const Tensor3& input) {
  check_input(m, input);
  const auto& layers = m.layers();
  const auto params = m.params();
  std::vector<std::vector<double>> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(input.data);
  Shape in_s = m.input_shape();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const Shape& out_s = m.output_shape(k);
    const auto& in = acts.back();
    std::vector<double> out(out_s.size());
    switch (l.kind) {
      case LayerKind::kConv: {
        const auto* b = block_for(m, k);
        conv_forward(l, in_s, out_s, in.data(), params.data() + b->weight_offset,
                     params.data() + b->bias_offset, out.data());
        break;
      }
      case LayerKind::kDense: {
        const auto* b = block_for(m, k);
        dense_forward(in_s.size(), out_s.size(), in.data(), params.data() + b->weight_offset,
                      params.data() + b->bias_offset, out.data());
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t i = 0; i < out.size(); ++i) {
          out[i] = in[i] > 0.0 ? in[i] : 0.0;
        }
        break;
      case LayerKind::kFlatten:
        out = in;
        break;
    }
    acts.push_back(std::move(out));
    in_s = out_s;
  }
  return acts;
}

}  // namespace

Prediction softmax_prediction(std::span<const double> logits) {
  Prediction p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  p.probabilities.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p.probabilities[i] = std::exp(logits[i] - mx);
    sum += p.probabilities[i];
  }
  for (double& v : p.probabilities) {
    v /= sum;
  }
  p.argmax = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                              p.probabilities.begin());
  p.confidence = p.probabilities[static_cast<std::size_t>(p.argmax)];
  return p;
}

std::vector<double> forward_logits(const Model& m, const Tensor3& input) {
  return forward_trace(m, input).back();
}

Prediction forward(const Model& m, const Tensor3& input) {
  return softmax_prediction(forward_logits(m, input));
}

double accumulate_sample_gradient(const Model& m, const Tensor3& input, int label,
                                  std::span<double> grad) {
  if (grad.size() != m.params().size()) {
    throw ShapeError("gradient buffer has " + std::to_string(grad.size()) + " entries, model has " +
                     std::to_string(m.params().size()));
  }
  if (label < 0 || static_cast<std::size_t>(label) >= m.num_outputs()) {
    throw UsageError("label " + std::to_string(label) + " outside model output range");
  }
  const auto acts = forward_trace(m, input);
  const auto& logits = acts.back();

  // log-softmax cross-entropy; d(loss)/d(logits) = p - onehot
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) {
    sum += std::exp(z - mx);
  }
  const double log_sum = mx + std::log(sum);
  const double loss = log_sum - logits[static_cast<std::size_t>(label)];

  std::vector<double> d_out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    d_out[i] = std::exp(logits[i] - log_sum);
  }
  d_out[static_cast<std::size_t>(label)] -= 1.0;

  const auto& layers = m.layers();
  const auto params = m.params();
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    const Shape in_s = k == 0 ? m.input_shape() : m.output_shape(k - 1);
    const Shape& out_s = m.output_shape(k);
    const auto& in = acts[k];
    const bool need_input_grad = k > 0;
    std::vector<double> d_in(need_input_grad ? in_s.size() : 0, 0.0);
    switch (l.kind) {
      case LayerKind::kConv: {
        const auto* b = block_for(m, k);
        conv_backward(l, in_s, out_s, in.data(), params.data() + b->weight_offset, d_out.data(),
                      grad.data() + b->weight_offset, grad.data() + b->bias_offset,
                      need_input_grad ? d_in.data() : nullptr);
        break;
      }
      case LayerKind::kDense: {
        const auto* b = block_for(m, k);
        dense_backward(in_s.size(), out_s.size(), in.data(), params.data() + b->weight_offset,
                       d_out.data(), grad.data() + b->weight_offset, grad.data() + b->bias_offset,
                       need_input_grad ? d_in.data() : nullptr);
        break;
      }
      case LayerKind::kRelu:
        if (need_input_grad) {
          for (std::size_t i = 0; i < d_in.size(); ++i) {
            d_in[i] = in[i] > 0.0 ? d_out[i] : 0.0;
          }
        }
        break;
      case LayerKind::kFlatten:
        if (need_input_grad) {
          d_in = d_out;
        }
        break;
    }
    d_out = std::move(d_in);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Batches

EncodedSet encode_dataset(const Dataset& d, int workers) {
  return workers <= 1 ? kernels::serial::encode_samples(d.samples)
                      : kernels::omp::encode_samples(d.samples, workers);
}

namespace {

void check_batch(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch) {
  if (batch.empty()) {
    throw UsageError("empty batch");
  }
  for (std::size_t i : batch) {
    if (i >= data.size()) {
      throw UsageError("batch index " + std::to_string(i) + " out of range");
    }
    const int label = data.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= m.num_outputs()) {
      throw UsageError("label " + std::to_string(label) + " outside 0.." +
                       std::to_string(m.num_outputs() - 1));
    }
  }
}

std::vector<std::size_t> all_indices(const EncodedSet& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

LossAndGradient loss_and_gradients(const Model& m, const EncodedSet& data,
                                   std::span<const std::size_t> batch, int workers) {
  check_batch(m, data, batch);
  LossAndGradient out;
  out.gradient.assign(m.params().size(), 0.0);
  double loss_sum = 0.0;
  if (workers <= 1) {
    loss_sum = kernels::serial::batch_gradient(m, data, batch, out.gradient);
  } else {
    kernels::GradientScratch scratch;
    loss_sum = kernels::omp::batch_gradient(m, data, batch, out.gradient, workers, scratch);
  }
  const double n = static_cast<double>(batch.size());
  out.loss = loss_sum / n;
  if (!std::isfinite(out.loss)) {
    std::ostringstream msg;
    msg << "non-finite loss " << out.loss << " on batch of " << batch.size()
        << " samples starting at index " << batch.front();
    throw NumericError(msg.str());
  }
  for (double& g : out.gradient) {
    g /= n;
  }
  return out;
}

LossAndGradient loss_and_gradients(const Model& m, const EncodedSet& data, int workers) {
  const auto idx = all_indices(data);
  return loss_and_gradients(m, data, idx, workers);
}

double mean_loss(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch) {
  check_batch(m, data, batch);
  double sum = 0.0;
  for (std::size_t i : batch) {
    const auto logits = forward_logits(m, data.inputs[i]);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (double z : logits) {
      s += std::exp(z - mx);
    }
    sum += mx + std::log(s) - logits[static_cast<std::size_t>(data.labels[i])];
  }
  return sum / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------
// Training

std::vector<Prediction> predict_all(const Model& m, const EncodedSet& data, int workers) {
  return workers <= 1 ? kernels::serial::predict_samples(m, data.inputs)
                      : kernels::omp::predict_samples(m, data.inputs, workers);
}

namespace {

double accuracy_of(const Model& m, const EncodedSet& data, int workers) {
  const auto preds = predict_all(m, data, workers);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    hits += preds[i].argmax == data.labels[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace

TrainResult train(Model model, const EncodedSet& train_set, const EncodedSet& valid_set,
                  const TrainConfig& config) {
  if (train_set.size() == 0 || valid_set.size() == 0) {
    throw UsageError("training and validation sets must be non-empty");
  }
  if (config.batch_size == 0 || config.epochs == 0) {
    throw UsageError("epochs and batch size must be positive");
  }
  const std::size_t n_params = model.params().size();
  std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0), grad(n_params, 0.0);
  kernels::GradientScratch scratch;
  Rng rng = make_rng(config.seed, 0x7EA1);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{model, {}, 0, -1.0};
  std::uint64_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      check_batch(model, train_set, batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double loss_sum =
          config.workers <= 1
              ? kernels::serial::batch_gradient(model, train_set, batch, grad)
              : kernels::omp::batch_gradient(model, train_set, batch, grad, config.workers, scratch);
      if (!std::isfinite(loss_sum)) {
        std::ostringstream msg;
        msg << "training diverged in epoch " << epoch << " (loss " << loss_sum / static_cast<double>(batch.size())
            << ")";
        throw TrainingDiverged(msg.str(), result.model, result.history);
      }
      epoch_loss += loss_sum;

      ++step;
      const double inv_n = 1.0 / static_cast<double>(batch.size());
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto params = model.params();
      for (std::size_t i = 0; i < n_params; ++i) {
        const double g = grad[i] * inv_n;
        m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * g;
        m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = m1[i] / bc1;
        const double v_hat = m2[i] / bc2;
        params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
      }
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = epoch_loss / static_cast<double>(train_set.size());
    em.valid_accuracy = accuracy_of(model, valid_set, config.workers);
    result.history.push_back(em);
    if (em.valid_accuracy > result.best_valid_accuracy) {
      result.best_valid_accuracy = em.valid_accuracy;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

Evaluation evaluate(const Model& m, const EncodedSet& data, int workers) {
  Evaluation e;
  const auto preds = predict_all(m, data, workers);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto t = static_cast<std::size_t>(data.labels[i]);
    const auto p = static_cast<std::size_t>(preds[i].argmax);
    if (t >= kNumClasses || p >= kNumClasses) {
      throw ShapeError("evaluate expects a " + std::to_string(kNumClasses) + "-class model");
    }
    ++e.confusion[t][p];
    ++e.support[t];
  }
  e.total = preds.size();
  std::size_t hits = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    hits += e.confusion[c][c];
    std::size_t predicted = 0;
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      predicted += e.confusion[t][c];
    }
    e.precision[c] = predicted ? static_cast<double>(e.confusion[c][c]) / static_cast<double>(predicted) : 0.0;
    e.recall[c] = e.support[c] ? static_cast<double>(e.confusion[c][c]) / static_cast<double>(e.support[c]) : 0.0;
  }
  e.accuracy = e.total ? static_cast<double>(hits) / static_cast<double>(e.total) : 0.0;
  return e;
}

std::string format_history(const std::vector<EpochMetrics>& history) {
  std::ostringstream out;
  out << "# epoch train_loss valid_accuracy\n";
  out.setf(std::ios::fixed);
  for (const auto& h : history) {
    out.precision(8);
    out << h.epoch << ' ' << h.train_loss << ' ';
    out.precision(6);
    out << h.valid_accuracy << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr std::string_view kCheckpointMagic = "GAFC";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  const Model& m = c.model;
  ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(m.input_shape().height));
  w.u32(static_cast<std::uint32_t>(m.input_shape().width));
  w.u32(static_cast<std::uint32_t>(m.input_shape().channels));
  w.u32(static_cast<std::uint32_t>(m.layers().size()));
  for (const auto& l : m.layers()) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(static_cast<std::uint32_t>(l.units));
    w.u32(static_cast<std::uint32_t>(l.kernel));
    w.u32(static_cast<std::uint32_t>(l.pad));
  }
  const auto params = m.params();
  for (const auto& b : m.blocks()) {
    w.u64(b.weight_size);
    for (std::size_t i = 0; i < b.weight_size; ++i) {
      w.f64(params[b.weight_offset + i]);
    }
    w.u64(b.bias_size);
    for (std::size_t i = 0; i < b.bias_size; ++i) {
      w.f64(params[b.bias_offset + i]);
    }
  }
  w.u64(c.meta.seed);
  w.u32(c.meta.epochs);
  w.f64(c.meta.train_loss);
  w.f64(c.meta.valid_accuracy);
  w.str(c.meta.channel_order);
  w.str(c.meta.provenance);
  return w.bytes();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "checkpoint");
  r.expect_magic(kCheckpointMagic);
  if (auto v = r.u32(); v != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(v));
  }
  Shape in;
  in.height = r.u32();
  in.width = r.u32();
  in.channels = r.u32();
  const auto n_layers = r.u32();
  if (n_layers > 1024) {
    throw FormatError("checkpoint: implausible layer count " + std::to_string(n_layers));
  }
  std::vector<LayerSpec> layers;
  for (std::uint32_t k = 0; k < n_layers; ++k) {
    LayerSpec l;
    const auto kind = r.u8();
    if (kind > static_cast<std::uint8_t>(LayerKind::kDense)) {
      throw FormatError("checkpoint: unknown layer kind " + std::to_string(kind));
    }
    l.kind = static_cast<LayerKind>(kind);
    l.units = r.u32();
    l.kernel = r.u32();
    l.pad = r.u32();
    layers.push_back(l);
  }
  std::optional<Model> model;
  try {
    model.emplace(in, std::move(layers));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint: invalid layer manifest: ") + e.what());
  }
  auto params = model->params();
  for (const auto& b : model->blocks()) {
    if (r.u64() != b.weight_size) {
      throw FormatError("checkpoint: weight blob size mismatch in layer " + std::to_string(b.layer));
    }
    for (std::size_t i = 0; i < b.weight_size; ++i) {
      params[b.weight_offset + i] = r.f64();
    }
    if (r.u64() != b.bias_size) {
      throw FormatError("checkpoint: bias blob size mismatch in layer " + std::to_string(b.layer));
    }
    for (std::size_t i = 0; i < b.bias_size; ++i) {
      params[b.bias_offset + i] = r.f64();
    }
  }
  CheckpointMeta meta;
  meta.seed = r.u64();
  meta.epochs = r.u32();
  meta.train_loss = r.f64();
  meta.valid_accuracy = r.f64();
  meta.channel_order = r.str();
  meta.provenance = r.str();
  r.expect_end();
  return Checkpoint{std::move(*model), std::move(meta)};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file(path, serialize_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return deserialize_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace gafx
