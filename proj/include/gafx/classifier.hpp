#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gafx/errors.hpp"
#include "gafx/gasf.hpp"
#include "gafx/market_data.hpp"

namespace gafx {

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// Row-major HWC: element (y, x, c) lives at (y * width + x) * channels + c.
struct Tensor3 {
  Shape shape;
  std::vector<double> data;

  Tensor3() = default;
  explicit Tensor3(Shape s) : shape(s), data(s.size(), 0.0) {}

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data[(y * shape.width + x) * shape.channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * shape.width + x) * shape.channels + c];
  }
};

// 10x10x4 input, channel order (open, high, low, close).
Tensor3 to_input(const GasfTensor& t);

enum class LayerKind : std::uint8_t { kConv = 0, kRelu = 1, kFlatten = 2, kDense = 3 };

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t units = 0;   // conv: output channels, dense: output width
  std::size_t kernel = 0;  // conv only; square, stride 1
  std::size_t pad = 0;     // conv only; zero padding

  static LayerSpec conv(std::size_t out, std::size_t kernel = 3, std::size_t pad = 1) {
    return {LayerKind::kConv, out, kernel, pad};
  }
  static LayerSpec relu() { return {LayerKind::kRelu, 0, 0, 0}; }
  static LayerSpec flatten() { return {LayerKind::kFlatten, 0, 0, 0}; }
  static LayerSpec dense(std::size_t units) { return {LayerKind::kDense, units, 0, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Where one layer's weights and bias live inside Model::params().
struct ParamBlock {
  std::size_t layer = 0;
  std::size_t weight_offset = 0;
  std::size_t weight_size = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_size = 0;

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

// Layer stack with all parameters in one contiguous vector. Softmax is applied
// on top of the last layer by forward(); it is not a layer here.
class Model {
 public:
  // Throws ShapeError for stacks that do not compose (e.g. dense on an
  // unflattened map, kernel larger than padded input).
  Model(Shape input, std::vector<LayerSpec> layers);

  // Conv(16) ReLU Conv(16) ReLU Flatten Dense(128) ReLU Dense(9) on 10x10x4.
  static Model gasf_cnn();

  const Shape& input_shape() const { return input_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  // shape after layer k
  const Shape& output_shape(std::size_t k) const { return shapes_[k]; }
  std::size_t num_outputs() const { return shapes_.back().size(); }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // He-uniform for weights feeding a ReLU, Glorot-uniform for the output layer,
  // zero biases.
  void initialize(std::uint64_t seed);

  friend bool operator==(const Model&, const Model&) = default;

 private:
  Shape input_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
};

struct Prediction {
  std::vector<double> probabilities;
  int argmax = 0;
  double confidence = 0.0;  // probabilities[argmax]
};

Prediction softmax_prediction(std::span<const double> logits);

// Throws ShapeError naming expected and actual shapes.
std::vector<double> forward_logits(const Model& m, const Tensor3& input);
Prediction forward(const Model& m, const Tensor3& input);

// Cross-entropy of one sample; adds d(loss)/d(params) into grad, which must
// have params().size() entries.
double accumulate_sample_gradient(const Model& m, const Tensor3& input, int label,
                                  std::span<double> grad);

// GASF-encoded dataset ready for the network.
struct EncodedSet {
  std::vector<Tensor3> inputs;
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
};

EncodedSet encode_dataset(const Dataset& d, int workers = 1);

struct LossAndGradient {
  double loss = 0.0;              // mean cross-entropy
  std::vector<double> gradient;   // mean gradient, same layout as params()
};

// Gradient accumulation is summed in batch order, so every worker count gives
// bit-identical results. Throws NumericError on a non-finite loss.
LossAndGradient loss_and_gradients(const Model& m, const EncodedSet& data,
                                   std::span<const std::size_t> batch, int workers = 1);
LossAndGradient loss_and_gradients(const Model& m, const EncodedSet& data, int workers = 1);

double mean_loss(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_accuracy = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  double best_valid_accuracy = 0.0;
};

// Raised when the loss turns non-finite; carries the best model seen so far.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, Model last_good, std::vector<EpochMetrics> history)
      : NumericError(what),
        last_good_(std::make_shared<Model>(std::move(last_good))),
        history_(std::move(history)) {}

  const Model& last_good() const { return *last_good_; }
  const std::vector<EpochMetrics>& history() const { return history_; }

 private:
  std::shared_ptr<Model> last_good_;
  std::vector<EpochMetrics> history_;
};

// Mini-batch Adam on mean cross-entropy with a per-epoch shuffle drawn from
// config.seed. Keeps the parameters of the best validation accuracy (earliest
// epoch on ties).
TrainResult train(Model model, const EncodedSet& train_set, const EncodedSet& valid_set,
                  const TrainConfig& config);

struct Evaluation {
  // confusion[true][predicted]
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};
  std::array<std::size_t, kNumClasses> support{};
  std::array<double, kNumClasses> precision{};  // 0 when nothing was predicted as that class
  std::array<double, kNumClasses> recall{};     // 0 when the class has no support
  double accuracy = 0.0;
  std::size_t total = 0;
};

std::vector<Prediction> predict_all(const Model& m, const EncodedSet& data, int workers = 1);
Evaluation evaluate(const Model& m, const EncodedSet& data, int workers = 1);

std::string format_history(const std::vector<EpochMetrics>& history);

// ---------------------------------------------------------------------------
// Checkpoints

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  double train_loss = 0.0;
  double valid_accuracy = 0.0;
  std::string channel_order = "open,high,low,close";
  std::string provenance;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  Model model;
  CheckpointMeta meta;
};

// "GAFC" container: u32 version, input shape, layer manifest, per-layer
// weight/bias blobs as little-endian f64, metadata block.
std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gafx
