// Small differentiable models: an MLP with manual backpropagation (empty
// hidden list degenerates to logistic / linear regression), SGD and Adam
// optimizers, and the local-training procedure each federated client runs.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/params.hpp"

namespace fedsim {

enum class Activation { kRelu, kTanh };

struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    std::size_t output_dim = 0;
    Activation activation = Activation::kRelu;
    Task task = Task::kClassification;
    // trailing weight+bias layers tagged personal (0 disables personalization)
    std::size_t personal_head_layers = 0;

    std::size_t layer_count() const { return hidden.size() + 1; }
};

// Segments w0,b0,w1,b1,...; weight matrices are row-major out x in.
LayoutPtr build_layout(const MlpSpec& spec);

// Xavier-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases,
// deterministic in (spec, seed).
ParamVector init_model(const MlpSpec& spec, std::uint64_t seed);

// Class probabilities (softmax) or raw regression outputs for one row.
std::vector<double> forward(const ParamVector& params, const MlpSpec& spec,
                            std::span<const double> x);

struct GradientResult {
    ParamVector grad;
    double loss = 0.0;  // mean loss over the batch
};

// Gradient of the mean loss (cross-entropy or squared error) over the
// selected rows.
GradientResult gradient(const ParamVector& params, const MlpSpec& spec, const Dataset& data,
                        std::span<const std::size_t> rows);

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::kSgd;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    ParamVector m;
    ParamVector v;
    std::uint64_t t = 0;

    explicit AdamState(const LayoutPtr& layout) : m(layout), v(layout) {}
};

// SGD: p - lr*g. Adam: bias-corrected moment update; `state` is required
// and its step counter advances.
ParamVector optimizer_step(const ParamVector& params, const ParamVector& grad,
                           const OptimizerConfig& cfg, AdamState* state);

struct LocalTrainResult {
    ParamVector new_params;
    ParamVector delta;  // new_params - start, exact
    std::size_t num_samples = 0;
    std::vector<double> loss_trace;  // mean training loss per epoch
};

// epochs x ceil(n/batch) optimizer steps over seeded-shuffled minibatches;
// deterministic in (start, seed). Adam state is fresh per call.
LocalTrainResult local_train(const ParamVector& start, const MlpSpec& spec, const Dataset& data,
                             std::span<const std::size_t> shard, std::size_t epochs,
                             std::size_t batch_size, const OptimizerConfig& cfg,
                             std::uint64_t seed);

struct EvalResult {
    std::optional<ConfusionMatrix> confusion;  // classification
    std::vector<double> predictions;           // regression
    double mean_loss = 0.0;
};

// Argmax prediction per row (ties toward the lowest class index) tallied
// into a confusion matrix, or the prediction list for regression.
EvalResult evaluate(const ParamVector& params, const MlpSpec& spec, const Dataset& data);

}  // namespace fedsim
