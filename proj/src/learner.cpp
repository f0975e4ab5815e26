#include "fedsim/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fedsim/rng.hpp"

namespace fedsim {
namespace {

std::vector<std::size_t> layer_dims(const MlpSpec& spec) {
    std::vector<std::size_t> dims;
    dims.reserve(spec.hidden.size() + 2);
    dims.push_back(spec.input_dim);
    for (std::size_t h : spec.hidden) dims.push_back(h);
    dims.push_back(spec.output_dim);
    return dims;
}

void check_spec(const MlpSpec& spec) {
    if (spec.input_dim == 0 || spec.output_dim == 0)
        throw DimensionError("model spec needs nonzero input and output dims");
    for (std::size_t h : spec.hidden)
        if (h == 0) throw DimensionError("model spec has a zero-width hidden layer");
    if (spec.personal_head_layers > spec.layer_count())
        throw DimensionError("personal head larger than the network");
}

double activate(Activation a, double z) {
    return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative with respect to z, reusing the cached activation for tanh.
double activate_grad(Activation a, double z, double act) {
    return a == Activation::kRelu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - act * act;
}

void softmax_inplace(std::vector<double>& v) {
    double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

struct Cache {
    // act[0] is the input row; act[i+1] the output of layer i (post
    // activation, probabilities for the classifier output).
    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> z;
};

void forward_cached(const ParamVector& params, const MlpSpec& spec, std::span<const double> x,
                    Cache& cache) {
    if (x.size() != spec.input_dim) throw DimensionError("input row width mismatch");
    const auto& layout = *params.layout();
    const auto dims = layer_dims(spec);
    const std::size_t layers = spec.layer_count();

    cache.act.assign(layers + 1, {});
    cache.z.assign(layers, {});
    cache.act[0].assign(x.begin(), x.end());

    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = dims[l], out = dims[l + 1];
        const std::size_t w_off = layout.offset(2 * l);
        const std::size_t b_off = layout.offset(2 * l + 1);
        auto& z = cache.z[l];
        z.assign(out, 0.0);
        const auto& a_prev = cache.act[l];
        for (std::size_t r = 0; r < out; ++r) {
            double s = params[b_off + r];
            const std::size_t row = w_off + r * in;
            for (std::size_t c = 0; c < in; ++c) s += params[row + c] * a_prev[c];
            z[r] = s;
        }
        auto& a = cache.act[l + 1];
        a = z;
        if (l + 1 < layers) {
            for (std::size_t r = 0; r < out; ++r) a[r] = activate(spec.activation, z[r]);
        } else if (spec.task == Task::kClassification) {
            softmax_inplace(a);
        }
    }
}

// Backpropagates `dz` (gradient at the output pre-activation) into `grad`.
void accumulate_backward(const ParamVector& params, const MlpSpec& spec, const Cache& cache,
                         std::vector<double> dz, ParamVector& grad) {
    const auto& layout = *params.layout();
    const auto dims = layer_dims(spec);
    for (std::size_t l = spec.layer_count(); l-- > 0;) {
        const std::size_t in = dims[l], out = dims[l + 1];
        const std::size_t w_off = layout.offset(2 * l);
        const std::size_t b_off = layout.offset(2 * l + 1);
        const auto& a_prev = cache.act[l];
        for (std::size_t r = 0; r < out; ++r) {
            grad[b_off + r] += dz[r];
            const std::size_t row = w_off + r * in;
            for (std::size_t c = 0; c < in; ++c) grad[row + c] += dz[r] * a_prev[c];
        }
        if (l == 0) break;
        std::vector<double> dprev(in, 0.0);
        for (std::size_t c = 0; c < in; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < out; ++r) s += params[w_off + r * in + c] * dz[r];
            dprev[c] = s * activate_grad(spec.activation, cache.z[l - 1][c], a_prev[c]);
        }
        dz = std::move(dprev);
    }
}

double sample_loss_and_dz(const MlpSpec& spec, const Dataset& data, std::size_t row,
                          const std::vector<double>& out, std::vector<double>& dz) {
    dz.assign(out.size(), 0.0);
    if (spec.task == Task::kClassification) {
        const std::size_t label = data.labels[row];
        if (label >= out.size()) throw DimensionError("label outside the model's class range");
        for (std::size_t k = 0; k < out.size(); ++k) dz[k] = out[k];
        dz[label] -= 1.0;
        return -std::log(std::max(out[label], 1e-300));
    }
    // Squared error; multi-output sums over coordinates.
    double loss = 0.0;
    const double y = data.targets[row];
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double diff = out[k] - y;
        dz[k] = 2.0 * diff;
        loss += diff * diff;
    }
    return loss;
}

}  // namespace

LayoutPtr build_layout(const MlpSpec& spec) {
    check_spec(spec);
    const auto dims = layer_dims(spec);
    const std::size_t layers = spec.layer_count();
    const std::size_t first_personal = layers - spec.personal_head_layers;
    std::vector<LayoutSegment> segs;
    segs.reserve(2 * layers);
    char name[32];
    for (std::size_t l = 0; l < layers; ++l) {
        const Partition part = l >= first_personal ? Partition::kPersonal : Partition::kShared;
        std::snprintf(name, sizeof name, "w%zu", l);
        segs.push_back({name, dims[l] * dims[l + 1], part});
        std::snprintf(name, sizeof name, "b%zu", l);
        segs.push_back({name, dims[l + 1], part});
    }
    return std::make_shared<const ModelLayout>(std::move(segs));
}

ParamVector init_model(const MlpSpec& spec, std::uint64_t seed) {
    auto layout = build_layout(spec);
    ParamVector p(layout);
    const auto dims = layer_dims(spec);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Rng rng(derive_seed(seed, {0x1217u, static_cast<std::uint64_t>(l)}));
        const std::size_t w_off = layout->offset(2 * l);
        for (std::size_t i = 0; i < fan_in * fan_out; ++i)
            p[w_off + i] = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return p;
}

std::vector<double> forward(const ParamVector& params, const MlpSpec& spec,
                            std::span<const double> x) {
    check_spec(spec);
    Cache cache;
    forward_cached(params, spec, x, cache);
    return cache.act.back();
}

GradientResult gradient(const ParamVector& params, const MlpSpec& spec, const Dataset& data,
                        std::span<const std::size_t> rows) {
    check_spec(spec);
    if (rows.empty()) throw DimensionError("gradient over an empty batch");
    if (data.num_features != spec.input_dim) throw DimensionError("dataset width mismatch");

    GradientResult result{ParamVector(params.layout()), 0.0};
    Cache cache;
    std::vector<double> dz;
    for (std::size_t row : rows) {
        forward_cached(params, spec, {data.row(row), spec.input_dim}, cache);
        result.loss += sample_loss_and_dz(spec, data, row, cache.act.back(), dz);
        accumulate_backward(params, spec, cache, dz, result.grad);
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : result.grad.values()) g *= inv;
    result.loss *= inv;
    return result;
}

ParamVector optimizer_step(const ParamVector& params, const ParamVector& grad,
                           const OptimizerConfig& cfg, AdamState* state) {
    require_same_layout(params, grad);
    if (cfg.kind == OptimizerKind::kSgd) return axpy(-cfg.learning_rate, grad, params);

    if (state == nullptr) throw ProtocolError("adam step without optimizer state");
    require_same_layout(params, state->m);
    state->t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state->t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state->t));
    ParamVector next(params.layout());
    for (std::size_t i = 0; i < params.dim(); ++i) {
        const double g = grad[i];
        state->m[i] = cfg.beta1 * state->m[i] + (1.0 - cfg.beta1) * g;
        state->v[i] = cfg.beta2 * state->v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state->m[i] / bc1;
        const double vhat = state->v[i] / bc2;
        next[i] = params[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
    require_finite(next, "optimizer step");
    return next;
}

LocalTrainResult local_train(const ParamVector& start, const MlpSpec& spec, const Dataset& data,
                             std::span<const std::size_t> shard, std::size_t epochs,
                             std::size_t batch_size, const OptimizerConfig& cfg,
                             std::uint64_t seed) {
    check_spec(spec);
    if (batch_size == 0) throw ConfigError("batch_size", "must be positive");
    if (shard.empty()) throw DimensionError("local training on an empty shard");

    LocalTrainResult result;
    result.num_samples = shard.size();
    result.new_params = start;
    AdamState state(start.layout());

    std::vector<std::size_t> order(shard.begin(), shard.end());
    for (std::size_t e = 0; e < epochs; ++e) {
        Rng rng(derive_seed(seed, {0xE90Cu, static_cast<std::uint64_t>(e)}));
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < order.size(); b += batch_size) {
            const std::size_t n = std::min(batch_size, order.size() - b);
            auto res = gradient(result.new_params, spec, data,
                                std::span<const std::size_t>(order.data() + b, n));
            epoch_loss += res.loss * static_cast<double>(n);
            result.new_params = optimizer_step(result.new_params, res.grad, cfg, &state);
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    result.delta = subtract(result.new_params, start);
    return result;
}

EvalResult evaluate(const ParamVector& params, const MlpSpec& spec, const Dataset& data) {
    check_spec(spec);
    if (data.num_rows > 0 && data.num_features != spec.input_dim)
        throw DimensionError("dataset width mismatch");

    EvalResult result;
    if (spec.task == Task::kClassification) result.confusion.emplace(spec.output_dim);

    Cache cache;
    std::vector<double> dz;
    double loss = 0.0;
    for (std::size_t i = 0; i < data.num_rows; ++i) {
        forward_cached(params, spec, {data.row(i), spec.input_dim}, cache);
        const auto& out = cache.act.back();
        if (spec.task == Task::kClassification) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < out.size(); ++k)
                if (out[k] > out[best]) best = k;
            result.confusion->add(data.labels[i], best);
            loss += -std::log(std::max(out[data.labels[i]], 1e-300));
        } else {
            result.predictions.push_back(out[0]);
            const double diff = out[0] - data.targets[i];
            loss += diff * diff;
        }
    }
    result.mean_loss = data.num_rows > 0 ? loss / static_cast<double>(data.num_rows) : 0.0;
    return result;
}

}  // namespace fedsim
