#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "sesr/layers.hpp"

namespace sesr {

// Layer descriptors. NetworkSpec holds the structure only; parameter arrays
// live in a parallel WeightStore (one float vector per layer, possibly empty).

struct ConvLayer {
    ConvSpec spec;
};
struct ConvTransposeLayer {
    ConvSpec spec;
};
// Trainable expanded block: k x k conv to `expansion` channels followed by a
// 1x1 projection, no activation in between; optional identity shortcut.
// Weights: A (expansion*c_in*k*k) then B (c_out*expansion), concatenated.
struct LinearBlockLayer {
    ConvSpec spec;       // the collapsed-form geometry (k, c_in, c_out, same padding)
    int expansion = 0;   // intermediate channel count
    bool short_residual = false;
};
enum class ActKind { Relu, Prelu };
struct ActivationLayer {
    ActKind kind = ActKind::Relu;  // prelu holds one trainable slope in the store
};
struct DepthToSpaceLayer {
    int block = 2;
};
// Saves the running tensor into a named slot.
struct ResidualBeginLayer {
    std::string label;
};
// Adds the named slot (channel-tiled `tile` times) to the running tensor.
struct ResidualEndLayer {
    std::string label;
    int tile = 1;
};
struct AvgPoolLayer {};
struct FlattenLayer {};
struct DenseLayer {
    DenseSpec spec;
};

using Layer = std::variant<ConvLayer, ConvTransposeLayer, LinearBlockLayer, ActivationLayer,
                           DepthToSpaceLayer, ResidualBeginLayer, ResidualEndLayer, AvgPoolLayer,
                           FlattenLayer, DenseLayer>;

struct NetworkSpec {
    std::string name;
    int scale = 1;
    std::vector<Layer> layers;
};

using WeightStore = std::vector<std::vector<float>>;

// Parameter array length layer i must have (0 for parameter-free layers).
std::size_t layer_param_count(const Layer& layer);

// Throws StructuralError when the store does not match the spec.
void check_weights(const NetworkSpec& net, const WeightStore& store);

// Glorot-uniform initialization of every parametric layer (prelu slopes 0.25).
WeightStore init_weights(const NetworkSpec& net, std::uint64_t seed);

// Shapes a forward pass produces, layer by layer; validates structure without
// touching data. Returns the output (c,h,w) for input (c,h,w).
struct ShapeCHW {
    int c = 0, h = 0, w = 0;
};
ShapeCHW infer_output_shape(const NetworkSpec& net, ShapeCHW in);

Tensor4 forward(const NetworkSpec& net, const WeightStore& store, const Tensor4& x);

// Forward pass that keeps every layer input for the reverse pass.
struct ForwardTrace {
    std::vector<Tensor4> layer_inputs;   // input tensor of each layer
    std::map<std::string, Tensor4> slots;
    Tensor4 output;
};
ForwardTrace forward_traced(const NetworkSpec& net, const WeightStore& store, const Tensor4& x);

struct BackwardResult {
    Tensor4 grad_input;
    WeightStore grad_store;  // same shape as the weight store
};
BackwardResult backward(const NetworkSpec& net, const WeightStore& store,
                        const ForwardTrace& trace, const Tensor4& grad_output);

}  // namespace sesr
