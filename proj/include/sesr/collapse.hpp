#pragma once

#include <cstdint>
#include <vector>

#include "sesr/network.hpp"

namespace sesr {

// Geometry of one expanded linear block: a k x k conv widening c_in to
// `expansion` channels, then a 1x1 conv projecting down to c_out. No
// activation sits between the two, so the pair merges into one k x k conv.
struct LinearBlockSpec {
    int kernel = 3;
    int c_in = 1;
    int c_out = 1;
    int expansion = 1;
    bool short_residual = false;

    void validate() const;
};

// Parameter arrays of one expanded block.
struct BlockWeights {
    std::vector<float> expand;   // expansion*c_in*k*k, (out,in,kh,kw) order
    std::vector<float> project;  // c_out*expansion (1x1)
};

// Wraps a plain conv into a randomly initialized expanded block. The shortcut
// is enabled exactly when c_in == c_out.
std::pair<LinearBlockSpec, BlockWeights> expand(const ConvSpec& spec, int expansion,
                                                std::uint64_t init_seed);

// Merges the two convs: C[o,i,u,v] = sum_q project[o,q] * expand[q,i,u,v],
// then folds the shortcut when present. The result, run with "same" padding,
// matches the expanded block on any input.
std::vector<float> collapse_block(const LinearBlockSpec& spec, const BlockWeights& w);

// Adds the identity to the center tap: C[o,o,center,center] += 1.
std::vector<float> fold_residual(const std::vector<float>& weights, int channels, int kernel);

// Replaces every linear block of an expanded network by its collapsed conv;
// all other layers pass through unchanged.
std::pair<NetworkSpec, WeightStore> collapse_network(const NetworkSpec& expanded,
                                                     const WeightStore& store);

struct CollapseReport {
    float max_abs_diff = 0.0f;
    bool pass = false;
    int trials = 0;
};

// Runs both networks on `trials` random inputs in [0,1] of the given spatial
// size and compares outputs elementwise.
CollapseReport verify_collapse(const NetworkSpec& expanded, const WeightStore& expanded_w,
                               const NetworkSpec& collapsed, const WeightStore& collapsed_w,
                               int trials, float tol, int input_h = 32, int input_w = 32,
                               std::uint64_t seed = 1234);

}  // namespace sesr
