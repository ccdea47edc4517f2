#pragma once

#include <string>
#include <vector>

#include "mxmclr/autodiff.hpp"
#include "mxmclr/rng.hpp"
#include "mxmclr/tensor.hpp"

namespace mxmclr::train {

/// Toy per-modality encoder: affine(+tanh+affine) followed by row L2
/// normalization. hidden = 0 gives a single linear layer.
struct EncoderNet {
    Tensor w1, b1;
    Tensor w2, b2;  // empty for single-layer nets

    bool has_hidden() const { return w2.size() > 0; }
    std::size_t input_dim() const { return w1.rows(); }
    std::size_t embed_dim() const { return has_hidden() ? w2.cols() : w1.cols(); }
};

struct DualEncoderParams {
    EncoderNet image;
    EncoderNet text;
};

struct EncoderConfig {
    std::size_t input_dim = 0;
    std::size_t hidden = 64;
    std::size_t embed_dim = 32;
};

/// Gaussian init scaled by 1/sqrt(fan_in); biases zero.
EncoderNet init_encoder(const EncoderConfig& cfg, Rng& rng);

/// Stable (name, tensor) enumeration used by the optimizer, the EMA
/// teacher and checkpoints.
std::vector<std::pair<std::string, Tensor*>> named_tensors(DualEncoderParams& params);
std::vector<std::pair<std::string, const Tensor*>> named_tensors(const DualEncoderParams& params);

/// Encoder parameters registered as tape leaves.
struct EncoderNodes {
    ad::Node* w1 = nullptr;
    ad::Node* b1 = nullptr;
    ad::Node* w2 = nullptr;
    ad::Node* b2 = nullptr;
};

EncoderNodes make_encoder_nodes(ad::Tape& tape, const EncoderNet& net);

/// Differentiable forward pass; output rows are unit length.
ad::Node* encode(ad::Tape& tape, const EncoderNodes& nodes, ad::Node* raw);

/// Gradient-free forward pass through the same kernels (bit-identical to
/// the tape path).
Tensor encode_value(const EncoderNet& net, const Tensor& raw);

}  // namespace mxmclr::train
