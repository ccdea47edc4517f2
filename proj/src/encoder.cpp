#include "mxmclr/encoder.hpp"

#include <cmath>

#include "mxmclr/errors.hpp"

namespace mxmclr::train {

namespace {
constexpr double kNormEps = 1e-12;
}

EncoderNet init_encoder(const EncoderConfig& cfg, Rng& rng) {
    if (cfg.input_dim == 0 || cfg.embed_dim == 0)
        throw ConfigError("encoder needs input_dim and embed_dim >= 1");
    EncoderNet net;
    if (cfg.hidden == 0) {
        net.w1 = Tensor::randn(cfg.input_dim, cfg.embed_dim, rng,
                               1.0 / std::sqrt(double(cfg.input_dim)));
        net.b1 = Tensor(1, cfg.embed_dim);
    } else {
        net.w1 = Tensor::randn(cfg.input_dim, cfg.hidden, rng,
                               1.0 / std::sqrt(double(cfg.input_dim)));
        net.b1 = Tensor(1, cfg.hidden);
        net.w2 = Tensor::randn(cfg.hidden, cfg.embed_dim, rng,
                               1.0 / std::sqrt(double(cfg.hidden)));
        net.b2 = Tensor(1, cfg.embed_dim);
    }
    return net;
}

namespace {

template <typename Params, typename TensorPtr>
std::vector<std::pair<std::string, TensorPtr>> enumerate(Params& params) {
    std::vector<std::pair<std::string, TensorPtr>> out;
    auto push = [&](const std::string& prefix, auto& net) {
        out.emplace_back(prefix + ".w1", &net.w1);
        out.emplace_back(prefix + ".b1", &net.b1);
        if (net.has_hidden()) {
            out.emplace_back(prefix + ".w2", &net.w2);
            out.emplace_back(prefix + ".b2", &net.b2);
        }
    };
    push("image", params.image);
    push("text", params.text);
    return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> named_tensors(DualEncoderParams& params) {
    return enumerate<DualEncoderParams, Tensor*>(params);
}

std::vector<std::pair<std::string, const Tensor*>> named_tensors(const DualEncoderParams& params) {
    return enumerate<const DualEncoderParams, const Tensor*>(params);
}

EncoderNodes make_encoder_nodes(ad::Tape& tape, const EncoderNet& net) {
    EncoderNodes nodes;
    nodes.w1 = tape.leaf(net.w1);
    nodes.b1 = tape.leaf(net.b1);
    if (net.has_hidden()) {
        nodes.w2 = tape.leaf(net.w2);
        nodes.b2 = tape.leaf(net.b2);
    }
    return nodes;
}

ad::Node* encode(ad::Tape& tape, const EncoderNodes& nodes, ad::Node* raw) {
    if (raw->value.cols() != nodes.w1->value.rows())
        throw ContractError("encode: input dimension does not match encoder");
    ad::Node* h = tape.add_rowvec(tape.matmul(raw, nodes.w1), nodes.b1);
    if (nodes.w2 != nullptr) h = tape.add_rowvec(tape.matmul(tape.tanh(h), nodes.w2), nodes.b2);
    return tape.row_l2_normalize(h, kNormEps);
}

Tensor encode_value(const EncoderNet& net, const Tensor& raw) {
    if (raw.cols() != net.w1.rows())
        throw ContractError("encode: input dimension does not match encoder");
    Tensor h = kernels::add_rowvec(kernels::matmul(raw, net.w1), net.b1);
    if (net.has_hidden())
        h = kernels::add_rowvec(kernels::matmul(kernels::tanh_elem(h), net.w2), net.b2);
    return kernels::row_l2_normalize(h, kNormEps);
}

}  // namespace mxmclr::train
