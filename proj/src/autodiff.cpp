#include "mxmclr/autodiff.hpp"

#include <cmath>
#include <utility>

namespace mxmclr::ad {

Node* Tape::emplace(Tensor value, std::vector<Node*> parents,
                    std::function<void(const Node&, const Tensor&, const std::vector<Tensor*>&)> pull) {
    Node node;
    node.grad = Tensor(value.rows(), value.cols());
    node.value = std::move(value);
    node.parents = std::move(parents);
    node.pull = std::move(pull);
    node.index = nodes_.size();
    nodes_.push_back(std::move(node));
    return &nodes_.back();
}

Node* Tape::leaf(Tensor value) { return emplace(std::move(value), {}, nullptr); }

Node* Tape::add(Node* a, Node* b) {
    if (!a->value.same_shape(b->value)) throw DimensionError("add: shape mismatch");
    return emplace(kernels::add(a->value, b->value), {a, b},
                   [](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (Tensor* p : pa)
                           for (std::size_t i = 0; i < adj.size(); ++i) p->data()[i] += adj.data()[i];
                   });
}

Node* Tape::scale(Node* a, double s) {
    return emplace(kernels::scale(a->value, s), {a},
                   [s](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < adj.size(); ++i)
                           pa[0]->data()[i] += s * adj.data()[i];
                   });
}

Node* Tape::matmul(Node* a, Node* b) {
    return emplace(kernels::matmul(a->value, b->value), {a, b},
                   [](const Node& self, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const Tensor& av = self.parents[0]->value;
                       const Tensor& bv = self.parents[1]->value;
                       // dA += G * B^T
                       for (std::size_t i = 0; i < av.rows(); ++i)
                           for (std::size_t k = 0; k < av.cols(); ++k) {
                               double acc = 0.0;
                               for (std::size_t j = 0; j < bv.cols(); ++j) acc += adj(i, j) * bv(k, j);
                               (*pa[0])(i, k) += acc;
                           }
                       // dB += A^T * G
                       for (std::size_t k = 0; k < bv.rows(); ++k)
                           for (std::size_t j = 0; j < bv.cols(); ++j) {
                               double acc = 0.0;
                               for (std::size_t i = 0; i < av.rows(); ++i) acc += av(i, k) * adj(i, j);
                               (*pa[1])(k, j) += acc;
                           }
                   });
}

Node* Tape::transpose(Node* a) {
    return emplace(kernels::transpose(a->value), {a},
                   [](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < adj.rows(); ++i)
                           for (std::size_t j = 0; j < adj.cols(); ++j) (*pa[0])(j, i) += adj(i, j);
                   });
}

Node* Tape::add_rowvec(Node* a, Node* row) {
    return emplace(kernels::add_rowvec(a->value, row->value), {a, row},
                   [](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < adj.size(); ++i) pa[0]->data()[i] += adj.data()[i];
                       for (std::size_t i = 0; i < adj.rows(); ++i)
                           for (std::size_t j = 0; j < adj.cols(); ++j) (*pa[1])(0, j) += adj(i, j);
                   });
}

Node* Tape::tanh(Node* a) {
    return emplace(kernels::tanh_elem(a->value), {a},
                   [](const Node& self, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < adj.size(); ++i) {
                           const double t = self.value.data()[i];
                           pa[0]->data()[i] += adj.data()[i] * (1.0 - t * t);
                       }
                   });
}

Node* Tape::row_l2_normalize(Node* a, double eps) {
    return emplace(kernels::row_l2_normalize(a->value, eps), {a},
                   [eps](const Node& self, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const Tensor& x = self.parents[0]->value;
                       const Tensor& y = self.value;
                       for (std::size_t i = 0; i < x.rows(); ++i) {
                           double sq = 0.0;
                           for (std::size_t j = 0; j < x.cols(); ++j) sq += x(i, j) * x(i, j);
                           const double norm = std::sqrt(sq);
                           if (norm > eps) {
                               double gy = 0.0;
                               for (std::size_t j = 0; j < x.cols(); ++j) gy += adj(i, j) * y(i, j);
                               for (std::size_t j = 0; j < x.cols(); ++j)
                                   (*pa[0])(i, j) += (adj(i, j) - gy * y(i, j)) / norm;
                           } else {
                               // max(norm, eps) pinned at eps: constant divisor
                               for (std::size_t j = 0; j < x.cols(); ++j)
                                   (*pa[0])(i, j) += adj(i, j) / eps;
                           }
                       }
                   });
}

Node* Tape::log_softmax_rows(Node* a) {
    return emplace(kernels::log_softmax_rows(a->value), {a},
                   [](const Node& self, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const Tensor& y = self.value;
                       for (std::size_t i = 0; i < y.rows(); ++i) {
                           double gsum = 0.0;
                           for (std::size_t j = 0; j < y.cols(); ++j) gsum += adj(i, j);
                           for (std::size_t j = 0; j < y.cols(); ++j)
                               (*pa[0])(i, j) += adj(i, j) - std::exp(y(i, j)) * gsum;
                       }
                   });
}

Node* Tape::masked_fill(Node* a, BoolMatrix mask, double fill) {
    if (!mask.same_shape(a->value)) throw DimensionError("masked_fill: mask shape mismatch");
    return emplace(kernels::masked_fill(a->value, mask, fill), {a},
                   [m = std::move(mask)](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < adj.rows(); ++i)
                           for (std::size_t j = 0; j < adj.cols(); ++j)
                               if (!m(i, j)) (*pa[0])(i, j) += adj(i, j);
                   });
}

Node* Tape::sum_where(Node* a, BoolMatrix mask) {
    if (!mask.same_shape(a->value)) throw DimensionError("sum_where: mask shape mismatch");
    Tensor out(1, 1);
    for (std::size_t i = 0; i < a->value.rows(); ++i)
        for (std::size_t j = 0; j < a->value.cols(); ++j)
            if (mask(i, j)) out(0, 0) += a->value(i, j);
    return emplace(std::move(out), {a},
                   [m = std::move(mask)](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const double g = adj(0, 0);
                       for (std::size_t i = 0; i < pa[0]->rows(); ++i)
                           for (std::size_t j = 0; j < pa[0]->cols(); ++j)
                               if (m(i, j)) (*pa[0])(i, j) += g;
                   });
}

Node* Tape::sum_all(Node* a) {
    return sum_where(a, BoolMatrix(a->value.rows(), a->value.cols(), true));
}

Node* Tape::weighted_sum(Node* a, Tensor w) {
    if (!w.same_shape(a->value)) throw DimensionError("weighted_sum: weight shape mismatch");
    Tensor out(1, 1);
    for (std::size_t i = 0; i < w.size(); ++i) out(0, 0) += a->value.data()[i] * w.data()[i];
    return emplace(std::move(out), {a},
                   [w = std::move(w)](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const double g = adj(0, 0);
                       for (std::size_t i = 0; i < w.size(); ++i)
                           pa[0]->data()[i] += g * w.data()[i];
                   });
}

Node* Tape::logsumexp_rows(Node* a) {
    return emplace(kernels::logsumexp_rows(a->value), {a},
                   [](const Node& self, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const Tensor& x = self.parents[0]->value;
                       const Tensor& y = self.value;
                       for (std::size_t i = 0; i < x.rows(); ++i)
                           for (std::size_t j = 0; j < x.cols(); ++j)
                               (*pa[0])(i, j) += adj(i, 0) * std::exp(x(i, j) - y(i, 0));
                   });
}

Node* Tape::colvec_minus(Node* col, Node* a) {
    if (col->value.cols() != 1 || col->value.rows() != a->value.rows())
        throw DimensionError("colvec_minus: col must be rows x 1");
    Tensor out(a->value.rows(), a->value.cols());
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = col->value(i, 0) - a->value(i, j);
    return emplace(std::move(out), {col, a},
                   [](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < adj.rows(); ++i) {
                           double rowsum = 0.0;
                           for (std::size_t j = 0; j < adj.cols(); ++j) {
                               rowsum += adj(i, j);
                               (*pa[1])(i, j) -= adj(i, j);
                           }
                           (*pa[0])(i, 0) += rowsum;
                       }
                   });
}

Node* Tape::softplus(Node* a) {
    return emplace(kernels::softplus(a->value), {a},
                   [](const Node& self, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       const Tensor& x = self.parents[0]->value;
                       for (std::size_t i = 0; i < x.size(); ++i) {
                           const double v = x.data()[i];
                           const double sig = v > 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                                      : std::exp(v) / (1.0 + std::exp(v));
                           pa[0]->data()[i] += adj.data()[i] * sig;
                       }
                   });
}

Node* Tape::fold_rows_mean(Node* a, std::size_t fold) {
    return emplace(kernels::fold_rows_mean(a->value, fold), {a},
                   [fold](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t g = 0; g < adj.rows(); ++g)
                           for (std::size_t f = 0; f < fold; ++f)
                               for (std::size_t j = 0; j < adj.cols(); ++j)
                                   (*pa[0])(g * fold + f, j) += adj(g, j) / double(fold);
                   });
}

Node* Tape::gather_rows(Node* a, std::vector<std::size_t> idx) {
    Tensor out(idx.size(), a->value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= a->value.rows()) throw DimensionError("gather_rows: index out of range");
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = a->value(idx[i], j);
    }
    return emplace(std::move(out), {a},
                   [idx = std::move(idx)](const Node&, const Tensor& adj, const std::vector<Tensor*>& pa) {
                       for (std::size_t i = 0; i < idx.size(); ++i)
                           for (std::size_t j = 0; j < adj.cols(); ++j)
                               (*pa[0])(idx[i], j) += adj(i, j);
                   });
}

void Tape::backward(Node* root) {
    if (root->value.rows() != 1 || root->value.cols() != 1)
        throw ContractError("backward root must be a 1x1 scalar node");

    // Per-pass adjoints live in scratch so repeated calls accumulate whole
    // gradients into Node::grad.
    std::vector<Tensor> adjoints(root->index + 1);
    for (std::size_t i = 0; i <= root->index; ++i)
        adjoints[i] = Tensor(nodes_[i].value.rows(), nodes_[i].value.cols());
    adjoints[root->index](0, 0) = 1.0;

    std::vector<Tensor*> parent_adj;
    for (std::size_t i = root->index + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (!node.pull) continue;
        parent_adj.clear();
        for (Node* p : node.parents) parent_adj.push_back(&adjoints[p->index]);
        node.pull(node, adjoints[i], parent_adj);
    }
    for (std::size_t i = 0; i <= root->index; ++i) {
        Tensor& g = nodes_[i].grad;
        for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += adjoints[i].data()[k];
    }
}

void Tape::zero_grad() {
    for (Node& n : nodes_) n.grad.fill(0.0);
}

}  // namespace mxmclr::ad
