#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "mxmclr/tensor.hpp"

namespace mxmclr::ad {

class Tape;

/// One value in the computation graph. `grad` accumulates across backward
/// calls until Tape::zero_grad; creation order is topological by
/// construction (parents always precede children).
struct Node {
    Tensor value;
    Tensor grad;
    std::vector<Node*> parents;
    std::size_t index = 0;

    // Receives this node's adjoint for the current backward pass and the
    // scratch adjoint buffers of its parents, in parent order.
    std::function<void(const Node&, const Tensor&, const std::vector<Tensor*>&)> pull;
};

/// Reverse-mode tape over dense 2-D tensors. Single-threaded; nodes are
/// owned by the tape and valid until it is destroyed.
class Tape {
public:
    Node* leaf(Tensor value);

    Node* add(Node* a, Node* b);
    Node* scale(Node* a, double s);
    Node* matmul(Node* a, Node* b);
    Node* transpose(Node* a);
    /// Broadcasts a 1 x cols bias row over every row of `a`.
    Node* add_rowvec(Node* a, Node* row);
    Node* tanh(Node* a);
    /// Each row divided by max(||row||_2, eps). At the eps branch the
    /// divisor is treated as a constant.
    Node* row_l2_normalize(Node* a, double eps);
    /// Numerically stable (max-subtracted) row-wise log-softmax.
    Node* log_softmax_rows(Node* a);
    /// Entries where mask is true are replaced by `fill` and receive zero
    /// gradient.
    Node* masked_fill(Node* a, BoolMatrix mask, double fill);
    /// Sum of entries where mask is true, as a 1x1 node.
    Node* sum_where(Node* a, BoolMatrix mask);
    /// Sum of all entries, as a 1x1 node.
    Node* sum_all(Node* a);
    /// <a, w> as a 1x1 node; w is a constant weight matrix.
    Node* weighted_sum(Node* a, Tensor w);
    /// Row-wise log-sum-exp, shape rows x 1.
    Node* logsumexp_rows(Node* a);
    /// out(r, c) = col(r, 0) - a(r, c).
    Node* colvec_minus(Node* col, Node* a);
    Node* softplus(Node* a);
    /// Mean over consecutive groups of `fold` rows; (g*f) x d -> g x d.
    Node* fold_rows_mean(Node* a, std::size_t fold);
    /// out row i = a row idx[i]; duplicate indices accumulate gradient.
    Node* gather_rows(Node* a, std::vector<std::size_t> idx);

    /// Reverse sweep from a scalar root. Computes this pass's adjoints in
    /// scratch buffers and then adds them into each node's grad, so two
    /// calls without zero_grad yield exactly doubled gradients.
    void backward(Node* root);
    void zero_grad();

    std::size_t size() const { return nodes_.size(); }

private:
    Node* emplace(Tensor value, std::vector<Node*> parents,
                  std::function<void(const Node&, const Tensor&, const std::vector<Tensor*>&)> pull);

    std::deque<Node> nodes_;
};

}  // namespace mxmclr::ad
