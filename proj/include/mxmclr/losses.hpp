#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mxmclr/autodiff.hpp"
#include "mxmclr/grouping.hpp"

namespace mxmclr::loss {

struct SimilarityConfig {
    double temperature = 0.03;
    void validate() const;
};

/// Temperature-scaled cosine similarities between two unit-row embedding
/// sets, as a differentiable node.
struct SimilarityMatrix {
    ad::Node* node = nullptr;
    SimilarityConfig config;

    std::size_t rows() const { return node->value.rows(); }
    std::size_t cols() const { return node->value.cols(); }
};

struct MfhConfig {
    double alpha = 0.6;
    group::SelectionConfig selection;
    void validate() const;
};

/// Scalar loss node plus named sub-terms (which recombine to the total).
struct LossValue {
    ad::Node* node = nullptr;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> terms;

    double term(const std::string& name) const;
};

/// Pre-drawn masked-random selections for both directions of the hard
/// loss; sizes are the per-direction repetition counts.
struct HardSelections {
    std::vector<group::SelectionMask> i2t;
    std::vector<group::SelectionMask> t2i;
};

/// Draws p_i2t + p_t2i independent per-row selections from `rng`.
HardSelections make_hard_selections(const group::LabelMatrix& labels, std::size_t p_i2t,
                                    std::size_t p_t2i, Rng& rng);

/// entry(r, c) = <a_r, b_c> / temperature.
SimilarityMatrix similarity_matrix(ad::Tape& tape, ad::Node* feats_a, ad::Node* feats_b,
                                   const SimilarityConfig& cfg);

/// Plain InfoNCE on a square matrix: only the main diagonal is positive,
/// everything else (including same-instance entries) lands in the
/// denominator.
LossValue infonce(ad::Tape& tape, const SimilarityMatrix& sim, const group::LabelMatrix& labels);

/// InfoNCE with same-instance off-diagonal entries excluded from every
/// denominator.
LossValue infonce_mask(ad::Tape& tape, const SimilarityMatrix& sim,
                       const group::LabelMatrix& labels);

/// Group-wise CLIP adaptation: positives pinned to each block's diagonal
/// (fold r paired with fold r mod n); `masked` removes the remaining block
/// positives from the denominators.
LossValue clip_group_info(ad::Tape& tape, const SimilarityMatrix& sim,
                          const group::LabelMatrix& labels, bool masked);

/// Every block positive contributes a term whose denominator holds only
/// the term itself plus the true negatives of its row (column for the
/// reverse direction); normalized by the total positive count.
LossValue all_positive_loss(ad::Tape& tape, const SimilarityMatrix& sim,
                            const group::LabelMatrix& labels);

/// Masked-random hard relationship loss over the given selections.
LossValue hard_loss(ad::Tape& tape, const SimilarityMatrix& sim,
                    const group::LabelMatrix& labels, const HardSelections& selections);

/// Row-wise cross entropy of the student similarity matrix against the
/// softmax of the (detached) teacher matrix, both directions averaged.
LossValue soft_loss(ad::Tape& tape, const SimilarityMatrix& sim_b, const SimilarityMatrix& sim_m);

/// alpha * hard + (1 - alpha) * soft; endpoint alphas skip the unused term
/// entirely so they match the pure losses bit-exactly.
LossValue mfh_loss(ad::Tape& tape, const SimilarityMatrix& sim_b, const SimilarityMatrix& sim_m,
                   const group::LabelMatrix& labels, const MfhConfig& cfg, Rng& rng);

/// alpha * infonce + (1 - alpha) * soft.
LossValue infonce_soft(ad::Tape& tape, const SimilarityMatrix& sim_b,
                       const SimilarityMatrix& sim_m, const group::LabelMatrix& labels,
                       double alpha);

}  // namespace mxmclr::loss
