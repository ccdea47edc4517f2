#include "mxmclr/losses.hpp"

#include <cmath>

#include "mxmclr/errors.hpp"

namespace mxmclr::loss {

namespace {

// -inf surrogate: underflows to exact 0 after exp in 64-bit without NaN.
constexpr double kMaskFill = -1e30;

BoolMatrix diagonal_mask(std::size_t n) {
    BoolMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) d.set(i, i, true);
    return d;
}

BoolMatrix positive_mask(const group::LabelMatrix& labels, bool transposed = false) {
    BoolMatrix p(transposed ? labels.cols() : labels.rows(),
                 transposed ? labels.rows() : labels.cols());
    for (std::size_t r = 0; r < labels.rows(); ++r)
        for (std::size_t c = 0; c < labels.cols(); ++c)
            if (labels.positive(r, c)) p.set(transposed ? c : r, transposed ? r : c, true);
    return p;
}

void require_square_diagonal(const SimilarityMatrix& sim, const group::LabelMatrix& labels,
                             const char* what) {
    if (sim.rows() != sim.cols())
        throw ContractError(std::string(what) + " requires a square similarity matrix");
    if (labels.rows() != sim.rows() || labels.cols() != sim.cols())
        throw ContractError(std::string(what) + ": labels do not match the similarity matrix");
    for (std::size_t i = 0; i < labels.rows(); ++i)
        if (!labels.positive(i, i))
            throw ContractError(std::string(what) + ": main diagonal must be positive");
}

LossValue directional_pair(ad::Tape& tape, ad::Node* i2t, ad::Node* t2i, const char* prefix) {
    LossValue out;
    out.node = tape.scale(tape.add(i2t, t2i), 0.5);
    out.value = out.node->value.scalar();
    out.terms.emplace_back(std::string(prefix) + "_i2t", i2t->value.scalar());
    out.terms.emplace_back(std::string(prefix) + "_t2i", t2i->value.scalar());
    return out;
}

// Mean of -log_softmax over the entries marked in `take`, after optionally
// filling `drop` entries with the -inf surrogate.
ad::Node* masked_pick_mean(ad::Tape& tape, ad::Node* sim, const BoolMatrix* drop,
                           const BoolMatrix& take, std::size_t count) {
    ad::Node* base = drop ? tape.masked_fill(sim, *drop, kMaskFill) : sim;
    ad::Node* ls = tape.log_softmax_rows(base);
    return tape.scale(tape.sum_where(ls, take), -1.0 / static_cast<double>(count));
}

}  // namespace

void SimilarityConfig::validate() const {
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
}

void MfhConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
}

double LossValue::term(const std::string& name) const {
    for (const auto& [k, v] : terms)
        if (k == name) return v;
    throw ContractError("loss has no sub-term named '" + name + "'");
}

SimilarityMatrix similarity_matrix(ad::Tape& tape, ad::Node* feats_a, ad::Node* feats_b,
                                   const SimilarityConfig& cfg) {
    cfg.validate();
    if (feats_a->value.cols() != feats_b->value.cols())
        throw DimensionError("similarity_matrix: embedding dimensions differ");
    ad::Node* sim = tape.scale(tape.matmul(feats_a, tape.transpose(feats_b)),
                               1.0 / cfg.temperature);
    return SimilarityMatrix{sim, cfg};
}

LossValue infonce(ad::Tape& tape, const SimilarityMatrix& sim, const group::LabelMatrix& labels) {
    require_square_diagonal(sim, labels, "infonce");
    const std::size_t n = sim.rows();
    const BoolMatrix diag = diagonal_mask(n);
    ad::Node* i2t = masked_pick_mean(tape, sim.node, nullptr, diag, n);
    ad::Node* t2i = masked_pick_mean(tape, tape.transpose(sim.node), nullptr, diag, n);
    return directional_pair(tape, i2t, t2i, "infonce");
}

LossValue infonce_mask(ad::Tape& tape, const SimilarityMatrix& sim,
                       const group::LabelMatrix& labels) {
    require_square_diagonal(sim, labels, "infonce_mask");
    const std::size_t n = sim.rows();
    BoolMatrix exclude(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (r != c && labels.positive(r, c)) exclude.set(r, c, true);

    ad::Node* filled = tape.masked_fill(sim.node, exclude, kMaskFill);
    const BoolMatrix diag = diagonal_mask(n);
    ad::Node* i2t = masked_pick_mean(tape, filled, nullptr, diag, n);
    ad::Node* t2i = masked_pick_mean(tape, tape.transpose(filled), nullptr, diag, n);
    return directional_pair(tape, i2t, t2i, "infonce_mask");
}

LossValue clip_group_info(ad::Tape& tape, const SimilarityMatrix& sim,
                          const group::LabelMatrix& labels, bool masked) {
    if (labels.rows() != sim.rows() || labels.cols() != sim.cols())
        throw ContractError("clip_group_info: labels do not match the similarity matrix");
    const std::size_t m_eff = labels.rows_per_group();
    const std::size_t n_eff = labels.cols_per_group();

    // Block diagonal: row fold r pairs with column fold r mod n (and
    // symmetrically for the text direction).
    BoolMatrix desig_i2t(labels.rows(), labels.cols());
    BoolMatrix desig_t2i(labels.rows(), labels.cols());
    for (std::size_t r = 0; r < labels.rows(); ++r)
        for (std::size_t c = 0; c < labels.cols(); ++c) {
            if (!labels.positive(r, c)) continue;
            if (labels.fold_of_col(c) == labels.fold_of_row(r) % static_cast<int>(n_eff))
                desig_i2t.set(r, c, true);
            if (labels.fold_of_row(r) == labels.fold_of_col(c) % static_cast<int>(m_eff))
                desig_t2i.set(r, c, true);
        }

    auto direction = [&](const BoolMatrix& desig, bool transposed) {
        BoolMatrix drop(labels.rows(), labels.cols());
        if (masked)
            for (std::size_t r = 0; r < labels.rows(); ++r)
                for (std::size_t c = 0; c < labels.cols(); ++c)
                    if (labels.positive(r, c) && !desig(r, c)) drop.set(r, c, true);

        ad::Node* base = sim.node;
        BoolMatrix take = desig;
        BoolMatrix dropped = drop;
        if (transposed) {
            base = tape.transpose(base);
            BoolMatrix tt(labels.cols(), labels.rows());
            BoolMatrix td(labels.cols(), labels.rows());
            for (std::size_t r = 0; r < labels.rows(); ++r)
                for (std::size_t c = 0; c < labels.cols(); ++c) {
                    if (desig(r, c)) tt.set(c, r, true);
                    if (drop(r, c)) td.set(c, r, true);
                }
            take = tt;
            dropped = td;
        }
        const std::size_t count = transposed ? labels.cols() : labels.rows();
        return masked_pick_mean(tape, base, masked ? &dropped : nullptr, take, count);
    };

    ad::Node* i2t = direction(desig_i2t, false);
    ad::Node* t2i = direction(desig_t2i, true);
    return directional_pair(tape, i2t, t2i, masked ? "clipg_mask" : "clipg");
}

LossValue all_positive_loss(ad::Tape& tape, const SimilarityMatrix& sim,
                            const group::LabelMatrix& labels) {
    if (labels.rows() != sim.rows() || labels.cols() != sim.cols())
        throw ContractError("all_positive_loss: labels do not match the similarity matrix");
    const std::size_t n_pos = labels.positive_count();

    auto direction = [&](bool transposed) {
        ad::Node* base = transposed ? tape.transpose(sim.node) : sim.node;
        const BoolMatrix pos = positive_mask(labels, transposed);
        // Denominator of each positive term: the term itself plus the row's
        // true negatives, so all block positives are dropped first.
        ad::Node* negatives_only = tape.masked_fill(base, pos, kMaskFill);
        ad::Node* lse_neg = tape.logsumexp_rows(negatives_only);
        ad::Node* gap = tape.colvec_minus(lse_neg, base);  // lse_neg - s
        ad::Node* terms = tape.softplus(gap);              // log(1 + exp(lse_neg - s))
        return tape.scale(tape.sum_where(terms, pos), 1.0 / static_cast<double>(n_pos));
    };
    return directional_pair(tape, direction(false), direction(true), "all");
}

HardSelections make_hard_selections(const group::LabelMatrix& labels, std::size_t p_i2t,
                                    std::size_t p_t2i, Rng& rng) {
    HardSelections sel;
    sel.i2t.reserve(p_i2t);
    sel.t2i.reserve(p_t2i);
    for (std::size_t x = 0; x < p_i2t; ++x) {
        sel.i2t.push_back(masked_random_selection(labels, group::Direction::ImageToText, rng));
        sel.i2t.back().set_repetition(x);
    }
    for (std::size_t x = 0; x < p_t2i; ++x) {
        sel.t2i.push_back(masked_random_selection(labels, group::Direction::TextToImage, rng));
        sel.t2i.back().set_repetition(x);
    }
    return sel;
}

namespace {

void check_selection(const group::LabelMatrix& labels, const group::SelectionMask& mask) {
    const bool i2t = mask.direction() == group::Direction::ImageToText;
    if (mask.rows() != (i2t ? labels.rows() : labels.cols()) ||
        mask.cols() != (i2t ? labels.cols() : labels.rows()))
        throw ContractError("hard_loss: selection mask shape does not match labels");
    for (std::size_t q = 0; q < mask.rows(); ++q) {
        std::size_t selected = 0;
        for (std::size_t g = 0; g < mask.cols(); ++g) {
            const bool pos = i2t ? labels.positive(q, g) : labels.positive(g, q);
            const group::SelectionState s = mask.at(q, g);
            if (pos && s == group::SelectionState::Negative)
                throw ContractError("hard_loss: positive entry left unselected and unmasked");
            if (!pos && s != group::SelectionState::Negative)
                throw ContractError("hard_loss: negative entry marked in selection mask");
            if (s == group::SelectionState::Selected) ++selected;
        }
        if (selected != 1)
            throw ContractError("hard_loss: each query row needs exactly one selected positive");
    }
}

}  // namespace

LossValue hard_loss(ad::Tape& tape, const SimilarityMatrix& sim,
                    const group::LabelMatrix& labels, const HardSelections& selections) {
    if (labels.rows() != sim.rows() || labels.cols() != sim.cols())
        throw ContractError("hard_loss: labels do not match the similarity matrix");
    if (selections.i2t.empty() || selections.t2i.empty())
        throw ContractError("hard_loss: need at least one repetition per direction");
    for (const auto& m : selections.i2t) check_selection(labels, m);
    for (const auto& m : selections.t2i) check_selection(labels, m);

    auto direction = [&](const std::vector<group::SelectionMask>& masks, ad::Node* base) {
        ad::Node* acc = nullptr;
        for (const auto& mask : masks) {
            ad::Node* filled = tape.masked_fill(base, mask.masked_out(), kMaskFill);
            ad::Node* ls = tape.log_softmax_rows(filled);
            ad::Node* picked = tape.sum_where(ls, mask.selected());
            acc = acc ? tape.add(acc, picked) : picked;
        }
        const double norm = static_cast<double>(masks.size()) *
                            static_cast<double>(base->value.rows());
        return tape.scale(acc, -1.0 / norm);
    };

    ad::Node* i2t = direction(selections.i2t, sim.node);
    ad::Node* t2i = direction(selections.t2i, tape.transpose(sim.node));
    return directional_pair(tape, i2t, t2i, "hard");
}

LossValue soft_loss(ad::Tape& tape, const SimilarityMatrix& sim_b, const SimilarityMatrix& sim_m) {
    if (!sim_b.node->value.same_shape(sim_m.node->value))
        throw DimensionError("soft_loss: student and teacher matrices differ in shape");

    auto direction = [&](bool transposed) {
        ad::Node* student = transposed ? tape.transpose(sim_b.node) : sim_b.node;
        const Tensor teacher = transposed ? kernels::transpose(sim_m.node->value)
                                          : sim_m.node->value;
        const Tensor target = kernels::softmax_rows(teacher);  // detached pseudo-targets
        ad::Node* ls = tape.log_softmax_rows(student);
        return tape.scale(tape.weighted_sum(ls, target),
                          -1.0 / static_cast<double>(teacher.rows()));
    };
    return directional_pair(tape, direction(false), direction(true), "soft");
}

LossValue mfh_loss(ad::Tape& tape, const SimilarityMatrix& sim_b, const SimilarityMatrix& sim_m,
                   const group::LabelMatrix& labels, const MfhConfig& cfg, Rng& rng) {
    cfg.validate();
    if (cfg.alpha == 0.0) {
        LossValue soft = soft_loss(tape, sim_b, sim_m);
        soft.terms.emplace_back("soft", soft.value);
        soft.terms.emplace_back("hard", 0.0);
        return soft;
    }

    const std::size_t p_i2t = cfg.selection.p.resolve(labels.cols_per_group());
    const std::size_t p_t2i = cfg.selection.p.resolve(labels.rows_per_group());
    HardSelections sel = make_hard_selections(labels, p_i2t, p_t2i, rng);
    LossValue hard = hard_loss(tape, sim_b, labels, sel);
    if (cfg.alpha == 1.0) {
        hard.terms.emplace_back("hard", hard.value);
        hard.terms.emplace_back("soft", 0.0);
        return hard;
    }

    LossValue soft = soft_loss(tape, sim_b, sim_m);
    LossValue out;
    out.node = tape.add(tape.scale(hard.node, cfg.alpha), tape.scale(soft.node, 1.0 - cfg.alpha));
    out.value = out.node->value.scalar();
    out.terms.emplace_back("hard", hard.value);
    out.terms.emplace_back("soft", soft.value);
    for (const auto& t : hard.terms) out.terms.push_back(t);
    for (const auto& t : soft.terms) out.terms.push_back(t);
    return out;
}

LossValue infonce_soft(ad::Tape& tape, const SimilarityMatrix& sim_b,
                       const SimilarityMatrix& sim_m, const group::LabelMatrix& labels,
                       double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
    if (alpha == 1.0) return infonce(tape, sim_b, labels);
    if (alpha == 0.0) return soft_loss(tape, sim_b, sim_m);

    LossValue hard = infonce(tape, sim_b, labels);
    LossValue soft = soft_loss(tape, sim_b, sim_m);
    LossValue out;
    out.node = tape.add(tape.scale(hard.node, alpha), tape.scale(soft.node, 1.0 - alpha));
    out.value = out.node->value.scalar();
    out.terms.emplace_back("infonce", hard.value);
    out.terms.emplace_back("soft", soft.value);
    return out;
}

}  // namespace mxmclr::loss
