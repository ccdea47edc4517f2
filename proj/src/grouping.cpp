#include "mxmclr/grouping.hpp"

#include <algorithm>
#include <string>

#include "mxmclr/errors.hpp"

namespace mxmclr::group {

const char* aggregation_name(AggregationMode mode) {
    switch (mode) {
        case AggregationMode::None: return "none";
        case AggregationMode::AggText: return "agg-text";
        case AggregationMode::AggImage: return "agg-image";
        case AggregationMode::AggBoth: return "agg-both";
    }
    return "none";
}

AggregationMode parse_aggregation(const std::string& name) {
    if (name == "none") return AggregationMode::None;
    if (name == "agg-text") return AggregationMode::AggText;
    if (name == "agg-image") return AggregationMode::AggImage;
    if (name == "agg-both") return AggregationMode::AggBoth;
    throw ConfigError("unknown aggregation mode '" + name + "'");
}

LabelMatrix LabelMatrix::build(const data::MultifoldBatch& batch, AggregationMode mode) {
    const bool agg_img = mode == AggregationMode::AggImage || mode == AggregationMode::AggBoth;
    const bool agg_txt = mode == AggregationMode::AggText || mode == AggregationMode::AggBoth;
    const std::size_t m_eff = agg_img ? 1 : batch.m;
    const std::size_t n_eff = agg_txt ? 1 : batch.n;

    LabelMatrix lm;
    lm.mode_ = mode;
    lm.groups_ = batch.b();
    for (std::size_t k = 0; k < batch.b(); ++k) {
        for (std::size_t r = 0; r < m_eff; ++r) {
            lm.group_of_row_.push_back(static_cast<int>(k));
            lm.fold_of_row_.push_back(static_cast<int>(r));
            lm.image_sources_.push_back(k * m_eff + r);
        }
        for (std::size_t c = 0; c < n_eff; ++c) {
            lm.group_of_col_.push_back(static_cast<int>(k));
            lm.fold_of_col_.push_back(static_cast<int>(c));
            lm.text_sources_.push_back(k * n_eff + c);
        }
    }
    return lm;
}

LabelMatrix LabelMatrix::build_paired(const data::MultifoldBatch& batch) {
    const std::size_t pairs = std::max(batch.m, batch.n);
    LabelMatrix lm;
    lm.mode_ = AggregationMode::None;
    lm.paired_ = true;
    lm.groups_ = batch.b();
    for (std::size_t k = 0; k < batch.b(); ++k) {
        for (std::size_t p = 0; p < pairs; ++p) {
            lm.group_of_row_.push_back(static_cast<int>(k));
            lm.group_of_col_.push_back(static_cast<int>(k));
            lm.fold_of_row_.push_back(static_cast<int>(p));
            lm.fold_of_col_.push_back(static_cast<int>(p));
            lm.image_sources_.push_back(k * batch.m + (p % batch.m));
            lm.text_sources_.push_back(k * batch.n + (p % batch.n));
        }
    }
    return lm;
}

std::size_t LabelMatrix::positive_count() const {
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows(); ++r)
        for (std::size_t c = 0; c < cols(); ++c)
            if (positive(r, c)) ++count;
    return count;
}

BoolMatrix SelectionMask::selected() const {
    BoolMatrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            if (at(r, c) == SelectionState::Selected) out.set(r, c, true);
    return out;
}

BoolMatrix SelectionMask::masked_out() const {
    BoolMatrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            if (at(r, c) == SelectionState::MaskedOut) out.set(r, c, true);
    return out;
}

std::size_t PSpec::resolve(std::size_t ncol) const {
    switch (kind) {
        case Kind::Fixed: return fixed;
        case Kind::Ncol: return std::max<std::size_t>(1, ncol);
        case Kind::TenNcol: return std::max<std::size_t>(1, 10 * ncol);
    }
    return 1;
}

PSpec PSpec::parse(const std::string& text) {
    PSpec p;
    if (text == "ncol") {
        p.kind = Kind::Ncol;
        return p;
    }
    if (text == "10ncol") {
        p.kind = Kind::TenNcol;
        return p;
    }
    try {
        const long v = std::stol(text);
        if (v < 1) throw ConfigError("repetition count p must be >= 1");
        p.kind = Kind::Fixed;
        p.fixed = static_cast<std::size_t>(v);
        return p;
    } catch (const std::logic_error&) {
        throw ConfigError("bad p value '" + text + "': expected a number, 'ncol' or '10ncol'");
    }
}

std::string PSpec::str() const {
    switch (kind) {
        case Kind::Fixed: return std::to_string(fixed);
        case Kind::Ncol: return "ncol";
        case Kind::TenNcol: return "10ncol";
    }
    return "1";
}

SelectionMask masked_random_selection(const LabelMatrix& labels, Direction dir, Rng& rng) {
    const bool i2t = dir == Direction::ImageToText;
    const std::size_t qrows = i2t ? labels.rows() : labels.cols();
    const std::size_t gcols = i2t ? labels.cols() : labels.rows();
    SelectionMask mask(qrows, gcols, dir, 0);

    std::vector<std::size_t> positives;
    for (std::size_t q = 0; q < qrows; ++q) {
        positives.clear();
        for (std::size_t g = 0; g < gcols; ++g) {
            const bool pos = i2t ? labels.positive(q, g) : labels.positive(g, q);
            if (pos) positives.push_back(g);
        }
        const std::size_t pick = positives[rng.below(positives.size())];
        for (std::size_t g : positives)
            mask.set(q, g, g == pick ? SelectionState::Selected : SelectionState::MaskedOut);
    }
    return mask;
}

ad::Node* aggregate_features(ad::Tape& tape, ad::Node* features, std::size_t fold) {
    ad::Node* mean = tape.fold_rows_mean(features, fold);
    return tape.row_l2_normalize(mean, 1e-12);
}

}  // namespace mxmclr::group
