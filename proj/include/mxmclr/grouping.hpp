#pragma once

#include <cstdint>
#include <vector>

#include "mxmclr/autodiff.hpp"
#include "mxmclr/rng.hpp"
#include "mxmclr/synthdata.hpp"

namespace mxmclr::group {

enum class AggregationMode { None, AggText, AggImage, AggBoth };

const char* aggregation_name(AggregationMode mode);
AggregationMode parse_aggregation(const std::string& name);

/// Group-wise pairing matrix: entry (r, c) is positive iff row r and
/// column c belong to the same instance. Rows are image-axis observations,
/// columns text-axis; aggregated sides collapse to one row/column per
/// instance.
class LabelMatrix {
public:
    /// Cartesian-product pairing of a batch under an aggregation mode.
    static LabelMatrix build(const data::MultifoldBatch& batch, AggregationMode mode);

    /// Square one-positive-per-row view for single-fold losses: pair index
    /// p of instance k pairs image fold (p mod m) with text fold (p mod n),
    /// p in [0, max(m, n)). Rows of the same instance repeat observations,
    /// which is exactly what makes the plain InfoNCE false-negative defect
    /// visible.
    static LabelMatrix build_paired(const data::MultifoldBatch& batch);

    std::size_t rows() const { return group_of_row_.size(); }
    std::size_t cols() const { return group_of_col_.size(); }
    std::size_t groups() const { return groups_; }
    std::size_t rows_per_group() const { return rows() / groups_; }
    std::size_t cols_per_group() const { return cols() / groups_; }

    int group_of_row(std::size_t r) const { return group_of_row_[r]; }
    int group_of_col(std::size_t c) const { return group_of_col_[c]; }
    int fold_of_row(std::size_t r) const { return fold_of_row_[r]; }
    int fold_of_col(std::size_t c) const { return fold_of_col_[c]; }
    bool positive(std::size_t r, std::size_t c) const {
        return group_of_row_[r] == group_of_col_[c];
    }
    std::size_t positive_count() const;

    /// Row indices into the full (b*m) image feature matrix backing each
    /// label row (identity unless paired); same for columns and texts.
    const std::vector<std::size_t>& image_row_sources() const { return image_sources_; }
    const std::vector<std::size_t>& text_col_sources() const { return text_sources_; }

    AggregationMode mode() const { return mode_; }
    bool paired() const { return paired_; }

private:
    std::vector<int> group_of_row_, group_of_col_;
    std::vector<int> fold_of_row_, fold_of_col_;
    std::vector<std::size_t> image_sources_, text_sources_;
    std::size_t groups_ = 0;
    AggregationMode mode_ = AggregationMode::None;
    bool paired_ = false;
};

enum class SelectionState : std::uint8_t { Negative = 0, MaskedOut = 1, Selected = 2 };

enum class Direction { ImageToText, TextToImage };

/// Per-repetition masked-random selection. Oriented query-axis x
/// gallery-axis: for ImageToText it matches the label matrix; for
/// TextToImage it is the transposed view, with one Selected per text row.
class SelectionMask {
public:
    SelectionMask(std::size_t rows, std::size_t cols, Direction dir, std::size_t repetition)
        : rows_(rows), cols_(cols), dir_(dir), repetition_(repetition),
          state_(rows * cols, static_cast<std::uint8_t>(SelectionState::Negative)) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Direction direction() const { return dir_; }
    std::size_t repetition() const { return repetition_; }
    void set_repetition(std::size_t x) { repetition_ = x; }

    SelectionState at(std::size_t r, std::size_t c) const {
        return static_cast<SelectionState>(state_[r * cols_ + c]);
    }
    void set(std::size_t r, std::size_t c, SelectionState s) {
        state_[r * cols_ + c] = static_cast<std::uint8_t>(s);
    }

    BoolMatrix selected() const;
    BoolMatrix masked_out() const;

private:
    std::size_t rows_, cols_;
    Direction dir_;
    std::size_t repetition_;
    std::vector<std::uint8_t> state_;
};

/// Repetition count for masked-random selection: a fixed number, or the
/// paper's N_col / 10*N_col rules resolved against the query direction's
/// per-group gallery count.
struct PSpec {
    enum class Kind { Fixed, Ncol, TenNcol };
    Kind kind = Kind::TenNcol;
    std::size_t fixed = 1;

    std::size_t resolve(std::size_t ncol) const;
    static PSpec parse(const std::string& text);
    std::string str() const;
};

struct SelectionConfig {
    PSpec p;
    std::uint64_t seed = 2022;
};

/// Uniformly selects one positive per query row within its group block,
/// independently per row; remaining block positives become MaskedOut.
SelectionMask masked_random_selection(const LabelMatrix& labels, Direction dir, Rng& rng);

/// Per-instance mean of each group of `fold` contiguous rows,
/// re-normalized to unit length.
ad::Node* aggregate_features(ad::Tape& tape, ad::Node* features, std::size_t fold);

}  // namespace mxmclr::group
