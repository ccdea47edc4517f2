#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mxmclr/encoder.hpp"
#include "mxmclr/grouping.hpp"
#include "mxmclr/synthdata.hpp"

namespace mxmclr::eval {

/// Unit-row embeddings with per-row instance ids.
struct EmbeddingSet {
    Tensor vectors;
    std::vector<std::int64_t> ids;
    std::string label;
    bool aggregated = false;
};

struct RetrievalReport {
    std::string direction;
    double r1 = 0.0;
    double r5 = 0.0;
    double r10 = 0.0;
    double ndcg5 = 0.0;
    std::vector<std::size_t> first_hit_rank;  // 1-based, 0 = no hit
};

/// Gallery indices per query, sorted by descending cosine similarity with
/// ties broken by ascending gallery index.
std::vector<std::vector<std::size_t>> rank_gallery(const EmbeddingSet& queries,
                                                   const EmbeddingSet& gallery);

/// Percentage of queries whose top-k contains any item with the query's
/// id. k larger than the gallery is clamped.
double recall_at_k(const std::vector<std::vector<std::size_t>>& ranked,
                   const std::vector<std::int64_t>& query_ids,
                   const std::vector<std::int64_t>& gallery_ids, std::size_t k);

struct NdcgResult {
    double value = 0.0;
    std::size_t skipped = 0;  // queries with no relevant gallery item
};

/// Binary-relevance NDCG@k averaged over queries that have at least one
/// relevant gallery item.
NdcgResult ndcg_at_k(const std::vector<std::vector<std::size_t>>& ranked,
                     const std::vector<std::int64_t>& query_ids,
                     const std::vector<std::int64_t>& gallery_ids, std::size_t k);

/// Encodes the chosen instances with the given parameters and reports both
/// retrieval directions under the aggregation mode.
std::vector<RetrievalReport> evaluate(const train::DualEncoderParams& params,
                                      const data::Dataset& dataset,
                                      const std::vector<std::size_t>& instance_indices,
                                      group::AggregationMode mode);

/// `direction,metric,k,value` lines with fixed 4-decimal values.
std::string format_reports(const std::vector<RetrievalReport>& reports);
void write_reports(const std::string& path, const std::vector<RetrievalReport>& reports);

}  // namespace mxmclr::eval
