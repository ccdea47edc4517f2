#include "mxmclr/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mxmclr/errors.hpp"
#include "mxmclr/format.hpp"

namespace mxmclr::eval {

std::vector<std::vector<std::size_t>> rank_gallery(const EmbeddingSet& queries,
                                                   const EmbeddingSet& gallery) {
    if (queries.vectors.cols() != gallery.vectors.cols())
        throw ContractError("rank_gallery: embedding dimensions differ");
    const std::size_t nq = queries.vectors.rows();
    const std::size_t ng = gallery.vectors.rows();

    std::vector<std::vector<std::size_t>> ranked(nq);
    std::vector<double> sims(ng);
    for (std::size_t q = 0; q < nq; ++q) {
        for (std::size_t g = 0; g < ng; ++g) {
            double dot = 0.0;
            for (std::size_t j = 0; j < queries.vectors.cols(); ++j)
                dot += queries.vectors(q, j) * gallery.vectors(g, j);
            sims[g] = dot;
        }
        std::vector<std::size_t>& order = ranked[q];
        order.resize(ng);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (sims[a] != sims[b]) return sims[a] > sims[b];
            return a < b;  // deterministic tie-break
        });
    }
    return ranked;
}

double recall_at_k(const std::vector<std::vector<std::size_t>>& ranked,
                   const std::vector<std::int64_t>& query_ids,
                   const std::vector<std::int64_t>& gallery_ids, std::size_t k) {
    if (k < 1) throw ContractError("recall_at_k: k must be >= 1");
    if (ranked.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t q = 0; q < ranked.size(); ++q) {
        const std::size_t top = std::min(k, ranked[q].size());
        for (std::size_t i = 0; i < top; ++i) {
            if (gallery_ids[ranked[q][i]] == query_ids[q]) {
                ++hits;
                break;
            }
        }
    }
    return 100.0 * double(hits) / double(ranked.size());
}

NdcgResult ndcg_at_k(const std::vector<std::vector<std::size_t>>& ranked,
                     const std::vector<std::int64_t>& query_ids,
                     const std::vector<std::int64_t>& gallery_ids, std::size_t k) {
    if (k < 1) throw ContractError("ndcg_at_k: k must be >= 1");
    NdcgResult result;
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t q = 0; q < ranked.size(); ++q) {
        const std::size_t relevant_total = static_cast<std::size_t>(
            std::count(gallery_ids.begin(), gallery_ids.end(), query_ids[q]));
        if (relevant_total == 0) {
            ++result.skipped;
            continue;
        }
        const std::size_t top = std::min(k, ranked[q].size());
        double dcg = 0.0;
        for (std::size_t i = 0; i < top; ++i)
            if (gallery_ids[ranked[q][i]] == query_ids[q])
                dcg += 1.0 / std::log2(double(i) + 2.0);
        double idcg = 0.0;
        const std::size_t ideal = std::min(relevant_total, k);
        for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(double(i) + 2.0);
        total += dcg / idcg;
        ++counted;
    }
    result.value = counted == 0 ? 0.0 : total / double(counted);
    return result;
}

namespace {

Tensor gather_instances(const data::Dataset& ds, const std::vector<std::size_t>& idx,
                        bool image_side) {
    const std::size_t folds = image_side ? ds.m : ds.n;
    const std::size_t dim = image_side ? ds.d_img : ds.d_txt;
    Tensor out(idx.size() * folds, dim);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const data::Instance& inst = ds.instances[idx[i]];
        const auto& obs = image_side ? inst.image_obs : inst.text_obs;
        for (std::size_t f = 0; f < folds; ++f)
            for (std::size_t j = 0; j < dim; ++j) out(i * folds + f, j) = obs[f][j];
    }
    return out;
}

EmbeddingSet build_side(const train::DualEncoderParams& params, const data::Dataset& ds,
                        const std::vector<std::size_t>& idx, bool image_side, bool aggregate) {
    const std::size_t folds = image_side ? ds.m : ds.n;
    Tensor feats = train::encode_value(image_side ? params.image : params.text,
                                       gather_instances(ds, idx, image_side));
    EmbeddingSet set;
    set.aggregated = aggregate;
    set.label = aggregate ? (image_side ? "agg-image" : "agg-text")
                          : (image_side ? "image" : "text");
    if (aggregate) {
        set.vectors = kernels::row_l2_normalize(kernels::fold_rows_mean(feats, folds), 1e-12);
        for (std::size_t i = 0; i < idx.size(); ++i)
            set.ids.push_back(ds.instances[idx[i]].id);
    } else {
        set.vectors = std::move(feats);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t f = 0; f < folds; ++f) set.ids.push_back(ds.instances[idx[i]].id);
    }
    return set;
}

RetrievalReport report_direction(const EmbeddingSet& queries, const EmbeddingSet& gallery) {
    const auto ranked = rank_gallery(queries, gallery);
    RetrievalReport rep;
    rep.direction = queries.label + "->" + gallery.label;
    rep.r1 = recall_at_k(ranked, queries.ids, gallery.ids, 1);
    rep.r5 = recall_at_k(ranked, queries.ids, gallery.ids, 5);
    rep.r10 = recall_at_k(ranked, queries.ids, gallery.ids, 10);
    rep.ndcg5 = ndcg_at_k(ranked, queries.ids, gallery.ids, 5).value;
    rep.first_hit_rank.reserve(ranked.size());
    for (std::size_t q = 0; q < ranked.size(); ++q) {
        std::size_t rank = 0;
        for (std::size_t i = 0; i < ranked[q].size(); ++i) {
            if (gallery.ids[ranked[q][i]] == queries.ids[q]) {
                rank = i + 1;
                break;
            }
        }
        rep.first_hit_rank.push_back(rank);
    }
    return rep;
}

}  // namespace

std::vector<RetrievalReport> evaluate(const train::DualEncoderParams& params,
                                      const data::Dataset& dataset,
                                      const std::vector<std::size_t>& instance_indices,
                                      group::AggregationMode mode) {
    if (instance_indices.empty()) throw ContractError("evaluate: empty instance selection");
    const bool agg_img = mode == group::AggregationMode::AggImage ||
                         mode == group::AggregationMode::AggBoth;
    const bool agg_txt = mode == group::AggregationMode::AggText ||
                         mode == group::AggregationMode::AggBoth;
    const EmbeddingSet images = build_side(params, dataset, instance_indices, true, agg_img);
    const EmbeddingSet texts = build_side(params, dataset, instance_indices, false, agg_txt);
    return {report_direction(texts, images), report_direction(images, texts)};
}

std::string format_reports(const std::vector<RetrievalReport>& reports) {
    std::string out = "direction,metric,k,value\n";
    for (const RetrievalReport& r : reports) {
        out += r.direction + ",recall,1," + format_fixed(r.r1) + "\n";
        out += r.direction + ",recall,5," + format_fixed(r.r5) + "\n";
        out += r.direction + ",recall,10," + format_fixed(r.r10) + "\n";
        out += r.direction + ",ndcg,5," + format_fixed(r.ndcg5) + "\n";
    }
    return out;
}

void write_reports(const std::string& path, const std::vector<RetrievalReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << format_reports(reports);
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace mxmclr::eval
