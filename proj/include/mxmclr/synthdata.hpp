#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mxmclr/rng.hpp"
#include "mxmclr/tensor.hpp"

namespace mxmclr::data {

/// One labeled instance with m image-modality and n text-modality
/// observation vectors.
struct Instance {
    std::int64_t id = 0;
    std::vector<std::vector<double>> image_obs;
    std::vector<std::vector<double>> text_obs;
};

struct Dataset {
    std::vector<Instance> instances;
    std::size_t d_img = 0;
    std::size_t d_txt = 0;
    std::size_t m = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return instances.size(); }
    /// Enforces the structural invariants (C >= 2, contiguous ids,
    /// consistent fold counts and dimensions, finite entries).
    void validate() const;
};

/// A mini-batch of b distinct instances: b*m images and b*n texts.
struct MultifoldBatch {
    std::vector<Instance> instances;
    std::size_t d_img = 0;
    std::size_t d_txt = 0;
    std::size_t m = 0;
    std::size_t n = 0;

    std::size_t b() const { return instances.size(); }
    std::size_t image_rows() const { return b() * m; }
    std::size_t text_rows() const { return b() * n; }

    /// (b*m) x d_img matrix, instance-major and fold-minor row order.
    Tensor image_matrix() const;
    /// (b*n) x d_txt matrix, same row convention.
    Tensor text_matrix() const;
};

struct GenConfig {
    std::size_t instances = 200;
    std::size_t m = 6;
    std::size_t n = 5;
    std::size_t d_img = 32;
    std::size_t d_txt = 32;
    std::size_t latent_dim = 8;
    double noise_sigma = 0.5;
    double confusable_fraction = 0.2;
    std::uint64_t seed = 2022;

    void validate() const;
};

/// Generates a dataset as a pure function of the config. Each instance k
/// draws a latent z_k; observations are frame * z_k + fold offset + noise,
/// where the per-modality frames have orthonormal columns and the fold
/// offsets live in the orthogonal complement of the signal subspace. When
/// d_img == d_txt both modalities share one frame construction so raw
/// cross-modal cosine similarity is c * <z_k, z_j> for a fixed tilt factor
/// c, which keeps same-instance observations mutual nearest neighbors at
/// zero noise. A confusable fraction of instances reuses a perturbed latent
/// of another instance, producing hard negatives.
Dataset generate(const GenConfig& config);

/// Draws b distinct instances without replacement, all folds included.
MultifoldBatch sample_batch(const Dataset& dataset, std::size_t b, Rng& rng);

/// Line-delimited JSON: one header record, then one record per instance.
void save(const Dataset& dataset, const std::string& path);
Dataset load(const std::string& path);

}  // namespace mxmclr::data
