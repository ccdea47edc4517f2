#pragma once

#include <vector>

#include "mxmclr/encoder.hpp"
#include "mxmclr/losses.hpp"

namespace mxmclr::teacher {

struct TeacherConfig {
    double momentum = 0.995;
    void validate() const;
};

/// Exponential-moving-average copy of the student encoders. Never placed
/// on a gradient tape; all forwards go through the plain value path.
struct TeacherPair {
    train::DualEncoderParams params;
};

TeacherPair init_from_student(const train::DualEncoderParams& student);

/// theta_m <- mu * theta_m + (1 - mu) * theta, per tensor. mu = 0 copies
/// and mu = 1 freezes, both bit-exactly.
void ema_update(TeacherPair& teacher, const train::DualEncoderParams& student, double mu);

/// Row transforms applied after encoding, mirroring the student feature
/// pipeline: optional per-instance mean aggregation, then optional row
/// gather (for the paired single-fold view).
struct FeaturePipeline {
    std::size_t agg_fold = 0;  // 0 = no aggregation
    std::vector<std::size_t> gather;  // empty = identity
};

Tensor teacher_features(const TeacherPair& teacher, bool image_side, const Tensor& raw,
                        const FeaturePipeline& pipeline);

/// Gradient-free similarity matrix computed exactly like the student's.
Tensor teacher_similarity(const TeacherPair& teacher, const Tensor& raw_img,
                          const Tensor& raw_txt, const FeaturePipeline& img_pipeline,
                          const FeaturePipeline& txt_pipeline,
                          const loss::SimilarityConfig& cfg);

}  // namespace mxmclr::teacher
