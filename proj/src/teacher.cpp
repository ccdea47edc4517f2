#include "mxmclr/teacher.hpp"

#include "mxmclr/errors.hpp"

namespace mxmclr::teacher {

void TeacherConfig::validate() const {
    if (momentum < 0.0 || momentum > 1.0) throw ConfigError("teacher momentum must be in [0, 1]");
}

TeacherPair init_from_student(const train::DualEncoderParams& student) {
    return TeacherPair{student};
}

void ema_update(TeacherPair& teacher, const train::DualEncoderParams& student, double mu) {
    if (mu < 0.0 || mu > 1.0) throw ConfigError("teacher momentum must be in [0, 1]");
    auto t_tensors = train::named_tensors(teacher.params);
    auto s_tensors = train::named_tensors(student);
    if (t_tensors.size() != s_tensors.size())
        throw ContractError("ema_update: teacher and student parameter sets differ");
    for (std::size_t i = 0; i < t_tensors.size(); ++i) {
        Tensor& t = *t_tensors[i].second;
        const Tensor& s = *s_tensors[i].second;
        if (!t.same_shape(s))
            throw ContractError("ema_update: shape mismatch for " + t_tensors[i].first);
        if (mu == 1.0) continue;
        if (mu == 0.0) {
            t = s;
            continue;
        }
        for (std::size_t k = 0; k < t.size(); ++k)
            t.data()[k] = mu * t.data()[k] + (1.0 - mu) * s.data()[k];
    }
}

Tensor teacher_features(const TeacherPair& teacher, bool image_side, const Tensor& raw,
                        const FeaturePipeline& pipeline) {
    const train::EncoderNet& net = image_side ? teacher.params.image : teacher.params.text;
    Tensor feats = train::encode_value(net, raw);
    if (pipeline.agg_fold > 0)
        feats = kernels::row_l2_normalize(kernels::fold_rows_mean(feats, pipeline.agg_fold), 1e-12);
    if (!pipeline.gather.empty()) {
        Tensor gathered(pipeline.gather.size(), feats.cols());
        for (std::size_t i = 0; i < pipeline.gather.size(); ++i) {
            if (pipeline.gather[i] >= feats.rows())
                throw ContractError("teacher_features: gather index out of range");
            for (std::size_t j = 0; j < feats.cols(); ++j)
                gathered(i, j) = feats(pipeline.gather[i], j);
        }
        feats = std::move(gathered);
    }
    return feats;
}

Tensor teacher_similarity(const TeacherPair& teacher, const Tensor& raw_img,
                          const Tensor& raw_txt, const FeaturePipeline& img_pipeline,
                          const FeaturePipeline& txt_pipeline,
                          const loss::SimilarityConfig& cfg) {
    cfg.validate();
    const Tensor fi = teacher_features(teacher, true, raw_img, img_pipeline);
    const Tensor ft = teacher_features(teacher, false, raw_txt, txt_pipeline);
    return kernels::scale(kernels::matmul(fi, kernels::transpose(ft)), 1.0 / cfg.temperature);
}

}  // namespace mxmclr::teacher
