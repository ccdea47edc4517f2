#include "mxmclr/synthdata.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mxmclr/errors.hpp"

namespace mxmclr::data {

using nlohmann::json;

namespace {

constexpr double kFoldOffsetScale = 0.25;
constexpr double kConfusablePerturb = 0.15;
constexpr double kTextTilt = 0.8660254037844387;  // cos(pi/6)

// Substream tags for the generator's independent random streams.
enum : std::uint64_t { kTagFrame = 1, kTagLatent = 2, kTagConfusable = 3, kTagNoise = 4 };

/// First `k` columns of a random orthogonal matrix, via modified
/// Gram-Schmidt on an i.i.d. gaussian draw (re-orthogonalized once).
Tensor orthonormal_columns(std::size_t dim, std::size_t k, Rng& rng) {
    Tensor q = Tensor::randn(dim, k, rng);
    for (std::size_t j = 0; j < k; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double dot = 0.0;
                for (std::size_t i = 0; i < dim; ++i) dot += q(i, p) * q(i, j);
                for (std::size_t i = 0; i < dim; ++i) q(i, j) -= dot * q(i, p);
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) norm += q(i, j) * q(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw ConfigError("degenerate frame draw; latent_dim too large for dims");
        for (std::size_t i = 0; i < dim; ++i) q(i, j) /= norm;
    }
    return q;
}

std::vector<double> column(const Tensor& t, std::size_t j, double scale) {
    std::vector<double> v(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) v[i] = scale * t(i, j);
    return v;
}

std::vector<double> map_latent(const Tensor& frame, std::size_t first_col,
                               const std::vector<double>& z) {
    std::vector<double> out(frame.rows(), 0.0);
    for (std::size_t l = 0; l < z.size(); ++l)
        for (std::size_t i = 0; i < frame.rows(); ++i) out[i] += frame(i, first_col + l) * z[l];
    return out;
}

}  // namespace

void GenConfig::validate() const {
    if (instances < 2) throw ConfigError("gen: need at least 2 instances");
    if (m < 1 || n < 1) throw ConfigError("gen: fold counts m and n must be >= 1");
    if (latent_dim < 1) throw ConfigError("gen: latent_dim must be >= 1");
    if (noise_sigma < 0.0) throw ConfigError("gen: noise_sigma must be >= 0");
    if (confusable_fraction < 0.0 || confusable_fraction > 1.0)
        throw ConfigError("gen: confusable_fraction must be in [0, 1]");
    if (d_img < latent_dim + m)
        throw ConfigError("gen: d_img must be >= latent_dim + m");
    if (d_txt < latent_dim + n)
        throw ConfigError("gen: d_txt must be >= latent_dim + n");
}

Dataset generate(const GenConfig& config) {
    config.validate();
    const std::size_t L = config.latent_dim;
    Rng master(config.seed);
    Rng frame_rng = master.substream(kTagFrame);
    Rng latent_rng = master.substream(kTagLatent);
    Rng confusable_rng = master.substream(kTagConfusable);
    Rng noise_rng = master.substream(kTagNoise);

    // Modality frames. With equal dims one orthogonal frame serves both
    // modalities: image signal in columns [0, L), a tilted copy for text in
    // [L, 2L) when there is room, then fold-offset directions. All pieces
    // are mutually orthogonal, so raw cross-modal similarity reduces to the
    // latent inner product.
    Tensor img_frame, txt_frame;
    std::size_t img_sig = 0, txt_sig = 0, img_off = 0, txt_off = 0;
    bool tilted = false;
    if (config.d_img == config.d_txt && config.d_img >= 2 * L + config.m + config.n) {
        tilted = true;
        const std::size_t k = 2 * L + config.m + config.n;
        img_frame = orthonormal_columns(config.d_img, k, frame_rng);
        txt_frame = img_frame;
        img_sig = 0;
        txt_sig = L;  // combined below with the shared signal block
        img_off = 2 * L;
        txt_off = 2 * L + config.m;
    } else if (config.d_img == config.d_txt &&
               config.d_img >= L + config.m + config.n) {
        img_frame = orthonormal_columns(config.d_img, L + config.m + config.n, frame_rng);
        txt_frame = img_frame;
        img_sig = txt_sig = 0;
        img_off = L;
        txt_off = L + config.m;
    } else {
        img_frame = orthonormal_columns(config.d_img, L + config.m, frame_rng);
        txt_frame = orthonormal_columns(config.d_txt, L + config.n, frame_rng);
        img_sig = txt_sig = 0;
        img_off = txt_off = L;
    }

    // Latents, then confusable overwrites: the last floor(f*C) instances
    // reuse a perturbed latent of a random earlier instance.
    std::vector<std::vector<double>> latents(config.instances, std::vector<double>(L));
    for (auto& z : latents)
        for (auto& v : z) v = latent_rng.gaussian();
    const std::size_t confusable =
        static_cast<std::size_t>(config.confusable_fraction * double(config.instances));
    const std::size_t first_confusable = config.instances - confusable;
    for (std::size_t k = first_confusable; k < config.instances; ++k) {
        const std::size_t donor = confusable_rng.below(first_confusable);
        for (std::size_t l = 0; l < L; ++l)
            latents[k][l] = latents[donor][l] + kConfusablePerturb * confusable_rng.gaussian();
    }

    Dataset ds;
    ds.d_img = config.d_img;
    ds.d_txt = config.d_txt;
    ds.m = config.m;
    ds.n = config.n;
    ds.seed = config.seed;
    ds.instances.resize(config.instances);
    for (std::size_t k = 0; k < config.instances; ++k) {
        Instance& inst = ds.instances[k];
        inst.id = static_cast<std::int64_t>(k);
        inst.image_obs.reserve(config.m);
        inst.text_obs.reserve(config.n);

        const std::vector<double> img_signal = map_latent(img_frame, img_sig, latents[k]);
        std::vector<double> txt_signal;
        if (tilted) {
            const std::vector<double> base = map_latent(txt_frame, 0, latents[k]);
            const std::vector<double> tilt = map_latent(txt_frame, txt_sig, latents[k]);
            txt_signal.resize(config.d_txt);
            const double s = std::sqrt(1.0 - kTextTilt * kTextTilt);
            for (std::size_t i = 0; i < config.d_txt; ++i)
                txt_signal[i] = kTextTilt * base[i] + s * tilt[i];
        } else {
            txt_signal = map_latent(txt_frame, txt_sig, latents[k]);
        }

        for (std::size_t r = 0; r < config.m; ++r) {
            std::vector<double> obs = img_signal;
            const std::vector<double> off = column(img_frame, img_off + r, kFoldOffsetScale);
            for (std::size_t i = 0; i < config.d_img; ++i)
                obs[i] += off[i] + config.noise_sigma * noise_rng.gaussian();
            inst.image_obs.push_back(std::move(obs));
        }
        for (std::size_t c = 0; c < config.n; ++c) {
            std::vector<double> obs = txt_signal;
            const std::vector<double> off = column(txt_frame, txt_off + c, kFoldOffsetScale);
            for (std::size_t i = 0; i < config.d_txt; ++i)
                obs[i] += off[i] + config.noise_sigma * noise_rng.gaussian();
            inst.text_obs.push_back(std::move(obs));
        }
    }
    return ds;
}

void Dataset::validate() const {
    if (instances.size() < 2) throw SchemaError("dataset must contain at least 2 instances");
    if (m < 1 || n < 1) throw SchemaError("dataset fold counts must be >= 1");
    std::set<std::int64_t> ids;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const Instance& inst = instances[k];
        if (!ids.insert(inst.id).second)
            throw SchemaError("duplicate instance id " + std::to_string(inst.id));
        if (inst.image_obs.size() != m || inst.text_obs.size() != n)
            throw SchemaError("instance " + std::to_string(inst.id) +
                              " has wrong observation counts");
        for (const auto& v : inst.image_obs)
            if (v.size() != d_img)
                throw SchemaError("instance " + std::to_string(inst.id) +
                                  " has an image vector of wrong dimension");
        for (const auto& v : inst.text_obs)
            if (v.size() != d_txt)
                throw SchemaError("instance " + std::to_string(inst.id) +
                                  " has a text vector of wrong dimension");
        for (const auto& v : inst.image_obs)
            for (double x : v)
                if (!std::isfinite(x)) throw SchemaError("non-finite image observation");
        for (const auto& v : inst.text_obs)
            for (double x : v)
                if (!std::isfinite(x)) throw SchemaError("non-finite text observation");
    }
    if (*ids.begin() != 0 || *ids.rbegin() != static_cast<std::int64_t>(instances.size()) - 1)
        throw SchemaError("instance ids must be contiguous from 0");
}

Tensor MultifoldBatch::image_matrix() const {
    Tensor out(image_rows(), d_img);
    for (std::size_t k = 0; k < b(); ++k)
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t j = 0; j < d_img; ++j)
                out(k * m + r, j) = instances[k].image_obs[r][j];
    return out;
}

Tensor MultifoldBatch::text_matrix() const {
    Tensor out(text_rows(), d_txt);
    for (std::size_t k = 0; k < b(); ++k)
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t j = 0; j < d_txt; ++j)
                out(k * n + c, j) = instances[k].text_obs[c][j];
    return out;
}

MultifoldBatch sample_batch(const Dataset& dataset, std::size_t b, Rng& rng) {
    if (b < 1) throw SamplingError("batch size must be >= 1");
    if (b > dataset.size())
        throw SamplingError("batch of " + std::to_string(b) + " instances from a dataset of " +
                            std::to_string(dataset.size()));
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first b slots become the sample.
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    MultifoldBatch batch;
    batch.d_img = dataset.d_img;
    batch.d_txt = dataset.d_txt;
    batch.m = dataset.m;
    batch.n = dataset.n;
    batch.instances.reserve(b);
    for (std::size_t i = 0; i < b; ++i) batch.instances.push_back(dataset.instances[idx[i]]);
    return batch;
}

void save(const Dataset& dataset, const std::string& path) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    json header = {{"instances", dataset.size()}, {"m", dataset.m},       {"n", dataset.n},
                   {"d_img", dataset.d_img},      {"d_txt", dataset.d_txt}, {"seed", dataset.seed}};
    out << header.dump() << '\n';
    for (const Instance& inst : dataset.instances) {
        json rec = {{"id", inst.id}, {"images", inst.image_obs}, {"texts", inst.text_obs}};
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

Dataset load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    auto next_record = [&](json& rec) -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            rec = json::parse(line, nullptr, false);
            if (rec.is_discarded()) throw ParseError("malformed record in " + path, line_no);
            return true;
        }
        return false;
    };

    json header;
    if (!next_record(header)) throw ParseError("missing header record in " + path, 1);
    Dataset ds;
    try {
        const std::size_t count = header.at("instances").get<std::size_t>();
        ds.m = header.at("m").get<std::size_t>();
        ds.n = header.at("n").get<std::size_t>();
        ds.d_img = header.at("d_img").get<std::size_t>();
        ds.d_txt = header.at("d_txt").get<std::size_t>();
        ds.seed = header.at("seed").get<std::uint64_t>();
        ds.instances.reserve(count);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad header: ") + e.what(), line_no);
    }

    json rec;
    while (next_record(rec)) {
        Instance inst;
        try {
            inst.id = rec.at("id").get<std::int64_t>();
            inst.image_obs = rec.at("images").get<std::vector<std::vector<double>>>();
            inst.text_obs = rec.at("texts").get<std::vector<std::vector<double>>>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad instance record: ") + e.what(), line_no);
        }
        if (inst.image_obs.size() != ds.m || inst.text_obs.size() != ds.n)
            throw SchemaError("wrong observation count on line " + std::to_string(line_no));
        for (const auto& v : inst.image_obs)
            if (v.size() != ds.d_img)
                throw SchemaError("image vector of wrong dimension on line " +
                                  std::to_string(line_no));
        for (const auto& v : inst.text_obs)
            if (v.size() != ds.d_txt)
                throw SchemaError("text vector of wrong dimension on line " +
                                  std::to_string(line_no));
        ds.instances.push_back(std::move(inst));
    }
    if (header.at("instances").get<std::size_t>() != ds.instances.size())
        throw SchemaError("header announces " +
                          std::to_string(header.at("instances").get<std::size_t>()) +
                          " instances but file holds " + std::to_string(ds.instances.size()));
    ds.validate();
    return ds;
}

}  // namespace mxmclr::data
