#include "dnerv/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dnerv/serialize.hpp"

namespace dnerv {

std::string to_string(FusionVariant v) {
    switch (v) {
        case FusionVariant::Sum: return "sum";
        case FusionVariant::Conv: return "conv";
        case FusionVariant::Concat: return "concat";
        case FusionVariant::Ccu: return "ccu";
        case FusionVariant::None: return "none";
    }
    return "?";
}

std::string to_string(DiffVariant v) {
    switch (v) {
        case DiffVariant::Backward: return "backward";
        case DiffVariant::Forward: return "forward";
        case DiffVariant::Central: return "central";
        case DiffVariant::ConcatBF: return "concat_bf";
        case DiffVariant::ConcatBFSecond: return "concat_bf_second";
        case DiffVariant::None: return "none";
    }
    return "?";
}

FusionVariant fusion_variant_from_string(const std::string& s) {
    if (s == "sum") return FusionVariant::Sum;
    if (s == "conv") return FusionVariant::Conv;
    if (s == "concat") return FusionVariant::Concat;
    if (s == "ccu") return FusionVariant::Ccu;
    if (s == "none") return FusionVariant::None;
    throw ConfigError("unknown fusion_variant '" + s + "'");
}

DiffVariant diff_variant_from_string(const std::string& s) {
    if (s == "backward") return DiffVariant::Backward;
    if (s == "forward") return DiffVariant::Forward;
    if (s == "central") return DiffVariant::Central;
    if (s == "concat_bf") return DiffVariant::ConcatBF;
    if (s == "concat_bf_second") return DiffVariant::ConcatBFSecond;
    if (s == "none") return DiffVariant::None;
    throw ConfigError("unknown diff_variant '" + s + "'");
}

int diff_channels(DiffVariant v) {
    switch (v) {
        case DiffVariant::Backward:
        case DiffVariant::Forward:
        case DiffVariant::Central: return 3;
        case DiffVariant::ConcatBF: return 6;
        case DiffVariant::ConcatBFSecond: return 9;
        case DiffVariant::None: return 0;
    }
    return 0;
}

namespace {

int product(const std::vector<int>& v) {
    int p = 1;
    for (int x : v) p *= x;
    return p;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string double_str(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void ModelConfig::validate() const {
    if (height <= 0 || width <= 0) throw ConfigError("resolution must be positive");
    if (content_strides.empty()) throw ConfigError("content_strides must be non-empty");
    for (int s : content_strides)
        if (s < 1) throw ConfigError("content strides must be >= 1");
    const int cp = product(content_strides);
    if (height % cp != 0 || width % cp != 0)
        throw ConfigError("content strides (product " + std::to_string(cp) + ") do not divide " +
                          std::to_string(height) + "x" + std::to_string(width));
    if (content_embed_channels < 1) throw ConfigError("content_embed_channels must be >= 1");
    if (c_init < 1) throw ConfigError("c_init must be >= 1");
    if (reduction <= 0) throw ConfigError("reduction must be positive");
    if (channel_schedule().back() < 1)
        throw ConfigError("channel schedule decays to zero; raise c_init or lower reduction");
    if (encoder_width < 1) throw ConfigError("encoder_width must be >= 1");

    if ((fusion_variant == FusionVariant::None) != (diff_variant == DiffVariant::None))
        throw ConfigError("fusion_variant=none and diff_variant=none must be used together");

    if (!decoder_kernels.empty() && static_cast<int>(decoder_kernels.size()) != num_stages())
        throw ConfigError("decoder_kernels must list one kernel per decoder stage");
    for (int k : resolved_decoder_kernels())
        if (k < 1 || k % 2 == 0) throw ConfigError("decoder kernels must be odd and >= 1");

    if (diff_variant != DiffVariant::None) {
        if (diff_strides.empty()) throw ConfigError("diff_strides must be non-empty");
        for (int s : diff_strides)
            if (s < 1) throw ConfigError("diff strides must be >= 1");
        const int dp = product(diff_strides);
        if (height % dp != 0 || width % dp != 0)
            throw ConfigError("diff strides (product " + std::to_string(dp) + ") do not divide " +
                              std::to_string(height) + "x" + std::to_string(width));
        if (diff_embed_channels < 1) throw ConfigError("diff_embed_channels must be >= 1");
        if (fusion_stage < 2 || fusion_stage > num_stages())
            throw ConfigError("fusion_stage must lie in [2, " + std::to_string(num_stages()) + "]");
        if (ccu_kernel < 1 || ccu_kernel % 2 == 0)
            throw ConfigError("ccu_kernel must be odd and >= 1");
        fusion_ps();  // throws when the diff embedding cannot be aligned
    }
}

std::vector<int> ModelConfig::channel_schedule() const {
    std::vector<int> sched;
    sched.reserve(content_strides.size());
    double c = static_cast<double>(c_init);
    for (std::size_t k = 0; k < content_strides.size(); ++k) {
        c = std::floor(c / reduction);
        sched.push_back(static_cast<int>(c));
    }
    return sched;
}

std::vector<int> ModelConfig::resolved_decoder_kernels() const {
    if (!decoder_kernels.empty()) return decoder_kernels;
    std::vector<int> ks;
    for (int k = 0; k < num_stages(); ++k) ks.push_back(std::min(1 + 2 * k, 5));
    return ks;
}

std::pair<int, int> ModelConfig::content_embed_hw() const {
    const int p = product(content_strides);
    return {height / p, width / p};
}

std::pair<int, int> ModelConfig::diff_embed_hw() const {
    const int p = product(diff_strides);
    return {height / p, width / p};
}

std::pair<int, int> ModelConfig::stage_entry_hw(int stage) const {
    auto [h, w] = content_embed_hw();
    for (int i = 1; i < stage; ++i) {
        h *= content_strides[i - 1];
        w *= content_strides[i - 1];
    }
    return {h, w};
}

int ModelConfig::fusion_ps() const {
    auto [eh, ew] = stage_entry_hw(fusion_stage);
    auto [dh, dw] = diff_embed_hw();
    if (eh % dh != 0 || ew % dw != 0 || eh / dh != ew / dw || eh / dh < 1)
        throw ConfigError("diff embedding " + std::to_string(dh) + "x" + std::to_string(dw) +
                          " cannot be pixel-shuffled onto stage-" + std::to_string(fusion_stage) +
                          " features " + std::to_string(eh) + "x" + std::to_string(ew) +
                          "; an integer shuffle factor ps with " + std::to_string(dh) + "*ps=" +
                          std::to_string(eh) + " and " + std::to_string(dw) + "*ps=" +
                          std::to_string(ew) + " is required");
    return eh / dh;
}

std::string ModelConfig::canonical_text() const {
    std::ostringstream os;
    os << "height = " << height << "\n";
    os << "width = " << width << "\n";
    os << "content_strides = " << join_ints(content_strides) << "\n";
    os << "diff_strides = " << join_ints(diff_strides) << "\n";
    os << "content_embed_channels = " << content_embed_channels << "\n";
    os << "diff_embed_channels = " << diff_embed_channels << "\n";
    os << "c_init = " << c_init << "\n";
    os << "reduction = " << double_str(reduction) << "\n";
    os << "fusion_variant = " << to_string(fusion_variant) << "\n";
    os << "fusion_stage = " << fusion_stage << "\n";
    os << "diff_variant = " << to_string(diff_variant) << "\n";
    os << "ccu_kernel = " << ccu_kernel << "\n";
    os << "decoder_kernels = " << join_ints(resolved_decoder_kernels()) << "\n";
    os << "encoder_width = " << encoder_width << "\n";
    return os.str();
}

std::uint64_t ModelConfig::hash() const { return fnv1a64(canonical_text()); }

bool ModelConfig::operator==(const ModelConfig& other) const {
    return canonical_text() == other.canonical_text();
}

namespace {

ModelConfig base_preset(int h, int w, std::vector<int> cs, std::vector<int> ds, int c_init, int kc) {
    ModelConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.content_strides = std::move(cs);
    cfg.diff_strides = std::move(ds);
    cfg.c_init = c_init;
    cfg.ccu_kernel = kc;
    return cfg;
}

}  // namespace

ModelConfig preset(const std::string& name) {
    // Bunny/UVG rows follow the published decoder table; the tiny preset is
    // the desk-scale configuration used throughout the tests.
    if (name == "tiny-64x128") return base_preset(64, 128, {4, 2, 2, 2}, {2, 2}, 32, 3);
    if (name == "bunny-640x1280-0.35m") return base_preset(640, 1280, {5, 4, 4, 2, 2}, {2, 2, 2, 2}, 32, 3);
    if (name == "bunny-640x1280-0.75m") return base_preset(640, 1280, {5, 4, 4, 2, 2}, {2, 2, 2, 2}, 48, 3);
    if (name == "bunny-640x1280-1.5m") return base_preset(640, 1280, {5, 4, 4, 2, 2}, {2, 2, 2, 2}, 68, 3);
    if (name == "bunny-640x1280-3m" || name == "bunny-640x1280")
        return base_preset(640, 1280, {5, 4, 4, 2, 2}, {2, 2, 2, 2}, 95, 3);
    if (name == "uvg-960x1920-1.58m") return base_preset(960, 1920, {5, 4, 4, 3, 2}, {4, 4, 3, 2}, 68, 1);
    if (name == "uvg-960x1920-3m" || name == "uvg-960x1920")
        return base_preset(960, 1920, {5, 4, 4, 3, 2}, {4, 3, 2}, 92, 1);
    if (name == "uvg-480x960-3m" || name == "uvg-480x960")
        return base_preset(480, 960, {5, 4, 3, 2, 2}, {3, 2, 2}, 110, 1);
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"tiny-64x128",          "bunny-640x1280-0.35m", "bunny-640x1280-0.75m",
            "bunny-640x1280-1.5m",  "bunny-640x1280-3m",    "uvg-960x1920-1.58m",
            "uvg-960x1920-3m",      "uvg-480x960-3m"};
}

namespace {

std::int64_t conv_params(std::int64_t in, std::int64_t out, int k, bool bias) {
    return in * out * k * k + (bias ? out : 0);
}

std::int64_t fusion_params(const ModelConfig& cfg) {
    if (cfg.fusion_variant == FusionVariant::None) return 0;
    const int F = cfg.fusion_stage;
    const auto sched = cfg.channel_schedule();
    const std::int64_t ct = sched[F - 2];
    const std::int64_t dc = cfg.diff_embed_channels;
    const int ps = cfg.fusion_ps();
    const int kc = cfg.ccu_kernel;
    switch (cfg.fusion_variant) {
        case FusionVariant::Ccu:
            return conv_params(dc, ct * ps * ps, 1, true) + conv_params(ct, ct, kc, true) * 2 +
                   conv_params(ct, ct, kc, false) * 2;
        case FusionVariant::Sum:
            return conv_params(ct, ct, 1, true) + conv_params(dc, ct * ps * ps, 1, true);
        case FusionVariant::Conv:
            return conv_params(ct, ct, kc, true) + conv_params(dc, ct * ps * ps, 1, true);
        case FusionVariant::Concat:
            return conv_params(dc, dc * ps * ps, 1, true) + conv_params(ct + dc, ct, 1, true);
        case FusionVariant::None: return 0;
    }
    return 0;
}

}  // namespace

std::int64_t param_count(const ModelConfig& cfg) {
    cfg.validate();
    const auto sched = cfg.channel_schedule();
    const auto kernels = cfg.resolved_decoder_kernels();
    std::int64_t total = fusion_params(cfg);
    std::int64_t in = cfg.content_embed_channels;
    for (int k = 0; k < cfg.num_stages(); ++k) {
        const int s = cfg.content_strides[k];
        total += conv_params(in, static_cast<std::int64_t>(sched[k]) * s * s, kernels[k], true);
        in = sched[k];
    }
    total += conv_params(in, 3, 1, true);  // head
    return total;
}

std::int64_t encoder_param_count(const ModelConfig& cfg) {
    const int w = cfg.encoder_width;
    auto encoder = [&](int in_ch, const std::vector<int>& strides, int embed) {
        std::int64_t n = 0;
        int ch = in_ch;
        for (int s : strides) {
            n += conv_params(ch, w, s, true);      // downsample
            n += 2 * w;                            // norm
            n += conv_params(1, w, 7, true);       // depthwise (one filter per channel)
            n += 2 * w;                            // block norm
            n += conv_params(w, 4 * w, 1, true);   // expand
            n += conv_params(4 * w, w, 1, true);   // project
            ch = w;
        }
        n += conv_params(w, embed, 1, true);
        return n;
    };
    std::int64_t total = encoder(3, cfg.content_strides, cfg.content_embed_channels);
    if (cfg.diff_variant != DiffVariant::None)
        total += encoder(diff_channels(cfg.diff_variant), cfg.diff_strides, cfg.diff_embed_channels);
    return total;
}

ModelConfig match_baseline(const ModelConfig& cfg) {
    const std::int64_t target = param_count(cfg);
    ModelConfig base = cfg;
    base.fusion_variant = FusionVariant::None;
    base.diff_variant = DiffVariant::None;
    base.diff_strides.clear();

    ModelConfig best = base;
    std::int64_t best_err = -1;
    for (int c = cfg.c_init; c <= cfg.c_init * 4 + 64; ++c) {
        base.c_init = c;
        const std::int64_t n = param_count(base);
        const std::int64_t err = std::abs(n - target);
        if (best_err < 0 || err < best_err) {
            best_err = err;
            best = base;
        }
        if (n > target) break;  // counts grow monotonically in c_init
    }
    return best;
}

// ---------------------------------------------------------------------------
// CCU and fusion

template <typename T>
CcuUnit<T> CcuUnit<T>::make(int diff_ch, int target_ch, int ps, int k, Rng& rng) {
    CcuUnit u;
    u.ps = ps;
    u.lift = Conv2d<T>::make(diff_ch, target_ch * ps * ps, 1, 1, 0, 1, rng);
    u.w_ub = Conv2d<T>::make(target_ch, target_ch, k, 1, k / 2, 1, rng, true);
    u.w_uz = Conv2d<T>::make(target_ch, target_ch, k, 1, k / 2, 1, rng, false);
    u.w_vb = Conv2d<T>::make(target_ch, target_ch, k, 1, k / 2, 1, rng, true);
    u.w_vz = Conv2d<T>::make(target_ch, target_ch, k, 1, k / 2, 1, rng, false);
    return u;
}

template <typename T>
Tensor<T> CcuUnit<T>::lift_diff(const Tensor<T>& b_diff) const {
    Tensor<T> z = lift.forward(b_diff);
    if (ps > 1) z = pixel_shuffle(z, ps);
    return gelu(z);
}

template <typename T>
void CcuUnit<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    lift.visit(prefix + ".lift", v);
    w_ub.visit(prefix + ".w_ub", v);
    w_uz.visit(prefix + ".w_uz", v);
    w_vb.visit(prefix + ".w_vb", v);
    w_vz.visit(prefix + ".w_vz", v);
}

template <typename T>
Tensor<T> ccu_forward(const CcuUnit<T>& ccu, const Tensor<T>& b_diff, const Tensor<T>& b_tilde) {
    Tensor<T> z = ccu.lift_diff(b_diff);
    if (z.shape()[1] != b_tilde.shape()[1] || z.shape()[2] != b_tilde.shape()[2])
        throw ConfigError("ccu: lifted diff features " + shape_str(z.shape()) +
                          " do not spatially match content features " + shape_str(b_tilde.shape()) +
                          "; a pixel-shuffle factor ps=" +
                          std::to_string(b_tilde.shape()[1] / b_diff.shape()[1]) + " is required");
    if (z.shape()[0] != b_tilde.shape()[0])
        throw ConfigError("ccu: lifted diff channels " + std::to_string(z.shape()[0]) +
                          " != content channels " + std::to_string(b_tilde.shape()[0]));
    Tensor<T> u = tanh_act(add(ccu.w_ub.forward(b_tilde), ccu.w_uz.forward(z)));
    Tensor<T> v = sigmoid(add(ccu.w_vb.forward(b_tilde), ccu.w_vz.forward(z)));
    return add(mul(u, v), mul(affine(v, T(-1), T(1)), b_tilde));
}

template <typename T>
FusionUnit<T> FusionUnit<T>::make(const ModelConfig& cfg, Rng& rng) {
    FusionUnit f;
    f.variant = cfg.fusion_variant;
    if (f.variant == FusionVariant::None) return f;
    const auto sched = cfg.channel_schedule();
    const int ct = sched[cfg.fusion_stage - 2];
    const int dc = cfg.diff_embed_channels;
    f.ps = cfg.fusion_ps();
    const int kc = cfg.ccu_kernel;
    switch (f.variant) {
        case FusionVariant::Ccu:
            f.ccu = CcuUnit<T>::make(dc, ct, f.ps, kc, rng);
            break;
        case FusionVariant::Sum:
            f.content_conv = Conv2d<T>::make(ct, ct, 1, 1, 0, 1, rng);
            f.lift = Conv2d<T>::make(dc, ct * f.ps * f.ps, 1, 1, 0, 1, rng);
            break;
        case FusionVariant::Conv:
            f.content_conv = Conv2d<T>::make(ct, ct, kc, 1, kc / 2, 1, rng);
            f.lift = Conv2d<T>::make(dc, ct * f.ps * f.ps, 1, 1, 0, 1, rng);
            break;
        case FusionVariant::Concat:
            f.lift = Conv2d<T>::make(dc, dc * f.ps * f.ps, 1, 1, 0, 1, rng);
            f.proj = Conv2d<T>::make(ct + dc, ct, 1, 1, 0, 1, rng);
            break;
        case FusionVariant::None: break;
    }
    return f;
}

template <typename T>
void FusionUnit<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    switch (variant) {
        case FusionVariant::Ccu:
            ccu.visit(prefix + ".ccu", v);
            break;
        case FusionVariant::Sum:
        case FusionVariant::Conv:
            content_conv.visit(prefix + ".content_conv", v);
            lift.visit(prefix + ".lift", v);
            break;
        case FusionVariant::Concat:
            lift.visit(prefix + ".lift", v);
            proj.visit(prefix + ".proj", v);
            break;
        case FusionVariant::None: break;
    }
}

template <typename T>
Tensor<T> fuse(const FusionUnit<T>& fusion, const Tensor<T>& b_content_feat, const Tensor<T>& b_diff) {
    if (fusion.variant == FusionVariant::None) return b_content_feat;
    if (fusion.variant == FusionVariant::Ccu) return ccu_forward(fusion.ccu, b_diff, b_content_feat);

    Tensor<T> z = fusion.lift.forward(b_diff);
    if (fusion.ps > 1) z = pixel_shuffle(z, fusion.ps);
    if (z.shape()[1] != b_content_feat.shape()[1] || z.shape()[2] != b_content_feat.shape()[2])
        throw ConfigError("fuse: lifted diff features " + shape_str(z.shape()) +
                          " do not spatially match content features " +
                          shape_str(b_content_feat.shape()) + "; a pixel-shuffle factor ps=" +
                          std::to_string(b_content_feat.shape()[1] / b_diff.shape()[1]) +
                          " is required");
    switch (fusion.variant) {
        case FusionVariant::Sum:
        case FusionVariant::Conv:
            return add(fusion.content_conv.forward(b_content_feat), z);
        case FusionVariant::Concat:
            return fusion.proj.forward(concat_channels<T>({b_content_feat, z}));
        default: return b_content_feat;
    }
}

// ---------------------------------------------------------------------------
// DnervModel

template <typename T>
DnervModel<T> DnervModel<T>::build(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    DnervModel m;
    m.cfg_ = cfg;
    Rng rng(seed);
    m.content_encoder =
        ConvNextEncoder<T>::make(3, cfg.content_strides, cfg.encoder_width, cfg.content_embed_channels, rng);
    if (cfg.diff_variant != DiffVariant::None)
        m.diff_encoder = ConvNextEncoder<T>::make(diff_channels(cfg.diff_variant), cfg.diff_strides,
                                                  cfg.encoder_width, cfg.diff_embed_channels, rng);
    m.fusion = FusionUnit<T>::make(cfg, rng);
    const auto sched = cfg.channel_schedule();
    const auto kernels = cfg.resolved_decoder_kernels();
    int in_ch = cfg.content_embed_channels;
    for (int k = 0; k < cfg.num_stages(); ++k) {
        m.decoder.push_back(NervBlock<T>::make(in_ch, sched[k], kernels[k], cfg.content_strides[k], rng));
        in_ch = sched[k];
    }
    m.head = Conv2d<T>::make(in_ch, 3, 1, 1, 0, 1, rng);
    return m;
}

template <typename T>
FrameEmbeddings<T> DnervModel<T>::encode(const Tensor<T>& frame, const Tensor<T>& diff_input) const {
    if (frame.shape() != Shape{3, cfg_.height, cfg_.width})
        throw DimensionError("encode: frame " + shape_str(frame.shape()) + " does not match config " +
                             std::to_string(cfg_.height) + "x" + std::to_string(cfg_.width));
    FrameEmbeddings<T> emb;
    emb.content = content_encoder.forward(frame);
    if (has_diff_stream()) {
        const int dc = diff_channels(cfg_.diff_variant);
        if (!diff_input.defined())
            throw DimensionError("encode: diff input required for diff_variant=" +
                                 to_string(cfg_.diff_variant));
        if (diff_input.shape() != Shape{dc, cfg_.height, cfg_.width})
            throw DimensionError("encode: diff input " + shape_str(diff_input.shape()) +
                                 " must be [" + std::to_string(dc) + "," + std::to_string(cfg_.height) +
                                 "," + std::to_string(cfg_.width) + "]");
        emb.diff = diff_encoder.forward(diff_input);
    }
    return emb;
}

template <typename T>
Tensor<T> DnervModel<T>::decode(const FrameEmbeddings<T>& emb) const {
    auto [h0, w0] = cfg_.content_embed_hw();
    if (emb.content.shape() != Shape{cfg_.content_embed_channels, h0, w0})
        throw DimensionError("decode: content embedding " + shape_str(emb.content.shape()) +
                             " does not match config");
    Tensor<T> h = emb.content;
    const bool fused = cfg_.fusion_variant != FusionVariant::None;
    if (fused && !emb.diff.defined()) throw DimensionError("decode: diff embedding required");
    for (int k = 1; k <= cfg_.num_stages(); ++k) {
        if (fused && k == cfg_.fusion_stage) h = fuse(fusion, h, emb.diff);
        h = decoder[k - 1].forward(h);
    }
    return sigmoid(head.forward(h));
}

template <typename T>
Tensor<T> DnervModel<T>::forward(const Tensor<T>& frame, const Tensor<T>& diff_input) const {
    return decode(encode(frame, diff_input));
}

template <typename T>
void DnervModel<T>::visit_params(const ParamVisitor<T>& v) {
    content_encoder.visit("content_encoder", v);
    if (has_diff_stream()) diff_encoder.visit("diff_encoder", v);
    visit_repr_params(v);
}

template <typename T>
void DnervModel<T>::visit_repr_params(const ParamVisitor<T>& v) {
    fusion.visit("fusion", v);
    for (std::size_t k = 0; k < decoder.size(); ++k)
        decoder[k].visit("decoder.stage" + std::to_string(k + 1), v);
    head.visit("decoder.head", v);
}

template <typename T>
std::vector<Tensor<T>> DnervModel<T>::params() {
    std::vector<Tensor<T>> ps;
    visit_params([&](const std::string&, Tensor<T>& t) { ps.push_back(t); });
    return ps;
}

#define DNERV_INSTANTIATE_MODEL(T)                                                        \
    template struct CcuUnit<T>;                                                           \
    template struct FusionUnit<T>;                                                        \
    template class DnervModel<T>;                                                         \
    template Tensor<T> ccu_forward<T>(const CcuUnit<T>&, const Tensor<T>&, const Tensor<T>&); \
    template Tensor<T> fuse<T>(const FusionUnit<T>&, const Tensor<T>&, const Tensor<T>&);

DNERV_INSTANTIATE_MODEL(float)
DNERV_INSTANTIATE_MODEL(double)
#undef DNERV_INSTANTIATE_MODEL

}  // namespace dnerv
