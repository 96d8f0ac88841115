#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnerv/layers.hpp"

namespace dnerv {

enum class FusionVariant { Sum, Conv, Concat, Ccu, None };
enum class DiffVariant { Backward, Forward, Central, ConcatBF, ConcatBFSecond, None };

std::string to_string(FusionVariant v);
std::string to_string(DiffVariant v);
FusionVariant fusion_variant_from_string(const std::string& s);
DiffVariant diff_variant_from_string(const std::string& s);

// Input channels the diff encoder expects for a variant (0 for None).
int diff_channels(DiffVariant v);

struct ModelConfig {
    int height = 0;
    int width = 0;
    std::vector<int> content_strides;
    std::vector<int> diff_strides;
    int content_embed_channels = 16;
    int diff_embed_channels = 2;
    int c_init = 0;
    double reduction = 1.2;
    FusionVariant fusion_variant = FusionVariant::Ccu;
    int fusion_stage = 3;
    DiffVariant diff_variant = DiffVariant::ConcatBF;
    int ccu_kernel = 3;
    std::vector<int> decoder_kernels;  // optional; empty selects min(1+2k, 5) per stage
    int encoder_width = 64;

    void validate() const;

    int num_stages() const { return static_cast<int>(content_strides.size()); }
    // C_1..C_S with C_k = floor(C_{k-1} / reduction), seeded by c_init.
    std::vector<int> channel_schedule() const;
    std::vector<int> resolved_decoder_kernels() const;
    // Spatial size of the content embedding.
    std::pair<int, int> content_embed_hw() const;
    std::pair<int, int> diff_embed_hw() const;
    // Feature-map size at entry of decoder stage k (1-based).
    std::pair<int, int> stage_entry_hw(int stage) const;
    // Pixel-shuffle factor lifting the diff embedding to the fusion stage.
    int fusion_ps() const;

    // Canonical key=value text; also the basis of the config hash and of
    // equality (so a defaulted and an explicitly spelled kernel list match).
    std::string canonical_text() const;
    std::uint64_t hash() const;

    bool operator==(const ModelConfig& other) const;
};

// Named architecture presets (see README for the list).
ModelConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Learnable parameters of {decoder stages + head + fusion unit}; the
// encoders train too but are not part of the stored representation.
std::int64_t param_count(const ModelConfig& cfg);
std::int64_t encoder_param_count(const ModelConfig& cfg);

// Diff-free baseline with the same decoder family, c_init raised so
// param_count matches `cfg` as closely as possible.
ModelConfig match_baseline(const ModelConfig& cfg);

template <typename T>
struct FrameEmbeddings {
    Tensor<T> content;
    Tensor<T> diff;  // undefined when the diff stream is disabled
};

// Gated two-stream fusion: z lifted from the diff embedding, update gate v,
// candidate u, s = u*v + (1-v)*b_tilde.
template <typename T>
struct CcuUnit {
    Conv2d<T> lift;  // 1x1, diff_ch -> target_ch*ps^2
    Conv2d<T> w_ub, w_uz, w_vb, w_vz;
    int ps = 1;

    static CcuUnit make(int diff_ch, int target_ch, int ps, int k, Rng& rng);
    Tensor<T> lift_diff(const Tensor<T>& b_diff) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

template <typename T>
Tensor<T> ccu_forward(const CcuUnit<T>& ccu, const Tensor<T>& b_diff, const Tensor<T>& b_tilde);

template <typename T>
struct FusionUnit {
    FusionVariant variant = FusionVariant::None;
    CcuUnit<T> ccu;           // variant == Ccu
    Conv2d<T> content_conv;   // Sum (1x1) / Conv (K_c)
    Conv2d<T> lift;           // Sum/Conv/Concat diff alignment
    Conv2d<T> proj;           // Concat projection
    int ps = 1;

    static FusionUnit make(const ModelConfig& cfg, Rng& rng);
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

template <typename T>
Tensor<T> fuse(const FusionUnit<T>& fusion, const Tensor<T>& b_content_feat, const Tensor<T>& b_diff);

template <typename T>
class DnervModel {
public:
    DnervModel() = default;

    // Parameters are drawn from Rng(seed) in registry order.
    static DnervModel build(const ModelConfig& cfg, std::uint64_t seed);

    FrameEmbeddings<T> encode(const Tensor<T>& frame, const Tensor<T>& diff_input) const;
    Tensor<T> decode(const FrameEmbeddings<T>& emb) const;
    Tensor<T> forward(const Tensor<T>& frame, const Tensor<T>& diff_input) const;

    const ModelConfig& config() const { return cfg_; }
    bool has_diff_stream() const { return cfg_.diff_variant != DiffVariant::None; }

    void visit_params(const ParamVisitor<T>& v);
    void visit_repr_params(const ParamVisitor<T>& v);  // fusion + decoder + head
    std::vector<Tensor<T>> params();

    ConvNextEncoder<T> content_encoder;
    ConvNextEncoder<T> diff_encoder;
    FusionUnit<T> fusion;
    std::vector<NervBlock<T>> decoder;
    Conv2d<T> head;

private:
    ModelConfig cfg_;
};

#define DNERV_DECLARE_MODEL(T)                                                                   \
    extern template struct CcuUnit<T>;                                                          \
    extern template struct FusionUnit<T>;                                                       \
    extern template class DnervModel<T>;                                                        \
    extern template Tensor<T> ccu_forward<T>(const CcuUnit<T>&, const Tensor<T>&, const Tensor<T>&); \
    extern template Tensor<T> fuse<T>(const FusionUnit<T>&, const Tensor<T>&, const Tensor<T>&);

DNERV_DECLARE_MODEL(float)
DNERV_DECLARE_MODEL(double)
#undef DNERV_DECLARE_MODEL

}  // namespace dnerv
