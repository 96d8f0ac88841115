#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnerv/model.hpp"

namespace dnerv {

// Affine per-tensor quantization: offset = min, scale = (max-min)/(2^bits-1),
// code = round((v - offset)/scale). A constant tensor stores scale 0 and
// all-zero codes. bits must lie in [2,16].
struct QuantResult {
    std::vector<std::uint16_t> codes;
    double scale = 0;
    double offset = 0;
};

template <typename T>
QuantResult quantize(const Tensor<T>& t, int bits);

template <typename T>
void dequantize_into(const QuantResult& q, Tensor<T>& out);

// Global magnitude pruning over decoder+fusion weight tensors (biases and
// norms exempt): the smallest `ratio` fraction is zeroed in place, exactly
// N - round((1-ratio)*N) values. Returns one survivor bitmap per pruned
// tensor (bit i set = value kept), keyed in registry order.
struct PruneRecord {
    std::string name;
    std::vector<std::uint8_t> bitmap;  // bit-packed, LSB first
    std::int64_t values = 0;
};

template <typename T>
std::vector<PruneRecord> prune(DnervModel<T>& model, double ratio);

// Canonical Huffman coding of quantization codes. A single-symbol input
// emits a count-only record. The payload carries its own CRC32.
std::vector<std::uint8_t> entropy_encode(const std::vector<std::uint16_t>& codes);
std::vector<std::uint16_t> entropy_decode(const std::vector<std::uint8_t>& record);

// One compressed tensor: quantization parameters, optional prune bitmap and
// the entropy-coded payload.
struct TensorRecord {
    std::string name;
    Shape shape;
    double scale = 0;
    double offset = 0;
    std::vector<std::uint8_t> bitmap;   // empty when the tensor was not pruned
    std::vector<std::uint8_t> payload;  // entropy_encode output
};

struct CompressedArtifact {
    std::uint64_t config_hash = 0;
    int height = 0, width = 0, frames = 0;
    int bits = 8;
    double prune_ratio = 0;
    std::vector<TensorRecord> weights;     // decoder + fusion, registry order
    std::vector<TensorRecord> embeddings;  // frame%06d.content / .diff
    std::uint64_t total_bits = 0;          // exact serialized container size in bits
};

// prune -> quantize -> entropy-code the representation: decoder+fusion
// weights plus the per-frame embeddings. The model's repr weights are pruned
// in place.
template <typename T>
CompressedArtifact compress_model(DnervModel<T>& model,
                                  const std::vector<FrameEmbeddings<T>>& embeddings, int bits,
                                  double prune_ratio);

// Rebuilds quantized-pruned decoder+fusion weights and embeddings. The
// encoders of the returned model are untrained placeholders; only decode()
// is meaningful. Throws FormatError on a config-hash mismatch.
template <typename T>
std::pair<DnervModel<T>, std::vector<FrameEmbeddings<T>>> decompress(const CompressedArtifact& art,
                                                                     const ModelConfig& cfg);

std::vector<std::uint8_t> serialize_artifact(const CompressedArtifact& art);
CompressedArtifact deserialize_artifact(const std::vector<std::uint8_t>& bytes);
void save_artifact(const std::string& path, const CompressedArtifact& art);
CompressedArtifact load_artifact(const std::string& path);

// total_bits / (T*H*W).
double compute_bpp(const CompressedArtifact& art, int frames, int H, int W);

// Pre-entropy estimate: (weights + frames*embed_values) * bits / (frames*H*W).
double estimate_bpp(std::int64_t weight_count, std::int64_t embed_values_per_frame, int frames,
                    int H, int W, int bits);

#define DNERV_DECLARE_CODEC(T)                                                                 \
    extern template QuantResult quantize<T>(const Tensor<T>&, int);                           \
    extern template void dequantize_into<T>(const QuantResult&, Tensor<T>&);                  \
    extern template std::vector<PruneRecord> prune<T>(DnervModel<T>&, double);                \
    extern template CompressedArtifact compress_model<T>(                                     \
        DnervModel<T>&, const std::vector<FrameEmbeddings<T>>&, int, double);                 \
    extern template std::pair<DnervModel<T>, std::vector<FrameEmbeddings<T>>> decompress<T>(  \
        const CompressedArtifact&, const ModelConfig&);

DNERV_DECLARE_CODEC(float)
DNERV_DECLARE_CODEC(double)
#undef DNERV_DECLARE_CODEC

}  // namespace dnerv
