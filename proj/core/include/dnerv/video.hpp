#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dnerv/model.hpp"
#include "dnerv/tensor.hpp"

namespace dnerv {

template <typename T>
struct VideoSequence {
    std::vector<Tensor<T>> frames;  // each [3,H,W], values in [0,1]
    std::string name;
    double fps = 0;  // optional metadata, 0 when unknown

    int count() const { return static_cast<int>(frames.size()); }
    int height() const { return frames.at(0).shape()[1]; }
    int width() const { return frames.at(0).shape()[2]; }
};

// Loads either a directory of binary P6 frames named frame_%06d.ppm or a
// .dnrv raw container. Pixels are normalized to [0,1] by /255.
template <typename T>
VideoSequence<T> load_video(const std::string& path);

template <typename T>
Tensor<T> read_ppm(const std::string& path);
template <typename T>
void write_ppm(const Tensor<T>& frame, const std::string& path);  // re-quantizes to 8 bits

template <typename T>
void save_video_ppm_dir(const VideoSequence<T>& v, const std::string& dir);
template <typename T>
void save_video_dnrv(const VideoSequence<T>& v, const std::string& path);

// Frame-difference input for the diff encoder at frame t. Out-of-range
// neighbors are replicated, so boundary diffs are zero. Returns an undefined
// tensor for DiffVariant::None.
//   backward: y_t - y_{t-1}            (3 channels)
//   forward:  y_{t+1} - y_t            (3)
//   central:  (y_{t+1} - y_{t-1}) / 2  (3)
//   concat_bf: [backward, forward]     (6)
//   concat_bf_second: [backward, forward, y_{t+1} - 2 y_t + y_{t-1}]  (9)
template <typename T>
Tensor<T> diff_stream(const VideoSequence<T>& v, int t, DiffVariant variant);

enum class MaskKind { Central, Disperse };
MaskKind mask_kind_from_string(const std::string& s);
std::string to_string(MaskKind k);

struct MaskSpec {
    MaskKind kind = MaskKind::Central;
    // (top, left, height, width) rectangles; masked pixels read 0.
    std::vector<std::array<int, 4>> rects;
};

// central: one centered H/4 x W/4 rectangle. disperse: five squares of side
// round(100 * scale * min(H,W) / 960) at the four quarter points and the
// center. scale in (0,1], 1 = full-scale geometry.
MaskSpec make_mask(MaskKind kind, int H, int W, double scale);

template <typename T>
Tensor<T> apply_mask(const Tensor<T>& frame, const MaskSpec& mask);

// (train: even indices, test: odd indices); diffs of each subsequence are
// taken within that subsequence.
template <typename T>
std::pair<VideoSequence<T>, VideoSequence<T>> split_even_odd(const VideoSequence<T>& v);

enum class SynthKind { MovingSquare, StaticTexture, SceneCut };
SynthKind synth_kind_from_string(const std::string& s);
std::string to_string(SynthKind k);

// Deterministic synthetic clips for desk-scale experiments.
//   moving_square: textured square translating (velocity, velocity) px/frame
//                  over a static smooth background, wrapping at the borders.
//   static_texture: one background plus per-frame low-amplitude noise.
//   scene_cut: background swaps at T/2 while the square keeps moving.
template <typename T>
VideoSequence<T> synth_video(SynthKind kind, int frames, int H, int W, int velocity,
                             std::uint64_t seed);

#define DNERV_DECLARE_VIDEO(T)                                                               \
    extern template struct VideoSequence<T>;                                                 \
    extern template VideoSequence<T> load_video<T>(const std::string&);                      \
    extern template Tensor<T> read_ppm<T>(const std::string&);                               \
    extern template void write_ppm<T>(const Tensor<T>&, const std::string&);                 \
    extern template void save_video_ppm_dir<T>(const VideoSequence<T>&, const std::string&); \
    extern template void save_video_dnrv<T>(const VideoSequence<T>&, const std::string&);    \
    extern template Tensor<T> diff_stream<T>(const VideoSequence<T>&, int, DiffVariant);     \
    extern template Tensor<T> apply_mask<T>(const Tensor<T>&, const MaskSpec&);              \
    extern template std::pair<VideoSequence<T>, VideoSequence<T>> split_even_odd<T>(         \
        const VideoSequence<T>&);                                                            \
    extern template VideoSequence<T> synth_video<T>(SynthKind, int, int, int, int, std::uint64_t);

DNERV_DECLARE_VIDEO(float)
DNERV_DECLARE_VIDEO(double)
#undef DNERV_DECLARE_VIDEO

}  // namespace dnerv
