#include "dnerv/video.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dnerv/serialize.hpp"

namespace fs = std::filesystem;

namespace dnerv {

namespace {

constexpr char kDnrvMagic[6] = {'D', 'N', 'R', 'V', '1', '\n'};

std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.ppm", index);
    return buf;
}

// Skips whitespace and '#' comments, then reads one ASCII integer.
int ppm_read_int(std::istream& is, const std::string& path) {
    int ch = is.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = is.get();
        } else if (std::isspace(ch)) {
            ch = is.get();
        } else {
            break;
        }
    }
    if (ch == EOF || !std::isdigit(ch)) throw FormatError(path + ": malformed PPM header");
    long v = 0;
    while (ch != EOF && std::isdigit(ch)) {
        v = v * 10 + (ch - '0');
        if (v > 1 << 30) throw FormatError(path + ": absurd PPM header value");
        ch = is.get();
    }
    if (ch != EOF) is.unget();
    return static_cast<int>(v);
}

template <typename T>
Tensor<T> frame_from_rgb8(const std::vector<std::uint8_t>& rgb, int H, int W) {
    std::vector<T> data(static_cast<std::size_t>(3) * H * W);
    const long HW = static_cast<long>(H) * W;
    for (long p = 0; p < HW; ++p)
        for (int c = 0; c < 3; ++c)
            data[c * HW + p] = static_cast<T>(rgb[3 * p + c]) / T(255);
    return Tensor<T>::from_data({3, H, W}, std::move(data));
}

template <typename T>
std::vector<std::uint8_t> frame_to_rgb8(const Tensor<T>& frame) {
    const int H = frame.shape()[1], W = frame.shape()[2];
    const long HW = static_cast<long>(H) * W;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(3) * HW);
    const T* d = frame.ptr();
    for (long p = 0; p < HW; ++p)
        for (int c = 0; c < 3; ++c) {
            double v = std::lround(static_cast<double>(d[c * HW + p]) * 255.0);
            rgb[3 * p + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    return rgb;
}

}  // namespace

template <typename T>
Tensor<T> read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char m0 = static_cast<char>(is.get());
    char m1 = static_cast<char>(is.get());
    if (m0 != 'P' || m1 != '6') throw FormatError(path + ": not a binary P6 PPM");
    const int W = ppm_read_int(is, path);
    const int H = ppm_read_int(is, path);
    const int maxval = ppm_read_int(is, path);
    if (maxval != 255) throw FormatError(path + ": only maxval 255 supported, got " + std::to_string(maxval));
    is.get();  // single whitespace after maxval
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(3) * H * W);
    is.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (static_cast<std::size_t>(is.gcount()) != rgb.size())
        throw FormatError(path + ": truncated pixel data");
    return frame_from_rgb8<T>(rgb, H, W);
}

template <typename T>
void write_ppm(const Tensor<T>& frame, const std::string& path) {
    if (frame.shape().size() != 3 || frame.shape()[0] != 3)
        throw DimensionError("write_ppm: frame must be [3,H,W]");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot create " + path);
    os << "P6\n" << frame.shape()[2] << ' ' << frame.shape()[1] << "\n255\n";
    auto rgb = frame_to_rgb8(frame);
    os.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!os) throw IoError("short write to " + path);
}

template <typename T>
VideoSequence<T> load_video(const std::string& path) {
    VideoSequence<T> v;
    v.name = fs::path(path).filename().string();
    if (fs::is_directory(path)) {
        std::vector<int> indices;
        for (const auto& entry : fs::directory_iterator(path)) {
            const std::string fn = entry.path().filename().string();
            if (fn.size() == 16 && fn.rfind("frame_", 0) == 0 && fn.substr(12) == ".ppm")
                indices.push_back(std::stoi(fn.substr(6, 6)));
        }
        if (indices.empty()) throw FormatError(path + ": no frame_%06d.ppm files");
        std::sort(indices.begin(), indices.end());
        for (std::size_t i = 0; i < indices.size(); ++i)
            if (indices[i] != static_cast<int>(i))
                throw FormatError(path + ": frame indices must be contiguous from 0, missing frame " +
                                  std::to_string(i));
        for (int i = 0; i < static_cast<int>(indices.size()); ++i) {
            Tensor<T> f = read_ppm<T>((fs::path(path) / frame_filename(i)).string());
            if (!v.frames.empty() && f.shape() != v.frames[0].shape())
                throw FormatError(path + ": frame " + std::to_string(i) + " has mismatched dimensions");
            v.frames.push_back(std::move(f));
        }
        return v;
    }

    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[6];
    read_bytes(is, magic, 6, "dnrv magic");
    if (std::memcmp(magic, kDnrvMagic, 6) != 0) throw FormatError(path + ": not a .dnrv container");
    const int T_ = static_cast<int>(read_u32(is, "frame count"));
    const int H = static_cast<int>(read_u32(is, "height"));
    const int W = static_cast<int>(read_u32(is, "width"));
    if (T_ < 1 || H < 1 || W < 1) throw FormatError(path + ": degenerate dimensions");
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(3) * H * W);
    for (int t = 0; t < T_; ++t) {
        read_bytes(is, rgb.data(), rgb.size(), "frame pixels");
        v.frames.push_back(frame_from_rgb8<T>(rgb, H, W));
    }
    return v;
}

template <typename T>
void save_video_ppm_dir(const VideoSequence<T>& v, const std::string& dir) {
    fs::create_directories(dir);
    for (int t = 0; t < v.count(); ++t)
        write_ppm(v.frames[t], (fs::path(dir) / frame_filename(t)).string());
}

template <typename T>
void save_video_dnrv(const VideoSequence<T>& v, const std::string& path) {
    if (v.count() < 1) throw UsageError("save_video_dnrv: empty sequence");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot create " + path);
    write_bytes(os, kDnrvMagic, 6);
    write_u32(os, static_cast<std::uint32_t>(v.count()));
    write_u32(os, static_cast<std::uint32_t>(v.height()));
    write_u32(os, static_cast<std::uint32_t>(v.width()));
    for (const auto& f : v.frames) {
        auto rgb = frame_to_rgb8(f);
        write_bytes(os, rgb.data(), rgb.size());
    }
}

template <typename T>
Tensor<T> diff_stream(const VideoSequence<T>& v, int t, DiffVariant variant) {
    if (variant == DiffVariant::None) return {};
    if (t < 0 || t >= v.count())
        throw UsageError("diff_stream: frame index " + std::to_string(t) + " out of range");
    const int H = v.height(), W = v.width();
    const long n = static_cast<long>(3) * H * W;
    // Replicated neighbors: clamping the index makes boundary diffs zero.
    const T* prev = v.frames[std::max(t - 1, 0)].ptr();
    const T* cur = v.frames[t].ptr();
    const T* next = v.frames[std::min(t + 1, v.count() - 1)].ptr();

    const int ch = diff_channels(variant);
    std::vector<T> data(static_cast<std::size_t>(ch) * H * W);
    T* backward = data.data();
    switch (variant) {
        case DiffVariant::Backward:
            for (long i = 0; i < n; ++i) backward[i] = cur[i] - prev[i];
            break;
        case DiffVariant::Forward:
            for (long i = 0; i < n; ++i) backward[i] = next[i] - cur[i];
            break;
        case DiffVariant::Central:
            for (long i = 0; i < n; ++i) backward[i] = (next[i] - prev[i]) / T(2);
            break;
        case DiffVariant::ConcatBF:
            for (long i = 0; i < n; ++i) backward[i] = cur[i] - prev[i];
            for (long i = 0; i < n; ++i) backward[n + i] = next[i] - cur[i];
            break;
        case DiffVariant::ConcatBFSecond:
            for (long i = 0; i < n; ++i) backward[i] = cur[i] - prev[i];
            for (long i = 0; i < n; ++i) backward[n + i] = next[i] - cur[i];
            for (long i = 0; i < n; ++i) backward[2 * n + i] = next[i] - T(2) * cur[i] + prev[i];
            break;
        case DiffVariant::None: break;
    }
    return Tensor<T>::from_data({ch, H, W}, std::move(data));
}

MaskKind mask_kind_from_string(const std::string& s) {
    if (s == "central") return MaskKind::Central;
    if (s == "disperse") return MaskKind::Disperse;
    throw ConfigError("unknown mask kind '" + s + "'");
}

std::string to_string(MaskKind k) { return k == MaskKind::Central ? "central" : "disperse"; }

MaskSpec make_mask(MaskKind kind, int H, int W, double scale) {
    if (scale <= 0 || scale > 1) throw UsageError("make_mask: scale must be in (0,1]");
    MaskSpec m;
    m.kind = kind;
    if (kind == MaskKind::Central) {
        const int mh = H / 4, mw = W / 4;
        m.rects.push_back({(H - mh) / 2, (W - mw) / 2, mh, mw});
        return m;
    }
    const int side = static_cast<int>(std::lround(100.0 * scale * std::min(H, W) / 960.0));
    if (side < 1) throw ConfigError("make_mask: disperse square collapses to zero; raise scale");
    const std::array<std::pair<int, int>, 5> centers = {
        std::pair{H / 4, W / 4},     std::pair{H / 4, 3 * W / 4}, std::pair{3 * H / 4, W / 4},
        std::pair{3 * H / 4, 3 * W / 4}, std::pair{H / 2, W / 2}};
    for (auto [cy, cx] : centers) {
        const int top = cy - side / 2, left = cx - side / 2;
        if (top < 0 || left < 0 || top + side > H || left + side > W)
            throw ConfigError("make_mask: disperse square exceeds the " + std::to_string(H) + "x" +
                              std::to_string(W) + " frame");
        m.rects.push_back({top, left, side, side});
    }
    return m;
}

template <typename T>
Tensor<T> apply_mask(const Tensor<T>& frame, const MaskSpec& mask) {
    if (frame.shape().size() != 3) throw DimensionError("apply_mask: frame must be [C,H,W]");
    const int C = frame.shape()[0], H = frame.shape()[1], W = frame.shape()[2];
    Tensor<T> out = Tensor<T>::from_data(frame.shape(), frame.data());
    T* d = out.ptr();
    for (const auto& r : mask.rects) {
        const auto [top, left, h, w] = r;
        if (top < 0 || left < 0 || top + h > H || left + w > W)
            throw ConfigError("apply_mask: rectangle outside frame");
        for (int c = 0; c < C; ++c)
            for (int y = top; y < top + h; ++y) {
                T* row = d + (static_cast<long>(c) * H + y) * W + left;
                for (int x = 0; x < w; ++x) row[x] = T(0);
            }
    }
    return out;
}

template <typename T>
std::pair<VideoSequence<T>, VideoSequence<T>> split_even_odd(const VideoSequence<T>& v) {
    if (v.count() < 2) throw UsageError("split_even_odd: need at least two frames");
    VideoSequence<T> train, test;
    train.name = v.name + "-even";
    test.name = v.name + "-odd";
    train.fps = test.fps = v.fps;
    for (int t = 0; t < v.count(); ++t)
        (t % 2 == 0 ? train : test).frames.push_back(v.frames[t]);
    return {std::move(train), std::move(test)};
}

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "moving_square") return SynthKind::MovingSquare;
    if (s == "static_texture") return SynthKind::StaticTexture;
    if (s == "scene_cut") return SynthKind::SceneCut;
    throw ConfigError("unknown synthetic video kind '" + s + "'");
}

std::string to_string(SynthKind k) {
    switch (k) {
        case SynthKind::MovingSquare: return "moving_square";
        case SynthKind::StaticTexture: return "static_texture";
        case SynthKind::SceneCut: return "scene_cut";
    }
    return "?";
}

namespace {

// Random coarse grid, bilinearly upsampled: spatially smooth but seeded
// content that a desk-scale decoder can actually fit.
template <typename T>
std::vector<T> smooth_field(int H, int W, int cells, Rng& rng, double lo, double hi) {
    const int gh = cells + 1, gw = cells + 1;
    std::vector<double> grid(static_cast<std::size_t>(3) * gh * gw);
    for (auto& g : grid) g = rng.uniform(lo, hi);
    std::vector<T> out(static_cast<std::size_t>(3) * H * W);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < H; ++y) {
            const double fy = static_cast<double>(y) * cells / H;
            const int y0 = static_cast<int>(fy);
            const double ay = fy - y0;
            for (int x = 0; x < W; ++x) {
                const double fx = static_cast<double>(x) * cells / W;
                const int x0 = static_cast<int>(fx);
                const double ax = fx - x0;
                const double* g = grid.data() + static_cast<long>(c) * gh * gw;
                const double v00 = g[y0 * gw + x0], v01 = g[y0 * gw + x0 + 1];
                const double v10 = g[(y0 + 1) * gw + x0], v11 = g[(y0 + 1) * gw + x0 + 1];
                out[(static_cast<long>(c) * H + y) * W + x] =
                    static_cast<T>((1 - ay) * ((1 - ax) * v00 + ax * v01) + ay * ((1 - ax) * v10 + ax * v11));
            }
        }
    return out;
}

template <typename T>
void stamp_square(std::vector<T>& frame, const std::vector<T>& tex, int side, int H, int W, int top,
                  int left) {
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < side; ++i) {
            const int y = ((top + i) % H + H) % H;
            for (int j = 0; j < side; ++j) {
                const int x = ((left + j) % W + W) % W;
                frame[(static_cast<long>(c) * H + y) * W + x] = tex[(static_cast<long>(c) * side + i) * side + j];
            }
        }
}

}  // namespace

template <typename T>
VideoSequence<T> synth_video(SynthKind kind, int frames, int H, int W, int velocity,
                             std::uint64_t seed) {
    if (H < 16 || W < 16) throw UsageError("synth_video: dimensions must be >= 16");
    if (frames < 1) throw UsageError("synth_video: need at least one frame");
    Rng rng(seed);
    VideoSequence<T> v;
    v.name = to_string(kind);

    const auto bg_a = smooth_field<T>(H, W, 6, rng, 0.05, 0.95);
    const auto bg_b = smooth_field<T>(H, W, 6, rng, 0.05, 0.95);  // scene_cut second scene
    const int side = std::min(H, W) / 4;
    const auto tex = smooth_field<T>(side, side, 3, rng, 0.05, 0.95);
    const int top0 = H / 8, left0 = W / 8;

    for (int t = 0; t < frames; ++t) {
        std::vector<T> data;
        switch (kind) {
            case SynthKind::StaticTexture: {
                data = bg_a;
                for (auto& px : data) {
                    const double n = rng.uniform(-0.01, 0.01);
                    px = static_cast<T>(std::clamp(static_cast<double>(px) + n, 0.0, 1.0));
                }
                break;
            }
            case SynthKind::MovingSquare: {
                data = bg_a;
                stamp_square(data, tex, side, H, W, top0 + t * velocity, left0 + t * velocity);
                break;
            }
            case SynthKind::SceneCut: {
                data = (t < frames / 2) ? bg_a : bg_b;
                stamp_square(data, tex, side, H, W, top0 + t * velocity, left0 + t * velocity);
                break;
            }
        }
        v.frames.push_back(Tensor<T>::from_data({3, H, W}, std::move(data)));
    }
    return v;
}

#define DNERV_INSTANTIATE_VIDEO(T)                                                         \
    template struct VideoSequence<T>;                                                      \
    template VideoSequence<T> load_video<T>(const std::string&);                           \
    template Tensor<T> read_ppm<T>(const std::string&);                                    \
    template void write_ppm<T>(const Tensor<T>&, const std::string&);                      \
    template void save_video_ppm_dir<T>(const VideoSequence<T>&, const std::string&);      \
    template void save_video_dnrv<T>(const VideoSequence<T>&, const std::string&);         \
    template Tensor<T> diff_stream<T>(const VideoSequence<T>&, int, DiffVariant);          \
    template Tensor<T> apply_mask<T>(const Tensor<T>&, const MaskSpec&);                   \
    template std::pair<VideoSequence<T>, VideoSequence<T>> split_even_odd<T>(              \
        const VideoSequence<T>&);                                                          \
    template VideoSequence<T> synth_video<T>(SynthKind, int, int, int, int, std::uint64_t);

DNERV_INSTANTIATE_VIDEO(float)
DNERV_INSTANTIATE_VIDEO(double)
#undef DNERV_INSTANTIATE_VIDEO

}  // namespace dnerv
