#include "dnerv/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "dnerv/config_file.hpp"
#include "dnerv/serialize.hpp"

namespace dnerv {

namespace {

constexpr char kMagic[6] = {'D', 'N', 'C', 'K', '1', '\n'};

template <typename T>
constexpr std::uint8_t dtype_tag() {
    return sizeof(T) == 4 ? 4 : 8;
}

template <typename T>
void write_tensor_values(std::ostream& os, const Tensor<T>& t) {
    for (T v : t.data()) {
        if constexpr (sizeof(T) == 4) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            write_u32(os, bits);
        } else {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            write_u64(os, bits);
        }
    }
}

template <typename T>
void read_tensor_values(std::istream& is, Tensor<T>& t) {
    for (T& v : t.data()) {
        if constexpr (sizeof(T) == 4) {
            std::uint32_t bits = read_u32(is, "tensor values");
            std::memcpy(&v, &bits, 4);
        } else {
            std::uint64_t bits = read_u64(is, "tensor values");
            std::memcpy(&v, &bits, 8);
        }
    }
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, DnervModel<T>& model, std::uint64_t seed,
                     std::int64_t step) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot create " + path);
    write_bytes(os, kMagic, 6);
    write_string(os, model.config().canonical_text());
    write_u64(os, seed);
    write_u64(os, static_cast<std::uint64_t>(step));
    write_u8(os, dtype_tag<T>());

    std::uint32_t count = 0;
    model.visit_params([&](const std::string&, Tensor<T>&) { ++count; });
    write_u32(os, count);
    model.visit_params([&](const std::string& name, Tensor<T>& t) {
        write_string(os, name);
        write_u8(os, static_cast<std::uint8_t>(t.shape().size()));
        for (int d : t.shape()) write_u32(os, static_cast<std::uint32_t>(d));
        write_tensor_values(os, t);
    });
    if (!os) throw IoError("short write to " + path);
}

namespace {

CheckpointMeta read_meta_stream(std::istream& is, const std::string& path) {
    char magic[6];
    read_bytes(is, magic, 6, "checkpoint magic");
    if (std::memcmp(magic, kMagic, 6) != 0) throw FormatError(path + ": not a DNCK1 checkpoint");
    CheckpointMeta meta;
    meta.config = parse_model_config_text(read_string(is, "config"), path);
    meta.seed = read_u64(is, "seed");
    meta.step = static_cast<std::int64_t>(read_u64(is, "step"));
    const std::uint8_t tag = read_u8(is, "dtype");
    if (tag == 4) meta.precision = Precision::F32;
    else if (tag == 8) meta.precision = Precision::F64;
    else throw FormatError(path + ": unknown dtype tag");
    return meta;
}

}  // namespace

CheckpointMeta read_checkpoint_meta(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    return read_meta_stream(is, path);
}

template <typename T>
std::pair<DnervModel<T>, CheckpointMeta> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    CheckpointMeta meta = read_meta_stream(is, path);
    const Precision expect = sizeof(T) == 4 ? Precision::F32 : Precision::F64;
    if (meta.precision != expect)
        throw FormatError(path + ": checkpoint stores " + to_string(meta.precision) +
                          " values; load with matching precision");

    DnervModel<T> model = DnervModel<T>::build(meta.config, meta.seed);
    const std::uint32_t count = read_u32(is, "tensor count");
    std::uint32_t expected = 0;
    model.visit_params([&](const std::string&, Tensor<T>&) { ++expected; });
    if (count != expected)
        throw FormatError(path + ": tensor count " + std::to_string(count) + " does not match config (" +
                          std::to_string(expected) + ")");

    bool mismatch = false;
    std::string mismatch_detail;
    model.visit_params([&](const std::string& name, Tensor<T>& t) {
        if (mismatch) return;
        const std::string stored = read_string(is, "tensor name");
        if (stored != name) {
            mismatch = true;
            mismatch_detail = "tensor '" + stored + "' where '" + name + "' was expected";
            return;
        }
        const int ndim = read_u8(is, "rank");
        Shape shape(ndim);
        for (int i = 0; i < ndim; ++i) shape[i] = static_cast<int>(read_u32(is, "extent"));
        if (shape != t.shape()) {
            mismatch = true;
            mismatch_detail = "tensor '" + name + "' shape " + shape_str(shape) + " vs expected " +
                              shape_str(t.shape());
            return;
        }
        read_tensor_values(is, t);
    });
    if (mismatch) throw FormatError(path + ": " + mismatch_detail);
    return {std::move(model), std::move(meta)};
}

template void save_checkpoint<float>(const std::string&, DnervModel<float>&, std::uint64_t, std::int64_t);
template void save_checkpoint<double>(const std::string&, DnervModel<double>&, std::uint64_t, std::int64_t);
template std::pair<DnervModel<float>, CheckpointMeta> load_checkpoint<float>(const std::string&);
template std::pair<DnervModel<double>, CheckpointMeta> load_checkpoint<double>(const std::string&);

}  // namespace dnerv
