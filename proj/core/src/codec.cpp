#include "dnerv/codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "dnerv/serialize.hpp"

namespace dnerv {

template <typename T>
QuantResult quantize(const Tensor<T>& t, int bits) {
    if (bits < 2 || bits > 16) throw UsageError("quantize: bits must lie in [2,16]");
    check_finite(t, "quantize input");
    QuantResult q;
    const auto& d = t.data();
    double lo = static_cast<double>(d[0]), hi = lo;
    for (T v : d) {
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
    }
    q.offset = lo;
    const double levels = static_cast<double>((1u << bits) - 1);
    q.scale = (hi - lo) / levels;
    q.codes.resize(d.size());
    if (q.scale == 0) return q;  // constant tensor: all-zero codes
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double c = std::round((static_cast<double>(d[i]) - q.offset) / q.scale);
        q.codes[i] = static_cast<std::uint16_t>(std::clamp(c, 0.0, levels));
    }
    return q;
}

template <typename T>
void dequantize_into(const QuantResult& q, Tensor<T>& out) {
    if (q.codes.size() != out.data().size())
        throw DimensionError("dequantize: code count does not match tensor size");
    T* d = out.ptr();
    for (std::size_t i = 0; i < q.codes.size(); ++i)
        d[i] = static_cast<T>(q.offset + q.scale * q.codes[i]);
}

namespace {

bool is_prunable(const std::string& name) {
    return name.size() > 7 && name.compare(name.size() - 7, 7, ".weight") == 0;
}

void bitmap_clear(std::vector<std::uint8_t>& bm, std::int64_t i) {
    bm[static_cast<std::size_t>(i >> 3)] &= static_cast<std::uint8_t>(~(1u << (i & 7)));
}

bool bitmap_get(const std::vector<std::uint8_t>& bm, std::int64_t i) {
    return (bm[static_cast<std::size_t>(i >> 3)] >> (i & 7)) & 1u;
}

}  // namespace

template <typename T>
std::vector<PruneRecord> prune(DnervModel<T>& model, double ratio) {
    if (ratio < 0 || ratio >= 1) throw UsageError("prune: ratio must lie in [0,1)");
    std::vector<Tensor<T>> weights;
    std::vector<PruneRecord> records;
    model.visit_repr_params([&](const std::string& name, Tensor<T>& t) {
        if (!is_prunable(name)) return;
        weights.push_back(t);
        PruneRecord r;
        r.name = name;
        r.values = t.size();
        r.bitmap.assign(static_cast<std::size_t>((t.size() + 7) / 8), 0xFF);
        records.push_back(std::move(r));
    });

    std::int64_t total = 0;
    for (const auto& w : weights) total += w.size();
    const std::int64_t survivors = static_cast<std::int64_t>(std::llround((1.0 - ratio) * static_cast<double>(total)));
    const std::int64_t to_zero = total - survivors;
    if (to_zero <= 0) return records;

    struct Entry {
        double mag;
        std::int32_t tensor;
        std::int64_t index;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(total));
    for (std::size_t wi = 0; wi < weights.size(); ++wi) {
        const T* d = weights[wi].ptr();
        for (std::int64_t i = 0; i < weights[wi].size(); ++i)
            entries.push_back({std::abs(static_cast<double>(d[i])), static_cast<std::int32_t>(wi), i});
    }
    // Ties resolved by position so the selection is reproducible.
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.mag != b.mag) return a.mag < b.mag;
        if (a.tensor != b.tensor) return a.tensor < b.tensor;
        return a.index < b.index;
    });
    for (std::int64_t k = 0; k < to_zero; ++k) {
        const Entry& e = entries[static_cast<std::size_t>(k)];
        weights[static_cast<std::size_t>(e.tensor)].ptr()[e.index] = T(0);
        bitmap_clear(records[static_cast<std::size_t>(e.tensor)].bitmap, e.index);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Canonical Huffman

namespace {

constexpr std::uint8_t kRecHuffman = 0;
constexpr std::uint8_t kRecSingle = 1;
constexpr std::uint8_t kRecEmpty = 2;

struct SymbolLength {
    std::uint16_t symbol;
    std::uint8_t length;
};

// Two-queue Huffman; returns (symbol, code length) pairs. Deterministic:
// leaves are processed in (freq, symbol) order and ties prefer the leaf queue.
std::vector<SymbolLength> huffman_lengths(const std::map<std::uint16_t, std::int64_t>& freq) {
    struct NodeInfo {
        std::int64_t weight;
        int left = -1, right = -1;
        int symbol = -1;
    };
    std::vector<NodeInfo> nodes;
    std::vector<int> leaves;
    for (const auto& [sym, f] : freq) {
        nodes.push_back({f, -1, -1, sym});
        leaves.push_back(static_cast<int>(nodes.size()) - 1);
    }
    std::sort(leaves.begin(), leaves.end(), [&](int a, int b) {
        if (nodes[a].weight != nodes[b].weight) return nodes[a].weight < nodes[b].weight;
        return nodes[a].symbol < nodes[b].symbol;
    });
    std::vector<int> merged;
    std::size_t li = 0, mi = 0;
    auto take = [&]() {
        const bool leaf_ok = li < leaves.size();
        const bool merge_ok = mi < merged.size();
        if (leaf_ok && (!merge_ok || nodes[leaves[li]].weight <= nodes[merged[mi]].weight))
            return leaves[li++];
        return merged[mi++];
    };
    const std::size_t count = leaves.size();
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const int a = take();
        const int b = take();
        nodes.push_back({nodes[a].weight + nodes[b].weight, a, b, -1});
        merged.push_back(static_cast<int>(nodes.size()) - 1);
    }
    // Depth-first assignment of depths.
    std::vector<SymbolLength> out;
    std::vector<std::pair<int, int>> stack{{merged.empty() ? leaves[0] : merged.back(), 0}};
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        const NodeInfo& n = nodes[static_cast<std::size_t>(idx)];
        if (n.symbol >= 0) {
            if (depth > 63) throw FormatError("huffman: code length exceeds 63 bits");
            out.push_back({static_cast<std::uint16_t>(n.symbol), static_cast<std::uint8_t>(depth)});
        } else {
            stack.emplace_back(n.left, depth + 1);
            stack.emplace_back(n.right, depth + 1);
        }
    }
    std::sort(out.begin(), out.end(), [](const SymbolLength& a, const SymbolLength& b) {
        if (a.length != b.length) return a.length < b.length;
        return a.symbol < b.symbol;
    });
    return out;
}

struct BitWriter {
    std::vector<std::uint8_t> bytes;
    std::uint64_t acc = 0;
    int used = 0;
    std::uint64_t bits = 0;

    void push(std::uint64_t code, int len) {
        bits += static_cast<std::uint64_t>(len);
        for (int i = len - 1; i >= 0; --i) {
            acc = (acc << 1) | ((code >> i) & 1);
            if (++used == 8) {
                bytes.push_back(static_cast<std::uint8_t>(acc));
                acc = 0;
                used = 0;
            }
        }
    }
    void flush() {
        if (used) {
            bytes.push_back(static_cast<std::uint8_t>(acc << (8 - used)));
            acc = 0;
            used = 0;
        }
    }
};

struct BitReader {
    const std::uint8_t* p;
    std::size_t nbytes;
    std::size_t pos = 0;
    int bit = 0;

    int next() {
        if (pos >= nbytes) throw FormatError("huffman: bitstream underrun");
        const int b = (p[pos] >> (7 - bit)) & 1;
        if (++bit == 8) {
            bit = 0;
            ++pos;
        }
        return b;
    }
};

}  // namespace

std::vector<std::uint8_t> entropy_encode(const std::vector<std::uint16_t>& codes) {
    std::vector<std::uint8_t> body;
    std::map<std::uint16_t, std::int64_t> freq;
    for (std::uint16_t c : codes) ++freq[c];

    if (freq.empty()) {
        put_u8(body, kRecEmpty);
        put_u32(body, 0);
    } else if (freq.size() == 1) {
        put_u8(body, kRecSingle);
        put_u32(body, static_cast<std::uint32_t>(codes.size()));
        put_u8(body, static_cast<std::uint8_t>(freq.begin()->first));
        put_u8(body, static_cast<std::uint8_t>(freq.begin()->first >> 8));
    } else {
        const auto lengths = huffman_lengths(freq);
        // Canonical codes in (length, symbol) order.
        std::uint64_t next_code = 0;
        int prev_len = lengths.front().length;
        std::map<std::uint16_t, std::pair<std::uint64_t, int>> table;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            if (i) {
                ++next_code;
                next_code <<= (lengths[i].length - prev_len);
            }
            prev_len = lengths[i].length;
            table[lengths[i].symbol] = {next_code, lengths[i].length};
        }
        BitWriter bw;
        for (std::uint16_t c : codes) {
            const auto& [code, len] = table.at(c);
            bw.push(code, len);
        }
        bw.flush();

        put_u8(body, kRecHuffman);
        put_u32(body, static_cast<std::uint32_t>(codes.size()));
        put_u32(body, static_cast<std::uint32_t>(lengths.size()));
        for (const auto& sl : lengths) {
            put_u8(body, static_cast<std::uint8_t>(sl.symbol));
            put_u8(body, static_cast<std::uint8_t>(sl.symbol >> 8));
            put_u8(body, sl.length);
        }
        put_u64(body, bw.bits);
        put_u32(body, static_cast<std::uint32_t>(bw.bytes.size()));
        body.insert(body.end(), bw.bytes.begin(), bw.bytes.end());
    }
    put_u32(body, crc32(body.data(), body.size()));
    return body;
}

std::vector<std::uint16_t> entropy_decode(const std::vector<std::uint8_t>& record) {
    if (record.size() < 4) throw FormatError("entropy record truncated");
    const std::uint32_t stored_crc = static_cast<std::uint32_t>(record[record.size() - 4]) |
                                     (static_cast<std::uint32_t>(record[record.size() - 3]) << 8) |
                                     (static_cast<std::uint32_t>(record[record.size() - 2]) << 16) |
                                     (static_cast<std::uint32_t>(record[record.size() - 1]) << 24);
    if (crc32(record.data(), record.size() - 4) != stored_crc)
        throw FormatError("entropy record failed its CRC32 check");

    ByteReader r(record.data(), record.size() - 4);
    const std::uint8_t kind = r.u8("record kind");
    const std::uint32_t count = r.u32("code count");
    if (kind == kRecEmpty) return {};
    if (kind == kRecSingle) {
        const std::uint16_t sym = static_cast<std::uint16_t>(r.u8("symbol")) |
                                  (static_cast<std::uint16_t>(r.u8("symbol")) << 8);
        return std::vector<std::uint16_t>(count, sym);
    }
    if (kind != kRecHuffman) throw FormatError("unknown entropy record kind");

    const std::uint32_t distinct = r.u32("distinct symbols");
    std::vector<SymbolLength> lengths(distinct);
    for (auto& sl : lengths) {
        sl.symbol = static_cast<std::uint16_t>(r.u8("symbol")) |
                    (static_cast<std::uint16_t>(r.u8("symbol")) << 8);
        sl.length = r.u8("length");
    }
    const std::uint64_t bit_len = r.u64("bit length");
    const std::uint32_t payload_len = r.u32("payload length");
    std::vector<std::uint8_t> payload(payload_len);
    r.raw(payload.data(), payload_len, "payload");

    // Canonical decode tables per length.
    std::uint64_t first_code[64] = {};
    std::uint32_t first_index[64] = {};
    std::uint32_t len_count[64] = {};
    for (const auto& sl : lengths) ++len_count[sl.length];
    std::uint64_t code = 0;
    std::uint32_t index = 0;
    for (int l = 1; l < 64; ++l) {
        code <<= 1;
        first_code[l] = code;
        first_index[l] = index;
        code += len_count[l];
        index += len_count[l];
    }

    std::vector<std::uint16_t> out;
    out.reserve(count);
    BitReader br{payload.data(), payload.size()};
    std::uint64_t consumed = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint64_t acc = 0;
        int len = 0;
        while (true) {
            acc = (acc << 1) | static_cast<std::uint64_t>(br.next());
            ++consumed;
            ++len;
            if (len >= 64) throw FormatError("huffman: runaway code");
            if (len_count[len] && acc - first_code[len] < len_count[len]) {
                out.push_back(lengths[first_index[len] + (acc - first_code[len])].symbol);
                break;
            }
        }
    }
    if (consumed != bit_len) throw FormatError("huffman: bit length mismatch");
    return out;
}

// ---------------------------------------------------------------------------
// Artifact assembly and container I/O

namespace {

constexpr char kMagic[5] = {'D', 'N', 'V', 'C', '1'};

template <typename T>
TensorRecord make_record(const std::string& name, const Tensor<T>& t, int bits,
                         std::vector<std::uint8_t> bitmap) {
    TensorRecord rec;
    rec.name = name;
    rec.shape = t.shape();
    QuantResult q = quantize(t, bits);
    rec.scale = q.scale;
    rec.offset = q.offset;
    rec.bitmap = std::move(bitmap);
    rec.payload = entropy_encode(q.codes);
    return rec;
}

template <typename T>
void restore_tensor(const TensorRecord& rec, Tensor<T>& out) {
    if (rec.shape != out.shape())
        throw FormatError("artifact tensor '" + rec.name + "' has shape " + shape_str(rec.shape) +
                          ", expected " + shape_str(out.shape()));
    QuantResult q;
    q.scale = rec.scale;
    q.offset = rec.offset;
    q.codes = entropy_decode(rec.payload);
    if (static_cast<std::int64_t>(q.codes.size()) != out.size())
        throw FormatError("artifact tensor '" + rec.name + "' has wrong code count");
    dequantize_into(q, out);
    if (!rec.bitmap.empty()) {
        T* d = out.ptr();
        for (std::int64_t i = 0; i < out.size(); ++i)
            if (!bitmap_get(rec.bitmap, i)) d[i] = T(0);
    }
}

std::string frame_record_name(int frame, const char* part) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "frame%06d.%s", frame, part);
    return buf;
}

void put_record(std::vector<std::uint8_t>& out, const TensorRecord& rec) {
    std::vector<std::uint8_t> body;
    put_string(body, rec.name);
    put_u8(body, static_cast<std::uint8_t>(rec.shape.size()));
    for (int d : rec.shape) put_u32(body, static_cast<std::uint32_t>(d));
    put_f64(body, rec.scale);
    put_f64(body, rec.offset);
    put_u8(body, rec.bitmap.empty() ? 0 : 1);
    if (!rec.bitmap.empty()) {
        put_u32(body, static_cast<std::uint32_t>(rec.bitmap.size()));
        body.insert(body.end(), rec.bitmap.begin(), rec.bitmap.end());
    }
    put_u32(body, static_cast<std::uint32_t>(rec.payload.size()));
    body.insert(body.end(), rec.payload.begin(), rec.payload.end());

    put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
    put_u32(out, crc32(body.data(), body.size()));
}

TensorRecord get_record(ByteReader& r) {
    const std::uint32_t body_len = r.u32("record length");
    std::vector<std::uint8_t> body(body_len);
    r.raw(body.data(), body_len, "record body");
    const std::uint32_t stored = r.u32("record crc");
    if (crc32(body.data(), body.size()) != stored)
        throw FormatError("tensor record failed its CRC32 check");

    ByteReader br(body.data(), body.size());
    TensorRecord rec;
    rec.name = br.str("record name");
    const int ndim = br.u8("rank");
    rec.shape.resize(ndim);
    for (int i = 0; i < ndim; ++i) rec.shape[i] = static_cast<int>(br.u32("extent"));
    rec.scale = br.f64("scale");
    rec.offset = br.f64("offset");
    if (br.u8("bitmap flag")) {
        const std::uint32_t n = br.u32("bitmap length");
        rec.bitmap.resize(n);
        br.raw(rec.bitmap.data(), n, "bitmap");
    }
    const std::uint32_t pn = br.u32("payload length");
    rec.payload.resize(pn);
    br.raw(rec.payload.data(), pn, "payload");
    return rec;
}

}  // namespace

template <typename T>
CompressedArtifact compress_model(DnervModel<T>& model,
                                  const std::vector<FrameEmbeddings<T>>& embeddings, int bits,
                                  double prune_ratio) {
    CompressedArtifact art;
    art.config_hash = model.config().hash();
    art.height = model.config().height;
    art.width = model.config().width;
    art.frames = static_cast<int>(embeddings.size());
    art.bits = bits;
    art.prune_ratio = prune_ratio;

    auto prune_records = prune(model, prune_ratio);
    std::size_t pi = 0;
    model.visit_repr_params([&](const std::string& name, Tensor<T>& t) {
        std::vector<std::uint8_t> bitmap;
        if (pi < prune_records.size() && prune_records[pi].name == name)
            bitmap = std::move(prune_records[pi++].bitmap);
        art.weights.push_back(make_record(name, t, bits, std::move(bitmap)));
    });
    for (std::size_t f = 0; f < embeddings.size(); ++f) {
        art.embeddings.push_back(
            make_record(frame_record_name(static_cast<int>(f), "content"), embeddings[f].content, bits, {}));
        if (embeddings[f].diff.defined())
            art.embeddings.push_back(
                make_record(frame_record_name(static_cast<int>(f), "diff"), embeddings[f].diff, bits, {}));
    }
    art.total_bits = 8 * static_cast<std::uint64_t>(serialize_artifact(art).size());
    return art;
}

template <typename T>
std::pair<DnervModel<T>, std::vector<FrameEmbeddings<T>>> decompress(const CompressedArtifact& art,
                                                                     const ModelConfig& cfg) {
    cfg.validate();
    if (cfg.hash() != art.config_hash)
        throw FormatError("decompress: config hash mismatch (artifact was built for a different config)");

    DnervModel<T> model = DnervModel<T>::build(cfg, 0);
    std::size_t wi = 0;
    model.visit_repr_params([&](const std::string& name, Tensor<T>& t) {
        if (wi >= art.weights.size() || art.weights[wi].name != name)
            throw FormatError("decompress: artifact tensor order mismatch at '" + name + "'");
        restore_tensor(art.weights[wi++], t);
    });
    if (wi != art.weights.size()) throw FormatError("decompress: surplus weight records");

    std::vector<FrameEmbeddings<T>> embs(static_cast<std::size_t>(art.frames));
    std::size_t ei = 0;
    for (int f = 0; f < art.frames; ++f) {
        if (ei >= art.embeddings.size() ||
            art.embeddings[ei].name != frame_record_name(f, "content"))
            throw FormatError("decompress: missing content embedding for frame " + std::to_string(f));
        const TensorRecord& crec = art.embeddings[ei++];
        embs[static_cast<std::size_t>(f)].content = Tensor<T>::zeros(crec.shape);
        restore_tensor(crec, embs[static_cast<std::size_t>(f)].content);
        if (model.has_diff_stream()) {
            if (ei >= art.embeddings.size() || art.embeddings[ei].name != frame_record_name(f, "diff"))
                throw FormatError("decompress: missing diff embedding for frame " + std::to_string(f));
            const TensorRecord& drec = art.embeddings[ei++];
            embs[static_cast<std::size_t>(f)].diff = Tensor<T>::zeros(drec.shape);
            restore_tensor(drec, embs[static_cast<std::size_t>(f)].diff);
        }
    }
    return {std::move(model), std::move(embs)};
}

std::vector<std::uint8_t> serialize_artifact(const CompressedArtifact& art) {
    std::vector<std::uint8_t> header;
    put_u64(header, art.config_hash);
    put_u32(header, static_cast<std::uint32_t>(art.height));
    put_u32(header, static_cast<std::uint32_t>(art.width));
    put_u32(header, static_cast<std::uint32_t>(art.frames));
    put_u8(header, static_cast<std::uint8_t>(art.bits));
    put_f64(header, art.prune_ratio);
    put_u64(header, art.total_bits);
    put_u32(header, static_cast<std::uint32_t>(art.weights.size()));
    put_u32(header, static_cast<std::uint32_t>(art.embeddings.size()));
    put_u32(header, crc32(header.data(), header.size()));

    std::vector<std::uint8_t> weights, embeddings;
    for (const auto& rec : art.weights) put_record(weights, rec);
    for (const auto& rec : art.embeddings) put_record(embeddings, rec);

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 5);
    put_u8(out, 1);  // version
    put_u32(out, 3); // section count
    const std::size_t table_at = out.size();
    for (int i = 0; i < 3; ++i) {
        put_u8(out, 0);
        put_u64(out, 0);
        put_u64(out, 0);
    }
    const std::array<std::pair<std::uint8_t, const std::vector<std::uint8_t>*>, 3> sections = {
        std::pair<std::uint8_t, const std::vector<std::uint8_t>*>{1, &header},
        {2, &weights},
        {3, &embeddings}};
    std::size_t cursor = table_at;
    for (const auto& [id, bytes] : sections) {
        const std::uint64_t offset = out.size();
        out.insert(out.end(), bytes->begin(), bytes->end());
        out[cursor] = id;
        for (int i = 0; i < 8; ++i) out[cursor + 1 + i] = static_cast<std::uint8_t>(offset >> (8 * i));
        const std::uint64_t len = bytes->size();
        for (int i = 0; i < 8; ++i) out[cursor + 9 + i] = static_cast<std::uint8_t>(len >> (8 * i));
        cursor += 17;
    }
    return out;
}

CompressedArtifact deserialize_artifact(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 5) != 0)
        throw FormatError("not a DNVC1 artifact");
    ByteReader top(bytes.data() + 5, bytes.size() - 5);
    if (top.u8("version") != 1) throw FormatError("unsupported DNVC version");
    const std::uint32_t nsec = top.u32("section count");
    if (nsec != 3) throw FormatError("unexpected section count");
    struct Section {
        std::uint8_t id;
        std::uint64_t offset, length;
    };
    std::vector<Section> secs(nsec);
    for (auto& s : secs) {
        s.id = top.u8("section id");
        s.offset = top.u64("section offset");
        s.length = top.u64("section length");
        if (s.offset + s.length > bytes.size()) throw FormatError("section exceeds file size");
    }
    auto find = [&](std::uint8_t id) -> const Section& {
        for (const auto& s : secs)
            if (s.id == id) return s;
        throw FormatError("missing section " + std::to_string(id));
    };

    CompressedArtifact art;
    {
        const Section& s = find(1);
        if (s.length < 4) throw FormatError("header section truncated");
        if (crc32(bytes.data() + s.offset, s.length - 4) !=
            (static_cast<std::uint32_t>(bytes[s.offset + s.length - 4]) |
             (static_cast<std::uint32_t>(bytes[s.offset + s.length - 3]) << 8) |
             (static_cast<std::uint32_t>(bytes[s.offset + s.length - 2]) << 16) |
             (static_cast<std::uint32_t>(bytes[s.offset + s.length - 1]) << 24)))
            throw FormatError("header failed its CRC32 check");
        ByteReader r(bytes.data() + s.offset, s.length - 4);
        art.config_hash = r.u64("config hash");
        art.height = static_cast<int>(r.u32("height"));
        art.width = static_cast<int>(r.u32("width"));
        art.frames = static_cast<int>(r.u32("frames"));
        art.bits = r.u8("bits");
        art.prune_ratio = r.f64("prune ratio");
        art.total_bits = r.u64("total bits");
        const std::uint32_t wc = r.u32("weight count");
        const std::uint32_t ec = r.u32("embedding count");
        const Section& ws = find(2);
        ByteReader wr(bytes.data() + ws.offset, ws.length);
        for (std::uint32_t i = 0; i < wc; ++i) art.weights.push_back(get_record(wr));
        const Section& es = find(3);
        ByteReader er(bytes.data() + es.offset, es.length);
        for (std::uint32_t i = 0; i < ec; ++i) art.embeddings.push_back(get_record(er));
    }
    return art;
}

void save_artifact(const std::string& path, const CompressedArtifact& art) {
    const auto bytes = serialize_artifact(art);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot create " + path);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("short write to " + path);
}

CompressedArtifact load_artifact(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return deserialize_artifact(bytes);
}

double compute_bpp(const CompressedArtifact& art, int frames, int H, int W) {
    if (frames < 1 || H < 1 || W < 1) throw UsageError("compute_bpp: T, H, W must be positive");
    return static_cast<double>(art.total_bits) / (static_cast<double>(frames) * H * W);
}

double estimate_bpp(std::int64_t weight_count, std::int64_t embed_values_per_frame, int frames,
                    int H, int W, int bits) {
    if (frames < 1 || H < 1 || W < 1) throw UsageError("estimate_bpp: T, H, W must be positive");
    const double total = (static_cast<double>(weight_count) +
                          static_cast<double>(frames) * static_cast<double>(embed_values_per_frame)) *
                         bits;
    return total / (static_cast<double>(frames) * H * W);
}

#define DNERV_INSTANTIATE_CODEC(T)                                                            \
    template QuantResult quantize<T>(const Tensor<T>&, int);                                  \
    template void dequantize_into<T>(const QuantResult&, Tensor<T>&);                         \
    template std::vector<PruneRecord> prune<T>(DnervModel<T>&, double);                       \
    template CompressedArtifact compress_model<T>(DnervModel<T>&,                             \
                                                  const std::vector<FrameEmbeddings<T>>&, int, \
                                                  double);                                    \
    template std::pair<DnervModel<T>, std::vector<FrameEmbeddings<T>>> decompress<T>(         \
        const CompressedArtifact&, const ModelConfig&);

DNERV_INSTANTIATE_CODEC(float)
DNERV_INSTANTIATE_CODEC(double)
#undef DNERV_INSTANTIATE_CODEC

}  // namespace dnerv
