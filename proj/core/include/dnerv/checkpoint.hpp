#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "dnerv/model.hpp"
#include "dnerv/train.hpp"

namespace dnerv {

// .dnck container: magic, canonical config text, seed, step counter and the
// raw parameter tensors (shape + little-endian 32/64-bit values). Loading a
// checkpoint reproduces the saved model bit for bit.
struct CheckpointMeta {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::int64_t step = 0;
    Precision precision = Precision::F32;
};

template <typename T>
void save_checkpoint(const std::string& path, DnervModel<T>& model, std::uint64_t seed,
                     std::int64_t step);

// Reads config/seed/step/precision without loading tensors.
CheckpointMeta read_checkpoint_meta(const std::string& path);

template <typename T>
std::pair<DnervModel<T>, CheckpointMeta> load_checkpoint(const std::string& path);

extern template void save_checkpoint<float>(const std::string&, DnervModel<float>&, std::uint64_t,
                                            std::int64_t);
extern template void save_checkpoint<double>(const std::string&, DnervModel<double>&, std::uint64_t,
                                             std::int64_t);
extern template std::pair<DnervModel<float>, CheckpointMeta> load_checkpoint<float>(const std::string&);
extern template std::pair<DnervModel<double>, CheckpointMeta> load_checkpoint<double>(const std::string&);

}  // namespace dnerv
