#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnerv/model.hpp"
#include "dnerv/video.hpp"

namespace dnerv {

enum class Task { Regression, Interpolation, Inpainting };
enum class LossKind { L2, L1Ssim };
enum class Precision { F32, F64 };

Task task_from_string(const std::string& s);
std::string to_string(Task t);
LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);
Precision precision_from_string(const std::string& s);
std::string to_string(Precision p);

struct TrainConfig {
    int epochs = 1;
    double base_lr = 5e-4;
    LossKind loss = LossKind::L2;
    double alpha = 0.7;  // L1 weight in the L1+SSIM objective
    std::uint64_t seed = 0;
    int eval_every = 1;
    Precision precision = Precision::F32;

    void validate() const;
};

// Mean squared error over all pixels and channels.
template <typename T>
Tensor<T> loss_l2(const Tensor<T>& pred, const Tensor<T>& target);

// alpha * mean|pred - target| + (1 - alpha) * (1 - SSIM(pred, target)).
template <typename T>
Tensor<T> loss_l1_ssim(const Tensor<T>& pred, const Tensor<T>& target, T alpha);

struct EpochLog {
    int epoch = 0;
    double psnr = 0, ssim = 0, loss = 0, lr = 0;
};

struct FrameScore {
    int frame = 0;
    double psnr = 0, ssim = 0, loss = 0;
};

template <typename T>
struct TrainResult {
    std::vector<EpochLog> log;
    std::int64_t steps = 0;
};

// Batch-size-1 training over seeded-shuffled frame order with a cosine LR
// over epochs*frames steps. Logged rows are frozen-weight evaluations over
// the training frames, written every eval_every epochs and at the end.
// Task::Interpolation trains on the even-index subsequence;
// Task::Inpainting shares the regression protocol (no fine-tuning on masks).
template <typename T>
TrainResult<T> train(DnervModel<T>& model, const VideoSequence<T>& video, Task task,
                     const TrainConfig& cfg);

// Forward-only scoring. Regression reconstructs every frame of `video`;
// interpolation scores the odd-index subsequence from its own inputs;
// inpainting feeds masked frames and masked-frame diffs but scores against
// the clean frames. `mask` is required exactly for inpainting.
template <typename T>
std::vector<FrameScore> evaluate(const DnervModel<T>& model, const VideoSequence<T>& video,
                                 Task task, const MaskSpec* mask, LossKind loss_kind, double alpha);

void write_train_csv(const std::string& path, Task task, const std::vector<EpochLog>& log);
void write_eval_csv(const std::string& path, Task task, const std::vector<FrameScore>& scores);

#define DNERV_DECLARE_TRAIN(T)                                                                  \
    extern template Tensor<T> loss_l2<T>(const Tensor<T>&, const Tensor<T>&);                   \
    extern template Tensor<T> loss_l1_ssim<T>(const Tensor<T>&, const Tensor<T>&, T);           \
    extern template TrainResult<T> train<T>(DnervModel<T>&, const VideoSequence<T>&, Task,      \
                                            const TrainConfig&);                                \
    extern template std::vector<FrameScore> evaluate<T>(const DnervModel<T>&,                   \
                                                        const VideoSequence<T>&, Task,         \
                                                        const MaskSpec*, LossKind, double);

DNERV_DECLARE_TRAIN(float)
DNERV_DECLARE_TRAIN(double)
#undef DNERV_DECLARE_TRAIN

}  // namespace dnerv
