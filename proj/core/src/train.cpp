#include "dnerv/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "dnerv/metrics.hpp"
#include "dnerv/optim.hpp"

namespace dnerv {

Task task_from_string(const std::string& s) {
    if (s == "regression") return Task::Regression;
    if (s == "interpolation") return Task::Interpolation;
    if (s == "inpainting") return Task::Inpainting;
    throw ConfigError("unknown task '" + s + "'");
}

std::string to_string(Task t) {
    switch (t) {
        case Task::Regression: return "regression";
        case Task::Interpolation: return "interpolation";
        case Task::Inpainting: return "inpainting";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "l2") return LossKind::L2;
    if (s == "l1_ssim") return LossKind::L1Ssim;
    throw ConfigError("unknown loss '" + s + "'");
}

std::string to_string(LossKind k) { return k == LossKind::L2 ? "l2" : "l1_ssim"; }

Precision precision_from_string(const std::string& s) {
    if (s == "f32") return Precision::F32;
    if (s == "f64") return Precision::F64;
    throw ConfigError("unknown precision '" + s + "'");
}

std::string to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (base_lr <= 0) throw ConfigError("base_lr must be positive");
    if (alpha < 0 || alpha > 1) throw ConfigError("alpha must lie in [0,1]");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
}

template <typename T>
Tensor<T> loss_l2(const Tensor<T>& pred, const Tensor<T>& target) {
    if (pred.shape() != target.shape())
        throw DimensionError("loss_l2: shape mismatch " + shape_str(pred.shape()) + " vs " +
                             shape_str(target.shape()));
    return mean(square(sub(pred, target)));
}

template <typename T>
Tensor<T> loss_l1_ssim(const Tensor<T>& pred, const Tensor<T>& target, T alpha) {
    if (pred.shape() != target.shape())
        throw DimensionError("loss_l1_ssim: shape mismatch " + shape_str(pred.shape()) + " vs " +
                             shape_str(target.shape()));
    if (alpha < T(0) || alpha > T(1)) throw UsageError("loss_l1_ssim: alpha must lie in [0,1]");
    Tensor<T> l1 = mean(abs_val(sub(pred, target)));
    if (alpha == T(1)) return l1;
    Tensor<T> ssim_term = affine(ssim_graph(pred, target), T(-1), T(1));  // 1 - SSIM
    return add(affine(l1, alpha, T(0)), affine(ssim_term, T(1) - alpha, T(0)));
}

namespace {

template <typename T>
Tensor<T> make_loss(LossKind kind, double alpha, const Tensor<T>& pred, const Tensor<T>& target) {
    return kind == LossKind::L2 ? loss_l2(pred, target)
                                : loss_l1_ssim(pred, target, static_cast<T>(alpha));
}

template <typename T>
std::vector<Tensor<T>> precompute_diffs(const VideoSequence<T>& v, DiffVariant variant) {
    std::vector<Tensor<T>> diffs(v.count());
    if (variant == DiffVariant::None) return diffs;
    for (int t = 0; t < v.count(); ++t) diffs[t] = diff_stream(v, t, variant);
    return diffs;
}

// Scores reconstructions of `inputs` frames against `targets` frames.
template <typename T>
std::vector<FrameScore> score_frames(const DnervModel<T>& model, const VideoSequence<T>& inputs,
                                     const VideoSequence<T>& targets, LossKind loss_kind,
                                     double alpha) {
    NoGradGuard ng;
    const auto diffs = precompute_diffs(inputs, model.config().diff_variant);
    std::vector<FrameScore> scores;
    scores.reserve(inputs.count());
    for (int t = 0; t < inputs.count(); ++t) {
        Tensor<T> pred = model.forward(inputs.frames[t], diffs[t]);
        FrameScore s;
        s.frame = t;
        s.psnr = psnr(pred, targets.frames[t]);
        s.ssim = ssim(pred, targets.frames[t]);
        s.loss = static_cast<double>(make_loss(loss_kind, alpha, pred, targets.frames[t]).item());
        scores.push_back(s);
    }
    return scores;
}

}  // namespace

template <typename T>
std::vector<FrameScore> evaluate(const DnervModel<T>& model, const VideoSequence<T>& video,
                                 Task task, const MaskSpec* mask, LossKind loss_kind, double alpha) {
    if ((mask != nullptr) != (task == Task::Inpainting))
        throw UsageError("evaluate: a mask is required exactly for the inpainting task");
    switch (task) {
        case Task::Regression:
            return score_frames(model, video, video, loss_kind, alpha);
        case Task::Interpolation: {
            auto [train_seq, test_seq] = split_even_odd(video);
            return score_frames(model, test_seq, test_seq, loss_kind, alpha);
        }
        case Task::Inpainting: {
            VideoSequence<T> masked;
            masked.name = video.name + "-masked";
            masked.fps = video.fps;
            for (const auto& f : video.frames) masked.frames.push_back(apply_mask(f, *mask));
            return score_frames(model, masked, video, loss_kind, alpha);
        }
    }
    return {};
}

template <typename T>
TrainResult<T> train(DnervModel<T>& model, const VideoSequence<T>& video, Task task,
                     const TrainConfig& cfg) {
    cfg.validate();
    if (video.count() < 1) throw UsageError("train: empty video");
    if (video.height() != model.config().height || video.width() != model.config().width)
        throw DimensionError("train: video " + std::to_string(video.height()) + "x" +
                             std::to_string(video.width()) + " does not match model resolution");

    const VideoSequence<T> train_seq =
        task == Task::Interpolation ? split_even_odd(video).first : video;
    const auto diffs = precompute_diffs(train_seq, model.config().diff_variant);
    const int frames = train_seq.count();
    const std::int64_t total_steps = static_cast<std::int64_t>(cfg.epochs) * frames;

    Adam<T> opt(model.params());
    Rng shuffle_rng(cfg.seed);
    std::vector<int> order(frames);
    std::iota(order.begin(), order.end(), 0);

    TrainResult<T> result;
    std::int64_t step = 0;
    double last_lr = cfg.base_lr;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (int idx : order) {
            const double lr = cosine_lr(step, total_steps, cfg.base_lr);
            opt.zero_grad();
            Tensor<T> pred = model.forward(train_seq.frames[idx], diffs[idx]);
            Tensor<T> loss = make_loss(cfg.loss, cfg.alpha, pred, train_seq.frames[idx]);
            const double lv = static_cast<double>(loss.item());
            if (!std::isfinite(lv))
                throw NumericError("training diverged: non-finite loss at step " + std::to_string(step) +
                                   " (epoch " + std::to_string(epoch) + ", frame " + std::to_string(idx) + ")");
            backward(loss);
            opt.step(lr);
            last_lr = lr;
            ++step;
        }
        if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
            const auto scores = score_frames(model, train_seq, train_seq, cfg.loss, cfg.alpha);
            EpochLog row;
            row.epoch = epoch;
            for (const auto& s : scores) {
                row.psnr += s.psnr;
                row.ssim += s.ssim;
                row.loss += s.loss;
            }
            row.psnr /= frames;
            row.ssim /= frames;
            row.loss /= frames;
            row.lr = last_lr;
            result.log.push_back(row);
        }
    }
    result.steps = step;
    return result;
}

namespace {

std::string fmt_row(double psnr_db, double ssim_v, double loss, double lr) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.6f,%.8f,%.10e,%.10e", psnr_db, ssim_v, loss, lr);
    return buf;
}

}  // namespace

void write_train_csv(const std::string& path, Task task, const std::vector<EpochLog>& log) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot create " + path);
    os << "epoch,task,psnr_db,ssim,loss,lr\n";
    for (const auto& row : log)
        os << row.epoch << ',' << to_string(task) << ',' << fmt_row(row.psnr, row.ssim, row.loss, row.lr)
           << '\n';
    if (!os) throw IoError("short write to " + path);
}

void write_eval_csv(const std::string& path, Task task, const std::vector<FrameScore>& scores) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot create " + path);
    os << "frame,task,psnr_db,ssim,loss,lr\n";
    for (const auto& s : scores)
        os << s.frame << ',' << to_string(task) << ',' << fmt_row(s.psnr, s.ssim, s.loss, 0.0) << '\n';
    if (!os) throw IoError("short write to " + path);
}

#define DNERV_INSTANTIATE_TRAIN(T)                                                          \
    template Tensor<T> loss_l2<T>(const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> loss_l1_ssim<T>(const Tensor<T>&, const Tensor<T>&, T);              \
    template TrainResult<T> train<T>(DnervModel<T>&, const VideoSequence<T>&, Task,         \
                                     const TrainConfig&);                                   \
    template std::vector<FrameScore> evaluate<T>(const DnervModel<T>&, const VideoSequence<T>&, \
                                                 Task, const MaskSpec*, LossKind, double);

DNERV_INSTANTIATE_TRAIN(float)
DNERV_INSTANTIATE_TRAIN(double)
#undef DNERV_INSTANTIATE_TRAIN

}  // namespace dnerv
