// dnerv: two-stream implicit video representation trainer/codec.
//
// Subcommands: synth, train, eval, interpolate, inpaint, compress,
// decompress, gradcheck, shapes. See README.md for a walkthrough.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "dnerv/checkpoint.hpp"
#include "dnerv/codec.hpp"
#include "dnerv/config_file.hpp"
#include "dnerv/gradcheck.hpp"
#include "dnerv/metrics.hpp"
#include "dnerv/train.hpp"

namespace fs = std::filesystem;
using namespace dnerv;

namespace {

struct SynthArgs {
    std::string kind = "moving_square";
    int frames = 16, height = 64, width = 128, velocity = 4;
    std::uint64_t seed = 0;
    std::string out;
};

struct TrainArgs {
    std::string config, video, out, log;
    std::string task = "regression";
    std::uint64_t seed = 0;
};

struct EvalArgs {
    std::string checkpoint, artifact, config, preset_name, video, log, dump;
    std::string task = "regression";
    std::string loss = "l2";
    double alpha = 0.7;
    std::string mask_kind = "central";
    double mask_scale = 1.0;
};

struct CompressArgs {
    std::string checkpoint, video, out;
    int bits = 8;
    double prune_ratio = 0.0;
};

struct DecompressArgs {
    std::string in, config, preset_name, base_checkpoint, out, dump;
};

ModelConfig config_from_flags(const std::string& config_path, const std::string& preset_name,
                              const char* cmd) {
    if (config_path.empty() == preset_name.empty())
        throw UsageError(std::string(cmd) + ": exactly one of --config and --preset is required");
    if (!preset_name.empty()) return preset(preset_name);
    return parse_config_file(config_path).model;
}

template <typename T>
void dump_reconstructions(const DnervModel<T>& model, const VideoSequence<T>& inputs,
                          const std::string& dir) {
    NoGradGuard ng;
    fs::create_directories(dir);
    for (int t = 0; t < inputs.count(); ++t) {
        Tensor<T> diff = diff_stream(inputs, t, model.config().diff_variant);
        Tensor<T> pred = model.forward(inputs.frames[t], diff);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.ppm", t);
        write_ppm(pred, (fs::path(dir) / name).string());
    }
}

int cmd_synth(const SynthArgs& a) {
    NoGradGuard ng;
    auto video = synth_video<float>(synth_kind_from_string(a.kind), a.frames, a.height, a.width,
                                    a.velocity, a.seed);
    if (a.out.size() > 5 && a.out.substr(a.out.size() - 5) == ".dnrv")
        save_video_dnrv(video, a.out);
    else
        save_video_ppm_dir(video, a.out);
    std::printf("wrote %d frames (%dx%d, %s) to %s\n", video.count(), a.height, a.width,
                a.kind.c_str(), a.out.c_str());
    return 0;
}

template <typename T>
int run_train(const TrainArgs& a, RunConfig cfg) {
    cfg.train.seed = a.seed;
    auto video = load_video<T>(a.video);
    auto model = DnervModel<T>::build(cfg.model, a.seed);
    const Task task = task_from_string(a.task);
    auto result = train(model, video, task, cfg.train);
    save_checkpoint(a.out, model, a.seed, result.steps);
    if (!a.log.empty()) write_train_csv(a.log, task, result.log);
    const auto& last = result.log.back();
    std::printf("trained %d epochs (%" PRId64 " steps): psnr %.4f dB, ssim %.6f, loss %.6e\n",
                cfg.train.epochs, result.steps, last.psnr, last.ssim, last.loss);
    std::printf("checkpoint: %s\n", a.out.c_str());
    return 0;
}

int cmd_train(const TrainArgs& a) {
    RunConfig cfg = parse_config_file(a.config);
    return cfg.train.precision == Precision::F32 ? run_train<float>(a, cfg) : run_train<double>(a, cfg);
}

template <typename T>
int run_eval_checkpoint(const EvalArgs& a, Task task) {
    auto [model, meta] = load_checkpoint<T>(a.checkpoint);
    auto video = load_video<T>(a.video);
    const LossKind loss = loss_kind_from_string(a.loss);

    MaskSpec mask;
    const MaskSpec* mask_ptr = nullptr;
    if (task == Task::Inpainting) {
        mask = make_mask(mask_kind_from_string(a.mask_kind), video.height(), video.width(), a.mask_scale);
        mask_ptr = &mask;
    }
    auto scores = evaluate(model, video, task, mask_ptr, loss, a.alpha);
    if (!a.log.empty()) write_eval_csv(a.log, task, scores);

    double mean_psnr = 0, mean_ssim = 0;
    for (const auto& s : scores) {
        mean_psnr += s.psnr;
        mean_ssim += s.ssim;
    }
    mean_psnr /= static_cast<double>(scores.size());
    mean_ssim /= static_cast<double>(scores.size());
    std::printf("%s over %zu frames: psnr %.4f dB, ssim %.6f\n", to_string(task).c_str(),
                scores.size(), mean_psnr, mean_ssim);

    if (!a.dump.empty()) {
        if (task == Task::Regression) {
            dump_reconstructions(model, video, a.dump);
        } else if (task == Task::Interpolation) {
            dump_reconstructions(model, split_even_odd(video).second, a.dump);
        } else {
            VideoSequence<T> masked;
            masked.name = video.name;
            for (const auto& f : video.frames) masked.frames.push_back(apply_mask(f, mask));
            dump_reconstructions(model, masked, a.dump);
        }
    }
    return 0;
}

template <typename T>
int run_eval_artifact(const EvalArgs& a) {
    NoGradGuard ng;
    const ModelConfig cfg = config_from_flags(a.config, a.preset_name, "eval --artifact");
    auto art = load_artifact(a.artifact);
    auto [model, embeddings] = decompress<T>(art, cfg);
    auto video = load_video<T>(a.video);
    if (video.count() != art.frames)
        throw UsageError("eval: artifact stores " + std::to_string(art.frames) + " frames but video has " +
                         std::to_string(video.count()));
    const LossKind loss_kind = loss_kind_from_string(a.loss);

    std::vector<FrameScore> scores;
    if (!a.dump.empty()) fs::create_directories(a.dump);
    for (int t = 0; t < video.count(); ++t) {
        Tensor<T> pred = model.decode(embeddings[static_cast<std::size_t>(t)]);
        FrameScore s;
        s.frame = t;
        s.psnr = psnr(pred, video.frames[t]);
        s.ssim = ssim(pred, video.frames[t]);
        s.loss = loss_kind == LossKind::L2
                     ? static_cast<double>(loss_l2(pred, video.frames[t]).item())
                     : static_cast<double>(loss_l1_ssim(pred, video.frames[t], static_cast<T>(a.alpha)).item());
        scores.push_back(s);
        if (!a.dump.empty()) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%06d.ppm", t);
            write_ppm(pred, (fs::path(a.dump) / name).string());
        }
    }
    if (!a.log.empty()) write_eval_csv(a.log, Task::Regression, scores);

    double mean_psnr = 0, mean_ssim = 0;
    for (const auto& s : scores) {
        mean_psnr += s.psnr;
        mean_ssim += s.ssim;
    }
    mean_psnr /= static_cast<double>(scores.size());
    mean_ssim /= static_cast<double>(scores.size());
    std::printf("decoded artifact over %zu frames: psnr %.4f dB, ssim %.6f (bpp %.6f)\n",
                scores.size(), mean_psnr, mean_ssim, compute_bpp(art, art.frames, art.height, art.width));
    return 0;
}

int cmd_eval(const EvalArgs& a, Task task) {
    if (!a.artifact.empty()) {
        if (!a.checkpoint.empty()) throw UsageError("eval: pass either --checkpoint or --artifact");
        if (task != Task::Regression) throw UsageError("eval: --artifact supports the regression task only");
        // Artifact precision is whatever the stored config's training used;
        // decoding in f32 is the compact-representation contract either way.
        return run_eval_artifact<float>(a);
    }
    if (a.checkpoint.empty()) throw UsageError("eval: --checkpoint or --artifact is required");
    const CheckpointMeta meta = read_checkpoint_meta(a.checkpoint);
    return meta.precision == Precision::F32 ? run_eval_checkpoint<float>(a, task)
                                            : run_eval_checkpoint<double>(a, task);
}

template <typename T>
int run_compress(const CompressArgs& a) {
    NoGradGuard ng;
    auto [model, meta] = load_checkpoint<T>(a.checkpoint);
    auto video = load_video<T>(a.video);
    if (video.height() != meta.config.height || video.width() != meta.config.width)
        throw UsageError("compress: video resolution does not match the checkpoint config");

    std::vector<FrameEmbeddings<T>> embeddings;
    embeddings.reserve(static_cast<std::size_t>(video.count()));
    for (int t = 0; t < video.count(); ++t)
        embeddings.push_back(model.encode(video.frames[t], diff_stream(video, t, meta.config.diff_variant)));

    auto art = compress_model(model, embeddings, a.bits, a.prune_ratio);
    save_artifact(a.out, art);

    std::uint64_t weight_bits = 0, embed_bits = 0;
    for (const auto& r : art.weights)
        weight_bits += 8 * (r.payload.size() + r.bitmap.size());
    for (const auto& r : art.embeddings) embed_bits += 8 * r.payload.size();
    std::printf("compressed %d frames at %d bits, prune %.0f%%\n", art.frames, art.bits,
                100.0 * art.prune_ratio);
    std::printf("  weights+bitmaps: %" PRIu64 " bits\n", weight_bits);
    std::printf("  embeddings:      %" PRIu64 " bits\n", embed_bits);
    std::printf("  container total: %" PRIu64 " bits\n", art.total_bits);
    std::printf("  bpp: %.6f\n", compute_bpp(art, art.frames, art.height, art.width));
    std::printf("artifact: %s\n", a.out.c_str());
    return 0;
}

int cmd_compress(const CompressArgs& a) {
    const CheckpointMeta meta = read_checkpoint_meta(a.checkpoint);
    return meta.precision == Precision::F32 ? run_compress<float>(a) : run_compress<double>(a);
}

int cmd_decompress(const DecompressArgs& a) {
    NoGradGuard ng;
    const ModelConfig cfg = config_from_flags(a.config, a.preset_name, "decompress");
    auto art = load_artifact(a.in);
    auto [model, embeddings] = decompress<float>(art, cfg);

    std::printf("artifact: %d frames %dx%d, %d bits, prune %.0f%%, %zu weight tensors, %zu embedding records\n",
                art.frames, art.width, art.height, art.bits, 100.0 * art.prune_ratio,
                art.weights.size(), art.embeddings.size());
    std::printf("  container total: %" PRIu64 " bits, bpp %.6f\n", art.total_bits,
                compute_bpp(art, art.frames, art.height, art.width));

    if (!a.out.empty()) {
        if (!a.base_checkpoint.empty()) {
            // Keep the trained encoders; only the representation was coded.
            auto [base, meta] = load_checkpoint<float>(a.base_checkpoint);
            if (base.config() != cfg) throw UsageError("decompress: base checkpoint config differs");
            std::vector<Tensor<float>*> src, dst;
            model.visit_repr_params([&](const std::string&, Tensor<float>& t) { src.push_back(&t); });
            base.visit_repr_params([&](const std::string&, Tensor<float>& t) { dst.push_back(&t); });
            for (std::size_t i = 0; i < src.size(); ++i) dst[i]->data() = src[i]->data();
            save_checkpoint(a.out, base, meta.seed, meta.step);
        } else {
            save_checkpoint(a.out, model, 0, 0);
        }
        std::printf("checkpoint: %s\n", a.out.c_str());
    }
    if (!a.dump.empty()) {
        fs::create_directories(a.dump);
        for (int t = 0; t < art.frames; ++t) {
            Tensor<float> pred = model.decode(embeddings[static_cast<std::size_t>(t)]);
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%06d.ppm", t);
            write_ppm(pred, (fs::path(a.dump) / name).string());
        }
        std::printf("decoded frames: %s\n", a.dump.c_str());
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    const auto results = run_gradcheck_suite(seed);
    for (const auto& r : results)
        std::printf("[%s] %-22s max rel err %.3e (tol %.0e)\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.max_rel_err, r.tolerance);
    if (!all_passed(results)) {
        std::fprintf(stderr, "gradcheck: failures detected\n");
        return 1;
    }
    std::printf("gradcheck: all %zu checks passed\n", results.size());
    return 0;
}

int cmd_shapes(const std::string& config_path, const std::string& preset_name) {
    const ModelConfig cfg = config_from_flags(config_path, preset_name, "shapes");
    auto join = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(v[i]);
        }
        return s;
    };
    const auto [ch, cw] = cfg.content_embed_hw();
    std::printf("resolution: %dx%d\n", cfg.height, cfg.width);
    std::printf("content strides: %s\n", join(cfg.content_strides).c_str());
    std::printf("content embedding: %dx%dx%d\n", cfg.content_embed_channels, ch, cw);
    if (cfg.diff_variant != DiffVariant::None) {
        const auto [dh, dw] = cfg.diff_embed_hw();
        std::printf("diff strides: %s\n", join(cfg.diff_strides).c_str());
        std::printf("diff embedding: %dx%dx%d\n", cfg.diff_embed_channels, dh, dw);
    }
    std::printf("channel schedule: %s\n", join(cfg.channel_schedule()).c_str());
    std::printf("decoder kernels: %s\n", join(cfg.resolved_decoder_kernels()).c_str());
    std::string dims = std::to_string(ch) + "x" + std::to_string(cw);
    for (int k = 1; k <= cfg.num_stages(); ++k) {
        auto [h, w] = cfg.stage_entry_hw(k + 1 <= cfg.num_stages() ? k + 1 : cfg.num_stages());
        if (k == cfg.num_stages()) {
            h = cfg.height;
            w = cfg.width;
        }
        dims += " -> " + std::to_string(h) + "x" + std::to_string(w);
    }
    std::printf("stage spatial dims: %s\n", dims.c_str());
    if (cfg.fusion_variant != FusionVariant::None)
        std::printf("fusion: %s at stage %d (ps=%d, kernel %d)\n",
                    to_string(cfg.fusion_variant).c_str(), cfg.fusion_stage, cfg.fusion_ps(),
                    cfg.ccu_kernel);
    std::printf("representation params: %" PRId64 "\n", param_count(cfg));
    std::printf("encoder params: %" PRId64 "\n", encoder_param_count(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dnerv: difference-driven implicit neural video representation"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic test video");
    synth->add_option("--kind", synth_args.kind, "moving_square | static_texture | scene_cut");
    synth->add_option("--frames", synth_args.frames, "frame count")->check(CLI::PositiveNumber);
    synth->add_option("--height", synth_args.height);
    synth->add_option("--width", synth_args.width);
    synth->add_option("--velocity", synth_args.velocity, "square translation in px/frame");
    synth->add_option("--seed", synth_args.seed)->required();
    synth->add_option("--out", synth_args.out, "output directory or .dnrv path")->required();

    TrainArgs train_args;
    auto* tr = app.add_subcommand("train", "fit a model to a video");
    tr->add_option("--config", train_args.config, "run config file")->required();
    tr->add_option("--video", train_args.video, "PPM directory or .dnrv")->required();
    tr->add_option("--seed", train_args.seed, "master seed (init + shuffles)")->required();
    tr->add_option("--out", train_args.out, "checkpoint path")->required();
    tr->add_option("--log", train_args.log, "training CSV path");
    tr->add_option("--task", train_args.task, "regression | interpolation");

    EvalArgs eval_args;
    auto* ev = app.add_subcommand("eval", "score reconstructions of a video");
    ev->add_option("--checkpoint", eval_args.checkpoint);
    ev->add_option("--artifact", eval_args.artifact, "score a compressed .dnvc instead");
    ev->add_option("--config", eval_args.config, "config file (artifact mode)");
    ev->add_option("--preset", eval_args.preset_name, "preset name (artifact mode)");
    ev->add_option("--video", eval_args.video)->required();
    ev->add_option("--log", eval_args.log, "per-frame CSV path");
    ev->add_option("--dump", eval_args.dump, "write reconstructed PPM frames here");
    ev->add_option("--loss", eval_args.loss, "l2 | l1_ssim (loss column)");
    ev->add_option("--alpha", eval_args.alpha);

    EvalArgs interp_args;
    auto* in = app.add_subcommand("interpolate", "score held-out odd frames");
    in->add_option("--checkpoint", interp_args.checkpoint)->required();
    in->add_option("--video", interp_args.video, "the full video; odd frames are scored")->required();
    in->add_option("--log", interp_args.log);
    in->add_option("--dump", interp_args.dump);
    in->add_option("--loss", interp_args.loss);
    in->add_option("--alpha", interp_args.alpha);

    EvalArgs inpaint_args;
    auto* ip = app.add_subcommand("inpaint", "score reconstructions from masked inputs");
    ip->add_option("--checkpoint", inpaint_args.checkpoint)->required();
    ip->add_option("--video", inpaint_args.video)->required();
    ip->add_option("--mask-kind", inpaint_args.mask_kind, "central | disperse");
    ip->add_option("--mask-scale", inpaint_args.mask_scale, "desk-scale shrink factor in (0,1]");
    ip->add_option("--log", inpaint_args.log);
    ip->add_option("--dump", inpaint_args.dump);
    ip->add_option("--loss", inpaint_args.loss);
    ip->add_option("--alpha", inpaint_args.alpha);

    CompressArgs comp_args;
    auto* co = app.add_subcommand("compress", "quantize + prune + entropy-code to .dnvc");
    co->add_option("--checkpoint", comp_args.checkpoint)->required();
    co->add_option("--video", comp_args.video, "video whose embeddings are stored")->required();
    co->add_option("--bits", comp_args.bits)->check(CLI::Range(2, 16));
    co->add_option("--prune", comp_args.prune_ratio, "fraction of weights zeroed")
        ->check(CLI::Range(0.0, 0.999));
    co->add_option("--out", comp_args.out)->required();

    DecompressArgs dec_args;
    auto* de = app.add_subcommand("decompress", "unpack a .dnvc artifact");
    de->add_option("--in", dec_args.in)->required();
    de->add_option("--config", dec_args.config);
    de->add_option("--preset", dec_args.preset_name);
    de->add_option("--base-checkpoint", dec_args.base_checkpoint,
                   "donor checkpoint for encoder weights in --out");
    de->add_option("--out", dec_args.out, "write a checkpoint with the decoded representation");
    de->add_option("--dump", dec_args.dump, "decode stored embeddings to PPM frames");

    std::uint64_t gradcheck_seed = 17;
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    gc->add_option("--seed", gradcheck_seed);

    std::string shapes_config, shapes_preset;
    auto* sh = app.add_subcommand("shapes", "print the architecture table for a config");
    sh->add_option("--config", shapes_config);
    sh->add_option("--preset", shapes_preset);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_args);
        if (tr->parsed()) return cmd_train(train_args);
        if (ev->parsed()) return cmd_eval(eval_args, Task::Regression);
        if (in->parsed()) return cmd_eval(interp_args, Task::Interpolation);
        if (ip->parsed()) {
            return cmd_eval(inpaint_args, Task::Inpainting);
        }
        if (co->parsed()) return cmd_compress(comp_args);
        if (de->parsed()) return cmd_decompress(dec_args);
        if (gc->parsed()) return cmd_gradcheck(gradcheck_seed);
        if (sh->parsed()) return cmd_shapes(shapes_config, shapes_preset);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
