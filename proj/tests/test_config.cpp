#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnerv/config_file.hpp"

using namespace dnerv;

TEST_CASE("run config parses model and train keys") {
    const std::string text = R"(
# desk-scale run
height = 64
width = 128
content_strides = 4,2,2,2
diff_strides = 2,2
c_init = 32
fusion_variant = ccu
fusion_stage = 3
diff_variant = concat_bf
ccu_kernel = 3

epochs = 12
base_lr = 5e-4
loss = l1_ssim
alpha = 0.7
seed = 99
eval_every = 4
precision = f64
)";
    RunConfig cfg = parse_config_text(text, "inline");
    CHECK(cfg.model.height == 64);
    CHECK(cfg.model.content_strides == std::vector<int>{4, 2, 2, 2});
    CHECK(cfg.model.fusion_variant == FusionVariant::Ccu);
    CHECK(cfg.train.epochs == 12);
    CHECK(cfg.train.loss == LossKind::L1Ssim);
    CHECK(cfg.train.seed == 99);
    CHECK(cfg.train.precision == Precision::F64);
}

TEST_CASE("unknown keys are hard errors") {
    CHECK_THROWS_AS((void)parse_config_text("preset = tiny-64x128\nc_int = 32\n", "inline"),
                    ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("preset = tiny-64x128\nepoch = 5\n", "inline"),
                    ConfigError);
}

TEST_CASE("preset seeds the model and later keys override") {
    RunConfig cfg = parse_config_text("preset = tiny-64x128\nc_init = 48\nepochs = 3\n", "inline");
    CHECK(cfg.model.height == 64);
    CHECK(cfg.model.width == 128);
    CHECK(cfg.model.c_init == 48);
    CHECK(cfg.train.epochs == 3);
    CHECK_THROWS_AS((void)parse_config_text("preset = nosuch\n", "inline"), ConfigError);
}

TEST_CASE("malformed values are reported with the key") {
    try {
        (void)parse_config_text("preset = tiny-64x128\nepochs = twelve\n", "inline");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("epochs") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_config_text("height\n", "inline"), ConfigError);
}

TEST_CASE("invalid train settings are rejected") {
    CHECK_THROWS_AS((void)parse_config_text("preset = tiny-64x128\nalpha = 1.5\n", "inline"),
                    ConfigError);
    CHECK_THROWS_AS((void)parse_config_text("preset = tiny-64x128\nepochs = 0\n", "inline"),
                    ConfigError);
}

TEST_CASE("every shipped preset validates") {
    for (const auto& name : preset_names()) {
        ModelConfig cfg = preset(name);
        CHECK_NOTHROW(cfg.validate());
        CHECK(param_count(cfg) > 0);
    }
}
