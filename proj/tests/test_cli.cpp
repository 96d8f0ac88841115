#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " > " + (g_work / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WEXITSTATUS(status);
    std::ifstream is(g_work / "stdout.txt");
    std::stringstream ss;
    ss << is.rdbuf();
    r.out = ss.str();
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_mini_config(const fs::path& p, int epochs) {
    std::ofstream os(p);
    os << "height = 32\nwidth = 32\ncontent_strides = 2,2,2\ndiff_strides = 2\n"
       << "c_init = 16\nccu_kernel = 3\n"
       << "epochs = " << epochs << "\nbase_lr = 5e-4\neval_every = 1\nprecision = f32\n";
}

double parse_psnr(const std::string& out) {
    const auto pos = out.find("psnr ");
    REQUIRE(pos != std::string::npos);
    return std::stod(out.substr(pos + 5));
}

}  // namespace

TEST_CASE("cli: bad usage exits with 2, runtime failures with 1") {
    CHECK(run_cli("definitely-not-a-command").code == 2);
    CHECK(run_cli("shapes --no-such-flag").code == 2);
    CHECK(run_cli("synth --kind moving_square --out x").code == 2);  // --seed missing
    CHECK(run_cli("shapes").code == 1);                              // config xor preset
    CHECK(run_cli("shapes --preset nosuch").code == 1);
    CHECK(run_cli("eval --checkpoint missing.dnck --video nowhere").code == 1);
}

TEST_CASE("cli: shapes prints the published architecture table") {
    auto r = run_cli("shapes --preset uvg-960x1920-3m");
    CHECK(r.code == 0);
    CHECK(r.out.find("content embedding: 16x2x4") != std::string::npos);
    CHECK(r.out.find("diff embedding: 2x40x80") != std::string::npos);
    CHECK(r.out.find("channel schedule: 76,63,52,43,35") != std::string::npos);
    CHECK(r.out.find("2x4 -> 10x20 -> 40x80 -> 160x320 -> 480x960 -> 960x1920") != std::string::npos);
}

TEST_CASE("cli: synth, train, eval, compress, decompress pipeline") {
    const fs::path cfg = g_work / "mini.cfg";
    write_mini_config(cfg, 3);
    const std::string video = (g_work / "clip").string();
    const std::string ck = (g_work / "run.dnck").string();

    CHECK(run_cli("synth --kind moving_square --frames 4 --height 32 --width 32 --velocity 3 "
                  "--seed 5 --out " + video).code == 0);
    CHECK(fs::exists(fs::path(video) / "frame_000003.ppm"));

    auto tr = run_cli("train --config " + cfg.string() + " --video " + video + " --seed 5 --out " +
                      ck + " --log " + (g_work / "train.csv").string());
    CHECK(tr.code == 0);
    CHECK(fs::exists(ck));
    {
        std::ifstream is(g_work / "train.csv");
        std::string header;
        std::getline(is, header);
        CHECK(header == "epoch,task,psnr_db,ssim,loss,lr");
        int rows = 0;
        std::string line;
        while (std::getline(is, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 3);
    }

    auto ev = run_cli("eval --checkpoint " + ck + " --video " + video + " --log " +
                      (g_work / "eval.csv").string() + " --dump " + (g_work / "recon").string());
    CHECK(ev.code == 0);
    CHECK(fs::exists(g_work / "recon" / "frame_000003.ppm"));
    const double eval_psnr = parse_psnr(ev.out);

    auto ip = run_cli("interpolate --checkpoint " + ck + " --video " + video);
    CHECK(ip.code == 0);
    auto inp = run_cli("inpaint --checkpoint " + ck + " --video " + video +
                       " --mask-kind central --mask-scale 1.0");
    CHECK(inp.code == 0);

    const std::string art = (g_work / "run.dnvc").string();
    auto co = run_cli("compress --checkpoint " + ck + " --video " + video + " --bits 8 --prune 0.1 --out " + art);
    CHECK(co.code == 0);
    CHECK(co.out.find("bpp") != std::string::npos);

    auto de = run_cli("decompress --in " + art + " --config " + cfg.string() + " --out " +
                      (g_work / "restored.dnck").string() + " --base-checkpoint " + ck);
    CHECK(de.code == 0);
    CHECK(fs::exists(g_work / "restored.dnck"));

    auto ea = run_cli("eval --artifact " + art + " --config " + cfg.string() + " --video " + video);
    CHECK(ea.code == 0);
    // Quantization ordering on a trained model is covered by the acceptance
    // suite; here only check the decoded artifact scores in the same range.
    CHECK(std::abs(parse_psnr(ea.out) - eval_psnr) < 1.0);
}

TEST_CASE("cli: identical seeds give byte-identical outputs") {
    const fs::path cfg = g_work / "mini2.cfg";
    write_mini_config(cfg, 2);
    const std::string video = (g_work / "clip2").string();
    CHECK(run_cli("synth --kind scene_cut --frames 4 --height 32 --width 32 --velocity 2 --seed 8 "
                  "--out " + video).code == 0);
    for (int run = 1; run <= 2; ++run) {
        const std::string tag = std::to_string(run);
        CHECK(run_cli("train --config " + cfg.string() + " --video " + video + " --seed 21 --out " +
                      (g_work / ("d" + tag + ".dnck")).string() + " --log " +
                      (g_work / ("d" + tag + ".csv")).string()).code == 0);
    }
    CHECK(read_file(g_work / "d1.dnck") == read_file(g_work / "d2.dnck"));
    CHECK(read_file(g_work / "d1.csv") == read_file(g_work / "d2.csv"));
}

int main(int argc, char** argv) {
    std::vector<char*> rest;
    for (int i = 0; i < argc; ++i) {
        const std::string a = argv[i];
        if (a.rfind("--cli=", 0) == 0)
            g_cli = a.substr(6);
        else
            rest.push_back(argv[i]);
    }
    if (g_cli.empty()) {
        const char* env = std::getenv("DNERV_CLI");
        if (env) g_cli = env;
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "test_cli: pass --cli=/path/to/dnerv or set DNERV_CLI\n");
        return 1;
    }
    g_work = fs::temp_directory_path() / "dnerv_cli_test";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    doctest::Context ctx;
    ctx.applyCommandLine(static_cast<int>(rest.size()), rest.data());
    const int rc = ctx.run();
    fs::remove_all(g_work);
    return rc;
}
