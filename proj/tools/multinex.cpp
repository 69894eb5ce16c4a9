// Command-line frontend: enhancement, training, guidance-stack dumps,
// descriptor analysis, paired evaluation, and model accounting.
//
// Exit codes: 0 success, 1 domain error (invalid values, incompatible
// shapes), 2 usage or I/O error (bad flags, unreadable or corrupt files).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "multinex/analysis.hpp"
#include "multinex/checkpoint.hpp"
#include "multinex/dataset.hpp"
#include "multinex/guidance.hpp"
#include "multinex/image_io.hpp"
#include "multinex/loss.hpp"
#include "multinex/metrics.hpp"
#include "multinex/nn.hpp"
#include "multinex/threading.hpp"
#include "multinex/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace multinex;

namespace {

// Affine map to [0,1] for previewing signed maps; prints the applied range.
Tensor normalized_preview(const Tensor& t, const std::string& label) {
    const float lo = min_value(t), hi = max_value(t);
    if (hi > lo) {
        std::printf("%s: range [%g, %g] mapped to [0,1]\n", label.c_str(),
                    static_cast<double>(lo), static_cast<double>(hi));
        return map(t, [lo, hi](float v) { return (v - lo) / (hi - lo); });
    }
    std::printf("%s: constant %g, mapped to 0.5\n", label.c_str(),
                static_cast<double>(lo));
    return Tensor(t.height(), t.width(), t.channels(), 0.5f);
}

Tensor preview64(const Tensor64& t, const std::string& label) {
    return normalized_preview(t.cast<float>(), label);
}

std::vector<std::string> list_images_sorted(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".png" || ext == ".ppm") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

// ---- enhance ----------------------------------------------------------------

struct EnhanceArgs {
    std::string input, ckpt, output, variant = "lightweight", dump_dir;
};

void run_enhance(const EnhanceArgs& a) {
    const Tensor img = load_image(a.input);
    nn::ModelParams params = nn::make_params(nn::VariantConfig::by_name(a.variant));
    checkpoint::load(a.ckpt, params);
    const nn::EnhanceResult r = nn::enhance(params, img);
    save_image(a.output, r.enhanced);
    std::printf("wrote %s (%dx%d)\n", a.output.c_str(), r.enhanced.width(),
                r.enhanced.height());
    if (!a.dump_dir.empty()) {
        fs::create_directories(a.dump_dir);
        save_image(a.dump_dir + "/delta_l.png", normalized_preview(r.delta_l, "delta_l"));
        save_image(a.dump_dir + "/delta_r.png", normalized_preview(r.delta_r, "delta_r"));
    }
}

// ---- train --------------------------------------------------------------------

struct TrainArgs {
    std::string data, out, variant = "lightweight", config;
    int iters = -1, batch = -1, patch = -1, log_interval = -1, ckpt_interval = -1;
    int64_t seed = -1;
    double lr_start = -1.0, lr_end = -1.0;
    bool no_augment = false;
};

void apply_config_file(train::TrainConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error(path + ": cannot open config");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path + ": config must be a JSON object");
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "iterations") cfg.iterations = val.get<int>();
            else if (key == "batch") cfg.batch = val.get<int>();
            else if (key == "patch") cfg.patch = val.get<int>();
            else if (key == "seed") cfg.seed = val.get<uint64_t>();
            else if (key == "lr_start") cfg.lr_start = val.get<double>();
            else if (key == "lr_end") cfg.lr_end = val.get<double>();
            else if (key == "lambda_mse") cfg.weights.mse = val.get<double>();
            else if (key == "lambda_msssim") cfg.weights.msssim = val.get<double>();
            else if (key == "lambda_perceptual") cfg.weights.perceptual = val.get<double>();
            else if (key == "augment_crop") cfg.augment.random_crop = val.get<bool>();
            else if (key == "augment_flips") cfg.augment.flips = val.get<bool>();
            else if (key == "augment_rotations") cfg.augment.rotations = val.get<bool>();
            else if (key == "log_interval") cfg.log_interval = val.get<int>();
            else if (key == "checkpoint_interval") cfg.checkpoint_interval = val.get<int>();
            else throw std::runtime_error(path + ": unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ": bad value for '" + key + "': " + e.what());
        }
    }
}

void run_train(const TrainArgs& a) {
    train::TrainConfig cfg;
    if (!a.config.empty()) apply_config_file(cfg, a.config);
    if (a.iters >= 0) cfg.iterations = a.iters;
    if (a.batch >= 0) cfg.batch = a.batch;
    if (a.patch >= 0) cfg.patch = a.patch;
    if (a.seed >= 0) cfg.seed = static_cast<uint64_t>(a.seed);
    if (a.lr_start >= 0.0) cfg.lr_start = a.lr_start;
    if (a.lr_end >= 0.0) cfg.lr_end = a.lr_end;
    if (a.log_interval >= 0) cfg.log_interval = a.log_interval;
    if (a.ckpt_interval >= 0) cfg.checkpoint_interval = a.ckpt_interval;
    if (a.no_augment) cfg.augment = {false, false, false};

    const data::PairedDataset ds = data::PairedDataset::open(a.data);
    std::printf("training %s on %zu pairs, %d iterations\n", a.variant.c_str(), ds.size(),
                cfg.iterations);
    const train::TrainResult res =
        train::fit(ds, nn::VariantConfig::by_name(a.variant), cfg, a.out);
    if (!res.trace.empty()) {
        const auto& last = res.trace.back();
        std::printf("final loss %.6g (mse %.6g, msssim %.6g) at iteration %d\n",
                    last.total, last.mse, last.msssim, last.iter);
    }
    std::printf("wrote %s/checkpoint_final.mnx\n", a.out.c_str());
}

// ---- stacks --------------------------------------------------------------------

struct StacksArgs {
    std::string input, out, which = "all";
};

void run_stacks(const StacksArgs& a) {
    const Tensor img = load_image(a.input);
    fs::create_directories(a.out);
    int files = 0;
    const auto dump = [&](const Tensor& stack, const std::vector<std::string>& names) {
        guidance::dump_stack(stack, names, a.out);
        files += static_cast<int>(names.size());
    };
    if (a.which == "all" || a.which == "luminance")
        dump(guidance::luminance_stack(img), guidance::luminance_names());
    if (a.which == "all" || a.which == "reflectance")
        dump(guidance::reflectance_stack(img), guidance::reflectance_names());
    if (a.which == "all" || a.which == "extended")
        dump(guidance::extended_stack(img), guidance::extended_names());
    std::printf("wrote %d channel images to %s\n", files, a.out.c_str());
}

// ---- analyze -------------------------------------------------------------------

struct DiaArgs {
    std::string input, out;
    std::vector<std::string> pool;
};

void run_dia(const DiaArgs& a) {
    const Tensor img = load_image(a.input);
    const analysis::ImportanceReport rep = analysis::descriptor_importance(img, a.pool);
    fs::create_directories(a.out);

    std::ofstream csv(a.out + "/importance.csv", std::ios::binary);
    if (!csv) throw std::runtime_error(a.out + "/importance.csv: cannot open");
    csv << "name,delta_g,delta_e,rank_g,rank_e,avg_rank\n";
    char buf[256];
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%d,%d,%.1f\n", r.name.c_str(),
                      r.delta_g, r.delta_e, r.rank_g, r.rank_e, r.avg_rank);
        csv << buf;
    }
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        const std::string& n = rep.rows[i].name;
        save_image(a.out + "/delta_g_" + n + ".png",
                   preview64(rep.delta_g_maps[i], "delta_g_" + n));
        save_image(a.out + "/delta_e_" + n + ".png",
                   preview64(rep.delta_e_maps[i], "delta_e_" + n));
    }
    std::printf("wrote %s/importance.csv (%zu candidates)\n", a.out.c_str(),
                rep.rows.size());
}

struct LraArgs {
    std::string input, out, stack = "reflectance", target = "self";
    int dims = 3;
    double lambda = 1e-3;
};

Tensor stack_by_name(const Tensor& img, const std::string& name) {
    if (name == "luminance") return guidance::luminance_stack(img);
    if (name == "reflectance") return guidance::reflectance_stack(img);
    if (name == "extended") return guidance::extended_stack(img);
    throw std::invalid_argument("unknown stack '" + name + "'");
}

void run_lra(const LraArgs& a) {
    const Tensor img = load_image(a.input);
    const Tensor64 source = stack_by_name(img, a.stack).cast<double>();

    Tensor64 target;
    if (a.target == "self") target = source;
    else if (a.target == "input") target = img.cast<double>();
    else target = load_image(a.target).cast<double>();

    analysis::LraConfig cfg;
    cfg.dims = a.dims;
    cfg.lambda = a.lambda;
    const analysis::LraResult res = analysis::linear_reconstruction(source, target, cfg);

    fs::create_directories(a.out);
    json report = {{"stack", a.stack},
                   {"dims", cfg.dims},
                   {"lambda", cfg.lambda},
                   {"per_channel_mse", res.per_channel_mse},
                   {"mean_mse", res.mean_mse}};
    std::ofstream jf(a.out + "/report.json", std::ios::binary);
    if (!jf) throw std::runtime_error(a.out + "/report.json: cannot open");
    jf << report.dump(2) << "\n";

    const Tensor recon = clamp01(res.reconstruction.cast<float>());
    if (recon.channels() == 3) {
        save_image(a.out + "/recon.png", recon);
    } else {
        for (int c = 0; c < recon.channels(); ++c)
            save_image(a.out + "/recon_c" + std::to_string(c) + ".png",
                       slice_channel(recon, c));
    }
    std::printf("mean reconstruction mse %.6g (%d dims, lambda %g)\n", res.mean_mse,
                cfg.dims, cfg.lambda);
}

// ---- eval ----------------------------------------------------------------------

struct EvalArgs {
    std::string pred, gt, out;
    bool gt_mean = false;
};

void run_eval(const EvalArgs& a) {
    const auto names = list_images_sorted(a.pred);
    if (names.empty()) throw std::runtime_error(a.pred + ": no images found");
    for (const auto& n : names)
        if (!fs::exists(a.gt + "/" + n))
            throw std::runtime_error("'" + n + "' has no ground-truth counterpart in " +
                                     a.gt);

    struct Row {
        double psnr = 0, ssim = 0, msssim = 0, psnr_gm = 0, ssim_gm = 0, q = 0;
    };
    std::vector<Row> rows(names.size());
    std::vector<std::string> errors(names.size());

    parallel_for(static_cast<int>(names.size()), [&](int i) {
        try {
            const Tensor pred = load_image(a.pred + "/" + names[i]);
            const Tensor gt = load_image(a.gt + "/" + names[i]);
            if (!pred.same_shape(gt))
                throw std::invalid_argument("size mismatch " + pred.shape_str() + " vs " +
                                            gt.shape_str());
            Row& r = rows[i];
            r.psnr = metrics::psnr(pred, gt);
            r.ssim = metrics::ssim(pred, gt);
            const int scales = loss::auto_scales(pred.height(), pred.width());
            r.msssim = scales > 0 ? metrics::ms_ssim(pred, gt, scales) : 0.0;
            if (a.gt_mean) {
                const metrics::GtMeanResult gm = metrics::gt_mean_rescale(pred, gt);
                r.psnr_gm = metrics::psnr(gm.rescaled, gt);
                r.ssim_gm = metrics::ssim(gm.rescaled, gt);
                r.q = gm.q;
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (size_t i = 0; i < names.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("'" + names[i] + "': " + errors[i]);

    std::ofstream csv(a.out, std::ios::binary);
    if (!csv) throw std::runtime_error(a.out + ": cannot open for writing");
    csv << (a.gt_mean ? "file,psnr,ssim,msssim,psnr_gtmean,ssim_gtmean,q\n"
                      : "file,psnr,ssim,msssim\n");
    Row mean;
    char buf[320];
    for (size_t i = 0; i < names.size(); ++i) {
        const Row& r = rows[i];
        if (a.gt_mean)
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                          names[i].c_str(), r.psnr, r.ssim, r.msssim, r.psnr_gm,
                          r.ssim_gm, r.q);
        else
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", names[i].c_str(),
                          r.psnr, r.ssim, r.msssim);
        csv << buf;
        mean.psnr += r.psnr;
        mean.ssim += r.ssim;
        mean.msssim += r.msssim;
        mean.psnr_gm += r.psnr_gm;
        mean.ssim_gm += r.ssim_gm;
    }
    const double n = static_cast<double>(names.size());
    std::printf("%zu files: mean psnr %.4f, ssim %.4f, msssim %.4f", names.size(),
                mean.psnr / n, mean.ssim / n, mean.msssim / n);
    if (a.gt_mean)
        std::printf(", gt-mean psnr %.4f, ssim %.4f", mean.psnr_gm / n, mean.ssim_gm / n);
    std::printf("\n");
}

// ---- params --------------------------------------------------------------------

struct ParamsArgs {
    std::string variant = "lightweight", resolution = "256x256";
};

void run_params(const ParamsArgs& a) {
    int w = 0, h = 0;
    if (std::sscanf(a.resolution.c_str(), "%dx%d", &w, &h) != 2 || w < 1 || h < 1)
        throw std::invalid_argument("bad resolution '" + a.resolution +
                                    "' (expected WxH)");
    const nn::VariantConfig cfg = nn::VariantConfig::by_name(a.variant);
    const auto table = nn::count_params(cfg);
    int64_t total = 0;
    std::printf("%-40s %10s\n", "layer", "params");
    for (const auto& l : table) {
        std::printf("%-40s %10lld\n", l.name.c_str(), static_cast<long long>(l.count));
        total += l.count;
    }
    std::printf("%-40s %10lld\n", "total", static_cast<long long>(total));
    std::printf("macs @ %dx%d: %lld (%.3f gflops)\n", w, h,
                static_cast<long long>(nn::total_macs(cfg, h, w)),
                nn::gflops(cfg, h, w));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multinex: guidance-stack low-light image enhancement"};
    app.require_subcommand(1);
    std::function<void()> action;

    const auto add_variant = [](CLI::App* sub, std::string& var) {
        sub->add_option("--variant", var, "model variant")
            ->check(CLI::IsMember({"lightweight", "nano"}));
    };

    EnhanceArgs ea;
    CLI::App* enh = app.add_subcommand("enhance", "enhance one image");
    enh->add_option("-i,--input", ea.input, "input image")->required();
    enh->add_option("-c,--checkpoint", ea.ckpt, "model checkpoint")->required();
    enh->add_option("-o,--output", ea.output, "output image")->required();
    add_variant(enh, ea.variant);
    enh->add_option("--dump-deltas", ea.dump_dir, "write residual previews here");
    enh->callback([&] { action = [&] { run_enhance(ea); }; });

    TrainArgs ta;
    CLI::App* tr = app.add_subcommand("train", "train a model on paired data");
    tr->add_option("--data", ta.data, "dataset root with low/ and high/")->required();
    tr->add_option("--out", ta.out, "output directory")->required();
    add_variant(tr, ta.variant);
    tr->add_option("--config", ta.config, "JSON config file");
    tr->add_option("--iters", ta.iters, "iteration count");
    tr->add_option("--batch", ta.batch, "batch size");
    tr->add_option("--patch", ta.patch, "square patch size");
    tr->add_option("--seed", ta.seed, "rng seed");
    tr->add_option("--lr-start", ta.lr_start, "initial learning rate");
    tr->add_option("--lr-end", ta.lr_end, "final learning rate");
    tr->add_option("--log-interval", ta.log_interval, "trace row interval");
    tr->add_option("--ckpt-interval", ta.ckpt_interval, "periodic checkpoint interval");
    tr->add_flag("--no-augment", ta.no_augment, "disable all augmentation");
    tr->callback([&] { action = [&] { run_train(ta); }; });

    StacksArgs sa;
    CLI::App* st = app.add_subcommand("stacks", "write guidance channels as images");
    st->add_option("-i,--input", sa.input, "input image")->required();
    st->add_option("-o,--out", sa.out, "output directory")->required();
    st->add_option("--stack", sa.which, "which stack")
        ->check(CLI::IsMember({"all", "luminance", "reflectance", "extended"}));
    st->callback([&] { action = [&] { run_stacks(sa); }; });

    CLI::App* an = app.add_subcommand("analyze", "descriptor analysis");
    an->require_subcommand(1);

    DiaArgs da;
    CLI::App* dia = an->add_subcommand("dia", "leave-one-out descriptor importance");
    dia->add_option("-i,--input", da.input, "input image")->required();
    dia->add_option("-o,--out", da.out, "output directory")->required();
    dia->add_option("--pool", da.pool, "candidate names (default: luminance pool)")
        ->delimiter(',');
    dia->callback([&] { action = [&] { run_dia(da); }; });

    LraArgs la;
    CLI::App* lra = an->add_subcommand("lra", "linear reconstruction analysis");
    lra->add_option("-i,--input", la.input, "input image")->required();
    lra->add_option("-o,--out", la.out, "output directory")->required();
    lra->add_option("--stack", la.stack, "source stack")
        ->check(CLI::IsMember({"luminance", "reflectance", "extended"}));
    lra->add_option("--dims", la.dims, "projection dimensions");
    lra->add_option("--lambda", la.lambda, "ridge strength");
    lra->add_option("--target", la.target, "self, input, or an image path");
    lra->callback([&] { action = [&] { run_lra(la); }; });

    EvalArgs va;
    CLI::App* ev = app.add_subcommand("eval", "score predictions against ground truth");
    ev->add_option("--pred", va.pred, "prediction directory")->required();
    ev->add_option("--gt", va.gt, "ground-truth directory")->required();
    ev->add_option("-o,--out", va.out, "output CSV")->required();
    ev->add_flag("--gt-mean", va.gt_mean, "also score brightness-aligned predictions");
    ev->callback([&] { action = [&] { run_eval(va); }; });

    ParamsArgs pa;
    CLI::App* pr = app.add_subcommand("params", "parameter and flop accounting");
    add_variant(pr, pa.variant);
    pr->add_option("--resolution", pa.resolution, "WxH for flop accounting");
    pr->callback([&] { action = [&] { run_params(pa); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
        return 0;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
