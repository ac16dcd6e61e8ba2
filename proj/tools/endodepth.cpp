// endodepth: single CLI over the full pipeline — synthetic and cinematic
// dataset generation, joint training, fc-only fine-tuning, per-image depth
// prediction, and dataset evaluation.
//
// Exit codes: 0 success, 2 configuration/parameter errors, 3 I/O and format
// errors, 4 train/test scene leakage, 5 training divergence, 1 unexpected.
// Logs go to standard error; machine-readable results to standard output or
// --out.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "endodepth/config.hpp"
#include "endodepth/dataset.hpp"
#include "endodepth/errors.hpp"
#include "endodepth/pipeline.hpp"
#include "endodepth/training.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonConfigArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 0;  // 0 = use config value
};

void add_config_args(CLI::App* cmd, CommonConfigArgs* args) {
    cmd->add_option("--config", args->config_path,
                    "Run configuration file (defaults apply when omitted)");
    cmd->add_option("--set", args->overrides,
                    "Override a config entry, e.g. --set path.spp=4")
        ->take_all();
    cmd->add_option("--threads", args->threads, "Worker threads (overrides config)");
}

endo::RunConfig resolve_config(const CommonConfigArgs& args) {
    endo::RunConfig cfg;
    if (!args.config_path.empty()) cfg = endo::load_config(args.config_path);
    for (const std::string& kv : args.overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw endo::ConfigError("--set expects key=value, got: " + kv);
        endo::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.threads > 0) cfg.threads = args.threads;
    endo::validate_config(cfg);
    return cfg;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary | std::ios::trunc);
    if (!os) throw endo::IoError("cannot open output file: " + out_path);
    os << text;
    if (!os) throw endo::IoError("write failed: " + out_path);
}

std::string dataset_label(const endo::CrfModel& m) {
    std::string training =
        "synthetic:" + std::to_string(m.train_scene_ids.size()) + "scenes";
    std::string ft =
        m.finetune_scene_ids.empty()
            ? "-"
            : "cinematic:" + std::to_string(m.finetune_scene_ids.size()) +
                  "scenes";
    return training + "|" + ft;
}

int run(int argc, char** argv) {
    CLI::App app{"endoscopic depth pipeline"};
    app.require_subcommand(1);

    // ---- gen-synthetic ----
    auto* gen_syn = app.add_subcommand(
        "gen-synthetic", "Generate grayscale raster frames with depth");
    CommonConfigArgs syn_cfg;
    std::string syn_out, syn_name;
    int syn_count = 10, syn_scene_base = 0;
    std::uint64_t syn_seed = 1;
    add_config_args(gen_syn, &syn_cfg);
    gen_syn->add_option("--out", syn_out, "Dataset directory")->required();
    gen_syn->add_option("--count", syn_count, "Number of frames")->required();
    gen_syn->add_option("--seed", syn_seed, "Generation seed");
    gen_syn->add_option("--name", syn_name, "Dataset name (default: out dir name)");
    gen_syn->add_option("--scene-base", syn_scene_base, "First scene id");

    // ---- gen-cinematic ----
    auto* gen_cin = app.add_subcommand(
        "gen-cinematic", "Generate multi-style path-traced frames");
    CommonConfigArgs cin_cfg;
    std::string cin_out, cin_name;
    int cin_scenes = 30, cin_styles = 4, cin_spp = 8;
    int cin_scene_base = 100000, cin_val = 0, cin_test = 0;
    std::uint64_t cin_seed = 1;
    add_config_args(gen_cin, &cin_cfg);
    gen_cin->add_option("--out", cin_out, "Dataset directory")->required();
    gen_cin->add_option("--scenes", cin_scenes, "Number of scenes")->required();
    gen_cin->add_option("--styles", cin_styles, "Styles per scene (1..4)");
    gen_cin->add_option("--spp", cin_spp, "Samples per pixel");
    gen_cin->add_option("--seed", cin_seed, "Generation seed");
    gen_cin->add_option("--name", cin_name, "Dataset name (default: out dir name)");
    gen_cin->add_option("--scene-base", cin_scene_base, "First scene id");
    gen_cin->add_option("--val-scenes", cin_val, "Scenes assigned to val");
    gen_cin->add_option("--test-scenes", cin_test, "Scenes assigned to test");

    // ---- train ----
    auto* train_cmd = app.add_subcommand(
        "train", "Joint unary-network + CRF training on a synthetic dataset");
    CommonConfigArgs tr_cfg;
    std::string tr_data, tr_out;
    int tr_count = 0, tr_epochs = 0;
    std::uint64_t tr_seed = 1;
    add_config_args(train_cmd, &tr_cfg);
    train_cmd->add_option("--data", tr_data, "Dataset directory")->required();
    train_cmd->add_option("--out", tr_out, "Checkpoint output path")->required();
    train_cmd->add_option("--seed", tr_seed, "Training seed");
    train_cmd->add_option("--count", tr_count,
                          "Use only the first N training frames");
    train_cmd->add_option("--epochs", tr_epochs, "Override train.epochs");

    // ---- finetune ----
    auto* ft_cmd = app.add_subcommand(
        "finetune", "Fine-tune the fc layers on a cinematic dataset");
    CommonConfigArgs ft_cfg;
    std::string ft_base, ft_data, ft_out;
    int ft_epochs = -1;
    std::uint64_t ft_seed = 1;
    add_config_args(ft_cmd, &ft_cfg);
    ft_cmd->add_option("--base", ft_base, "Base checkpoint")->required();
    ft_cmd->add_option("--data", ft_data, "Cinematic dataset directory")->required();
    ft_cmd->add_option("--out", ft_out, "Checkpoint output path")->required();
    ft_cmd->add_option("--seed", ft_seed, "Fine-tuning seed");
    ft_cmd->add_option("--epochs", ft_epochs, "Override finetune.epochs");

    // ---- predict ----
    auto* pr_cmd = app.add_subcommand("predict", "Predict depth for one image");
    std::string pr_model, pr_image, pr_out, pr_png;
    int pr_threads = 1;
    pr_cmd->add_option("--model", pr_model, "Model checkpoint")->required();
    pr_cmd->add_option("--image", pr_image, "Input PNG image")->required();
    pr_cmd->add_option("--out", pr_out, "Output depth raster path")->required();
    pr_cmd->add_option("--png", pr_png, "Optional depth visualization PNG");
    pr_cmd->add_option("--threads", pr_threads, "Worker threads");

    // ---- evaluate ----
    auto* ev_cmd = app.add_subcommand(
        "evaluate", "Evaluate a model on one split of a dataset");
    std::string ev_model, ev_data, ev_split = "test", ev_out, ev_method = "crf-cnn";
    bool ev_table = false;
    int ev_threads = 1;
    ev_cmd->add_option("--model", ev_model, "Model checkpoint")->required();
    ev_cmd->add_option("--data", ev_data, "Dataset directory")->required();
    ev_cmd->add_option("--split", ev_split, "Split to evaluate (default test)");
    ev_cmd->add_option("--out", ev_out, "Write the full metrics record here");
    ev_cmd->add_option("--method", ev_method, "Method label for the table row");
    ev_cmd->add_flag("--table", ev_table, "Print only the table header and row");
    ev_cmd->add_option("--threads", ev_threads, "Worker threads");

    app.parse(argc, argv);

    if (gen_syn->parsed()) {
        endo::RunConfig cfg = resolve_config(syn_cfg);
        if (syn_name.empty()) syn_name = fs::path(syn_out).filename().string();
        endo::Manifest m = endo::gen_synthetic(cfg, syn_out, syn_name, syn_count,
                                               syn_seed, syn_scene_base,
                                               cfg.threads);
        std::cerr << "gen-synthetic: wrote " << m.records.size()
                  << " frames to " << syn_out << " (config "
                  << m.config_hash << ")\n";
    } else if (gen_cin->parsed()) {
        endo::RunConfig cfg = resolve_config(cin_cfg);
        if (cin_name.empty()) cin_name = fs::path(cin_out).filename().string();
        endo::Manifest m = endo::gen_cinematic(
            cfg, cin_out, cin_name, cin_scenes, cin_styles, cin_spp, cin_seed,
            cin_scene_base, cin_val, cin_test, cfg.threads);
        std::cerr << "gen-cinematic: wrote " << m.records.size()
                  << " frames to " << cin_out << " (config "
                  << m.config_hash << ")\n";
    } else if (train_cmd->parsed()) {
        endo::RunConfig cfg = resolve_config(tr_cfg);
        if (tr_epochs > 0) cfg.hyper.epochs = tr_epochs;
        cfg.hyper.seed = tr_seed;
        endo::Manifest m = endo::read_manifest(tr_data);
        std::vector<endo::Frame> train_frames =
            endo::load_split(tr_data, m, "train", tr_count);
        std::vector<endo::Frame> val_frames = endo::load_split(tr_data, m, "val");
        std::cerr << "train: " << train_frames.size() << " train / "
                  << val_frames.size() << " val frames\n";
        endo::TrainOptions opt;
        opt.hyper = cfg.hyper;
        opt.crf = cfg.crf;
        opt.beta_lr_scale = cfg.beta_lr_scale;
        opt.threads = cfg.threads;
        endo::TrainResult r =
            endo::train_joint(train_frames, val_frames, cfg.network, opt,
                              cfg.superpixels, endo::config_hash(cfg));
        for (const auto& e : r.log) {
            std::fprintf(stderr, "epoch %d train objective %.6g rel %.4f\n",
                         e.epoch, e.train_objective, e.train_rel);
            std::fprintf(stderr, "epoch %d val objective %.6g rel %.4f\n",
                         e.epoch, e.val_objective, e.val_rel);
        }
        if (r.rejected_updates > 0)
            std::cerr << "train: rejected " << r.rejected_updates
                      << " non-finite updates\n";
        endo::save_model(tr_out, r.model);
        std::cerr << "train: wrote checkpoint " << tr_out << "\n";
    } else if (ft_cmd->parsed()) {
        endo::RunConfig cfg = resolve_config(ft_cfg);
        endo::CrfModel base = endo::load_model(ft_base);
        endo::Manifest m = endo::read_manifest(ft_data);
        std::vector<endo::Frame> ft_frames = endo::load_split(ft_data, m, "train");
        std::vector<endo::Frame> val_frames = endo::load_split(ft_data, m, "val");
        std::cerr << "finetune: " << ft_frames.size() << " train / "
                  << val_frames.size() << " val frames\n";
        endo::TrainOptions opt;
        opt.hyper = cfg.hyper;
        opt.hyper.lr0 = cfg.hyper.lr0 * cfg.finetune_lr_scale;
        opt.hyper.epochs = ft_epochs >= 0 ? ft_epochs : cfg.finetune_epochs;
        opt.hyper.lr_decay_start_epoch =
            std::min(cfg.hyper.lr_decay_start_epoch,
                     std::max(0, opt.hyper.epochs - 1));
        opt.hyper.seed = ft_seed;
        opt.crf = cfg.crf;
        opt.crf.beta = base.beta;  // continue from the trained pairwise weights
        opt.beta_lr_scale = cfg.beta_lr_scale;
        opt.threads = cfg.threads;
        endo::TrainResult r = endo::finetune(base, ft_frames, val_frames, opt);
        for (const auto& e : r.log) {
            std::fprintf(stderr, "epoch %d train objective %.6g rel %.4f\n",
                         e.epoch, e.train_objective, e.train_rel);
            std::fprintf(stderr, "epoch %d val objective %.6g rel %.4f\n",
                         e.epoch, e.val_objective, e.val_rel);
        }
        endo::save_model(ft_out, r.model);
        std::cerr << "finetune: wrote checkpoint " << ft_out << "\n";
    } else if (pr_cmd->parsed()) {
        endo::CrfModel model = endo::load_model(pr_model);
        endo::ImageRGB image = endo::load_png(pr_image);
        endo::DepthMap depth = endo::predict_depth(model, image, pr_threads);
        endo::save_depth_raster(pr_out, depth);
        if (!pr_png.empty()) {
            float maxd = 1e-6f;
            for (float v : depth.data) maxd = std::max(maxd, v);
            endo::ImageRGB vis(depth.width, depth.height);
            for (int y = 0; y < depth.height; ++y)
                for (int x = 0; x < depth.width; ++x) {
                    float g = depth.at(x, y) / maxd;
                    vis.at(x, y, 0) = g;
                    vis.at(x, y, 1) = g;
                    vis.at(x, y, 2) = g;
                }
            endo::save_png(pr_png, vis);
        }
        std::cerr << "predict: wrote " << pr_out << "\n";
    } else if (ev_cmd->parsed()) {
        endo::CrfModel model = endo::load_model(ev_model);
        endo::Manifest m = endo::read_manifest(ev_data);
        endo::DatasetMetrics dm =
            endo::evaluate_dataset(model, ev_data, m, ev_split, ev_threads);
        std::string label = dataset_label(model);
        std::size_t bar = label.find('|');
        std::string record = endo::metrics_record(
            dm, ev_method, label.substr(0, bar), label.substr(bar + 1));
        if (ev_table) {
            std::cout << "Method, Training, Fine-Tuning, rel, log10, rms\n"
                      << endo::metrics_table_row(ev_method, label.substr(0, bar),
                                                 label.substr(bar + 1), dm.pooled)
                      << "\n";
            if (!ev_out.empty()) emit(record, ev_out);
        } else {
            emit(record, ev_out);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const endo::LeakageError& e) {
        std::cerr << "leakage error: " << e.what() << "\n";
        return 4;
    } catch (const endo::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 5;
    } catch (const endo::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const endo::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 3;
    } catch (const endo::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
