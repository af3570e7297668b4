// Command-line entry point: scan stats, dataset generation, training,
// sampling, evaluation, ablations, throughput benchmarks and gradient checks.
//
// Exit codes: 0 success, 1 usage error, 2 validation error (bad values,
// missing/ill-formed config), 3 runtime failure.

#include <CLI11.hpp>

#include <dar/dar.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace {

using dar::Json;

// Write a JSON document to --out when given, stdout otherwise.
void emit_json(const Json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << std::endl;
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + out_path);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed: " + out_path);
}

std::string self_exe_path() {
    std::error_code ec;
    const auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    return ec ? std::string{} : p.string();
}

std::string zero_pad(int v, int width) {
    std::ostringstream os;
    os << std::setw(width) << std::setfill('0') << v;
    return os.str();
}

// Shared --preset/--config pair; flags parsed later override the result.
struct BundleOpts {
    std::string preset;
    std::string config_path;
};

void add_bundle_opts(CLI::App* cmd, BundleOpts& o, const std::string& default_preset) {
    o.preset = default_preset;
    cmd->add_option("--preset", o.preset,
                    "Named preset (tiny|desk|desk-small|paper-b|paper-l|paper-xl)")
        ->capture_default_str();
    cmd->add_option("--config", o.config_path, "JSON config file overlaying the preset");
}

dar::ConfigBundle resolve_bundle(const BundleOpts& o) {
    dar::ConfigBundle b = dar::preset(o.preset);
    if (!o.config_path.empty()) b = dar::load_bundle_file(o.config_path, b);
    return b;
}

// Dataset comes from --dataset / config path when present, otherwise it is
// generated from the bundle's dataset section. `save_to` persists a freshly
// generated dataset for later eval runs ("" skips that).
dar::Dataset obtain_dataset(const dar::ConfigBundle& bundle, const std::string& flag_path,
                            const std::string& save_to, std::string* used_path) {
    std::string path = flag_path.empty() ? bundle.train.dataset_path : flag_path;
    if (!path.empty()) {
        if (used_path != nullptr) *used_path = path;
        return dar::load_dataset(path);
    }
    dar::Dataset ds = dar::generate_dataset(bundle.dataset);
    if (!save_to.empty()) {
        dar::save_dataset(ds, save_to);
        if (used_path != nullptr) *used_path = save_to;
    }
    return ds;
}

// ---- scan -------------------------------------------------------------

void setup_scan(CLI::App& app) {
    auto* cmd = app.add_subcommand("scan", "Print traversal-order statistics for a token grid");
    struct Opts {
        int height = 0;
        int width = 0;
        std::string order = "diagonal";
        std::string out;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--height", o->height, "Grid height")->required();
    cmd->add_option("--width", o->width, "Grid width")->required();
    cmd->add_option("--order", o->order, "Traversal order (raster|diagonal)")->capture_default_str();
    cmd->add_option("--out", o->out, "Write the JSON document here instead of stdout");
    cmd->add_option("--seed", o->seed, "Accepted for interface uniformity; scan is deterministic");
    cmd->callback([o]() {
        const dar::ScanKind kind = dar::scan_from_name(o->order);
        const dar::ScanOrder order = dar::make_order(dar::GridShape{o->height, o->width}, kind);
        dar::AdjacencyStats st;
        if (order.positions.size() >= 2) st = dar::adjacency_stats(order);
        Json hist = Json::object();
        for (const auto& [dir, count] : st.direction_histogram) {
            hist[dar::direction_name(dir)] = count;
        }
        Json positions = Json::array();
        for (const auto& p : order.positions) positions.push_back(Json::array({p.x, p.y}));
        emit_json(Json{{"shape", Json{{"height", o->height}, {"width", o->width}}},
                       {"order", dar::scan_name(kind)},
                       {"max_step_dist", st.max_step_dist},
                       {"mean_step_dist", st.mean_step_dist},
                       {"direction_histogram", hist},
                       {"positions", positions}},
                  o->out);
    });
}

// ---- gen-data ---------------------------------------------------------

void setup_gen_data(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen-data", "Generate a synthetic token-grid dataset file");
    struct Opts {
        BundleOpts bundle;
        std::string family, out = "dataset.bin";
        int height = 0, width = 0, vocab = 0, classes = 0, per_class = 0;
        double noise = 0.0;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "desk");
    cmd->add_option("--family", o->family, "Pattern family (constant|stripes|checker|gradient)");
    cmd->add_option("--height", o->height, "Grid height");
    cmd->add_option("--width", o->width, "Grid width");
    cmd->add_option("--vocab-size", o->vocab, "Token vocabulary size");
    cmd->add_option("--num-classes", o->classes, "Number of classes");
    cmd->add_option("--samples-per-class", o->per_class, "Samples generated per class");
    cmd->add_option("--noise-rate", o->noise, "Per-cell corruption probability");
    cmd->add_option("--seed", o->seed, "Dataset seed");
    cmd->add_option("--out", o->out, "Output dataset path")->capture_default_str();
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        dar::DatasetSpec spec = bundle.dataset;
        if (cmd->count("--family") != 0U) spec.family = dar::family_from_name(o->family);
        if (cmd->count("--height") != 0U) spec.height = o->height;
        if (cmd->count("--width") != 0U) spec.width = o->width;
        if (cmd->count("--vocab-size") != 0U) spec.vocab_size = o->vocab;
        if (cmd->count("--num-classes") != 0U) spec.num_classes = o->classes;
        if (cmd->count("--samples-per-class") != 0U) spec.samples_per_class = o->per_class;
        if (cmd->count("--noise-rate") != 0U) spec.noise_rate = o->noise;
        if (cmd->count("--seed") != 0U) spec.seed = o->seed;
        const dar::Dataset ds = dar::generate_dataset(spec);
        dar::save_dataset(ds, o->out);
        std::cout << Json{{"path", o->out},
                          {"count", ds.count()},
                          {"height", ds.height},
                          {"width", ds.width},
                          {"vocab_size", ds.vocab_size},
                          {"num_classes", ds.num_classes},
                          {"family", dar::family_name(spec.family)},
                          {"fingerprint", dar::dataset_fingerprint(ds)}}
                         .dump(2)
                  << std::endl;
    });
}

// ---- train --------------------------------------------------------------

void setup_train(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train a model and write checkpoint, loss log and report");
    struct Opts {
        BundleOpts bundle;
        std::string dataset, out = "train_out";
        int64_t steps = 0;
        int batch = 0, interval = 0;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "desk");
    cmd->add_option("--dataset", o->dataset, "Existing dataset file (default: generate one)");
    cmd->add_option("--steps", o->steps, "Optimizer steps");
    cmd->add_option("--batch-size", o->batch, "Mini-batch size");
    cmd->add_option("--checkpoint-interval", o->interval, "Steps between mid-run checkpoints");
    cmd->add_option("--seed", o->seed, "Training seed");
    cmd->add_option("--out", o->out, "Output directory")->capture_default_str();
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        if (cmd->count("--steps") != 0U) bundle.train.steps = o->steps;
        if (cmd->count("--batch-size") != 0U) bundle.train.batch_size = o->batch;
        if (cmd->count("--checkpoint-interval") != 0U) bundle.train.checkpoint_interval = o->interval;
        if (cmd->count("--seed") != 0U) bundle.train.seed = o->seed;
        std::filesystem::create_directories(o->out);
        std::string ds_path;
        const dar::Dataset ds =
            obtain_dataset(bundle, o->dataset,
                           (std::filesystem::path(o->out) / "dataset.bin").string(), &ds_path);
        const dar::TrainResult res = dar::train(bundle, ds, o->out);
        Json report = dar::to_json(res);
        report["dataset_path"] = ds_path;
        const std::string report_path = (std::filesystem::path(o->out) / "train_report.json").string();
        emit_json(report, report_path);
        std::cout << report.dump(2) << std::endl;
    });
}

// ---- sample -------------------------------------------------------------

void setup_sample(CLI::App& app) {
    auto* cmd = app.add_subcommand("sample", "Generate token grids from a checkpoint (PPMs + manifest)");
    struct Opts {
        BundleOpts bundle;
        std::string checkpoint, out = "samples";
        int class_label = 0, batch = 0, render_scale = 16;
        double guidance = 0.0, power = 0.0, temperature = 0.0;
        bool greedy = false;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "desk");
    cmd->add_option("--checkpoint", o->checkpoint, "Model checkpoint to sample from");
    cmd->add_option("--class", o->class_label, "Class label to condition on");
    cmd->add_option("--batch", o->batch, "Number of grids to generate");
    cmd->add_option("--guidance-scale", o->guidance, "Guidance strength s (>= 1)");
    cmd->add_option("--scale-power", o->power, "Guidance schedule exponent");
    cmd->add_option("--temperature", o->temperature, "Softmax temperature");
    cmd->add_flag("--greedy", o->greedy, "Deterministic argmax decoding");
    cmd->add_option("--render-scale", o->render_scale, "PPM pixels per grid cell")
        ->capture_default_str();
    cmd->add_option("--seed", o->seed, "Sampling seed");
    cmd->add_option("--out", o->out, "Output directory")->capture_default_str();
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        dar::SamplingConfig scfg = bundle.sample;
        if (cmd->count("--class") != 0U) scfg.class_label = o->class_label;
        if (cmd->count("--batch") != 0U) scfg.batch = o->batch;
        if (cmd->count("--guidance-scale") != 0U) scfg.guidance_scale = o->guidance;
        if (cmd->count("--scale-power") != 0U) scfg.scale_power = o->power;
        if (cmd->count("--temperature") != 0U) scfg.temperature = o->temperature;
        if (cmd->count("--greedy") != 0U) scfg.greedy = o->greedy;
        if (cmd->count("--seed") != 0U) scfg.seed = o->seed;
        std::string ckpt = o->checkpoint.empty() ? bundle.train.checkpoint_path : o->checkpoint;
        if (ckpt.empty()) {
            throw std::invalid_argument("sample requires --checkpoint (or train.checkpoint_path in the config)");
        }
        const dar::Checkpoint ck = dar::load_checkpoint(ckpt);
        const dar::ModelConfig& cfg = ck.config;
        scfg.validate();
        if (scfg.class_label < 0 || scfg.class_label >= cfg.num_classes) {
            throw std::invalid_argument("sample.class_label out of range for checkpoint");
        }
        if (o->render_scale < 1) throw std::invalid_argument("--render-scale must be >= 1");

        const dar::SequenceLayout lay = dar::build_layout(cfg.grid(), cfg.scan);
        const dar::Decoder<float> dec(cfg, ck.params, lay);
        dar::Rng rng(scfg.seed);
        const std::vector<dar::TokenGrid> grids = dar::sample_batch(dec, scfg, rng);

        std::filesystem::create_directories(o->out);
        const dar::Codebook cb =
            dar::make_codebook(cfg.vocab_size, cfg.codebook_dim, cfg.codebook_seed);
        Json grids_json = Json::array();
        for (size_t i = 0; i < grids.size(); ++i) {
            dar::render_ppm_file(
                grids[i], cb, o->render_scale,
                (std::filesystem::path(o->out) / ("sample_" + zero_pad(static_cast<int>(i), 3) + ".ppm"))
                    .string());
            Json tokens = Json::array();
            for (uint16_t t : grids[i].tokens) tokens.push_back(static_cast<int>(t));
            grids_json.push_back(std::move(tokens));
        }
        const Json manifest{{"seed", scfg.seed},
                            {"class", scfg.class_label},
                            {"config", Json{{"sampling", dar::to_json(scfg)},
                                            {"model_fingerprint", dar::config_fingerprint(cfg)},
                                            {"grid_height", cfg.grid_height},
                                            {"grid_width", cfg.grid_width}}},
                            {"grids", grids_json}};
        const std::string manifest_path = (std::filesystem::path(o->out) / "manifest.json").string();
        emit_json(manifest, manifest_path);
        std::cout << Json{{"out", o->out}, {"count", grids.size()}, {"manifest", manifest_path}}.dump(2)
                  << std::endl;
    });
}

// ---- eval ---------------------------------------------------------------

void setup_eval(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Evaluate a checkpoint against a dataset");
    struct Opts {
        BundleOpts bundle;
        std::string checkpoint, dataset, out;
        int samples_per_class = 16;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "desk");
    cmd->add_option("--checkpoint", o->checkpoint, "Model checkpoint to evaluate");
    cmd->add_option("--dataset", o->dataset, "Existing dataset file (default: generate one)");
    cmd->add_option("--samples-per-class", o->samples_per_class, "Grids drawn per class")
        ->capture_default_str();
    cmd->add_option("--seed", o->seed, "Sampling seed for the generated grids");
    cmd->add_option("--out", o->out, "Write the report here instead of stdout");
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        std::string ckpt = o->checkpoint.empty() ? bundle.train.checkpoint_path : o->checkpoint;
        if (ckpt.empty()) {
            throw std::invalid_argument("eval requires --checkpoint (or train.checkpoint_path in the config)");
        }
        const dar::Checkpoint ck = dar::load_checkpoint(ckpt);
        const dar::Dataset ds = obtain_dataset(bundle, o->dataset, "", nullptr);
        const dar::Codebook cb =
            dar::make_codebook(ck.config.vocab_size, ck.config.codebook_dim, ck.config.codebook_seed);
        const uint64_t seed = cmd->count("--seed") != 0U ? o->seed : bundle.sample.seed;
        const dar::EvalReport rep =
            dar::evaluate(ck.config, ck.params, cb, ds, o->samples_per_class, bundle.sample, seed);
        emit_json(dar::to_json(rep), o->out);
    });
}

// ---- ablate -------------------------------------------------------------

void setup_ablate(CLI::App& app) {
    auto* cmd = app.add_subcommand("ablate", "Run the full ablation matrix (8 module rows + 3 conditioning rows)");
    struct Opts {
        BundleOpts bundle;
        std::string out = "ablation_out";
        uint64_t seed = 0;
        bool in_process = false;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "desk-small");
    cmd->add_option("--seed", o->seed, "Shared training seed for every row");
    cmd->add_flag("--in-process", o->in_process,
                  "Run rows inside this process instead of worker subprocesses");
    cmd->add_option("--out", o->out, "Output directory")->capture_default_str();
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        if (cmd->count("--seed") != 0U) bundle.train.seed = o->seed;
        const std::string worker = o->in_process ? std::string{} : self_exe_path();
        const Json report = dar::run_ablation(bundle, o->out, worker);
        int failed = 0;
        for (const char* group : {"module_rows", "adaln_rows"}) {
            for (const auto& row : report.at(group)) {
                if (row.at("status") != "ok") ++failed;
            }
        }
        std::cout << Json{{"out", o->out},
                          {"module_rows", report.at("module_rows").size()},
                          {"adaln_rows", report.at("adaln_rows").size()},
                          {"failed", failed},
                          {"report", (std::filesystem::path(o->out) / "ablation_report.json").string()}}
                         .dump(2)
                  << std::endl;
        if (failed > 0) throw std::runtime_error(std::to_string(failed) + " ablation row(s) failed");
    });
}

void setup_ablate_row(CLI::App& app) {
    auto* cmd = app.add_subcommand("ablate-row", "Run a single ablation row (worker mode)");
    cmd->group("");  // internal: hidden from --help
    struct Opts {
        std::string config, out;
        int row = -1;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--config", o->config, "Full config file written by `ablate`")->required();
    cmd->add_option("--row", o->row, "Row index")->required();
    cmd->add_option("--out", o->out, "Ablation output directory")->required();
    cmd->add_option("--seed", o->seed, "Override the shared training seed");
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = dar::load_bundle_file(o->config);
        if (cmd->count("--seed") != 0U) bundle.train.seed = o->seed;
        const dar::Dataset ds = dar::generate_dataset(bundle.dataset);
        dar::run_ablation_row(bundle, ds, o->row, o->out);
    });
}

// ---- bench --------------------------------------------------------------

void setup_bench(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Measure sampling throughput (tokens/sec, grids/sec)");
    struct Opts {
        BundleOpts bundle;
        std::string checkpoint, out;
        int batch = 0, repeats = 5;
        bool greedy = false;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "desk");
    cmd->add_option("--checkpoint", o->checkpoint, "Checkpoint to benchmark (default: fresh random weights)");
    cmd->add_option("--batch", o->batch, "Grids per timed repeat");
    cmd->add_option("--repeats", o->repeats, "Timed repeats (median reported)")->capture_default_str();
    cmd->add_flag("--greedy", o->greedy, "Benchmark argmax decoding");
    cmd->add_option("--seed", o->seed, "Sampling/init seed");
    cmd->add_option("--out", o->out, "Write the JSON report here instead of stdout");
    cmd->callback([o, cmd]() {
        dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        dar::SamplingConfig scfg = bundle.sample;
        if (cmd->count("--batch") != 0U) scfg.batch = o->batch;
        if (cmd->count("--greedy") != 0U) scfg.greedy = o->greedy;
        if (cmd->count("--seed") != 0U) scfg.seed = o->seed;

        dar::ModelConfig cfg;
        dar::ParamStore<float> params;
        if (!o->checkpoint.empty()) {
            dar::Checkpoint ck = dar::load_checkpoint(o->checkpoint);
            cfg = ck.config;
            params = std::move(ck.params);
        } else {
            cfg = bundle.model;
            cfg.validate();
            dar::Codebook cb;
            const dar::Codebook* cbp = nullptr;
            if (cfg.codebook_embeddings) {
                cb = dar::make_codebook(cfg.vocab_size, cfg.codebook_dim, cfg.codebook_seed);
                cbp = &cb;
            }
            params = dar::init_params<float>(cfg, cbp, bundle.train.seed);
        }
        const dar::SequenceLayout lay = dar::build_layout(cfg.grid(), cfg.scan);
        const dar::Decoder<float> dec(cfg, params, lay);
        dar::Rng rng(scfg.seed);
        const dar::BenchReport rep = dar::bench(dec, scfg, o->repeats, rng);
        emit_json(Json{{"tokens_per_sec", rep.tokens_per_sec},
                       {"images_per_sec", rep.images_per_sec},
                       {"repeats", rep.repeats},
                       {"batch", rep.batch},
                       {"samples_sec", rep.samples_sec},
                       {"grid_height", cfg.grid_height},
                       {"grid_width", cfg.grid_width},
                       {"trainable_params", dar::param_count(cfg)}},
                  o->out);
    });
}

// ---- gradcheck ------------------------------------------------------------

void setup_gradcheck(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "gradcheck", "Compare backward-pass gradients against central finite differences");
    struct Opts {
        BundleOpts bundle;
        std::string out;
        int batch = 2, stride = 1;
        double eps = 1e-5, threshold = 1e-3;
        uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    add_bundle_opts(cmd, o->bundle, "tiny");
    cmd->add_option("--batch", o->batch, "Sequences in the probe batch")->capture_default_str();
    cmd->add_option("--stride", o->stride, "Check every n-th coordinate of each tensor")
        ->capture_default_str();
    cmd->add_option("--eps", o->eps, "Finite-difference step")->capture_default_str();
    cmd->add_option("--threshold", o->threshold, "Maximum tolerated relative error")
        ->capture_default_str();
    cmd->add_option("--seed", o->seed, "Parameter-init seed");
    cmd->add_option("--out", o->out, "Write the JSON report here instead of stdout");
    cmd->callback([o, cmd]() {
        const dar::ConfigBundle bundle = resolve_bundle(o->bundle);
        const dar::ModelConfig& cfg = bundle.model;
        cfg.validate();
        if (o->batch < 1) throw std::invalid_argument("--batch must be >= 1");
        const uint64_t seed = cmd->count("--seed") != 0U ? o->seed : bundle.train.seed;

        dar::Codebook cb;
        const dar::Codebook* cbp = nullptr;
        if (cfg.codebook_embeddings) {
            cb = dar::make_codebook(cfg.vocab_size, cfg.codebook_dim, cfg.codebook_seed);
            cbp = &cb;
        }
        dar::ParamStore<double> params = dar::init_params<double>(cfg, cbp, seed);
        const dar::SequenceLayout lay = dar::build_layout(cfg.grid(), cfg.scan);
        const auto rot = dar::layout_rotation(lay, cfg.rope_mode, cfg.head_dim());

        dar::DatasetSpec dspec = bundle.dataset;
        dspec.validate();
        const dar::Dataset ds = dar::generate_dataset(dspec);
        std::vector<int> rows(static_cast<size_t>(o->batch));
        for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i) % ds.count();
        const dar::Batch batch = dar::make_batch(ds, lay, rows, 0.0, cfg.null_class(), nullptr);

        const auto loss_fn = [&](const dar::ParamStore<double>& ps) {
            dar::Tape<double> tape;
            const auto ids = dar::build_forward(tape, cfg, ps, lay, rot, batch, /*train=*/false, nullptr);
            return tape.value(ids.loss).data[0];
        };
        dar::GradBuffers analytic = dar::make_grad_buffers(params);
        {
            dar::Tape<double> tape;
            const auto ids =
                dar::build_forward(tape, cfg, params, lay, rot, batch, /*train=*/false, nullptr);
            tape.backward(ids.loss);
            for (int i = 0; i < params.count(); ++i) {
                if (!params.at(i).trainable) continue;
                analytic[static_cast<size_t>(i)] = tape.grad(ids.leaf[static_cast<size_t>(i)]);
            }
        }
        const dar::GradCheckReport rep =
            dar::grad_check_params(params, loss_fn, analytic, o->eps, o->stride);
        const bool pass = rep.max_rel_err < o->threshold;
        emit_json(Json{{"max_rel_err", rep.max_rel_err},
                       {"max_abs_err", rep.max_abs_err},
                       {"worst_param", rep.worst_param},
                       {"checked", rep.checked},
                       {"threshold", o->threshold},
                       {"pass", pass}},
                  o->out);
        if (!pass) {
            throw std::runtime_error("gradient check failed: max relative error " +
                                     std::to_string(rep.max_rel_err) + " at " + rep.worst_param);
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Direction-aware diagonal autoregressive toolkit for 2D token grids"};
    app.require_subcommand(1);
    setup_scan(app);
    setup_gen_data(app);
    setup_train(app);
    setup_sample(app);
    setup_eval(app);
    setup_ablate(app);
    setup_ablate_row(app);
    setup_bench(app);
    setup_gradcheck(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help/version exit 0, any usage problem exits 1
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
