#pragma once

// Ablation matrix: the scan-order/module grid (8 rows) plus the AdaLN
// condition comparison (3 rows), every row trained and evaluated on the same
// dataset and seed. Rows can run in this process or in worker subprocesses.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dar/train.hpp"

namespace dar {

struct AblationRow {
    std::string name;
    std::string group;  // "modules" or "adaln"
    ModelConfig model;
};

// The module grid varies scan order, codebook embeddings, rope mode, and
// direction conditioning; the AdaLN grid varies the condition source on the
// codebook + 4d-rope diagonal base.
inline std::vector<AblationRow> ablation_rows(const ModelConfig& base) {
    auto variant = [&](ScanKind scan, bool code, bool rope4d, AdaLnCondition adaln) {
        ModelConfig m = base;
        m.scan = scan;
        m.codebook_embeddings = code;
        m.rope_mode = rope4d ? RopeMode::FourD : RopeMode::TwoD;
        m.adaln_condition = adaln;
        return m;
    };
    const auto kClass = AdaLnCondition::Class;
    const auto kDir = AdaLnCondition::ClassDirection;
    std::vector<AblationRow> rows;
    rows.push_back({"raster-baseline", "modules", variant(ScanKind::Raster, false, false, kClass)});
    rows.push_back({"raster-full", "modules", variant(ScanKind::Raster, true, true, kDir)});
    rows.push_back({"diagonal-baseline", "modules", variant(ScanKind::Diagonal, false, false, kClass)});
    rows.push_back({"diagonal-4d-dir", "modules", variant(ScanKind::Diagonal, false, true, kDir)});
    rows.push_back({"diagonal-code", "modules", variant(ScanKind::Diagonal, true, false, kClass)});
    rows.push_back({"diagonal-code-4d", "modules", variant(ScanKind::Diagonal, true, true, kClass)});
    rows.push_back({"diagonal-code-dir", "modules", variant(ScanKind::Diagonal, true, false, kDir)});
    rows.push_back({"diagonal-full", "modules", variant(ScanKind::Diagonal, true, true, kDir)});
    rows.push_back({"adaln-class", "adaln", variant(ScanKind::Diagonal, true, true, kClass)});
    rows.push_back(
        {"adaln-class-timestep", "adaln", variant(ScanKind::Diagonal, true, true, AdaLnCondition::ClassTimestep)});
    rows.push_back({"adaln-class-direction", "adaln", variant(ScanKind::Diagonal, true, true, kDir)});
    return rows;
}

inline std::string ablation_row_path(const std::string& out_dir, int index) {
    return (std::filesystem::path(out_dir) / ("row_" + std::to_string(index) + ".json")).string();
}

// Train + evaluate one row; writes row_<index>.json and returns its content.
inline Json run_ablation_row(const ConfigBundle& bundle, const Dataset& ds, int index,
                             const std::string& out_dir) {
    const std::vector<AblationRow> rows = ablation_rows(bundle.model);
    if (index < 0 || index >= static_cast<int>(rows.size())) {
        throw std::invalid_argument("ablation row index out of range");
    }
    const AblationRow& row = rows[static_cast<size_t>(index)];
    ConfigBundle b = bundle;
    b.model = row.model;
    const std::string row_dir = (std::filesystem::path(out_dir) / row.name).string();
    const TrainResult tr = train(b, ds, row_dir);
    const Checkpoint ck = load_checkpoint(tr.checkpoint_path);
    const Codebook cb = make_codebook(b.model.vocab_size, b.model.codebook_dim, b.model.codebook_seed);
    const EvalReport ev =
        evaluate(ck.config, ck.params, cb, ds, bundle.sample.batch, bundle.sample, bundle.train.seed);
    Json j{{"name", row.name},
           {"group", row.group},
           {"status", "ok"},
           {"seed", bundle.train.seed},
           {"config", to_json(row.model)},
           {"train", to_json(tr)},
           {"eval", to_json(ev)}};
    std::ofstream os(ablation_row_path(out_dir, index));
    if (!os) throw std::runtime_error("cannot open for writing: " + ablation_row_path(out_dir, index));
    os << j.dump(2) << '\n';
    return j;
}

namespace detail {

inline int worker_limit() {
    const char* env = std::getenv("DAR_THREADS");
    if (env == nullptr) return 1;
    const int n = std::atoi(env);
    return n >= 1 ? n : 1;
}

// Launch `worker_exe ablate-row --config <cfg> --row <i> --out <dir>`.
inline pid_t spawn_row_worker(const std::string& worker_exe, const std::string& config_path,
                              int index, const std::string& out_dir) {
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed for ablation worker");
    if (pid == 0) {
        const std::string row = std::to_string(index);
        execl(worker_exe.c_str(), worker_exe.c_str(), "ablate-row", "--config", config_path.c_str(),
              "--row", row.c_str(), "--out", out_dir.c_str(), static_cast<char*>(nullptr));
        _exit(127);  // exec failed
    }
    return pid;
}

}  // namespace detail

// Run every row and aggregate a report. With a worker executable, rows run
// as subprocesses (at most DAR_THREADS at a time) and a row failure is
// recorded without stopping the matrix; otherwise rows run in-process.
inline Json run_ablation(const ConfigBundle& bundle, const std::string& out_dir,
                         const std::string& worker_exe = "") {
    std::filesystem::create_directories(out_dir);
    const Dataset ds = generate_dataset(bundle.dataset);
    const std::vector<AblationRow> rows = ablation_rows(bundle.model);
    const int n = static_cast<int>(rows.size());
    std::vector<Json> results(static_cast<size_t>(n));

    if (worker_exe.empty()) {
        for (int i = 0; i < n; ++i) {
            try {
                results[static_cast<size_t>(i)] = run_ablation_row(bundle, ds, i, out_dir);
            } catch (const std::exception& e) {
                results[static_cast<size_t>(i)] =
                    Json{{"name", rows[static_cast<size_t>(i)].name}, {"status", "failed"}, {"error", e.what()}};
            }
        }
    } else {
        const std::string config_path = (std::filesystem::path(out_dir) / "ablation_config.json").string();
        {
            std::ofstream os(config_path);
            if (!os) throw std::runtime_error("cannot open for writing: " + config_path);
            os << to_json(bundle).dump(2) << '\n';
        }
        const int limit = detail::worker_limit();
        std::map<pid_t, int> running;
        int next = 0, done = 0;
        std::vector<int> exit_codes(static_cast<size_t>(n), -1);
        while (done < n) {
            while (next < n && static_cast<int>(running.size()) < limit) {
                running[detail::spawn_row_worker(worker_exe, config_path, next, out_dir)] = next;
                ++next;
            }
            int status = 0;
            const pid_t pid = waitpid(-1, &status, 0);
            if (pid < 0) throw std::runtime_error("waitpid failed while running ablation workers");
            const auto it = running.find(pid);
            if (it == running.end()) continue;
            exit_codes[static_cast<size_t>(it->second)] =
                WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
            running.erase(it);
            ++done;
        }
        for (int i = 0; i < n; ++i) {
            const std::string path = ablation_row_path(out_dir, i);
            if (exit_codes[static_cast<size_t>(i)] == 0 && std::filesystem::exists(path)) {
                std::ifstream is(path);
                results[static_cast<size_t>(i)] = Json::parse(is);
            } else {
                results[static_cast<size_t>(i)] =
                    Json{{"name", rows[static_cast<size_t>(i)].name},
                         {"status", "failed"},
                         {"error", "worker exited with code " +
                                       std::to_string(exit_codes[static_cast<size_t>(i)])}};
            }
        }
    }

    Json module_rows = Json::array();
    Json adaln_rows = Json::array();
    for (int i = 0; i < n; ++i) {
        (rows[static_cast<size_t>(i)].group == "modules" ? module_rows : adaln_rows)
            .push_back(results[static_cast<size_t>(i)]);
    }
    const Json report{{"seed", bundle.train.seed},
                      {"dataset_fingerprint", dataset_fingerprint(ds)},
                      {"module_rows", module_rows},
                      {"adaln_rows", adaln_rows}};
    const std::string report_path = (std::filesystem::path(out_dir) / "ablation_report.json").string();
    std::ofstream os(report_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + report_path);
    os << report.dump(2) << '\n';
    return report;
}

}  // namespace dar
