#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nct/config.hpp"
#include "nct/data_io.hpp"
#include "nct/probe.hpp"
#include "nct/trainer.hpp"

namespace nct {

using ordered_json = nlohmann::ordered_json;

inline ordered_json metrics_record(const EpochMetrics& em) {
    ordered_json j;
    j["record_type"] = "epoch";
    j["epoch"] = em.epoch;
    j["alpha_d"] = em.alpha_d;
    j["r_d"] = em.r_d;
    j["lr"] = em.lr;
    j["train_loss_model1"] = em.train_loss_model1;
    if (em.train_loss_model2) j["train_loss_model2"] = *em.train_loss_model2;
    j["test_acc_ensemble"] = em.test_acc_ensemble;
    j["test_acc_model1"] = em.test_acc_model1;
    if (em.test_acc_model2) j["test_acc_model2"] = *em.test_acc_model2;
    j["train_loss_clean_subset"] = em.clean_subset.loss;
    j["train_acc_clean_subset"] = em.clean_subset.accuracy;
    if (em.noisy_subset) {
        j["train_loss_noisy_subset"] = em.noisy_subset->loss;
        j["train_acc_noisy_subset"] = em.noisy_subset->accuracy;
    }
    return j;
}

struct RunSummary {
    double best_acc = 0.0;
    int best_epoch = 0;
    double last_acc = 0.0;
};

// Run the configured method end to end and persist everything a rerun or a
// probe needs: metrics.jsonl, the fully-resolved config, model binaries.
inline RunSummary run_training(const RunConfig& rc) {
    LabeledDataset train_ds = load_csv(rc.dataset_path);
    LabeledDataset test_ds = load_csv(rc.test_path);
    if (train_ds.num_classes != test_ds.num_classes) {
        int c = std::max(train_ds.num_classes, test_ds.num_classes);
        train_ds.num_classes = test_ds.num_classes = c;
    }
    TrainConfig cfg = rc.to_train_config();
    if (cfg.layer_dims.empty()) throw ConfigError("layer_dims is required for training");

    TrainResult res = train(train_ds, test_ds, cfg);

    std::filesystem::create_directories(rc.output_dir);
    std::filesystem::path out(rc.output_dir);
    {
        std::ofstream f(out / "config_resolved.cfg");
        write_resolved_config(rc, f);
    }
    {
        std::ofstream f(out / "metrics.jsonl");
        for (const EpochMetrics& em : res.metrics) f << metrics_record(em).dump() << '\n';
        ordered_json s;
        s["record_type"] = "summary";
        s["method"] = method_name(cfg.method);
        s["best_acc"] = res.best_acc;
        s["best_epoch"] = res.best_epoch;
        s["last_acc"] = res.last_acc;
        f << s.dump() << '\n';
    }
    save_model(res.state.model1, (out / "model1.bin").string());
    if (cfg.method != Method::standard)
        save_model(res.state.model2, (out / "model2.bin").string());

    return {res.best_acc, res.best_epoch, res.last_acc};
}

// Fit random binary labels on the frozen base model and append the result to
// the run's metrics file.
inline ProbeResult run_probe(const RunConfig& rc, const std::string& model_path) {
    MlpModel base = load_model(model_path);
    LabeledDataset ds = load_csv(rc.dataset_path);
    ProbeConfig pc = rc.to_probe_config();
    Tensor feats = first_two_class_features(base, ds, pc.num_samples);
    ProbeResult pr = fit_random_binary_labels(feats, pc);

    std::filesystem::create_directories(rc.output_dir);
    std::ofstream f(std::filesystem::path(rc.output_dir) / "metrics.jsonl", std::ios::app);
    ordered_json j;
    j["record_type"] = "probe";
    j["model"] = model_path;
    j["num_samples"] = pr.num_samples;
    j["final_train_error"] = pr.final_train_error;
    f << j.dump() << '\n';
    return pr;
}

// One CSV row per run directory containing a summary record.
inline void report_runs(const std::string& runs_dir, std::ostream& out) {
    out << "run,method,best_acc,best_epoch,last_acc,probe_train_error\n";
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir))
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "metrics.jsonl"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        std::ifstream f(dir / "metrics.jsonl");
        std::string line;
        ordered_json summary, probe;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            ordered_json j = ordered_json::parse(line);
            std::string t = j.value("record_type", "");
            if (t == "summary") summary = j;
            else if (t == "probe") probe = j;
        }
        if (summary.is_null()) continue;
        out << dir.filename().string() << ',' << summary.value("method", "") << ','
            << summary.value("best_acc", 0.0) << ',' << summary.value("best_epoch", 0) << ','
            << summary.value("last_acc", 0.0) << ',';
        if (!probe.is_null()) out << probe.value("final_train_error", 0.0);
        out << '\n';
    }
}

}  // namespace nct
