// Command-line front end: dataset generation, label corruption, training,
// probing, and run reporting.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nct/config.hpp"
#include "nct/data_io.hpp"
#include "nct/noise.hpp"
#include "nct/run.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

nct::NoiseKind parse_kind(const std::string& s) {
    if (s == "sym-incl") return nct::NoiseKind::symmetric_inclusive;
    if (s == "sym-excl") return nct::NoiseKind::symmetric_exclusive;
    if (s == "pair") return nct::NoiseKind::pair_flip;
    throw nct::ConfigError("unknown noise kind: " + s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale laboratory for training classifiers under label noise"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a Gaussian-blobs dataset CSV");
    std::string gen_out;
    std::size_t gen_n = 2000, gen_d = 2;
    int gen_c = 2;
    double gen_sep = 3.0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "output CSV path")->required();
    gen->add_option("--n", gen_n, "number of samples");
    gen->add_option("--d", gen_d, "feature dimension");
    gen->add_option("--classes", gen_c, "number of classes");
    gen->add_option("--separation", gen_sep, "distance between adjacent cluster means");
    gen->add_option("--seed", gen_seed, "seed");

    // corrupt
    auto* cor = app.add_subcommand("corrupt", "Apply synthetic label noise to a dataset CSV");
    std::string cor_in, cor_out, cor_kind = "sym-incl";
    double cor_rate = 0.0;
    std::uint64_t cor_seed = 0;
    cor->add_option("--in", cor_in, "input CSV path")->required();
    cor->add_option("--out", cor_out, "output CSV path (default: overwrite input)");
    cor->add_option("--kind", cor_kind, "sym-incl | sym-excl | pair");
    cor->add_option("--rate", cor_rate, "noise rate in [0,1]")->required();
    cor->add_option("--seed", cor_seed, "seed");

    // train
    auto* tr = app.add_subcommand("train", "Run the configured training method");
    std::string tr_config;
    tr->add_option("--config", tr_config, "run config file")->required();

    // probe
    auto* pr = app.add_subcommand("probe", "Fit random binary labels on frozen features");
    std::string pr_config, pr_model;
    pr->add_option("--config", pr_config, "run config file")->required();
    pr->add_option("--model", pr_model, "model binary path")->required();

    // report
    auto* rep = app.add_subcommand("report", "Summarize run directories as CSV");
    std::string rep_runs, rep_out;
    rep->add_option("--runs", rep_runs, "directory of run directories")->required();
    rep->add_option("--out", rep_out, "output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            nct::LabeledDataset ds = nct::generate_blobs(gen_n, gen_d, gen_c, gen_sep, gen_seed);
            nct::save_csv(ds, gen_out);
            std::cout << "wrote " << ds.size() << " samples to " << gen_out << "\n";
        } else if (cor->parsed()) {
            nct::LabeledDataset ds = nct::load_csv(cor_in);
            nct::NoiseSpec spec{parse_kind(cor_kind), cor_rate, cor_seed};
            nct::LabeledDataset noisy = nct::corrupt(ds, spec);
            double realized = nct::realized_noise_rate(noisy);
            std::string footer = "corrupt kind=" + cor_kind + " rate=" + std::to_string(cor_rate) +
                                 " seed=" + std::to_string(cor_seed) +
                                 " realized=" + std::to_string(realized);
            nct::save_csv(noisy, cor_out.empty() ? cor_in : cor_out, footer);
            std::cout << "realized noise rate: " << realized << "\n";
        } else if (tr->parsed()) {
            nct::RunConfig rc = nct::load_run_config(tr_config);
            nct::RunSummary s = nct::run_training(rc);
            std::cout << "best " << s.best_acc << " (epoch " << s.best_epoch << "), last "
                      << s.last_acc << "\n";
        } else if (pr->parsed()) {
            nct::RunConfig rc = nct::load_run_config(pr_config);
            nct::ProbeResult res = nct::run_probe(rc, pr_model);
            std::cout << "probe final train error: " << res.final_train_error << " over "
                      << res.num_samples << " samples\n";
        } else if (rep->parsed()) {
            if (rep_out.empty()) {
                nct::report_runs(rep_runs, std::cout);
            } else {
                std::ofstream f(rep_out);
                nct::report_runs(rep_runs, f);
            }
        }
    } catch (const nct::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
