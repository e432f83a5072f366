#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nct/probe.hpp"
#include "nct/trainer.hpp"

namespace nct {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat `key = value` run configuration. Defaults mirror the training
// hyperparameters every experiment shares; unknown keys are rejected.
struct RunConfig {
    std::string method = "nct";
    int batch_size = 128;
    int total_epochs = 200;
    double lr_initial = 0.02;
    int lr_decay_epoch = 180;
    double lr_decay_factor = 10.0;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    double tau = 4.0;
    double alpha_max = 0.9;
    double beta_mag = 0.65;
    int ramp_len = 180;  // defaults to 90% of total_epochs unless set explicitly
    double r_min = 0.0;
    double r_max = 0.0;
    int warmup = 1;
    double dml_alpha = 0.5;
    int eval_every = 1;
    std::vector<std::size_t> layer_dims;
    std::uint64_t seed_master = 0;
    std::string dataset_path;
    std::string test_path;
    std::string output_dir = ".";
    std::vector<std::size_t> probe_hidden_dims = {400, 200};
    int probe_epochs = 200;
    double probe_lr = 0.01;
    int probe_num_samples = 1000;

    bool ramp_len_explicit = false;

    TrainConfig to_train_config() const {
        TrainConfig cfg;
        cfg.method = method_from_name(method);
        cfg.batch_size = batch_size;
        cfg.layer_dims = layer_dims;
        cfg.schedule.alpha_max = alpha_max;
        cfg.schedule.beta_mag = beta_mag;
        cfg.schedule.ramp_len =
            ramp_len_explicit ? ramp_len : std::max(1, (total_epochs * 9) / 10);
        cfg.schedule.r_min = r_min;
        cfg.schedule.r_max = r_max;
        cfg.schedule.warmup = warmup;
        cfg.schedule.total_epochs = total_epochs;
        cfg.schedule.lr_initial = lr_initial;
        cfg.schedule.lr_decay_epoch = lr_decay_epoch;
        cfg.schedule.lr_decay_factor = lr_decay_factor;
        cfg.tau = tau;
        cfg.dml_alpha = dml_alpha;
        cfg.momentum = momentum;
        cfg.weight_decay = weight_decay;
        cfg.streams = StreamSeeds::from_master(seed_master);
        cfg.eval_every = eval_every;
        return cfg;
    }

    ProbeConfig to_probe_config() const {
        ProbeConfig p;
        p.hidden_dims = probe_hidden_dims;
        p.num_samples = static_cast<std::size_t>(probe_num_samples);
        p.probe_epochs = probe_epochs;
        p.probe_lr = probe_lr;
        p.seed = derive_stream_seed(seed_master, "probe");
        return p;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::size_t> parse_dims(const std::string& s, const std::string& key) {
    std::vector<std::size_t> dims;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            long v = std::stol(trim(cell));
            if (v < 1) throw std::invalid_argument("nonpositive");
            dims.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("bad value for " + key + ": " + s);
        }
    }
    if (dims.empty()) throw ConfigError("empty value for " + key);
    return dims;
}

inline std::string dims_to_string(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(dims[i]);
    }
    return s;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in, const std::string& origin) {
    RunConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ": expected key = value at line " + std::to_string(lineno));
        std::string key = detail::trim(t.substr(0, eq));
        std::string val = detail::trim(t.substr(eq + 1));

        auto as_int = [&] {
            try {
                return std::stoi(val);
            } catch (const std::exception&) {
                throw ConfigError(origin + ": bad integer for " + key);
            }
        };
        auto as_double = [&] {
            try {
                return std::stod(val);
            } catch (const std::exception&) {
                throw ConfigError(origin + ": bad number for " + key);
            }
        };

        if (key == "method") c.method = val;
        else if (key == "batch_size") c.batch_size = as_int();
        else if (key == "total_epochs") c.total_epochs = as_int();
        else if (key == "lr_initial") c.lr_initial = as_double();
        else if (key == "lr_decay_epoch") c.lr_decay_epoch = as_int();
        else if (key == "lr_decay_factor") c.lr_decay_factor = as_double();
        else if (key == "momentum") c.momentum = as_double();
        else if (key == "weight_decay") c.weight_decay = as_double();
        else if (key == "tau") c.tau = as_double();
        else if (key == "alpha_max") c.alpha_max = as_double();
        else if (key == "beta_mag") c.beta_mag = as_double();
        else if (key == "ramp_len") { c.ramp_len = as_int(); c.ramp_len_explicit = true; }
        else if (key == "r_min") c.r_min = as_double();
        else if (key == "r_max") c.r_max = as_double();
        else if (key == "warmup") c.warmup = as_int();
        else if (key == "dml_alpha") c.dml_alpha = as_double();
        else if (key == "eval_every") c.eval_every = as_int();
        else if (key == "layer_dims") c.layer_dims = detail::parse_dims(val, key);
        else if (key == "seed_master") {
            try {
                c.seed_master = std::stoull(val);
            } catch (const std::exception&) {
                throw ConfigError(origin + ": bad integer for seed_master");
            }
        }
        else if (key == "dataset_path") c.dataset_path = val;
        else if (key == "test_path") c.test_path = val;
        else if (key == "output_dir") c.output_dir = val;
        else if (key == "probe_hidden_dims") c.probe_hidden_dims = detail::parse_dims(val, key);
        else if (key == "probe_epochs") c.probe_epochs = as_int();
        else if (key == "probe_lr") c.probe_lr = as_double();
        else if (key == "probe_num_samples") c.probe_num_samples = as_int();
        else throw ConfigError(origin + ": unknown key '" + key + "' at line " +
                               std::to_string(lineno));
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    return parse_run_config(f, path);
}

// Every default materialized, so re-running from this file reproduces the run.
inline void write_resolved_config(const RunConfig& c, std::ostream& out) {
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    out << "method = " << c.method << '\n'
        << "batch_size = " << c.batch_size << '\n'
        << "total_epochs = " << c.total_epochs << '\n'
        << "lr_initial = " << num(c.lr_initial) << '\n'
        << "lr_decay_epoch = " << c.lr_decay_epoch << '\n'
        << "lr_decay_factor = " << num(c.lr_decay_factor) << '\n'
        << "momentum = " << num(c.momentum) << '\n'
        << "weight_decay = " << num(c.weight_decay) << '\n'
        << "tau = " << num(c.tau) << '\n'
        << "alpha_max = " << num(c.alpha_max) << '\n'
        << "beta_mag = " << num(c.beta_mag) << '\n'
        << "ramp_len = " << (c.ramp_len_explicit ? c.ramp_len : std::max(1, (c.total_epochs * 9) / 10))
        << '\n'
        << "r_min = " << num(c.r_min) << '\n'
        << "r_max = " << num(c.r_max) << '\n'
        << "warmup = " << c.warmup << '\n'
        << "dml_alpha = " << num(c.dml_alpha) << '\n'
        << "eval_every = " << c.eval_every << '\n'
        << "layer_dims = " << detail::dims_to_string(c.layer_dims) << '\n'
        << "seed_master = " << c.seed_master << '\n'
        << "dataset_path = " << c.dataset_path << '\n'
        << "test_path = " << c.test_path << '\n'
        << "output_dir = " << c.output_dir << '\n'
        << "probe_hidden_dims = " << detail::dims_to_string(c.probe_hidden_dims) << '\n'
        << "probe_epochs = " << c.probe_epochs << '\n'
        << "probe_lr = " << num(c.probe_lr) << '\n'
        << "probe_num_samples = " << c.probe_num_samples << '\n';
}

}  // namespace nct
