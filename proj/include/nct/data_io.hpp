#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nct/dataset.hpp"
#include "nct/model.hpp"
#include "nct/rng.hpp"

namespace nct {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// C unit-variance Gaussian clusters with adjacent means `separation` apart;
// balanced classes, clean labels. For d >= 2 the means sit on a circle in the
// first two coordinates; for d == 1 they sit on a line.
inline LabeledDataset generate_blobs(std::size_t n, std::size_t d, int num_classes,
                                     double separation, std::uint64_t seed) {
    if (num_classes < 1 || d < 1 || n < static_cast<std::size_t>(num_classes))
        throw std::invalid_argument("invalid blob sizes");
    if (separation < 0.0) throw std::invalid_argument("separation must be nonnegative");

    std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes),
                                           std::vector<double>(d, 0.0));
    if (num_classes > 1) {
        if (d == 1) {
            for (int k = 0; k < num_classes; ++k) means[k][0] = separation * k;
        } else {
            double radius = separation / (2.0 * std::sin(std::numbers::pi / num_classes));
            for (int k = 0; k < num_classes; ++k) {
                double ang = 2.0 * std::numbers::pi * k / num_classes;
                means[k][0] = radius * std::cos(ang);
                means[k][1] = radius * std::sin(ang);
            }
        }
    }

    RngStream rng(seed);
    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.features = matrix(n, d);
    ds.labels.resize(n);
    ds.clean_labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int k = static_cast<int>(i % static_cast<std::size_t>(num_classes));
        ds.labels[i] = ds.clean_labels[i] = k;
        for (std::size_t j = 0; j < d; ++j)
            ds.features.at(i, j) = means[static_cast<std::size_t>(k)][j] + rng.normal();
    }
    return ds;
}

namespace detail {
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
}  // namespace detail

// CSV schema: header f0,...,f{d-1},label,clean_label. Lines starting with '#'
// are comments (audit footers).
inline void save_csv(const LabeledDataset& ds, const std::string& path,
                     const std::string& footer_comment = "") {
    std::ofstream f(path);
    if (!f) throw FormatError("cannot open for writing: " + path);
    std::size_t d = ds.dim();
    for (std::size_t j = 0; j < d; ++j) f << 'f' << j << ',';
    f << "label,clean_label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) f << detail::format_double(ds.features.at(i, j)) << ',';
        f << ds.labels[i] << ',' << ds.clean_labels[i] << '\n';
    }
    if (!footer_comment.empty()) f << "# " << footer_comment << '\n';
}

inline LabeledDataset load_csv(const std::string& path, int num_classes = 0) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError("empty file: " + path);

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    bool has_clean = header.back() == "clean_label";
    const std::string& label_col = has_clean ? header[header.size() - 2] : header.back();
    if (header.size() < 2 || label_col != "label")
        throw FormatError("bad CSV header in " + path);
    std::size_t d = header.size() - (has_clean ? 2 : 1);

    std::vector<double> feats;
    std::vector<int> labels, clean;
    std::size_t lineno = 1;
    bool assumed_clean_flagged = false;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size())
            throw FormatError(path + ": wrong field count at line " + std::to_string(lineno));
        for (std::size_t j = 0; j < d; ++j) {
            double x;
            auto [p, ec] = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), x);
            if (ec != std::errc{} || p != cells[j].data() + cells[j].size())
                throw FormatError(path + ": non-numeric feature at line " + std::to_string(lineno));
            feats.push_back(x);
        }
        try {
            labels.push_back(std::stoi(cells[d]));
            clean.push_back(has_clean ? std::stoi(cells[d + 1]) : labels.back());
        } catch (const std::exception&) {
            throw FormatError(path + ": bad label at line " + std::to_string(lineno));
        }
        if (!has_clean) assumed_clean_flagged = true;
    }
    if (assumed_clean_flagged)
        std::fputs("note: no clean_label column, assumed-clean\n", stderr);

    LabeledDataset ds;
    std::size_t n = labels.size();
    ds.features = Tensor({n, d}, std::move(feats));
    ds.labels = std::move(labels);
    ds.clean_labels = std::move(clean);
    int maxlab = 0;
    for (int y : ds.labels) maxlab = std::max(maxlab, y);
    for (int y : ds.clean_labels) maxlab = std::max(maxlab, y);
    ds.num_classes = num_classes > 0 ? num_classes : maxlab + 1;
    ds.validate();
    return ds;
}

namespace detail {
inline std::uint32_t read_be32(std::istream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw FormatError("truncated IDX file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}
}  // namespace detail

// IDX ubyte ingestion (big-endian): 0x00000803 images, 0x00000801 labels.
// Pixels scaled to [0,1], images flattened row-major.
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw FormatError("cannot open: " + images_path);
    if (detail::read_be32(fi, images_path) != 0x00000803u)
        throw FormatError("bad image magic in " + images_path);
    std::uint32_t n = detail::read_be32(fi, images_path);
    std::uint32_t rows = detail::read_be32(fi, images_path);
    std::uint32_t cols = detail::read_be32(fi, images_path);
    std::size_t d = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> raw(static_cast<std::size_t>(n) * d);
    fi.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!fi) throw FormatError("truncated IDX file: " + images_path);

    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw FormatError("cannot open: " + labels_path);
    if (detail::read_be32(fl, labels_path) != 0x00000801u)
        throw FormatError("bad label magic in " + labels_path);
    std::uint32_t nl = detail::read_be32(fl, labels_path);
    if (nl != n) throw FormatError("image/label count mismatch");
    std::vector<unsigned char> lab(nl);
    fl.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
    if (!fl) throw FormatError("truncated IDX file: " + labels_path);

    LabeledDataset ds;
    ds.features = matrix(n, d);
    for (std::size_t i = 0; i < raw.size(); ++i)
        ds.features.v[i] = static_cast<double>(raw[i]) / 255.0;
    ds.labels.assign(lab.begin(), lab.end());
    ds.clean_labels = ds.labels;
    int maxlab = 0;
    for (int y : ds.labels) maxlab = std::max(maxlab, y);
    ds.num_classes = maxlab + 1;
    return ds;
}

// Model binary: magic "NCTM", version, layer count, dims, then parameters as
// 64-bit little-endian doubles, weights then biases per layer.
inline void save_model(const MlpModel& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open for writing: " + path);
    auto w32 = [&](std::uint32_t x) { f.write(reinterpret_cast<const char*>(&x), 4); };
    f.write("NCTM", 4);
    w32(1u);  // version
    w32(static_cast<std::uint32_t>(m.layer_dims.size()));
    for (std::size_t dmm : m.layer_dims) w32(static_cast<std::uint32_t>(dmm));
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        const auto& w = m.weights[l].v;
        const auto& b = m.biases[l].v;
        f.write(reinterpret_cast<const char*>(w.data()),
                static_cast<std::streamsize>(w.size() * sizeof(double)));
        f.write(reinterpret_cast<const char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(double)));
    }
}

inline MlpModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "NCTM", 4) != 0) throw FormatError("bad model magic: " + path);
    auto r32 = [&]() {
        std::uint32_t x;
        f.read(reinterpret_cast<char*>(&x), 4);
        if (!f) throw FormatError("truncated model file: " + path);
        return x;
    };
    if (r32() != 1u) throw FormatError("unsupported model version: " + path);
    std::uint32_t nd = r32();
    if (nd < 2) throw FormatError("corrupt model header: " + path);
    MlpModel m;
    for (std::uint32_t i = 0; i < nd; ++i) m.layer_dims.push_back(r32());
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        Tensor w = matrix(m.layer_dims[l], m.layer_dims[l + 1]);
        Tensor b({m.layer_dims[l + 1]});
        f.read(reinterpret_cast<char*>(w.v.data()),
               static_cast<std::streamsize>(w.v.size() * sizeof(double)));
        f.read(reinterpret_cast<char*>(b.v.data()),
               static_cast<std::streamsize>(b.v.size() * sizeof(double)));
        if (!f) throw FormatError("truncated model file: " + path);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

}  // namespace nct
