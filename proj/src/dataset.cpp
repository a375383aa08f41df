#include "kdlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "binio.hpp"
#include "kdlab/errors.hpp"
#include "kdlab/rng.hpp"

namespace kdlab {

void LabeledDataset::validate() const {
    if (inputs.rows == 0) throw ConfigError("dataset: empty");
    if (inputs.rows != labels.size()) throw ConfigError("dataset: label count mismatch");
    if (class_count < 2) throw ConfigError("dataset: need at least 2 classes");
    for (int y : labels) {
        if (y < 0 || y >= class_count) throw DataError("dataset: label out of range");
    }
    if (!all_finite(inputs)) throw NumericError("dataset: non-finite input");
}

namespace {

void check_spec(const SyntheticSpec& spec) {
    if (spec.classes < 2) throw ConfigError("gen_dataset: classes must be >= 2");
    if (spec.dim < 2) throw ConfigError("gen_dataset: dim must be >= 2");
    if (spec.train_per_class < 1 || spec.test_per_class < 1)
        throw ConfigError("gen_dataset: samples per class must be >= 1");
    if (spec.separation <= 0.0 || spec.noise <= 0.0)
        throw ConfigError("gen_dataset: scales must be positive");
}

std::string describe(const SyntheticSpec& spec) {
    const char* name =
        spec.generator == SyntheticGenerator::gaussian_blobs ? "gaussian_blobs" : "two_spirals";
    return std::string(name) + " C=" + std::to_string(spec.classes) +
           " d=" + std::to_string(spec.dim) + " sep=" + std::to_string(spec.separation) +
           " noise=" + std::to_string(spec.noise) + " seed=" + std::to_string(spec.seed);
}

LabeledDataset fill_blobs(const SyntheticSpec& spec, const Matrix& means,
                          int per_class, std::uint64_t stream_seed, const char* split) {
    Rng rng(stream_seed);
    const std::size_t n = static_cast<std::size_t>(spec.classes) * per_class;
    LabeledDataset ds;
    ds.inputs = Matrix(n, spec.dim);
    ds.labels.resize(n);
    ds.class_count = spec.classes;
    ds.split = split;
    ds.provenance = describe(spec);
    std::size_t row = 0;
    for (int c = 0; c < spec.classes; ++c) {
        for (int s = 0; s < per_class; ++s, ++row) {
            double* x = ds.inputs.row(row);
            for (int j = 0; j < spec.dim; ++j)
                x[j] = means(c, j) + spec.noise * rng.normal();
            ds.labels[row] = c;
        }
    }
    return ds;
}

LabeledDataset fill_spirals(const SyntheticSpec& spec, int per_class,
                            std::uint64_t stream_seed, const char* split) {
    Rng rng(stream_seed);
    const std::size_t n = static_cast<std::size_t>(spec.classes) * per_class;
    LabeledDataset ds;
    ds.inputs = Matrix(n, spec.dim);
    ds.labels.resize(n);
    ds.class_count = spec.classes;
    ds.split = split;
    ds.provenance = describe(spec);
    constexpr double turns = 1.5;
    std::size_t row = 0;
    for (int c = 0; c < spec.classes; ++c) {
        const double arm = 2.0 * std::numbers::pi * c / spec.classes;
        for (int s = 0; s < per_class; ++s, ++row) {
            const double t = rng.uniform();
            const double angle = arm + 2.0 * std::numbers::pi * turns * t;
            const double radius = spec.separation * (0.2 + 0.8 * t);
            double* x = ds.inputs.row(row);
            x[0] = radius * std::cos(angle) + 0.1 * spec.noise * rng.normal();
            x[1] = radius * std::sin(angle) + 0.1 * spec.noise * rng.normal();
            for (int j = 2; j < spec.dim; ++j) x[j] = spec.noise * rng.normal();
            ds.labels[row] = c;
        }
    }
    return ds;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> gen_dataset(const SyntheticSpec& spec) {
    check_spec(spec);
    if (spec.generator == SyntheticGenerator::gaussian_blobs) {
        Rng mean_rng(Rng::derive(spec.seed, "blob-means"));
        Matrix means(spec.classes, spec.dim);
        const double half = spec.separation / 2.0;
        for (double& v : means.data) v = mean_rng.uniform(-half, half);
        auto train = fill_blobs(spec, means, spec.train_per_class,
                                Rng::derive(spec.seed, "train-samples"), "train");
        auto test = fill_blobs(spec, means, spec.test_per_class,
                               Rng::derive(spec.seed, "test-samples"), "test");
        return {std::move(train), std::move(test)};
    }
    auto train = fill_spirals(spec, spec.train_per_class,
                              Rng::derive(spec.seed, "train-samples"), "train");
    auto test = fill_spirals(spec, spec.test_per_class,
                             Rng::derive(spec.seed, "test-samples"), "test");
    return {std::move(train), std::move(test)};
}

LabeledDataset subset_data(const LabeledDataset& data, double fraction,
                           std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw ConfigError("subset_data: fraction outside (0,1]");
    data.validate();
    if (fraction == 1.0) return data;  // identity, original row order

    std::vector<std::vector<std::size_t>> per_class(data.class_count);
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        per_class[data.labels[i]].push_back(i);

    std::vector<bool> keep(data.size(), false);
    for (int c = 0; c < data.class_count; ++c) {
        auto& idx = per_class[c];
        const std::size_t take = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(idx.size())));
        Rng rng(Rng::derive(seed, "subset", static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        for (std::size_t i = 0; i < take && i < idx.size(); ++i) keep[idx[i]] = true;
    }

    LabeledDataset out;
    out.class_count = data.class_count;
    out.split = data.split;
    out.provenance = data.provenance + " subset=" + std::to_string(fraction);
    std::size_t n = 0;
    for (bool k : keep) n += k;
    out.inputs = Matrix(n, data.inputs.cols);
    out.labels.reserve(n);
    std::size_t row = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!keep[i]) continue;
        std::copy(data.inputs.row(i), data.inputs.row(i) + data.inputs.cols,
                  out.inputs.row(row));
        out.labels.push_back(data.labels[i]);
        ++row;
    }
    return out;
}

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path, std::size_t offset) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4)
        throw DataError(path + ": truncated at byte " + std::to_string(offset));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataError("cannot open: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataError("cannot open: " + labels_path);

    const std::uint32_t img_magic = read_be_u32(img, images_path, 0);
    if (img_magic != 0x00000803u)
        throw DataError(images_path + ": bad magic at byte 0 (expected 0x00000803)");
    const std::uint32_t n_images = read_be_u32(img, images_path, 4);
    const std::uint32_t n_rows = read_be_u32(img, images_path, 8);
    const std::uint32_t n_cols = read_be_u32(img, images_path, 12);

    const std::uint32_t lab_magic = read_be_u32(lab, labels_path, 0);
    if (lab_magic != 0x00000801u)
        throw DataError(labels_path + ": bad magic at byte 0 (expected 0x00000801)");
    const std::uint32_t n_labels = read_be_u32(lab, labels_path, 4);

    if (n_images != n_labels)
        throw DataError("IDX count mismatch: " + std::to_string(n_images) + " images vs " +
                        std::to_string(n_labels) + " labels (byte 4)");
    if (n_images == 0) throw DataError(images_path + ": zero items");

    const std::size_t pixels = static_cast<std::size_t>(n_rows) * n_cols;
    LabeledDataset ds;
    ds.inputs = Matrix(n_images, pixels);
    ds.labels.resize(n_images);
    std::vector<std::uint8_t> buf(pixels);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
        if (img.gcount() != static_cast<std::streamsize>(pixels))
            throw DataError(images_path + ": truncated at byte " +
                            std::to_string(16 + std::size_t(i) * pixels));
        double* row = ds.inputs.row(i);
        for (std::size_t j = 0; j < pixels; ++j) row[j] = buf[j] / 255.0;
        char y = 0;
        lab.read(&y, 1);
        if (lab.gcount() != 1)
            throw DataError(labels_path + ": truncated at byte " + std::to_string(8 + i));
        ds.labels[i] = static_cast<std::uint8_t>(y);
    }
    ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    if (ds.class_count < 2) ds.class_count = 2;
    ds.split = "train";
    ds.provenance = "idx:" + images_path;
    return ds;
}

void save_dataset(const LabeledDataset& data, const std::string& path) {
    data.validate();
    binio::Writer w(path);
    w.bytes("KDDS", 4);
    w.u32(1);  // format version
    w.str(data.split);
    w.str(data.provenance);
    w.i32(data.class_count);
    w.u64(data.inputs.rows);
    w.u64(data.inputs.cols);
    for (int y : data.labels) w.i32(y);
    w.doubles(data.inputs.data.data(), data.inputs.data.size());
    w.finish();
}

LabeledDataset load_dataset(const std::string& path) {
    binio::Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::string(magic, 4) != "KDDS") throw DataError(path + ": not a dataset file");
    const std::uint32_t version = r.u32();
    if (version != 1) throw DataError(path + ": unsupported dataset version");
    LabeledDataset ds;
    ds.split = r.str();
    ds.provenance = r.str();
    ds.class_count = r.i32();
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    ds.labels.resize(rows);
    for (std::uint64_t i = 0; i < rows; ++i) ds.labels[i] = r.i32();
    ds.inputs = Matrix(rows, cols);
    r.doubles(ds.inputs.data.data(), ds.inputs.data.size());
    r.finish();
    ds.validate();
    return ds;
}

}  // namespace kdlab
