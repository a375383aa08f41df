#include "kdlab/checkpoint.hpp"

#include "binio.hpp"
#include "kdlab/errors.hpp"

namespace kdlab {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

void save_checkpoint(const Mlp& model, const CheckpointMeta& meta,
                     const std::string& path) {
    binio::Writer w(path);
    w.bytes("KDCP", 4);
    w.u32(kCheckpointVersion);
    w.u32(model.activation == Activation::relu ? 0u : 1u);
    w.u64(model.layer_dims.size());
    for (std::size_t d : model.layer_dims) w.u64(d);
    w.u64(meta.seed);
    w.i32(meta.epochs);
    w.f64(meta.best_test_acc);
    w.f64(meta.final_test_acc);
    w.str(meta.note);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        w.doubles(model.weights[l].data.data(), model.weights[l].data.size());
        w.doubles(model.biases[l].data(), model.biases[l].size());
    }
    w.finish();
}

Mlp load_checkpoint(const std::string& path, CheckpointMeta* meta) {
    binio::Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::string(magic, 4) != "KDCP") throw DataError(path + ": not a checkpoint file");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t act = r.u32();
    if (act > 1) throw DataError(path + ": unknown activation code");
    const std::uint64_t ndims = r.u64();
    if (ndims < 2 || ndims > 64) throw DataError(path + ": invalid layer count");
    std::vector<std::size_t> dims(ndims);
    for (auto& d : dims) {
        d = r.u64();
        if (d < 1 || d > (1u << 24)) throw DataError(path + ": invalid layer dim");
    }
    CheckpointMeta m;
    m.seed = r.u64();
    m.epochs = r.i32();
    m.best_test_acc = r.f64();
    m.final_test_acc = r.f64();
    m.note = r.str();

    Mlp model;
    model.layer_dims = dims;
    model.activation = act == 0 ? Activation::relu : Activation::tanh;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Matrix w(dims[l], dims[l + 1]);
        r.doubles(w.data.data(), w.data.size());
        model.weights.push_back(std::move(w));
        std::vector<double> b(dims[l + 1]);
        r.doubles(b.data(), b.size());
        model.biases.push_back(std::move(b));
    }
    r.finish();
    if (meta) *meta = m;
    return model;
}

}  // namespace kdlab
