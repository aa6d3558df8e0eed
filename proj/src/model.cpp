#include "sp/model.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sp {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'M', 'O', 'D', 'E', 'L', '1'};

template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v; // x86 target; file format is little-endian
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

} // namespace

void NetworkModel::validate() const {
    if (layers.empty())
        throw std::invalid_argument("model has no edge layers");
    if (class_count < 2)
        throw std::invalid_argument("model class count must be at least 2");
    for (size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.c_in < 1 || l.c_out < 1 || l.kernel < 1 || l.stride < 1 ||
            l.feat < 1 || l.pad < 0 || l.pool < 1)
            throw std::invalid_argument("layer " + std::to_string(i) +
                                        ": bad geometry");
        if (l.weights.size() != l.expected_weight_count())
            throw std::invalid_argument("layer " + std::to_string(i) +
                                        ": weight count does not match geometry");
        if (l.bias.size() != size_t(l.c_out))
            throw std::invalid_argument("layer " + std::to_string(i) +
                                        ": bias count does not match c_out");
    }
}

std::vector<LayerMeta> layer_metadata(const NetworkModel& model) {
    std::vector<LayerMeta> out;
    out.reserve(model.layers.size());
    for (const auto& l : model.layers) {
        LayerMeta m;
        m.c_in = l.c_in;
        m.c_out = l.c_out;
        m.kernel = l.kind == LayerKind::Conv ? l.kernel : l.feat;
        m.stride = l.kind == LayerKind::Conv ? l.stride : 1;
        m.feat = l.feat;
        m.w_count = (long long)l.weights.size();
        out.push_back(m);
    }
    return out;
}

std::vector<size_t> layer_sizes(const NetworkModel& model) {
    std::vector<size_t> out;
    out.reserve(model.layers.size());
    for (const auto& l : model.layers) out.push_back(l.weights.size());
    return out;
}

NetworkModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a model file: " + path);
    uint32_t version = read_le<uint32_t>(in);
    if (version != 1)
        throw std::runtime_error("unsupported model version " + std::to_string(version));

    NetworkModel model;
    model.class_count = int(read_le<uint32_t>(in));
    uint32_t n_layers = read_le<uint32_t>(in);
    for (uint32_t i = 0; i < n_layers; ++i) {
        EdgeLayer l;
        uint32_t kind = read_le<uint32_t>(in);
        if (kind > 1) throw std::runtime_error("bad layer kind in model file");
        l.kind = LayerKind(kind);
        l.c_in = int(read_le<uint32_t>(in));
        l.c_out = int(read_le<uint32_t>(in));
        l.kernel = int(read_le<uint32_t>(in));
        l.stride = int(read_le<uint32_t>(in));
        l.pad = int(read_le<uint32_t>(in));
        l.feat = int(read_le<uint32_t>(in));
        l.relu = read_le<uint32_t>(in) != 0;
        l.pool = int(read_le<uint32_t>(in));
        uint64_t wcount = read_le<uint64_t>(in);
        uint64_t bcount = read_le<uint64_t>(in);
        l.weights.resize(wcount);
        for (uint64_t j = 0; j < wcount; ++j)
            l.weights[j] = double(read_le<float>(in));
        l.bias.resize(bcount);
        for (uint64_t j = 0; j < bcount; ++j)
            l.bias[j] = double(read_le<float>(in));
        model.layers.push_back(std::move(l));
    }
    if (!in) throw std::runtime_error("truncated model file: " + path);
    model.validate();
    return model;
}

void save_model(const NetworkModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out.write(kMagic, 8);
    write_le<uint32_t>(out, 1);
    write_le<uint32_t>(out, uint32_t(model.class_count));
    write_le<uint32_t>(out, uint32_t(model.layers.size()));
    for (const auto& l : model.layers) {
        write_le<uint32_t>(out, uint32_t(l.kind));
        write_le<uint32_t>(out, uint32_t(l.c_in));
        write_le<uint32_t>(out, uint32_t(l.c_out));
        write_le<uint32_t>(out, uint32_t(l.kernel));
        write_le<uint32_t>(out, uint32_t(l.stride));
        write_le<uint32_t>(out, uint32_t(l.pad));
        write_le<uint32_t>(out, uint32_t(l.feat));
        write_le<uint32_t>(out, l.relu ? 1u : 0u);
        write_le<uint32_t>(out, uint32_t(l.pool));
        write_le<uint64_t>(out, l.weights.size());
        write_le<uint64_t>(out, l.bias.size());
        for (double w : l.weights) write_le<float>(out, float(w));
        for (double b : l.bias) write_le<float>(out, float(b));
    }
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

} // namespace sp
