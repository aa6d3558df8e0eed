#include "sp/gradnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace sp {

size_t GradNet::parameter_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

bool GradNet::same_architecture(const GradNet& o) const {
    if (layers.size() != o.layers.size() || out_act != o.out_act) return false;
    for (size_t i = 0; i < layers.size(); ++i)
        if (layers[i].in != o.layers[i].in || layers[i].out != o.layers[i].out)
            return false;
    return true;
}

GradNet make_gradnet(int in, int hidden1, int hidden2, int out,
                     OutputActivation act, uint64_t seed, double final_scale) {
    if (in < 1 || hidden1 < 1 || hidden2 < 1 || out < 1)
        throw std::invalid_argument("gradnet sizes must be positive");
    GradNet net;
    net.out_act = act;
    std::mt19937_64 rng(seed);
    const int dims[4] = {in, hidden1, hidden2, out};
    for (int l = 0; l < 3; ++l) {
        GradNet::Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(double(layer.in));
        const double scale = l == 2 ? final_scale : 1.0;
        std::uniform_real_distribution<double> dist(-bound, bound);
        layer.w.resize(size_t(layer.out) * layer.in);
        layer.b.resize(size_t(layer.out));
        for (double& w : layer.w) w = dist(rng) * scale;
        for (double& b : layer.b) b = dist(rng) * scale;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

void affine(const GradNet::Layer& l, std::span<const double> x,
            std::vector<double>& y) {
    y.assign(size_t(l.out), 0.0);
    for (int o = 0; o < l.out; ++o) {
        const double* wrow = l.w.data() + size_t(o) * l.in;
        double acc = l.b[size_t(o)];
        for (int i = 0; i < l.in; ++i) acc += wrow[i] * x[size_t(i)];
        y[size_t(o)] = acc;
    }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

std::vector<double> net_forward(const GradNet& net, std::span<const double> x,
                                ForwardCache& cache) {
    if (x.size() != size_t(net.input_size()))
        throw std::invalid_argument("net_forward: input size mismatch");
    cache.pre.assign(net.layers.size(), {});
    cache.post.assign(net.layers.size() + 1, {});
    cache.post[0].assign(x.begin(), x.end());

    for (size_t l = 0; l < net.layers.size(); ++l) {
        affine(net.layers[l], cache.post[l], cache.pre[l]);
        auto& out = cache.post[l + 1];
        out = cache.pre[l];
        if (l + 1 < net.layers.size()) {
            for (double& v : out) v = v > 0.0 ? v : 0.0;
        } else if (net.out_act == OutputActivation::Sigmoid) {
            for (double& v : out) v = sigmoid(v);
        }
    }
    return cache.post.back();
}

std::vector<double> net_forward(const GradNet& net, std::span<const double> x) {
    ForwardCache cache;
    return net_forward(net, x, cache);
}

void Gradients::zero() {
    for (auto& l : layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    std::fill(input.begin(), input.end(), 0.0);
}

Gradients Gradients::like(const GradNet& net) {
    Gradients g;
    for (const auto& l : net.layers) {
        GradNet::Layer gl;
        gl.in = l.in;
        gl.out = l.out;
        gl.w.assign(l.w.size(), 0.0);
        gl.b.assign(l.b.size(), 0.0);
        g.layers.push_back(std::move(gl));
    }
    g.input.assign(size_t(net.input_size()), 0.0);
    return g;
}

void net_gradient(const GradNet& net, const ForwardCache& cache,
                  std::span<const double> out_grad, Gradients& out) {
    if (out_grad.size() != size_t(net.output_size()))
        throw std::invalid_argument("net_gradient: output gradient size mismatch");
    if (cache.post.size() != net.layers.size() + 1)
        throw std::invalid_argument("net_gradient: forward cache missing");

    std::vector<double> delta(out_grad.begin(), out_grad.end());
    if (net.out_act == OutputActivation::Sigmoid) {
        const auto& y = cache.post.back();
        for (size_t i = 0; i < delta.size(); ++i)
            delta[i] *= y[i] * (1.0 - y[i]);
    }

    for (size_t l = net.layers.size(); l-- > 0;) {
        const auto& layer = net.layers[l];
        auto& glayer = out.layers[l];
        const auto& input = cache.post[l];
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[size_t(o)];
            glayer.b[size_t(o)] += d;
            double* gw = glayer.w.data() + size_t(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) gw[i] += d * input[size_t(i)];
        }
        std::vector<double> prev(size_t(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[size_t(o)];
            const double* wrow = layer.w.data() + size_t(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) prev[size_t(i)] += d * wrow[i];
        }
        if (l > 0) {
            const auto& pre = cache.pre[l - 1];
            for (int i = 0; i < layer.in; ++i)
                if (pre[size_t(i)] <= 0.0) prev[size_t(i)] = 0.0;
        }
        delta = std::move(prev);
    }
    for (size_t i = 0; i < delta.size(); ++i) out.input[i] += delta[i];
}

AdamState AdamState::like(const GradNet& net) {
    AdamState s;
    s.m.assign(net.parameter_count(), 0.0);
    s.v.assign(net.parameter_count(), 0.0);
    return s;
}

void optimizer_step(GradNet& net, const Gradients& grads, AdamState& state,
                    double lr) {
    if (state.m.size() != net.parameter_count())
        throw std::invalid_argument("optimizer_step: state does not match net");
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
    size_t idx = 0;
    auto update = [&](double& param, double g) {
        double& m = state.m[idx];
        double& v = state.v[idx];
        ++idx;
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        param -= lr * (m / c1) / (std::sqrt(v / c2) + state.eps);
    };
    for (size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        const auto& glayer = grads.layers[l];
        for (size_t i = 0; i < layer.w.size(); ++i) update(layer.w[i], glayer.w[i]);
        for (size_t i = 0; i < layer.b.size(); ++i) update(layer.b[i], glayer.b[i]);
    }
}

void soft_update(GradNet& target, const GradNet& source, double delta) {
    if (!target.same_architecture(source))
        throw std::invalid_argument("soft_update: architecture mismatch");
    for (size_t l = 0; l < target.layers.size(); ++l) {
        auto& t = target.layers[l];
        const auto& s = source.layers[l];
        for (size_t i = 0; i < t.w.size(); ++i)
            t.w[i] += delta * (s.w[i] - t.w[i]);
        for (size_t i = 0; i < t.b.size(); ++i)
            t.b[i] += delta * (s.b[i] - t.b[i]);
    }
}

namespace {
constexpr char kNetMagic[8] = {'S', 'P', 'N', 'E', 'T', 'S', '0', '1'};

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
} // namespace

void save_gradnets(const std::vector<const GradNet*>& nets,
                   const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kNetMagic, 8);
    write_le<uint32_t>(out, uint32_t(nets.size()));
    for (const GradNet* net : nets) {
        write_le<uint32_t>(out, uint32_t(net->out_act));
        write_le<uint32_t>(out, uint32_t(net->layers.size()));
        for (const auto& l : net->layers) {
            write_le<uint32_t>(out, uint32_t(l.in));
            write_le<uint32_t>(out, uint32_t(l.out));
            for (double w : l.w) write_le<double>(out, w);
            for (double b : l.b) write_le<double>(out, b);
        }
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

std::vector<GradNet> load_gradnets(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kNetMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    uint32_t count = read_le<uint32_t>(in);
    std::vector<GradNet> nets;
    for (uint32_t n = 0; n < count; ++n) {
        GradNet net;
        net.out_act = OutputActivation(read_le<uint32_t>(in));
        uint32_t nlayers = read_le<uint32_t>(in);
        for (uint32_t l = 0; l < nlayers; ++l) {
            GradNet::Layer layer;
            layer.in = int(read_le<uint32_t>(in));
            layer.out = int(read_le<uint32_t>(in));
            layer.w.resize(size_t(layer.out) * layer.in);
            layer.b.resize(size_t(layer.out));
            for (double& w : layer.w) w = read_le<double>(in);
            for (double& b : layer.b) b = read_le<double>(in);
            net.layers.push_back(std::move(layer));
        }
        nets.push_back(std::move(net));
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return nets;
}

} // namespace sp
