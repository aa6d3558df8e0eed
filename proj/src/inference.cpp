#include "sp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sp {

namespace {

struct Tensor {
    int ch = 0, h = 0, w = 0;
    std::vector<double> v; // channel-major, then row, then column

    double* plane(int c) { return v.data() + size_t(c) * h * w; }
    const double* plane(int c) const { return v.data() + size_t(c) * h * w; }
};

// ceil(a / b) for b > 0, a possibly negative
int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

Tensor conv_layer(const EdgeLayer& l, const Tensor& in) {
    if (in.ch != l.c_in || in.h != l.feat || in.w != l.feat)
        throw std::invalid_argument("conv layer input shape mismatch");
    const int k = l.kernel, s = l.stride, p = l.pad;
    const int oh = (in.h + 2 * p - k) / s + 1;
    const int ow = (in.w + 2 * p - k) / s + 1;
    if (oh < 1 || ow < 1)
        throw std::invalid_argument("conv layer output collapses to nothing");

    Tensor out;
    out.ch = l.c_out;
    out.h = oh;
    out.w = ow;
    out.v.resize(size_t(l.c_out) * oh * ow);

    for (int oc = 0; oc < l.c_out; ++oc) {
        double* oplane = out.plane(oc);
        std::fill(oplane, oplane + size_t(oh) * ow, l.bias[oc]);
        for (int ic = 0; ic < l.c_in; ++ic) {
            const double* iplane = in.plane(ic);
            const double* wk = l.weights.data() +
                               (size_t(oc) * l.c_in + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = wk[ky * k + kx];
                    // valid ranges where the padded input index lands in-bounds
                    const int oy0 = std::max(0, ceil_div(p - ky, s));
                    const int oy1 = std::min(oh, ceil_div(in.h + p - ky, s));
                    const int ox0 = std::max(0, ceil_div(p - kx, s));
                    const int ox1 = std::min(ow, ceil_div(in.w + p - kx, s));
                    for (int oy = oy0; oy < oy1; ++oy) {
                        const double* irow = iplane + size_t(oy * s - p + ky) * in.w;
                        double* orow = oplane + size_t(oy) * ow;
                        for (int ox = ox0; ox < ox1; ++ox)
                            orow[ox] += wv * irow[ox * s - p + kx];
                    }
                }
            }
        }
    }
    return out;
}

Tensor fc_layer(const EdgeLayer& l, const Tensor& in) {
    if (int(in.v.size()) != l.c_in)
        throw std::invalid_argument("fc layer input size mismatch");
    Tensor out;
    out.ch = l.c_out;
    out.h = 1;
    out.w = 1;
    out.v.resize(size_t(l.c_out));
    for (int o = 0; o < l.c_out; ++o) {
        const double* wrow = l.weights.data() + size_t(o) * l.c_in;
        double acc = l.bias[o];
        for (int i = 0; i < l.c_in; ++i) acc += wrow[i] * in.v[i];
        out.v[o] = acc;
    }
    return out;
}

void relu_inplace(Tensor& t) {
    for (double& x : t.v)
        if (!(x > 0.0)) x = 0.0; // NaN sums collapse to 0 as well
}

Tensor max_pool(const Tensor& in, int q) {
    Tensor out;
    out.ch = in.ch;
    out.h = in.h / q;
    out.w = in.w / q;
    out.v.resize(size_t(out.ch) * out.h * out.w);
    for (int c = 0; c < in.ch; ++c) {
        const double* ip = in.plane(c);
        double* op = out.plane(c);
        for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                for (int dy = 0; dy < q; ++dy)
                    for (int dx = 0; dx < q; ++dx) {
                        double v = ip[size_t(oy * q + dy) * in.w + (ox * q + dx)];
                        if (v > best) best = v;
                    }
                op[size_t(oy) * out.w + ox] = best;
            }
    }
    return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> z(logits);
    for (double& x : z)
        if (std::isnan(x)) x = -std::numeric_limits<double>::infinity();
    double m = -std::numeric_limits<double>::infinity();
    for (double x : z) m = std::max(m, x);

    std::vector<double> p(z.size());
    if (std::isinf(m)) {
        // all -inf: uniform; any +inf: mass on the saturated entries
        if (m < 0) {
            std::fill(p.begin(), p.end(), 1.0 / double(p.size()));
            return p;
        }
        for (size_t i = 0; i < z.size(); ++i) p[i] = z[i] == m ? 1.0 : 0.0;
    } else {
        for (size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - m);
    }
    double sum = 0.0;
    for (double x : p) sum += x;
    for (double& x : p) x /= sum;
    return p;
}

} // namespace

std::vector<double> forward(const NetworkModel& model,
                            std::span<const uint8_t> image, int rows, int cols) {
    if (image.size() != size_t(rows) * size_t(cols))
        throw std::invalid_argument("image buffer does not match its shape");

    Tensor t;
    t.ch = 1;
    t.h = rows;
    t.w = cols;
    t.v.resize(image.size());
    for (size_t i = 0; i < image.size(); ++i) t.v[i] = double(image[i]) / 255.0;

    for (const auto& layer : model.layers) {
        t = layer.kind == LayerKind::Conv ? conv_layer(layer, t)
                                          : fc_layer(layer, t);
        if (layer.relu) relu_inplace(t);
        if (layer.pool > 1 && layer.kind == LayerKind::Conv)
            t = max_pool(t, layer.pool);
    }
    if (int(t.v.size()) != model.class_count)
        throw std::invalid_argument("network output size does not match class count");
    return softmax(t.v);
}

int predict(std::span<const double> scores) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!std::isnan(scores[i]) && scores[i] > best_score) {
            best_score = scores[i];
            best = int(i);
        }
    }
    return best;
}

size_t count_correct(const NetworkModel& model, const Dataset& data,
                     size_t limit) {
    if (limit < 1 || limit > data.size())
        throw std::invalid_argument("evaluation limit out of range");
    size_t correct = 0;
    for (size_t i = 0; i < limit; ++i) {
        auto scores = forward(model, data.image(i), data.rows, data.cols);
        if (predict(scores) == int(data.labels[i])) ++correct;
    }
    return correct;
}

double evaluate_accuracy(const NetworkModel& model, const Dataset& data,
                         size_t limit) {
    return double(count_correct(model, data, limit)) / double(limit);
}

} // namespace sp
