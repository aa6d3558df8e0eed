#ifndef SP_MODEL_HPP
#define SP_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace sp {

enum class LayerKind : uint32_t { Conv = 0, Fc = 1 };

// One layer of edges (weights).  Conv weights are stored output-channel
// major, then input channel, then kernel row, then kernel column; fc weights
// are output major then input.  Biases ride along but are never part of the
// bit representation.
struct EdgeLayer {
    LayerKind kind = LayerKind::Fc;
    int c_in = 1;
    int c_out = 1;
    int kernel = 1; // 1 for fc
    int stride = 1;
    int pad = 0;
    int feat = 1;   // input feature map size (spatial), 1 for fc
    bool relu = false;
    int pool = 1;   // max-pool factor applied after activation (1 = none)
    std::vector<double> weights;
    std::vector<double> bias;

    size_t expected_weight_count() const {
        return kind == LayerKind::Conv
                   ? size_t(c_out) * size_t(c_in) * size_t(kernel) * size_t(kernel)
                   : size_t(c_out) * size_t(c_in);
    }
};

struct NetworkModel {
    std::vector<EdgeLayer> layers;
    int class_count = 0;

    void validate() const;
};

// State-vector geometry of one edge layer.  An fc layer is reported as a
// 1x1-feature convolution (kernel = stride = feat = 1).
struct LayerMeta {
    int c_in = 0;
    int c_out = 0;
    int kernel = 0;
    int stride = 0;
    int feat = 0;
    long long w_count = 0;
};

std::vector<LayerMeta> layer_metadata(const NetworkModel& model);
std::vector<size_t> layer_sizes(const NetworkModel& model);

// Versioned binary model file ("SPMODEL1", little-endian, float32 arrays).
// Layout documented in README.md and pinned by a golden-file test.
NetworkModel load_model(const std::string& path);
void save_model(const NetworkModel& model, const std::string& path);

} // namespace sp

#endif
