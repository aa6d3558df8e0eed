#ifndef SP_GRADNET_HPP
#define SP_GRADNET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sp {

enum class OutputActivation : uint32_t { Identity = 0, Sigmoid = 1 };

// Small fully-connected network with four node layers (input, two hidden,
// output), rectifier on the hidden layers, identity or sigmoid on the
// output.  Backprop is exact and also yields the gradient with respect to
// the input, which is what chains a critic into an actor update.
struct GradNet {
    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> w; // row-major [out][in]
        std::vector<double> b;
    };

    std::vector<Layer> layers; // exactly 3 weight layers
    OutputActivation out_act = OutputActivation::Identity;

    int input_size() const { return layers.front().in; }
    int output_size() const { return layers.back().out; }
    size_t parameter_count() const;
    bool same_architecture(const GradNet& o) const;
};

// Uniform +-1/sqrt(fan_in) init; the final layer is additionally scaled by
// final_scale so a fresh actor starts near-neutral.
GradNet make_gradnet(int in, int hidden1, int hidden2, int out,
                     OutputActivation act, uint64_t seed,
                     double final_scale = 1.0);

struct ForwardCache {
    std::vector<std::vector<double>> pre;  // pre-activation per weight layer
    std::vector<std::vector<double>> post; // post-activation (input first)
};

std::vector<double> net_forward(const GradNet& net, std::span<const double> x);
std::vector<double> net_forward(const GradNet& net, std::span<const double> x,
                                ForwardCache& cache);

struct Gradients {
    std::vector<GradNet::Layer> layers; // dL/dw, dL/db per layer
    std::vector<double> input;          // dL/dx

    void zero();
    static Gradients like(const GradNet& net);
};

// Reverse pass from dL/dy given a cached forward.  Accumulates into `out`
// (call out.zero() first for a fresh gradient); returns via out.input the
// gradient at the network input.
void net_gradient(const GradNet& net, const ForwardCache& cache,
                  std::span<const double> out_grad, Gradients& out);

// Adaptive-moment update state (one slot per parameter).
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step = 0;
    std::vector<double> m, v;

    static AdamState like(const GradNet& net);
};

void optimizer_step(GradNet& net, const Gradients& grads, AdamState& state,
                    double lr);

// target += delta * (source - target), parameter-wise.
void soft_update(GradNet& target, const GradNet& source, double delta);

// Versioned binary container for a set of named networks (the four DDPG
// nets); layout documented in README.md.
void save_gradnets(const std::vector<const GradNet*>& nets,
                   const std::string& path);
std::vector<GradNet> load_gradnets(const std::string& path);

} // namespace sp

#endif
