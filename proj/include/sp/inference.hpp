#ifndef SP_INFERENCE_HPP
#define SP_INFERENCE_HPP

#include <span>
#include <vector>

#include "sp/dataset.hpp"
#include "sp/model.hpp"

namespace sp {

// Runs the network on one image (pixels scaled by 1/255) and returns softmax
// class scores.  All arithmetic is double so post-error weight magnitudes up
// to ~2^129 stay finite; non-finite logits are pushed to zero probability.
std::vector<double> forward(const NetworkModel& model,
                            std::span<const uint8_t> image, int rows, int cols);

// Argmax with ties (and non-finite scores) resolved to the lowest index.
int predict(std::span<const double> scores);

// Fraction of the first `limit` samples classified correctly.
double evaluate_accuracy(const NetworkModel& model, const Dataset& data,
                         size_t limit);

// Same, as a raw count (handy for exact fixtures).
size_t count_correct(const NetworkModel& model, const Dataset& data,
                     size_t limit);

} // namespace sp

#endif
