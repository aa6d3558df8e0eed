#ifndef SP_TEST_FIXTURES_HPP
#define SP_TEST_FIXTURES_HPP

#include <cstddef>

// Reference values measured once against the shipped assets
// (digits16_cnn_v1.spm + digits16 test split) and frozen here.
namespace fixtures {

// correct classifications out of the first 1000 test samples
inline constexpr size_t kCleanCorrect1000 = 982;
// correct classifications over the full 2154-sample test split
inline constexpr size_t kCleanCorrectFull = 2108;
inline constexpr size_t kTestSplitSize = 2154;

// same counts after an 8-bit fixed-point round trip (quantization only),
// global clamp bound = max |w| over the model
inline constexpr size_t kFixed8Correct1000 = 978;
inline constexpr size_t kFixed8CorrectFull = 2101;

} // namespace fixtures

#endif
