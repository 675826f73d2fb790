#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace limbnet {

// Orthogonal discrete wavelet transform with periodic extension.
// Only the Daubechies-4 filter pair (8 taps, 4 vanishing moments) is
// built in; the config key exists so other filters can be added.

enum class WaveletKind { db4 };
enum class ThresholdRule { universal_soft };

struct DenoiseConfig {
    WaveletKind wavelet = WaveletKind::db4;
    std::size_t levels = 4;
    ThresholdRule threshold_rule = ThresholdRule::universal_soft;
    bool enabled = false;
};

// Coefficient pyramid. details[0] is the finest level (first split of
// the input); approx is what remains after `levels` splits.
struct DwtPyramid {
    std::size_t original_len = 0;  // before any pad-to-length
    std::vector<double> approx;
    std::vector<std::vector<double>> details;
};

// Pads with periodic extension to a multiple of 2^levels when needed.
DwtPyramid dwt_forward(const std::vector<double>& signal, WaveletKind wavelet,
                       std::size_t levels);

// Reconstructs and truncates back to original_len.
std::vector<double> dwt_inverse(const DwtPyramid& pyramid, WaveletKind wavelet);

// Soft-threshold every detail level with the universal threshold
// sigma * sqrt(2 ln N), sigma = median(|finest detail|) / 0.6745.
std::vector<double> wavelet_denoise(const std::vector<double>& signal,
                                    const DenoiseConfig& config);

std::string to_string(WaveletKind w);
WaveletKind wavelet_from_string(const std::string& s);

}  // namespace limbnet
