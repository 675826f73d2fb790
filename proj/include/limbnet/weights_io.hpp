#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "limbnet/model.hpp"

namespace limbnet {

// Weight file: little-endian binary.
//   8 bytes   magic "LIMBNET1"
//   u32       format version (1)
//   u32[...]  config: window_len, n_channels, n_convs,
//             (kernel_size, out_channels) per conv, pool_window,
//             padding (0=valid 1=same), attention_dim, n_attention_heads,
//             dense_hidden, n_classes, dropout_rate in millis,
//             seed low word, seed high word
//   f64[...]  parameters in canonical order
//   u32       CRC32 (zlib polynomial) over config + parameter bytes

enum class WeightsErrc {
    io,
    bad_magic,
    bad_version,
    truncated,        // header or config cut short
    count_mismatch,   // parameter region size disagrees with the config
    crc_mismatch,
};

class weights_error : public std::runtime_error {
public:
    weights_error(WeightsErrc c, const std::string& msg)
        : std::runtime_error(msg), code_(c) {}
    WeightsErrc code() const { return code_; }

private:
    WeightsErrc code_;
};

void save_weights(const ModelWeights& weights, const std::string& path);
ModelWeights load_weights(const std::string& path);

std::uint32_t crc32(const unsigned char* data, std::size_t n);

}  // namespace limbnet
