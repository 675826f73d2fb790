#include "limbnet/weights_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "weight file writer assumes a little-endian host");

namespace limbnet {

namespace {

constexpr char kMagic[8] = {'L', 'I', 'M', 'B', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf.insert(buf.end(), p, p + 4);
}

std::vector<std::uint32_t> config_words(const ModelConfig& c) {
    std::vector<std::uint32_t> w;
    w.push_back(static_cast<std::uint32_t>(c.window_len));
    w.push_back(static_cast<std::uint32_t>(c.n_channels));
    w.push_back(static_cast<std::uint32_t>(c.convs.size()));
    for (const auto& cs : c.convs) {
        w.push_back(static_cast<std::uint32_t>(cs.kernel_size));
        w.push_back(static_cast<std::uint32_t>(cs.out_channels));
    }
    w.push_back(static_cast<std::uint32_t>(c.pool_window));
    w.push_back(c.padding == Padding::same ? 1u : 0u);
    w.push_back(static_cast<std::uint32_t>(c.attention_dim));
    w.push_back(static_cast<std::uint32_t>(c.n_attention_heads));
    w.push_back(static_cast<std::uint32_t>(c.dense_hidden));
    w.push_back(static_cast<std::uint32_t>(c.n_classes));
    w.push_back(static_cast<std::uint32_t>(std::lround(c.dropout_rate * 1000.0)));
    w.push_back(static_cast<std::uint32_t>(c.seed & 0xffffffffULL));
    w.push_back(static_cast<std::uint32_t>(c.seed >> 32));
    return w;
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t n) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void save_weights(const ModelWeights& weights, const std::string& path) {
    std::vector<unsigned char> payload;
    for (std::uint32_t w : config_words(weights.config)) put_u32(payload, w);
    weights.for_each_block([&](const double* p, std::size_t k) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(p);
        payload.insert(payload.end(), bytes, bytes + k * sizeof(double));
    });
    const std::uint32_t crc = crc32(payload.data(), payload.size());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw weights_error(WeightsErrc::io, "cannot open for writing: " + path);
    f.write(kMagic, sizeof(kMagic));
    f.write(reinterpret_cast<const char*>(&kVersion), 4);
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    f.write(reinterpret_cast<const char*>(&crc), 4);
    if (!f) throw weights_error(WeightsErrc::io, "write failed: " + path);
}

ModelWeights load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw weights_error(WeightsErrc::io, "cannot open: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());

    std::size_t off = 0;
    auto need = [&](std::size_t n, const char* what) {
        if (off + n > bytes.size())
            throw weights_error(WeightsErrc::truncated,
                                std::string("file ends inside ") + what + ": " + path);
    };
    need(8, "magic");
    if (std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw weights_error(WeightsErrc::bad_magic, "not a limbnet weight file: " + path);
    off = 8;
    need(4, "version");
    std::uint32_t version;
    std::memcpy(&version, bytes.data() + off, 4);
    off += 4;
    if (version != kVersion)
        throw weights_error(WeightsErrc::bad_version,
                            "unsupported weight file version " + std::to_string(version));

    const std::size_t config_start = off;
    auto read_u32 = [&](const char* what) {
        need(4, what);
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + off, 4);
        off += 4;
        return v;
    };

    ModelConfig cfg;
    cfg.window_len = read_u32("config");
    cfg.n_channels = read_u32("config");
    const std::uint32_t n_convs = read_u32("config");
    if (n_convs == 0 || n_convs > 64)
        throw weights_error(WeightsErrc::truncated,
                            "implausible conv layer count " + std::to_string(n_convs));
    cfg.convs.clear();
    for (std::uint32_t i = 0; i < n_convs; ++i) {
        ConvSpec cs;
        cs.kernel_size = read_u32("config");
        cs.out_channels = read_u32("config");
        cfg.convs.push_back(cs);
    }
    cfg.pool_window = read_u32("config");
    cfg.padding = read_u32("config") == 1 ? Padding::same : Padding::valid;
    cfg.attention_dim = read_u32("config");
    cfg.n_attention_heads = read_u32("config");
    cfg.dense_hidden = read_u32("config");
    cfg.n_classes = read_u32("config");
    cfg.dropout_rate = read_u32("config") / 1000.0;
    const std::uint64_t seed_lo = read_u32("config");
    const std::uint64_t seed_hi = read_u32("config");
    cfg.seed = seed_lo | (seed_hi << 32);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw weights_error(WeightsErrc::count_mismatch,
                            std::string("config in file is invalid: ") + e.what());
    }

    const std::size_t expected = parameter_count(cfg).total;
    // Everything after the config words, minus the trailing CRC, must be
    // exactly the parameter block.
    if (bytes.size() < off + 4 ||
        bytes.size() - off - 4 != expected * sizeof(double))
        throw weights_error(
            WeightsErrc::count_mismatch,
            "parameter region holds " +
                std::to_string(bytes.size() >= off + 4 ? (bytes.size() - off - 4) / sizeof(double)
                                                       : 0) +
                " scalars, config expects " + std::to_string(expected));

    const std::size_t payload_len = bytes.size() - config_start - 4;
    const std::uint32_t stored_crc =
        [&] {
            std::uint32_t v;
            std::memcpy(&v, bytes.data() + bytes.size() - 4, 4);
            return v;
        }();
    const std::uint32_t actual_crc = crc32(bytes.data() + config_start, payload_len);
    if (stored_crc != actual_crc)
        throw weights_error(WeightsErrc::crc_mismatch,
                            "CRC mismatch: file is corrupt: " + path);

    std::vector<double> flat(expected);
    std::memcpy(flat.data(), bytes.data() + off, expected * sizeof(double));

    ModelWeights w = build_model(cfg);  // sizes the layout; values overwritten
    w.unflatten(flat);
    return w;
}

}  // namespace limbnet
