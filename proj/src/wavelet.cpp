#include "limbnet/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace limbnet {

namespace {

// Daubechies-4 scaling coefficients (reconstruction low-pass), sum = sqrt(2).
constexpr std::size_t kTaps = 8;
constexpr double kDb4[kTaps] = {
    0.23037781330885523,  0.71484657055254150,  0.63088076792959040,
    -0.02798376941698385, -0.18703481171888114, 0.03084138183598697,
    0.03288301166698295,  -0.01059740178499728,
};

// Analysis pair: dec_lo is the reversed scaling filter, dec_hi the
// quadrature mirror. Rows of the resulting transform are orthonormal,
// so the inverse is the adjoint.
void analysis_filters(double dec_lo[kTaps], double dec_hi[kTaps]) {
    for (std::size_t k = 0; k < kTaps; ++k) {
        dec_lo[k] = kDb4[kTaps - 1 - k];
        dec_hi[k] = (k % 2 == 0) ? kDb4[k] : -kDb4[k];
    }
}

void check_levels(std::size_t n, std::size_t levels) {
    if (levels < 1) throw std::invalid_argument("dwt: levels must be >= 1");
    const std::size_t div = std::size_t{1} << levels;
    if (div > n)
        throw std::invalid_argument("dwt: 2^levels = " + std::to_string(div) +
                                    " exceeds signal length " + std::to_string(n));
}

}  // namespace

std::string to_string(WaveletKind w) {
    (void)w;
    return "db4";
}

WaveletKind wavelet_from_string(const std::string& s) {
    if (s == "db4") return WaveletKind::db4;
    throw std::invalid_argument("unknown wavelet '" + s + "' (supported: db4)");
}

DwtPyramid dwt_forward(const std::vector<double>& signal, WaveletKind wavelet,
                       std::size_t levels) {
    (void)wavelet;
    if (signal.empty()) throw std::invalid_argument("dwt: empty signal");
    check_levels(signal.size(), levels);

    double dec_lo[kTaps], dec_hi[kTaps];
    analysis_filters(dec_lo, dec_hi);

    DwtPyramid pyr;
    pyr.original_len = signal.size();

    // Periodic pad to a multiple of 2^levels.
    const std::size_t div = std::size_t{1} << levels;
    std::vector<double> cur = signal;
    if (cur.size() % div != 0) {
        const std::size_t target = ((cur.size() / div) + 1) * div;
        cur.reserve(target);
        for (std::size_t i = cur.size(); i < target; ++i)
            cur.push_back(signal[i % signal.size()]);
    }

    for (std::size_t lvl = 0; lvl < levels; ++lvl) {
        const std::size_t n = cur.size();
        const std::size_t half = n / 2;
        std::vector<double> approx(half), detail(half);
        for (std::size_t i = 0; i < half; ++i) {
            double a = 0.0, d = 0.0;
            for (std::size_t k = 0; k < kTaps; ++k) {
                const double x = cur[(2 * i + k) % n];
                a += dec_lo[k] * x;
                d += dec_hi[k] * x;
            }
            approx[i] = a;
            detail[i] = d;
        }
        pyr.details.push_back(std::move(detail));
        cur = std::move(approx);
    }
    pyr.approx = std::move(cur);
    return pyr;
}

std::vector<double> dwt_inverse(const DwtPyramid& pyramid, WaveletKind wavelet) {
    (void)wavelet;
    if (pyramid.details.empty()) throw std::invalid_argument("dwt_inverse: empty pyramid");

    double dec_lo[kTaps], dec_hi[kTaps];
    analysis_filters(dec_lo, dec_hi);

    std::vector<double> cur = pyramid.approx;
    for (std::size_t lvl = pyramid.details.size(); lvl-- > 0;) {
        const std::vector<double>& detail = pyramid.details[lvl];
        if (detail.size() != cur.size())
            throw std::invalid_argument("dwt_inverse: pyramid level sizes inconsistent");
        const std::size_t n = 2 * cur.size();
        std::vector<double> up(n, 0.0);
        // Adjoint of the analysis step.
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const double a = cur[i], d = detail[i];
            for (std::size_t k = 0; k < kTaps; ++k)
                up[(2 * i + k) % n] += dec_lo[k] * a + dec_hi[k] * d;
        }
        cur = std::move(up);
    }
    if (pyramid.original_len > 0 && pyramid.original_len < cur.size())
        cur.resize(pyramid.original_len);
    return cur;
}

std::vector<double> wavelet_denoise(const std::vector<double>& signal,
                                    const DenoiseConfig& config) {
    DwtPyramid pyr = dwt_forward(signal, config.wavelet, config.levels);

    // sigma from the median absolute value of the finest details.
    std::vector<double> mags(pyr.details[0].size());
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(pyr.details[0][i]);
    std::sort(mags.begin(), mags.end());
    const std::size_t n = mags.size();
    const double median =
        n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
    const double sigma = median / 0.6745;
    const double threshold =
        sigma * std::sqrt(2.0 * std::log(static_cast<double>(signal.size())));

    for (auto& level : pyr.details)
        for (double& c : level) {
            const double mag = std::abs(c) - threshold;
            c = mag > 0.0 ? (c > 0.0 ? mag : -mag) : 0.0;
        }
    return dwt_inverse(pyr, config.wavelet);
}

}  // namespace limbnet
