#include "limbnet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace limbnet {

TensorF TensorF::zeros(std::vector<std::size_t> s) {
    std::size_t n = s.empty() ? 0 : 1;
    for (std::size_t d : s) n *= d;
    return TensorF(std::move(s), std::vector<double>(n, 0.0));
}

bool TensorF::all_finite() const {
    for (double x : data)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    return os.str();
}

void require_shape(bool cond, const std::string& what) {
    if (!cond) throw shape_error(what);
}

}  // namespace limbnet
