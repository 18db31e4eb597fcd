#include "lsrecover/dct.hpp"

#include <cmath>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace lsr {

namespace {
// The FFTW planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Dct::Plans {
    fftw_plan forward = nullptr;  // REDFT10
    fftw_plan inverse = nullptr;  // REDFT01
    double c0 = 0.0;              // sqrt(1/N)
    double ck = 0.0;              // sqrt(2/N)

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
    }
};

Dct::Dct(Index n) : n_(n), plans_(std::make_unique<Plans>()) {
    if (n < 1) throw InvalidInput("Dct: length must be positive");
    const int len = static_cast<int>(n);
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    {
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plans_->forward = fftw_plan_r2r_1d(len, a.data(), b.data(), FFTW_REDFT10, flags);
        plans_->inverse = fftw_plan_r2r_1d(len, a.data(), b.data(), FFTW_REDFT01, flags);
    }
    if (!plans_->forward || !plans_->inverse) throw std::runtime_error("Dct: FFTW planning failed");
    plans_->c0 = std::sqrt(1.0 / static_cast<double>(n));
    plans_->ck = std::sqrt(2.0 / static_cast<double>(n));
}

Dct::~Dct() = default;
Dct::Dct(Dct&&) noexcept = default;
Dct& Dct::operator=(Dct&&) noexcept = default;

void Dct::forward(std::span<const double> in, std::span<double> out) const {
    if (static_cast<Index>(in.size()) != n_ || static_cast<Index>(out.size()) != n_)
        throw InvalidInput("Dct::forward: length mismatch");
    std::vector<double> src(in.begin(), in.end());
    std::vector<double> dst(in.size());
    fftw_execute_r2r(plans_->forward, src.data(), dst.data());
    // FFTW's REDFT10 carries a factor 2 relative to the unscaled sum.
    out[0] = 0.5 * plans_->c0 * dst[0];
    for (std::size_t k = 1; k < dst.size(); ++k) out[k] = 0.5 * plans_->ck * dst[k];
}

void Dct::inverse(std::span<const double> in, std::span<double> out) const {
    if (static_cast<Index>(in.size()) != n_ || static_cast<Index>(out.size()) != n_)
        throw InvalidInput("Dct::inverse: length mismatch");
    std::vector<double> src(in.size());
    src[0] = plans_->c0 * in[0];
    for (std::size_t k = 1; k < src.size(); ++k) src[k] = 0.5 * plans_->ck * in[k];
    std::vector<double> dst(in.size());
    fftw_execute_r2r(plans_->inverse, src.data(), dst.data());
    std::copy(dst.begin(), dst.end(), out.begin());
}

}  // namespace lsr
