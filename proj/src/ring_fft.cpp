#include "ring_fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <stdexcept>

namespace fluidrecon::detail {

RingFFT::RingFFT(int n) : n_(n), real_buf_(n), spec_buf_(n / 2 + 1) {
    auto* spec = reinterpret_cast<fftw_complex*>(spec_buf_.data());
    forward_plan_ = fftw_plan_dft_r2c_1d(n, real_buf_.data(), spec, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(n, spec, real_buf_.data(), FFTW_ESTIMATE);
    if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
        throw std::runtime_error("FFTW plan creation failed");
    }
}

RingFFT::~RingFFT() {
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RingFFT::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    std::copy(in.begin(), in.end(), real_buf_.begin());
    fftw_execute(static_cast<fftw_plan>(forward_plan_));
    std::copy(spec_buf_.begin(), spec_buf_.end(), out.begin());
}

void RingFFT::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
    // c2r destroys its input, so always go through the owned buffer.
    std::copy(in.begin(), in.end(), spec_buf_.begin());
    fftw_execute(static_cast<fftw_plan>(inverse_plan_));
    const double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) out[i] = real_buf_[i] * scale;
}

std::vector<std::complex<double>> RingFFT::forward(std::span<const double> in) const {
    std::vector<std::complex<double>> out(modes());
    forward(in, out);
    return out;
}

std::vector<double> RingFFT::inverse(std::span<const std::complex<double>> in) const {
    std::vector<double> out(n_);
    inverse(in, out);
    return out;
}

}  // namespace fluidrecon::detail
