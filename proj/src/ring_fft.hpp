#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fluidrecon::detail {

// Real-to-complex DFT of length n along one ring of angular samples.
// Forward is unnormalized; inverse divides by n, so inverse(forward(x)) == x.
class RingFFT {
public:
    explicit RingFFT(int n);
    ~RingFFT();
    RingFFT(const RingFFT&) = delete;
    RingFFT& operator=(const RingFFT&) = delete;

    int size() const { return n_; }
    int modes() const { return n_ / 2 + 1; }

    void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
    void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

    std::vector<std::complex<double>> forward(std::span<const double> in) const;
    std::vector<double> inverse(std::span<const std::complex<double>> in) const;

private:
    int n_;
    void* forward_plan_;
    void* inverse_plan_;
    mutable std::vector<double> real_buf_;
    mutable std::vector<std::complex<double>> spec_buf_;
};

}  // namespace fluidrecon::detail
