#ifndef MELOTOK_SRC_FFT_H_
#define MELOTOK_SRC_FFT_H_

#include <complex>
#include <vector>

namespace melotok::internal {

// In-place iterative radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>& a);

}  // namespace melotok::internal

#endif  // MELOTOK_SRC_FFT_H_
