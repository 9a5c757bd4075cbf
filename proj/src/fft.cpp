#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "nlnoise/error.hpp"

namespace nlnoise::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("rfft of empty signal");
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spec,
                          std::size_t n) {
  if (n == 0 || spec.size() != n / 2 + 1) {
    throw InvalidArgument("irfft: spectrum size does not match length");
  }
  // c2r destroys its input.
  std::vector<std::complex<double>> in(spec.begin(), spec.end());
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                reinterpret_cast<fftw_complex*>(in.data()),
                                out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / static_cast<double>(n);
  std::transform(out.begin(), out.end(), out.begin(),
                 [scale](double v) { return v * scale; });
  return out;
}

}  // namespace nlnoise::detail
