// Adds noise to the synthetic shapes image, filters it with NCDF1 and prints
// the SNR every half time unit.

#include <cstdio>

#include "crossdiff/diffusion.hpp"
#include "crossdiff/metrics.hpp"
#include "crossdiff/solver.hpp"
#include "crossdiff/synthetic.hpp"

int main() {
  using namespace crossdiff;
  const ScalarField clean = make_test_image(TestImage::Shapes, 128, 128);
  const ScalarField noisy = add_gaussian_noise(clean, NoiseSpec{30.0, 7});

  SolverConfig config;
  config.matrix = preset("ncdf1").matrix;

  const ChannelPair initial{noisy, ScalarField::filled(noisy.grid(), 0.0)};
  run(initial, config, 100, {}, [&](const ChannelPair& state, double t, std::size_t m) {
    if (m % 10 == 0) std::printf("t = %5.2f  SNR = %6.3f dB\n", t, snr(clean, state.u));
  });
  return 0;
}
