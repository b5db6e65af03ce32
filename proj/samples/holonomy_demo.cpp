// Sweeps a family of circles in the plane and compares the holonomy of the
// pulled-back connection from the potential with the flux through disks.

#include <cstdio>

#include "pathquant/prequantum.hpp"

int main() {
  using namespace pathquant;
  const PrequantumConfig cfg(make_r2(), 1.0);
  const PathGrid grid(64);
  for (double r0 : {0.5, 1.0, 1.5}) {
    const Profile radius = [r0](double t) { return r0 * (1.0 + 0.5 * t); };
    const auto loop = sweep_circle_loop(cfg.model, grid, 64, {0.0, 0.0}, radius);
    const auto disks = disk_surface(grid, 16, 64, {0.0, 0.0}, radius);
    const double a = holonomy_chart_exponent(cfg, loop);
    const double b = holonomy_surface_exponent(cfg, disks);
    // int_0^1 pi r0^2 (1 + t/2)^2 dt = pi r0^2 19/12
    std::printf("r0=%.2f  chart %.12f  surface %.12f  exact %.12f\n", r0, a, b, kPi * r0 * r0 * 19.0 / 12.0);
  }
}
