// Tour of the library on the rho = 2 cone.
#include <cstdio>

#include <conewave/cluster_kernel.hpp>
#include <conewave/spectrum.hpp>
#include <conewave/wave_kernel.hpp>

using namespace conewave;

int main()
{
    const TruncatedCone tc(2.0, 1.0);

    std::printf("cluster sup norm on the rho = 2 cone\n");
    ZeroCache cache;
    std::vector<std::pair<double, double>> rows;
    for (double lam : {20.0, 40.0, 80.0, 160.0}) {
        const ClusterWindow w = make_window(tc, lam, 1.0, &cache);
        const double s = cluster_sup_operator_norm(w, grid_for(tc, w));
        rows.emplace_back(lam, s);
        std::printf("  lambda %5.0f  modes %4zu  sup %.4f\n", lam, w.modes.size(), s);
    }
    std::printf("  fitted exponent %.3f (sharp value 0.5)\n\n", fit_scaling_exponent(rows).slope);

    std::printf("wave kernel at t = 1.2, r1 = 0.3, r2 = 0.4\n");
    for (double th : {0.5, 2.0, 3.0}) {
        const PolarPoint a(0.3, 0.0), b(0.4, th);
        const KernelSample k = kernel_sample(1.2, a, b, tc.cone);
        std::printf("  theta %.1f  geometric %+.6f  diffracted %+.6f\n", th, k.geom_value, k.diff_value);
    }

    const ChiProfile chi(0.1);
    const Amplitude a(chi, 200.0);
    std::printf("\nplane cluster kernel, lambda = 200, delta = 0.1\n");
    for (double z : {0.02, 0.1, 0.15, 0.19, 0.25}) {
        const R2KernelValue v = r2_cluster_kernel(a, z);
        std::printf("  z %.2f  full %+.5f  main %+.5f\n", z, v.full, v.main);
    }

    const EnvelopeReport e = multiplier_envelope(25.0);
    std::printf("\ndiffractive multiplier envelope at lambda r1 r2 = 25: constant %.4f\n", e.constant);
    return 0;
}
