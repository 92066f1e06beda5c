// Designs a CL filter for the baseline modulation, then runs the baseline
// inverter and prints its headline metrics.

#include <cstdio>

#include "flyinv/flyinv.hpp"

int main() {
    using namespace flyinv;
    const auto config = baseline_preset();

    const auto filt = design_filter(1500.0, 200e-9, 0.0);
    std::printf("L = %.4g H, f_c = %.1f Hz, gain at %.0f Hz = %.4g\n", filt.l_filt,
                resonant_frequency(filt), config.modulation.f_switching,
                transfer_magnitude(filt, config.modulation.f_switching));

    const auto m = efficiency(simulate(config));
    std::printf("THD = %.3f %%, V_rms = %.1f V, P_out = %.1f W, efficiency = %.4f\n", 100.0 * m.thd,
                m.v_rms, m.p_out_avg, m.efficiency);
}
