#pragma once

#include <random>
#include <span>

#include "satedge/orbital_mechanics.hpp"

namespace satedge {

struct SatelliteResources {
    int id = 0;
    Layer layer = Layer::leo;
    int rb_count = 25;              // B_s
    double rb_bandwidth = 180e3;    // W, Hz
    double cpu_rate = 5e9;          // F_s, cycles/s
    double occupied_fraction = 0.0; // already committed share of F_s
    double antenna_gain = 20.0;     // dBi
};

enum class EnergyRateBasis { per_rb, allocated };

struct LinkParameters {
    double carrier_frequency = 2e9;     // Hz
    double rician_k = 10.0;
    double noise_density_dbm_hz = -174.0;
    double kappa = 1e-28;               // effective switch capacitance
    EnergyRateBasis energy_rate_basis = EnergyRateBasis::per_rb;
};

struct LinkBudget {
    int user_id = 0;
    int satellite_id = 0;
    double distance = 0.0;     // m
    double channel_gain = 0.0; // linear
    double snr = 0.0;          // linear, over one resource block
    double per_rb_rate = 0.0;  // bit/s
};

/// Unit-mean-power Rician small-scale power gain |g|^2.
double rician_power_sample(double k_factor, std::mt19937_64& rng);

/// G_u G_s (c / (4 pi d f_c))^2 |g|^2 with gains in dBi.
double channel_gain(double distance, double carrier_frequency, double user_gain_dbi, double sat_gain_dbi,
                    double fading_power);

/// sigma_0^2 over one resource block, W.
double noise_power(double noise_density_dbm_hz, double rb_bandwidth);

/// W log2(1 + p h / sigma_0^2).
double per_rb_rate(double rb_bandwidth, double transmit_power, double channel_gain, double noise_power);

LinkBudget link_budget(const GroundUser& user, const Vec3& sat_position, const SatelliteResources& sat,
                       const LinkParameters& params, double fading_power);

/// zeta * vartheta / (B r). With vartheta = 1/b this is zeta / R.
double transmission_delay(double bits, double inverse_fraction, int rb_count, double rate);

/// p zeta i / r, with r the per-resource-block rate.
double transmit_energy(double power, double bits, double offloaded, double rate);

/// X phi / F. With phi = 1/f this is X / (f F).
double computation_delay(double cycles, double inverse_fraction, double cpu_rate);

/// kappa X f^2 F^2.
double computation_energy(double kappa, double cycles, double fraction, double cpu_rate);

struct PropagationDelays {
    double offload = 0.0;
    double forward = 0.0;
};

/// Propagation over the offloading leg (user to source plus path) and the
/// forwarding leg (path plus destination to user).
PropagationDelays propagation_delays(double offload_path_length, double user_to_source,
                                     double forward_path_length, double destination_to_user, double offloaded,
                                     double forwarded);

double propagation_delay(double distance, double active);

struct RhoMaxTerm {
    double transmit_energy = 0.0; // at the full-allocation rate
    double compute_energy = 0.0;  // at f = 1
};

struct RhoMax {
    double value = 1.0;
    bool fallback = false; // no candidates, unit normalisation
};

/// Largest transmit-plus-compute energy over the user's offloading candidates.
RhoMax rho_max(std::span<const RhoMaxTerm> candidates);

} // namespace satedge
