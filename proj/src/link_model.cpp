#include "satedge/link_model.hpp"

#include <algorithm>
#include <cmath>

#include "satedge/constants.hpp"

namespace satedge {

double rician_power_sample(double k_factor, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    const double los = std::sqrt(k_factor / (k_factor + 1.0));
    const double scatter = std::sqrt(1.0 / (2.0 * (k_factor + 1.0)));
    const double theta = phase(rng);
    const double re = los * std::cos(theta) + scatter * normal(rng);
    const double im = los * std::sin(theta) + scatter * normal(rng);
    return re * re + im * im;
}

double channel_gain(double distance, double carrier_frequency, double user_gain_dbi, double sat_gain_dbi,
                    double fading_power)
{
    const double fspl = speed_of_light / (4.0 * pi * distance * carrier_frequency);
    return db_to_linear(user_gain_dbi) * db_to_linear(sat_gain_dbi) * fspl * fspl * fading_power;
}

double noise_power(double noise_density_dbm_hz, double rb_bandwidth)
{
    return dbm_to_watts(noise_density_dbm_hz) * rb_bandwidth;
}

double per_rb_rate(double rb_bandwidth, double transmit_power, double channel_gain, double noise_power)
{
    return rb_bandwidth * std::log2(1.0 + transmit_power * channel_gain / noise_power);
}

LinkBudget link_budget(const GroundUser& user, const Vec3& sat_position, const SatelliteResources& sat,
                       const LinkParameters& params, double fading_power)
{
    LinkBudget lb;
    lb.user_id = user.id;
    lb.satellite_id = sat.id;
    lb.distance = (sat_position - user_position(user)).norm();
    lb.channel_gain =
        channel_gain(lb.distance, params.carrier_frequency, user.antenna_gain, sat.antenna_gain, fading_power);
    const double sigma2 = noise_power(params.noise_density_dbm_hz, sat.rb_bandwidth);
    lb.snr = user.transmit_power * lb.channel_gain / sigma2;
    lb.per_rb_rate = per_rb_rate(sat.rb_bandwidth, user.transmit_power, lb.channel_gain, sigma2);
    return lb;
}

double transmission_delay(double bits, double inverse_fraction, int rb_count, double rate)
{
    return bits * inverse_fraction / (rb_count * rate);
}

double transmit_energy(double power, double bits, double offloaded, double rate)
{
    return power * bits * offloaded / rate;
}

double computation_delay(double cycles, double inverse_fraction, double cpu_rate)
{
    return cycles * inverse_fraction / cpu_rate;
}

double computation_energy(double kappa, double cycles, double fraction, double cpu_rate)
{
    return kappa * cycles * fraction * fraction * cpu_rate * cpu_rate;
}

double propagation_delay(double distance, double active) { return active * distance / speed_of_light; }

PropagationDelays propagation_delays(double offload_path_length, double user_to_source, double forward_path_length,
                                     double destination_to_user, double offloaded, double forwarded)
{
    return {propagation_delay(user_to_source + offload_path_length, offloaded),
            propagation_delay(destination_to_user + forward_path_length, forwarded)};
}

RhoMax rho_max(std::span<const RhoMaxTerm> candidates)
{
    if (candidates.empty()) return {1.0, true};
    double best = 0.0;
    for (const auto& c : candidates) best = std::max(best, c.transmit_energy + c.compute_energy);
    return {best, false};
}

} // namespace satedge
