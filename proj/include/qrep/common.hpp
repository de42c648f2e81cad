#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qrep {

/// Squeezing parameter of a two-mode squeezed vacuum state.
struct TmsvParam {
    double chi = 0.0;

    explicit TmsvParam(double c) : chi(c) {
        if (c < 0.0 || c >= 1.0)
            throw std::invalid_argument("TmsvParam: chi must lie in [0,1)");
    }

    /// Mean photon number in either arm, chi^2 / (1 - chi^2).
    double mean_photon() const { return chi * chi / (1.0 - chi * chi); }
};

/// A fiber segment. Transmittance follows the usual dB attenuation law.
struct ChannelSpec {
    double length_km = 0.0;
    double attenuation_db_per_km = 0.2;
    double light_speed_km_per_s = 2.0e5;

    ChannelSpec() = default;
    ChannelSpec(double len, double atten = 0.2, double c = 2.0e5)
        : length_km(len), attenuation_db_per_km(atten), light_speed_km_per_s(c) {
        if (len < 0.0) throw std::invalid_argument("ChannelSpec: negative length");
        if (atten <= 0.0) throw std::invalid_argument("ChannelSpec: attenuation must be positive");
        if (c <= 0.0) throw std::invalid_argument("ChannelSpec: light speed must be positive");
    }

    double transmittance() const {
        return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
    }

    /// One-way signal travel time in seconds.
    double one_way_seconds() const { return length_km / light_speed_km_per_s; }

    ChannelSpec half() const {
        return ChannelSpec(length_km / 2.0, attenuation_db_per_km, light_speed_km_per_s);
    }
};

}  // namespace qrep
