#pragma once

#include <cmath>
#include <stdexcept>

#include "wgmconv/errors.hpp"

namespace wgmconv {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double speed_of_light = 299792458.0;       // m/s
inline constexpr double hbar_si = 1.054571817e-34;          // J s
inline constexpr double hbar_cgs = 1.054571817e-27;         // erg s
// Pockels coefficient conversion: 1 m/V = 100 cm / (1/299.792458 statvolt),
// so r[esu] = r[m/V] * 2.99792458e4.  Quoted per pm/V below.
inline constexpr double esu_per_pm_v = 2.99792458e-8;
}  // namespace constants

// Angular frequency carrier.  Stored in rad/s; user-facing I/O is cyclic
// (GHz/THz), matching how the quantities are quoted everywhere upstream.
class Frequency {
public:
    Frequency() = default;

    static Frequency from_rad_s(double w) {
        if (!(w >= 0.0))
            throw Error("frequency must be non-negative (got " + std::to_string(w) + " rad/s)");
        Frequency f;
        f.value_ = w;
        return f;
    }
    static Frequency from_hz(double f) { return from_rad_s(2.0 * constants::pi * f); }
    static Frequency from_ghz(double f) { return from_hz(f * 1e9); }
    static Frequency from_thz(double f) { return from_hz(f * 1e12); }

    double rad_s() const { return value_; }
    double hz() const { return value_ / (2.0 * constants::pi); }
    double ghz() const { return hz() / 1e9; }
    double thz() const { return hz() / 1e12; }

    // Free-space wavelength in meters.
    double vacuum_wavelength() const {
        if (value_ <= 0.0) throw Error("wavelength undefined for zero frequency");
        return 2.0 * constants::pi * constants::speed_of_light / value_;
    }

    friend bool operator==(const Frequency& a, const Frequency& b) { return a.value_ == b.value_; }
    friend bool operator<(const Frequency& a, const Frequency& b) { return a.value_ < b.value_; }

private:
    double value_ = 0.0;  // rad/s
};

}  // namespace wgmconv
