#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wgmconv/errors.hpp"
#include "wgmconv/materials.hpp"
#include "wgmconv/units.hpp"

namespace wgmconv {

struct Point2 {
    double r = 0.0;
    double z = 0.0;
};

// Ring-on-post cross-section parameters.  All lengths in meters.  The rim
// meridian curvature radius may be infinite (cylindrical rim, as used in the
// experiment); the surrounding medium is vacuum.
struct RingGeometry {
    double outer_radius = 0.0;        // R
    double inner_radius = 0.0;        // R_in
    double height = 0.0;              // h
    double rim_radius = std::numeric_limits<double>::infinity();  // rho
    double post_outer_radius = 0.0;
    std::string ring_material = "lithium-niobate";
    std::string post_material = "fused-silica";

    bool cylindrical_rim() const { return std::isinf(rim_radius); }

    void validate() const {
        if (!(post_outer_radius > 0.0) || !(post_outer_radius <= inner_radius))
            throw InvalidGeometry("need 0 < post_outer_radius <= inner_radius");
        if (!(inner_radius < outer_radius))
            throw InvalidGeometry("need inner_radius < outer_radius");
        if (!(height > 0.0)) throw InvalidGeometry("need height > 0");
        if (!(rim_radius > 0.0)) throw InvalidGeometry("need rim_radius > 0 (or infinite)");
        if (!cylindrical_rim() && rim_radius < 0.5 * height)
            throw InvalidGeometry(
                "rim meridian radius smaller than half the ring height: the rim arc "
                "cannot span the top and bottom faces");
    }

    // The paper's reference ring: h = 292 um, R_in = 2.48 mm, R = 2.9 mm,
    // post filling the bore, rim per design_rim (or cylindrical).
    static RingGeometry paper_reference() {
        RingGeometry g;
        g.outer_radius = 2.9e-3;
        g.inner_radius = 2.48e-3;
        g.height = 292e-6;
        g.post_outer_radius = 2.48e-3;
        return g;
    }
};

// rho/R for efficient prism coupling: (n_p^2 - n^2)/n_p^2.
inline double rim_ratio(double prism_index, double resonator_index) {
    if (!(resonator_index > 1.0))
        throw CouplingImpossible("resonator index must exceed 1");
    if (!(prism_index > resonator_index))
        throw CouplingImpossible(
            "prism index " + std::to_string(prism_index) +
            " does not exceed resonator index " + std::to_string(resonator_index) +
            "; evanescent prism coupling is impossible");
    return (prism_index * prism_index - resonator_index * resonator_index) /
           (prism_index * prism_index);
}

// Returns the geometry with the rim curvature set from the prism/ring index
// pair.  The ring's extraordinary optical index is used (the pump and signal
// are polarized along the crystal axis in the reference configuration).
inline RingGeometry design_rim(RingGeometry geometry, const MaterialRecord& prism) {
    geometry.validate();
    const MaterialRecord ring = material_lookup_or_load(geometry.ring_material);
    geometry.rim_radius = geometry.outer_radius * rim_ratio(prism.n_opt_e, ring.n_opt_e);
    geometry.validate();
    return geometry;
}

// Vacuum window description for the field solve: extent is measured in
// free-space wavelengths of the design frequency beyond the ring in +r and
// +-z.  Microwave indices ride along so the mesh generator can grade cell
// sizes per region without reaching back into the material database.
struct WindowSpec {
    Frequency design_frequency;
    double margin_wavelengths = 1.5;
    double n_ring_mw = 1.0;
    double n_post_mw = 1.0;

    static WindowSpec make(const RingGeometry& g, Frequency f, char mw_polarization = 'e',
                           double margin = 1.5) {
        WindowSpec w;
        w.design_frequency = f;
        w.margin_wavelengths = margin;
        const MaterialRecord ring = material_lookup_or_load(g.ring_material);
        const MaterialRecord post = material_lookup_or_load(g.post_material);
        w.n_ring_mw = (mw_polarization == 'o') ? ring.n_mw_o : ring.n_mw_e;
        w.n_post_mw = (mw_polarization == 'o') ? post.n_mw_o : post.n_mw_e;
        return w;
    }
};

// Closed polylines for the three regions plus the structural data the mesh
// generator works from.  The rim arc (when finite) is polygonalized into
// chords; its apex sits at r = R, z = 0 and it meets the flat faces at
// r = rim_flat_radius.
struct CrossSectionProfile {
    RingGeometry geometry;
    WindowSpec window;
    double r_max = 0.0;
    double z_half = 0.0;  // window spans [-z_half, z_half]
    double rim_flat_radius = 0.0;  // r_t; equals R for a cylindrical rim
    std::vector<Point2> rim_arc;   // top junction -> apex -> bottom junction
    std::vector<Point2> ring_outline;    // closed (first == last)
    std::vector<Point2> post_outline;
    std::vector<Point2> window_outline;

    // Polyline radius of the rim at height z (linear between chord vertices).
    // Valid for |z| <= h/2; returns rim_flat_radius outside the arc span.
    double arc_radius_at(double z) const {
        if (rim_arc.empty()) return rim_flat_radius;
        if (z >= rim_arc.front().z) return rim_arc.front().r;
        if (z <= rim_arc.back().z) return rim_arc.back().r;
        for (std::size_t i = 0; i + 1 < rim_arc.size(); ++i) {
            const Point2& a = rim_arc[i];
            const Point2& b = rim_arc[i + 1];
            if (z <= a.z && z >= b.z) {
                if (a.z == b.z) return std::max(a.r, b.r);
                double t = (a.z - z) / (a.z - b.z);
                return a.r + t * (b.r - a.r);
            }
        }
        return rim_flat_radius;
    }
};

inline double polygon_area(const std::vector<Point2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        s += poly[i].r * poly[i + 1].z - poly[i + 1].r * poly[i].z;
    return 0.5 * std::abs(s);
}

inline CrossSectionProfile cross_section_profile(const RingGeometry& geometry,
                                                 int rim_segments,
                                                 const WindowSpec& window) {
    geometry.validate();
    if (!(window.design_frequency.rad_s() > 0.0))
        throw InvalidGeometry("window design frequency must be positive");
    if (!geometry.cylindrical_rim() && rim_segments < 8)
        throw InvalidGeometry("need rim_segments >= 8 for a curved rim");

    CrossSectionProfile p;
    p.geometry = geometry;
    p.window = window;

    const double R = geometry.outer_radius;
    const double Ri = geometry.inner_radius;
    const double h2 = 0.5 * geometry.height;
    const double margin =
        window.margin_wavelengths * window.design_frequency.vacuum_wavelength();
    p.r_max = R + margin;
    p.z_half = h2 + margin;

    if (geometry.cylindrical_rim()) {
        p.rim_flat_radius = R;
    } else {
        // Circular arc centered at (R - rho, 0) with radius rho, clipped by
        // the faces z = +-h/2.  theta_t is the polar angle of the junction.
        const double rho = geometry.rim_radius;
        const double cr = R - rho;
        const double theta_t = std::asin(h2 / rho);
        p.rim_flat_radius = cr + rho * std::cos(theta_t);
        if (!(p.rim_flat_radius > Ri))
            throw InvalidGeometry("rim arc cuts below the inner radius");
        p.rim_arc.reserve(rim_segments + 1);
        for (int i = 0; i <= rim_segments; ++i) {
            double theta = theta_t - 2.0 * theta_t * double(i) / rim_segments;
            p.rim_arc.push_back({cr + rho * std::cos(theta), rho * std::sin(theta)});
        }
        // Pin the endpoints and apex exactly.
        p.rim_arc.front() = {p.rim_flat_radius, h2};
        p.rim_arc.back() = {p.rim_flat_radius, -h2};
        if (rim_segments % 2 == 0) p.rim_arc[rim_segments / 2] = {R, 0.0};
    }

    // Ring outline, counter-clockwise starting at the inner bottom corner.
    p.ring_outline.push_back({Ri, -h2});
    if (geometry.cylindrical_rim()) {
        p.ring_outline.push_back({R, -h2});
        p.ring_outline.push_back({R, h2});
    } else {
        for (auto it = p.rim_arc.rbegin(); it != p.rim_arc.rend(); ++it)
            p.ring_outline.push_back(*it);
    }
    p.ring_outline.push_back({Ri, h2});
    p.ring_outline.push_back({Ri, -h2});

    const double rp = geometry.post_outer_radius;
    p.post_outline = {{0.0, -p.z_half}, {rp, -p.z_half}, {rp, p.z_half},
                      {0.0, p.z_half}, {0.0, -p.z_half}};
    p.window_outline = {{0.0, -p.z_half}, {p.r_max, -p.z_half}, {p.r_max, p.z_half},
                        {0.0, p.z_half}, {0.0, -p.z_half}};
    return p;
}

// Exact area of the profile's ring polygon (chordal rim) and of the ideal
// ring cross-section with the true circular arc; used by mesh validation.
inline double ring_polygon_area(const CrossSectionProfile& p) {
    return polygon_area(p.ring_outline);
}

inline double ring_analytic_area(const RingGeometry& g) {
    const double h = g.height;
    double area = h * (g.outer_radius - g.inner_radius);
    if (!g.cylindrical_rim()) {
        const double rho = g.rim_radius;
        const double theta_t = std::asin(0.5 * h / rho);
        const double rt = (g.outer_radius - rho) + rho * std::cos(theta_t);
        // Replace the slab piece beyond r_t with the circular segment.
        area = h * (rt - g.inner_radius) +
               rho * rho * (theta_t - std::sin(theta_t) * std::cos(theta_t));
    }
    return area;
}

}  // namespace wgmconv
