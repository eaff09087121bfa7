#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wgmconv/errors.hpp"
#include "wgmconv/geometry.hpp"

namespace wgmconv {

enum class Region : std::uint8_t { ring = 0, post = 1, vacuum = 2 };
enum class BoundaryTag : std::uint8_t { outer_wall = 0, axis = 1 };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::ring: return "ring";
        case Region::post: return "post";
        default: return "vacuum";
    }
}

// Axisymmetric triangulation of the (r, z) computation window.  Triangles
// are CCW; every triangle carries a region tag, boundary edges carry either
// the PEC outer wall or the symmetry axis tag.
struct Mesh {
    std::vector<double> node_r;
    std::vector<double> node_z;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Region> region;

    struct BoundaryEdge {
        int a = 0;
        int b = 0;
        BoundaryTag tag = BoundaryTag::outer_wall;
    };
    std::vector<BoundaryEdge> boundary;

    double r_max = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;

    int node_count() const { return static_cast<int>(node_r.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    double triangle_area(int t) const {
        const auto& tri = triangles[t];
        const double r1 = node_r[tri[0]], z1 = node_z[tri[0]];
        const double r2 = node_r[tri[1]], z2 = node_z[tri[1]];
        const double r3 = node_r[tri[2]], z3 = node_z[tri[2]];
        return 0.5 * ((r2 - r1) * (z3 - z1) - (r3 - r1) * (z2 - z1));
    }

    double region_area(Region reg) const {
        double s = 0.0;
        for (int t = 0; t < triangle_count(); ++t)
            if (region[t] == reg) s += triangle_area(t);
        return s;
    }

    double total_area() const {
        double s = 0.0;
        for (int t = 0; t < triangle_count(); ++t) s += triangle_area(t);
        return s;
    }

    // Structural sanity: positive areas, tags assigned, interior edges shared
    // by exactly two triangles and boundary edges by one.
    void validate() const {
        if (node_count() < 3 || triangle_count() < 1)
            throw MeshFailure("mesh is empty");
        const double scale2 = (r_max > 0 ? r_max * r_max : 1.0);
        for (int i = 0; i < node_count(); ++i)
            if (node_r[i] < -1e-12 * r_max)
                throw MeshFailure("node with negative radius");
        std::map<std::pair<int, int>, int> edge_use;
        for (int t = 0; t < triangle_count(); ++t) {
            if (triangle_area(t) <= 1e-16 * scale2)
                throw MeshFailure("degenerate triangle " + std::to_string(t));
            for (int e = 0; e < 3; ++e) {
                int a = triangles[t][e], b = triangles[t][(e + 1) % 3];
                edge_use[{std::min(a, b), std::max(a, b)}]++;
            }
        }
        for (const auto& [edge, uses] : edge_use)
            if (uses > 2)
                throw MeshFailure("non-manifold edge (shared by " + std::to_string(uses) +
                                  " triangles)");
        if (region.size() != triangles.size())
            throw MeshFailure("region tags do not cover all triangles");
    }
};

namespace meshdetail {

inline int subdivisions(double length, double unit, int dyadic_factor) {
    int base = std::max(1, static_cast<int>(std::ceil(length / unit - 1e-9)));
    return base * dyadic_factor;
}

struct Axis {
    std::vector<double> values;  // grid coordinates, ascending
    // Subdivide [pts] intervals with per-interval resolution units.
    void build(std::vector<double> pts, const std::vector<double>& units, int dyadic) {
        values.clear();
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double a = pts[i], b = pts[i + 1];
            const int n = subdivisions(b - a, units[i], dyadic);
            for (int j = 0; j < n; ++j) values.push_back(a + (b - a) * double(j) / n);
        }
        values.push_back(pts.back());
    }
    int index_of(double x) const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (std::abs(values[i] - x) < 1e-15 + 1e-12 * std::abs(x))
                return static_cast<int>(i);
        return -1;
    }
};

inline std::vector<double> dedup_sorted(std::vector<double> v, double tol) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    return out;
}

}  // namespace meshdetail

// Conforming structured triangulation of the profile.  Grid lines are placed
// on every region boundary; interval spacing is graded by the local
// wavelength (lambda/8 per region at the window's design frequency, capped
// by the ring feature size) and refined dyadically from the requested target
// edge, so halving the target multiplies the subdivision count of every
// interval by exactly two.  The curved rim is handled by lofting the cell
// columns between the flat-face radius and the chordal arc, which keeps the
// triangulation conforming to the polygonal profile.
inline Mesh generate_mesh(const CrossSectionProfile& profile, double target_edge) {
    const RingGeometry& g = profile.geometry;
    g.validate();
    const double thinnest = std::min(g.height, g.outer_radius - g.inner_radius);
    if (!(target_edge > 0.0))
        throw MeshFailure("target edge length must be positive");
    if (!(target_edge < thinnest))
        throw MeshFailure("target edge length " + std::to_string(target_edge) +
                          " m is not smaller than the thinnest feature (" +
                          std::to_string(thinnest) + " m)");

    const double lambda0 = profile.window.design_frequency.vacuum_wavelength();
    const double u_ring = std::min({thinnest, lambda0 / (8.0 * profile.window.n_ring_mw)});
    const double u_post = lambda0 / (8.0 * std::max(1.0, profile.window.n_post_mw));
    const double u_vac = lambda0 / 8.0;

    int dyadic = 1;
    if (target_edge < u_ring) {
        const int k = static_cast<int>(std::ceil(std::log2(u_ring / target_edge) - 1e-12));
        dyadic = 1 << std::max(0, k);
    }

    const double R = g.outer_radius;
    const double Ri = g.inner_radius;
    const double rp = g.post_outer_radius;
    const double h2 = 0.5 * g.height;
    const double rt = profile.rim_flat_radius;
    const bool curved = !g.cylindrical_rim();
    const double band = g.height;  // fine-resolution halo around the ring

    const double merge_tol = 0.05 * u_ring;

    std::vector<double> rpts = {0.0, rp, Ri, R, profile.r_max};
    if (curved) rpts.push_back(rt);
    if (Ri - band > merge_tol) rpts.push_back(std::max(rp * 0.0, Ri - band));
    if (R + band < profile.r_max - merge_tol) rpts.push_back(R + band);
    rpts = meshdetail::dedup_sorted(rpts, merge_tol);

    std::vector<double> zpts = {-profile.z_half, -h2, 0.0, h2, profile.z_half};
    if (h2 + band < profile.z_half - merge_tol) {
        zpts.push_back(h2 + band);
        zpts.push_back(-h2 - band);
    }
    zpts = meshdetail::dedup_sorted(zpts, merge_tol);

    auto r_unit = [&](double mid) {
        if (mid >= Ri - band - merge_tol && mid <= R + band + merge_tol) return u_ring;
        if (mid < rp) return u_post;
        return u_vac;
    };
    auto z_unit = [&](double mid) {
        if (std::abs(mid) <= h2 + band + merge_tol) return u_ring;
        return std::min(u_post, u_vac);
    };

    std::vector<double> runits, zunits;
    for (std::size_t i = 0; i + 1 < rpts.size(); ++i)
        runits.push_back(r_unit(0.5 * (rpts[i] + rpts[i + 1])));
    for (std::size_t i = 0; i + 1 < zpts.size(); ++i)
        zunits.push_back(z_unit(0.5 * (zpts[i] + zpts[i + 1])));

    meshdetail::Axis raxis, zaxis;
    raxis.build(rpts, runits, dyadic);
    zaxis.build(zpts, zunits, dyadic);
    const int NR = static_cast<int>(raxis.values.size());
    const int NZ = static_cast<int>(zaxis.values.size());

    Mesh mesh;
    mesh.r_max = profile.r_max;
    mesh.z_min = -profile.z_half;
    mesh.z_max = profile.z_half;
    mesh.node_r.resize(std::size_t(NR) * NZ);
    mesh.node_z.resize(std::size_t(NR) * NZ);
    auto tid = [&](int iz, int ir) { return iz * NR + ir; };
    for (int iz = 0; iz < NZ; ++iz)
        for (int ir = 0; ir < NR; ++ir) {
            mesh.node_r[tid(iz, ir)] = raxis.values[ir];
            mesh.node_z[tid(iz, ir)] = zaxis.values[iz];
        }

    // Rim band bookkeeping (finite rho only).
    int ir_t = -1, ir_R = -1, jz_bot = -1, jz_top = -1, m_band = 0;
    std::vector<int> arc_node;                 // per z row, -1 outside band
    std::vector<std::vector<int>> cap_nodes;   // interior cap stations per row
    if (curved) {
        ir_t = raxis.index_of(rt);
        ir_R = raxis.index_of(R);
        jz_bot = zaxis.index_of(-h2);
        jz_top = zaxis.index_of(h2);
        if (ir_t < 0 || ir_R < 0 || jz_bot < 0 || jz_top < 0)
            throw MeshFailure("rim band breakpoints missing from the grid");
        m_band = ir_R - ir_t;
        arc_node.assign(NZ, -1);
        cap_nodes.assign(NZ, {});
        for (int iz = jz_bot; iz <= jz_top; ++iz) {
            const double z = zaxis.values[iz];
            const double a = profile.arc_radius_at(z);
            if (iz == jz_bot || iz == jz_top) continue;  // stations collapse onto r_t
            // Reposition the tensor slots between r_t and R onto the sliver
            // loft (between the arc and the outer radius).
            for (int i = 1; i < m_band; ++i)
                mesh.node_r[tid(iz, ir_t + i)] = a + (R - a) * double(i) / m_band;
            // Extra nodes: cap interior stations and the arc vertex itself.
            cap_nodes[iz].resize(std::size_t(std::max(0, m_band - 1)));
            for (int i = 1; i < m_band; ++i) {
                mesh.node_r.push_back(rt + (a - rt) * double(i) / m_band);
                mesh.node_z.push_back(z);
                cap_nodes[iz][i - 1] = static_cast<int>(mesh.node_r.size()) - 1;
            }
            mesh.node_r.push_back(a);
            mesh.node_z.push_back(z);
            arc_node[iz] = static_cast<int>(mesh.node_r.size()) - 1;
        }
    }

    auto emit_quad = [&](int n00, int n10, int n11, int n01, Region reg) {
        // (n00,n10) bottom edge, (n01,n11) top edge; emit non-degenerate tris.
        auto area = [&](int a, int b, int c) {
            return 0.5 * ((mesh.node_r[b] - mesh.node_r[a]) * (mesh.node_z[c] - mesh.node_z[a]) -
                          (mesh.node_r[c] - mesh.node_r[a]) * (mesh.node_z[b] - mesh.node_z[a]));
        };
        const double eps = 1e-18 * profile.r_max * profile.r_max;
        auto push = [&](int a, int b, int c) {
            if (a == b || b == c || a == c) return;
            if (area(a, b, c) <= eps) return;
            mesh.triangles.push_back({a, b, c});
            mesh.region.push_back(reg);
        };
        push(n00, n10, n11);
        push(n00, n11, n01);
    };

    auto plain_region = [&](double rc, double zc) -> Region {
        if (rc < rp) return Region::post;
        if (rc < Ri) return Region::vacuum;
        const double redge = curved ? rt : R;
        if (rc < redge && std::abs(zc) < h2) return Region::ring;
        return Region::vacuum;
    };

    // Station node list across the rim band for one z row.
    auto band_stations = [&](int iz) {
        std::vector<int> s;
        s.reserve(std::size_t(2 * m_band + 1));
        const bool face = (iz == jz_bot || iz == jz_top);
        s.push_back(tid(iz, ir_t));
        for (int i = 1; i < m_band; ++i) s.push_back(face ? tid(iz, ir_t) : cap_nodes[iz][i - 1]);
        s.push_back(face ? tid(iz, ir_t) : arc_node[iz]);
        for (int i = 1; i < m_band; ++i) s.push_back(tid(iz, ir_t + i));
        s.push_back(tid(iz, ir_R));
        return s;
    };

    for (int iz = 0; iz + 1 < NZ; ++iz) {
        const bool band_rows = curved && iz >= jz_bot && iz + 1 <= jz_top;
        for (int ir = 0; ir + 1 < NR; ++ir) {
            if (band_rows && ir == ir_t) {
                const auto lo = band_stations(iz);
                const auto hi = band_stations(iz + 1);
                for (int i = 0; i < 2 * m_band; ++i)
                    emit_quad(lo[i], lo[i + 1], hi[i + 1], hi[i],
                              i < m_band ? Region::ring : Region::vacuum);
                ir = ir_R - 1;  // skip the band columns
                continue;
            }
            const double rc = 0.5 * (raxis.values[ir] + raxis.values[ir + 1]);
            const double zc = 0.5 * (zaxis.values[iz] + zaxis.values[iz + 1]);
            emit_quad(tid(iz, ir), tid(iz, ir + 1), tid(iz + 1, ir + 1), tid(iz + 1, ir),
                      plain_region(rc, zc));
        }
    }

    for (int iz = 0; iz + 1 < NZ; ++iz) {
        mesh.boundary.push_back({tid(iz, 0), tid(iz + 1, 0), BoundaryTag::axis});
        mesh.boundary.push_back({tid(iz, NR - 1), tid(iz + 1, NR - 1), BoundaryTag::outer_wall});
    }
    for (int ir = 0; ir + 1 < NR; ++ir) {
        mesh.boundary.push_back({tid(0, ir), tid(0, ir + 1), BoundaryTag::outer_wall});
        mesh.boundary.push_back({tid(NZ - 1, ir), tid(NZ - 1, ir + 1), BoundaryTag::outer_wall});
    }

    mesh.validate();
    return mesh;
}

// Plain uniform mesh of [r0, r1] x [z0, z1], all vacuum; used by the
// closed-form cavity oracles and for vacuum-only operator tests.  The same
// dyadic subdivision policy applies (cell edges never exceed the target).
inline Mesh structured_rectangle_mesh(double r0, double r1, double z0, double z1,
                                      double target_edge) {
    if (!(r1 > r0) || !(z1 > z0)) throw MeshFailure("empty rectangle");
    if (!(target_edge > 0.0)) throw MeshFailure("target edge length must be positive");
    const double u = std::min(r1 - r0, z1 - z0);
    int dyadic = 1;
    if (target_edge < u) {
        const int k = static_cast<int>(std::ceil(std::log2(u / target_edge) - 1e-12));
        dyadic = 1 << std::max(0, k);
    }
    const int nr = meshdetail::subdivisions(r1 - r0, u, dyadic);
    const int nz = meshdetail::subdivisions(z1 - z0, u, dyadic);

    Mesh mesh;
    mesh.r_max = r1;
    mesh.z_min = z0;
    mesh.z_max = z1;
    const int NR = nr + 1, NZ = nz + 1;
    auto tid = [&](int iz, int ir) { return iz * NR + ir; };
    for (int iz = 0; iz < NZ; ++iz)
        for (int ir = 0; ir < NR; ++ir) {
            mesh.node_r.push_back(r0 + (r1 - r0) * double(ir) / nr);
            mesh.node_z.push_back(z0 + (z1 - z0) * double(iz) / nz);
        }
    for (int iz = 0; iz < nz; ++iz)
        for (int ir = 0; ir < nr; ++ir) {
            mesh.triangles.push_back({tid(iz, ir), tid(iz, ir + 1), tid(iz + 1, ir + 1)});
            mesh.triangles.push_back({tid(iz, ir), tid(iz + 1, ir + 1), tid(iz + 1, ir)});
            mesh.region.push_back(Region::vacuum);
            mesh.region.push_back(Region::vacuum);
        }
    const bool axis_left = std::abs(r0) < 1e-15;
    for (int iz = 0; iz < nz; ++iz) {
        mesh.boundary.push_back({tid(iz, 0), tid(iz + 1, 0),
                                 axis_left ? BoundaryTag::axis : BoundaryTag::outer_wall});
        mesh.boundary.push_back({tid(iz, nr), tid(iz + 1, nr), BoundaryTag::outer_wall});
    }
    for (int ir = 0; ir < nr; ++ir) {
        mesh.boundary.push_back({tid(0, ir), tid(0, ir + 1), BoundaryTag::outer_wall});
        mesh.boundary.push_back({tid(nz, ir), tid(nz, ir + 1), BoundaryTag::outer_wall});
    }
    mesh.validate();
    return mesh;
}

}  // namespace wgmconv
