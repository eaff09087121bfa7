#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wgmconv/fem.hpp"
#include "wgmconv/geometry.hpp"
#include "wgmconv/lanczos.hpp"
#include "wgmconv/mesh.hpp"
#include "wgmconv/threading.hpp"
#include "wgmconv/units.hpp"

namespace wgmconv {

// One computed microwave WGM.  The nodal field is (E_r, E_phi, E_z) complex,
// normalized so max |E| over the nodes equals 1.  Q and the loss-rate split
// are measured/assumed data carried along with the solution, not outputs of
// the solver.
struct MicrowaveModeSolution {
    int azimuthal_number = 0;  // L_c
    Frequency omega;
    std::vector<std::complex<double>> field;  // 3 entries per node
    double mode_volume = 0.0;                 // m^3, unit-max normalization
    double ring_energy_fraction = 0.0;        // share of sum |E|^2 2 pi r dA in the ring
    double div_fraction = 0.0;                // penalty share of the stiffness energy
    double residual = 0.0;

    double q_factor = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> gamma_abs;  // rad/s
    std::optional<double> gamma_nl;   // rad/s

    std::complex<double> field_at(int node, int comp) const {
        return field[std::size_t(3) * node + comp];
    }

    double gamma_total() const {
        return (gamma_abs ? *gamma_abs : 0.0) + (gamma_nl ? *gamma_nl : 0.0);
    }
    void check_loss_split(double gamma) const {
        if (gamma_abs && gamma_nl) {
            const double sum = gamma_total();
            if (std::abs(sum - gamma) > 1e-9 * std::max(1.0, std::abs(gamma)))
                throw Error("loss rates violate gamma = gamma_nl + gamma_abs");
        }
    }
};

struct SolveOptions {
    int mode_count = 12;            // eigenpairs extracted around the target
    double penalty_weight = 1.0;
    double div_fraction_max = 0.5;  // reject modes dominated by the penalty term
    LanczosOptions lanczos;
};

namespace emdetail {

// integral of |E|^2 r dA per region and total, consistent with the assembly
// quadrature.  |E|^2 = u_r^2 + u_phi^2 + u_z^2 at interpolated points.
inline void energy_split(const Mesh& mesh, const Eigen::VectorXd& full,
                         double& ring, double& total) {
    const auto& rule = femdetail::quad_rule();
    ring = 0.0;
    total = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        double acc = 0.0;
        const double area = mesh.triangle_area(t);
        for (int q = 0; q < femdetail::QuadRule::n; ++q) {
            double rq = 0.0, e2 = 0.0;
            double comp[3] = {0.0, 0.0, 0.0};
            for (int i = 0; i < 3; ++i) {
                const double N = rule.bary[q][i];
                rq += N * mesh.node_r[tri[i]];
                for (int c = 0; c < 3; ++c) comp[c] += N * full[3 * tri[i] + c];
            }
            e2 = comp[0] * comp[0] + comp[1] * comp[1] + comp[2] * comp[2];
            acc += rule.w[q] * area * rq * e2;
        }
        total += acc;
        if (mesh.region[t] == Region::ring) ring += acc;
    }
}

}  // namespace emdetail

// Mode volume: sum over triangles of |E|^2 * 2 pi r * area with the field at
// unit max-|E| normalization (integrated with the element quadrature).
inline double mode_volume(const MicrowaveModeSolution& sol, const Mesh& mesh) {
    const auto& rule = femdetail::quad_rule();
    double vol = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        for (int q = 0; q < femdetail::QuadRule::n; ++q) {
            double rq = 0.0, e2 = 0.0;
            std::complex<double> comp[3] = {};
            for (int i = 0; i < 3; ++i) {
                const double N = rule.bary[q][i];
                rq += N * mesh.node_r[tri[i]];
                for (int c = 0; c < 3; ++c) comp[c] += N * sol.field_at(tri[i], c);
            }
            for (int c = 0; c < 3; ++c) e2 += std::norm(comp[c]);
            vol += rule.w[q] * area * rq * e2;
        }
    }
    return 2.0 * constants::pi * vol;
}

// Solves the `count` eigenmodes nearest the target frequency for azimuthal
// number L.  Returns modes sorted by frequency; each is max-normalized and
// carries its ring-energy and divergence-penalty diagnostics.
inline std::vector<MicrowaveModeSolution> solve_modes(const Mesh& mesh,
                                                      const RegionIndices& indices, int L,
                                                      Frequency target,
                                                      const SolveOptions& opts = {}) {
    if (!(target.rad_s() > 0.0)) throw Error("solve target frequency must be positive");
    if (3 * mesh.node_count() > 200000)
        throw Error("mesh exceeds the 200k-unknown desk-scale cap (" +
                    std::to_string(3 * mesh.node_count()) + " dofs)");

    AssemblyOptions aopts;
    aopts.penalty_weight = opts.penalty_weight;
    const FemOperators ops = assemble(mesh, indices, L, aopts);

    const double k0 = target.rad_s() / constants::speed_of_light;
    const double sigma = k0 * k0;
    const auto pairs = shift_invert_eigs(ops.K, ops.M, sigma, opts.mode_count, opts.lanczos);

    std::vector<MicrowaveModeSolution> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.lambda <= 0.0) continue;  // shifted spurious/negative-noise pairs
        MicrowaveModeSolution sol;
        sol.azimuthal_number = L;
        sol.omega = Frequency::from_rad_s(std::sqrt(p.lambda) * constants::speed_of_light);
        sol.residual = p.residual;

        const Eigen::VectorXd xr = p.vec;
        sol.div_fraction = xr.dot(ops.Kdiv * xr) / std::max(1e-300, xr.dot(ops.K * xr));

        Eigen::VectorXd full = ops.expand(xr);
        double maxe = 0.0;
        for (int nidx = 0; nidx < mesh.node_count(); ++nidx) {
            const double e = std::sqrt(full[3 * nidx + 0] * full[3 * nidx + 0] +
                                       full[3 * nidx + 1] * full[3 * nidx + 1] +
                                       full[3 * nidx + 2] * full[3 * nidx + 2]);
            maxe = std::max(maxe, e);
        }
        if (maxe == 0.0) continue;
        full /= maxe;

        double ring = 0.0, total = 0.0;
        emdetail::energy_split(mesh, full, ring, total);
        sol.ring_energy_fraction = (total > 0.0) ? ring / total : 0.0;

        sol.field.resize(std::size_t(3) * mesh.node_count());
        for (int nidx = 0; nidx < mesh.node_count(); ++nidx) {
            sol.field[3 * nidx + 0] = {full[3 * nidx + 0], 0.0};
            sol.field[3 * nidx + 1] = {0.0, full[3 * nidx + 1]};  // E_phi = i u_phi
            sol.field[3 * nidx + 2] = {full[3 * nidx + 2], 0.0};
        }
        sol.mode_volume = mode_volume(sol, mesh);
        out.push_back(std::move(sol));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.omega.rad_s() < b.omega.rad_s();
    });
    return out;
}

// Picks the fundamental ring-guided mode from a solve: maximal ring-energy
// fraction, with ties (within 1%) broken toward lower frequency, after
// dropping penalty-dominated (spurious) solutions.
inline const MicrowaveModeSolution* select_ring_mode(
    const std::vector<MicrowaveModeSolution>& modes, double div_fraction_max = 0.5) {
    const MicrowaveModeSolution* best = nullptr;
    for (const auto& m : modes) {
        if (m.div_fraction > div_fraction_max) continue;
        if (!best || m.ring_energy_fraction > best->ring_energy_fraction * 1.01)
            best = &m;
        // equal fractions within 1%: keep the earlier (lower-frequency) mode
    }
    return best;
}

struct DispersionRow {
    int azimuthal_number = 0;
    Frequency omega;
    double ring_energy_fraction = 0.0;
    bool gap = false;  // no trustworthy ring mode found at this L
};

struct DispersionTable {
    std::vector<DispersionRow> rows;

    std::optional<Frequency> at(int L) const {
        for (const auto& r : rows)
            if (r.azimuthal_number == L && !r.gap) return r.omega;
        return std::nullopt;
    }
};

struct DispersionScanConfig {
    int l_min = 1;
    int l_max = 1;
    Frequency target;   // expected frequency of the fundamental mode at target_l
    int target_l = 0;   // defaults to l_min when zero
    unsigned threads = 1;
    SolveOptions solve;
};

// Scans the fundamental ring-mode branch over a contiguous L range.  Anchor
// solves at the target L and the range ends establish the branch; remaining
// points run in parallel against targets interpolated from the anchors, so
// the result is independent of thread count and arrival order.
inline DispersionTable dispersion_scan(const Mesh& mesh, const RegionIndices& indices,
                                       const DispersionScanConfig& cfg) {
    if (cfg.l_max < cfg.l_min) throw Error("empty azimuthal range");
    if (cfg.l_min < 1)
        throw Error("dispersion scan requires L_c >= 1 (L_c = 0 is not a traveling WGM)");

    const int nl = cfg.l_max - cfg.l_min + 1;
    std::vector<std::optional<MicrowaveModeSolution>> found(nl);

    auto solve_at = [&](int L, Frequency tgt) -> std::optional<MicrowaveModeSolution> {
        auto modes = solve_modes(mesh, indices, L, tgt, cfg.solve);
        const auto* sel = select_ring_mode(modes, cfg.solve.div_fraction_max);
        if (!sel) return std::nullopt;
        return *sel;
    };

    int l_anchor = (cfg.target_l >= cfg.l_min && cfg.target_l <= cfg.l_max) ? cfg.target_l
                                                                            : cfg.l_min;
    auto anchor = solve_at(l_anchor, cfg.target);
    if (!anchor)
        throw ConvergenceFailure("dispersion scan found no ring mode at the anchor L_c = " +
                                     std::to_string(l_anchor),
                                 0.0);
    found[l_anchor - cfg.l_min] = anchor;

    // Local slope estimate: a second anchor one step away (toward the longer
    // side of the range) pins d omega / d L.
    double slope = anchor->omega.rad_s() / l_anchor;  // fallback: line through origin
    if (nl > 1) {
        const int l2 = (l_anchor < cfg.l_max) ? l_anchor + 1 : l_anchor - 1;
        auto second = solve_at(
            l2, Frequency::from_rad_s(anchor->omega.rad_s() + slope * (l2 - l_anchor)));
        if (second) {
            found[l2 - cfg.l_min] = second;
            slope = (second->omega.rad_s() - anchor->omega.rad_s()) / double(l2 - l_anchor);
        }
    }

    std::vector<int> pending;
    for (int i = 0; i < nl; ++i)
        if (!found[i]) pending.push_back(i);
    parallel_for(pending.size(), cfg.threads, [&](std::size_t pi) {
        const int i = pending[pi];
        const int L = cfg.l_min + i;
        const double w = anchor->omega.rad_s() + slope * (L - l_anchor);
        if (w <= 0.0) return;
        found[i] = solve_at(L, Frequency::from_rad_s(w));
    });

    DispersionTable table;
    table.rows.resize(nl);
    for (int i = 0; i < nl; ++i) {
        DispersionRow row;
        row.azimuthal_number = cfg.l_min + i;
        if (found[i]) {
            row.omega = found[i]->omega;
            row.ring_energy_fraction = found[i]->ring_energy_fraction;
        } else {
            row.gap = true;
        }
        table.rows[i] = row;
    }
    // Monotonicity audit: rows breaking the waveguide-loop ordering are
    // flagged as gaps rather than silently kept.
    for (int i = 1; i < nl; ++i) {
        if (table.rows[i].gap || table.rows[i - 1].gap) continue;
        if (table.rows[i].omega.rad_s() <= table.rows[i - 1].omega.rad_s())
            table.rows[i].gap = true;
    }
    return table;
}

// Locates the triangle containing (r, z) and interpolates the nodal field.
class FieldProbe {
public:
    explicit FieldProbe(const Mesh& mesh) : mesh_(&mesh) {
        double rlo = 1e300, rhi = -1e300, zlo = 1e300, zhi = -1e300;
        for (int i = 0; i < mesh.node_count(); ++i) {
            rlo = std::min(rlo, mesh.node_r[i]);
            rhi = std::max(rhi, mesh.node_r[i]);
            zlo = std::min(zlo, mesh.node_z[i]);
            zhi = std::max(zhi, mesh.node_z[i]);
        }
        rlo_ = rlo;
        zlo_ = zlo;
        const int target_bins =
            std::max(1, static_cast<int>(std::sqrt(double(mesh.triangle_count()))));
        nb_ = target_bins;
        dr_ = (rhi - rlo) / nb_;
        dz_ = (zhi - zlo) / nb_;
        if (dr_ <= 0.0) dr_ = 1.0;
        if (dz_ <= 0.0) dz_ = 1.0;
        bins_.resize(std::size_t(nb_) * nb_);
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            const auto& tri = mesh.triangles[t];
            double r0 = 1e300, r1 = -1e300, z0 = 1e300, z1 = -1e300;
            for (int k = 0; k < 3; ++k) {
                r0 = std::min(r0, mesh.node_r[tri[k]]);
                r1 = std::max(r1, mesh.node_r[tri[k]]);
                z0 = std::min(z0, mesh.node_z[tri[k]]);
                z1 = std::max(z1, mesh.node_z[tri[k]]);
            }
            const int bi0 = std::clamp(bin_of(r0, rlo_, dr_), 0, nb_ - 1);
            const int bi1 = std::clamp(bin_of(r1, rlo_, dr_), 0, nb_ - 1);
            const int bj0 = std::clamp(bin_of(z0, zlo_, dz_), 0, nb_ - 1);
            const int bj1 = std::clamp(bin_of(z1, zlo_, dz_), 0, nb_ - 1);
            for (int bi = bi0; bi <= bi1; ++bi)
                for (int bj = bj0; bj <= bj1; ++bj)
                    bins_[std::size_t(bi) * nb_ + bj].push_back(t);
        }
    }

    // Barycentric coordinates of (r, z) in its containing triangle.
    struct Location {
        int triangle = -1;
        double bary[3] = {0, 0, 0};
    };

    Location locate(double r, double z) const {
        const int bi = bin_of(r, rlo_, dr_), bj = bin_of(z, zlo_, dz_);
        if (bi >= 0 && bi < nb_ && bj >= 0 && bj < nb_) {
            for (int t : bins_[std::size_t(bi) * nb_ + bj]) {
                Location loc = bary_in(t, r, z);
                if (loc.triangle >= 0) return loc;
            }
        }
        // Points exactly on a bin boundary can sit in a neighbor's list.
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                const int ci = bi + di, cj = bj + dj;
                if (ci < 0 || ci >= nb_ || cj < 0 || cj >= nb_ || (di == 0 && dj == 0))
                    continue;
                for (int t : bins_[std::size_t(ci) * nb_ + cj]) {
                    Location loc = bary_in(t, r, z);
                    if (loc.triangle >= 0) return loc;
                }
            }
        throw OutOfWindow(r, z);
    }

    std::array<std::complex<double>, 3> sample(const MicrowaveModeSolution& sol, double r,
                                               double z) const {
        const Location loc = locate(r, z);
        std::array<std::complex<double>, 3> out = {};
        const auto& tri = mesh_->triangles[loc.triangle];
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 3; ++c) out[c] += loc.bary[i] * sol.field_at(tri[i], c);
        return out;
    }

private:
    static int bin_of(double x, double lo, double d) {
        return static_cast<int>(std::floor((x - lo) / d));
    }
    Location bary_in(int t, double r, double z) const {
        const auto& tri = mesh_->triangles[t];
        const double r1 = mesh_->node_r[tri[0]], z1 = mesh_->node_z[tri[0]];
        const double r2 = mesh_->node_r[tri[1]], z2 = mesh_->node_z[tri[1]];
        const double r3 = mesh_->node_r[tri[2]], z3 = mesh_->node_z[tri[2]];
        const double det = (r2 - r1) * (z3 - z1) - (r3 - r1) * (z2 - z1);
        Location loc;
        if (det == 0.0) return loc;
        const double l2 = ((r - r1) * (z3 - z1) - (z - z1) * (r3 - r1)) / det;
        const double l3 = ((z - z1) * (r2 - r1) - (r - r1) * (z2 - z1)) / det;
        const double l1 = 1.0 - l2 - l3;
        const double tol = -1e-10;
        if (l1 < tol || l2 < tol || l3 < tol) return loc;
        loc.triangle = t;
        loc.bary[0] = l1;
        loc.bary[1] = l2;
        loc.bary[2] = l3;
        return loc;
    }

    const Mesh* mesh_;
    double rlo_ = 0, zlo_ = 0, dr_ = 1, dz_ = 1;
    int nb_ = 1;
    std::vector<std::vector<int>> bins_;
};

inline std::array<std::complex<double>, 3> field_probe(const MicrowaveModeSolution& sol,
                                                       const Mesh& mesh, double r, double z) {
    return FieldProbe(mesh).sample(sol, r, z);
}

}  // namespace wgmconv
