#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <vector>

#include "wgmconv/errors.hpp"
#include "wgmconv/mesh.hpp"

namespace wgmconv {

// Microwave refractive index per mesh region (a single scalar per region,
// chosen per polarization family by the caller).
struct RegionIndices {
    double n_ring = 1.0;
    double n_post = 1.0;
    double n_vacuum = 1.0;

    double index_of(Region r) const {
        switch (r) {
            case Region::ring: return n_ring;
            case Region::post: return n_post;
            default: return n_vacuum;
        }
    }
    double eps_of(Region r) const {
        const double n = index_of(r);
        if (!(n >= 1.0)) throw AssemblyFailure("region without a valid microwave index");
        return n * n;
    }
};

struct AssemblyOptions {
    // Weight of the grad-div penalty that moves the gradient (spurious)
    // modes out of the physical band.  The element weight is
    // penalty_weight * eps_r^2.
    double penalty_weight = 1.0;
    // Penalty reduction factor on the one-element layer around region
    // interfaces.  The physical eigenfunction carries a bound-charge sheet
    // there (normal-E jump); penalizing its smeared divergence at full weight
    // biases the eigenvalue and the bias does not vanish under refinement.
    // A small nonzero factor lets the jump form while keeping sheet-confined
    // gradient modes far above the band (they vary on the cell scale).
    double interface_penalty_scale = 1e-3;
};

// Discrete generalized eigenproblem K x = lambda M x with lambda = (omega/c)^2.
// Unknowns per node: (u_r, u_phi, u_z) with the physical field
// (E_r, E_phi, E_z) = (u_r, i*u_phi, u_z) * exp(i*L*phi), which makes both
// operators real symmetric.  Dirichlet rows (PEC wall, axis conditions) are
// eliminated; the L=1 axis regularity u_phi = u_r is a master/slave tie.
class FemOperators {
public:
    Eigen::SparseMatrix<double> K;  // reduced stiffness (curl-curl + penalty)
    Eigen::SparseMatrix<double> Kdiv;  // reduced penalty part alone (diagnostics)
    Eigen::SparseMatrix<double> M;  // reduced mass (eps-weighted)

    int full_dim() const { return static_cast<int>(state_.size()); }
    int reduced_dim() const { return reduced_dim_; }
    int azimuthal_number() const { return L_; }

    // Expands a reduced vector back to the full 3*node layout.
    Eigen::VectorXd expand(const Eigen::VectorXd& xr) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(full_dim());
        for (int d = 0; d < full_dim(); ++d) {
            if (state_[d] == kZero) continue;
            int master = (state_[d] == kAlias) ? alias_[d] : d;
            x[d] = xr[reduced_index_[master]];
        }
        return x;
    }

    // Scatter helper used during assembly: resolves a full dof to its
    // reduced column (or -1 when constrained to zero).
    int reduced_of(int full) const {
        if (state_[full] == kZero) return -1;
        int master = (state_[full] == kAlias) ? alias_[full] : full;
        return reduced_index_[master];
    }

    friend FemOperators assemble(const Mesh&, const RegionIndices&, int,
                                 const AssemblyOptions&);

private:
    static constexpr int kFree = 0, kZero = 1, kAlias = 2;
    std::vector<int> state_;
    std::vector<int> alias_;
    std::vector<int> reduced_index_;
    int reduced_dim_ = 0;
    int L_ = 0;
};

namespace femdetail {

// Degree-4 interior quadrature on the reference triangle (barycentric
// coordinates, weights sum to one).  Interior points keep 1/r integrands
// finite on axis-touching elements.
struct QuadRule {
    static constexpr int n = 6;
    double bary[n][3];
    double w[n];
    QuadRule() {
        const double a1 = 0.108103018168070, b1 = 0.445948490915965,
                     w1 = 0.223381589678011;
        const double a2 = 0.816847572980459, b2 = 0.091576213509771,
                     w2 = 0.109951743655322;
        const double pts[n][3] = {{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                                  {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        const double ws[n] = {w1, w1, w1, w2, w2, w2};
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) bary[i][j] = pts[i][j];
            w[i] = ws[i];
        }
    }
};

inline const QuadRule& quad_rule() {
    static const QuadRule rule;
    return rule;
}

}  // namespace femdetail

// Assembles the axisymmetric vector Helmholtz pencil for azimuthal number L.
// L = 0 is the axisymmetric family (used by the closed-form cavity oracles);
// traveling WGM scans require L >= 1 and enforce that at the solver layer.
inline FemOperators assemble(const Mesh& mesh, const RegionIndices& indices, int L,
                             const AssemblyOptions& opts = {}) {
    if (L < 0) throw AssemblyFailure("azimuthal number must be >= 0");
    if (mesh.region.size() != mesh.triangles.size())
        throw AssemblyFailure("mesh triangles and region tags are inconsistent");

    const int nn = mesh.node_count();
    const int nd = 3 * nn;
    FemOperators ops;
    ops.L_ = L;
    ops.state_.assign(nd, FemOperators::kFree);
    ops.alias_.assign(nd, -1);

    // Boundary classification.  Wall nodes are split by wall orientation so
    // only tangential components are pinned.
    std::vector<bool> on_axis(nn, false), on_vwall(nn, false), on_hwall(nn, false);
    const double rtol = 1e-12 * std::max(1.0, mesh.r_max);
    for (const auto& e : mesh.boundary) {
        for (int nidx : {e.a, e.b}) {
            if (e.tag == BoundaryTag::axis) {
                on_axis[nidx] = true;
            } else {
                const bool vertical = std::abs(mesh.node_r[e.a] - mesh.node_r[e.b]) < rtol;
                (vertical ? on_vwall : on_hwall)[nidx] = true;
            }
        }
    }

    auto set_zero = [&](int node, int comp) { ops.state_[3 * node + comp] = FemOperators::kZero; };
    for (int i = 0; i < nn; ++i) {
        if (on_vwall[i]) {  // tangential = (phi, z)
            set_zero(i, 1);
            set_zero(i, 2);
        }
        if (on_hwall[i]) {  // tangential = (r, phi)
            set_zero(i, 0);
            set_zero(i, 1);
        }
        if (on_axis[i]) {
            if (L == 0) {
                set_zero(i, 0);
                set_zero(i, 1);
            } else if (L == 1) {
                set_zero(i, 2);
                // regularity: u_phi = u_r on the axis
                if (ops.state_[3 * i + 0] == FemOperators::kZero)
                    set_zero(i, 1);
                else if (ops.state_[3 * i + 1] == FemOperators::kFree) {
                    ops.state_[3 * i + 1] = FemOperators::kAlias;
                    ops.alias_[3 * i + 1] = 3 * i + 0;
                }
            } else {
                set_zero(i, 0);
                set_zero(i, 1);
                set_zero(i, 2);
            }
        }
    }

    ops.reduced_index_.assign(nd, -1);
    int red = 0;
    for (int d = 0; d < nd; ++d)
        if (ops.state_[d] == FemOperators::kFree) ops.reduced_index_[d] = red++;
    ops.reduced_dim_ = red;

    // Interface layer: nodes that touch triangles of different permittivity
    // mark the elements whose penalty is relieved.
    std::vector<bool> relieved(mesh.triangle_count(), false);
    if (opts.interface_penalty_scale != 1.0) {
        std::vector<double> eps_min(nn, 1e300), eps_max(nn, 0.0);
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            const double e = indices.eps_of(mesh.region[t]);
            for (int k = 0; k < 3; ++k) {
                const int nd = mesh.triangles[t][k];
                eps_min[nd] = std::min(eps_min[nd], e);
                eps_max[nd] = std::max(eps_max[nd], e);
            }
        }
        for (int t = 0; t < mesh.triangle_count(); ++t)
            for (int k = 0; k < 3; ++k) {
                const int nd = mesh.triangles[t][k];
                if (eps_max[nd] > eps_min[nd] * (1.0 + 1e-12)) relieved[t] = true;
            }
    }

    std::vector<Eigen::Triplet<double>> tk, tkd, tm;
    tk.reserve(std::size_t(mesh.triangle_count()) * 81);
    tkd.reserve(std::size_t(mesh.triangle_count()) * 81);
    tm.reserve(std::size_t(mesh.triangle_count()) * 27);

    const auto& rule = femdetail::quad_rule();
    const double Ld = static_cast<double>(L);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double r1 = mesh.node_r[tri[0]], z1 = mesh.node_z[tri[0]];
        const double r2 = mesh.node_r[tri[1]], z2 = mesh.node_z[tri[1]];
        const double r3 = mesh.node_r[tri[2]], z3 = mesh.node_z[tri[2]];
        const double area2 = (r2 - r1) * (z3 - z1) - (r3 - r1) * (z2 - z1);
        if (area2 <= 0.0) throw AssemblyFailure("non-CCW or degenerate triangle");
        const double area = 0.5 * area2;
        // Shape function gradients (constant on the element).
        const double b[3] = {(z2 - z3) / area2, (z3 - z1) / area2, (z1 - z2) / area2};
        const double c[3] = {(r3 - r2) / area2, (r1 - r3) / area2, (r2 - r1) / area2};

        const double eps = indices.eps_of(mesh.region[t]);
        const double pen = opts.penalty_weight * eps * eps *
                           (relieved[t] ? opts.interface_penalty_scale : 1.0);

        Eigen::Matrix<double, 9, 9> Kc = Eigen::Matrix<double, 9, 9>::Zero();
        Eigen::Matrix<double, 9, 9> Kd = Eigen::Matrix<double, 9, 9>::Zero();
        Eigen::Matrix<double, 9, 9> Me = Eigen::Matrix<double, 9, 9>::Zero();

        for (int q = 0; q < femdetail::QuadRule::n; ++q) {
            const double N[3] = {rule.bary[q][0], rule.bary[q][1], rule.bary[q][2]};
            const double rq = N[0] * r1 + N[1] * r2 + N[2] * r3;
            const double wq = rule.w[q] * area * rq;
            const double inv_r = 1.0 / rq;

            // Row functionals over the 9 local dofs (node i, comp c -> 3i+c):
            //   Cr   = d(u_phi)/dz - (L/r) u_z
            //   Cphi = d(u_r)/dz - d(u_z)/dr
            //   Cz   = d(u_phi)/dr + (u_phi - L u_r)/r
            //   Div  = d(u_r)/dr + u_r/r - (L/r) u_phi + d(u_z)/dz
            Eigen::Matrix<double, 9, 1> Cr = Eigen::Matrix<double, 9, 1>::Zero();
            Eigen::Matrix<double, 9, 1> Cp = Eigen::Matrix<double, 9, 1>::Zero();
            Eigen::Matrix<double, 9, 1> Cz = Eigen::Matrix<double, 9, 1>::Zero();
            Eigen::Matrix<double, 9, 1> Dv = Eigen::Matrix<double, 9, 1>::Zero();
            for (int i = 0; i < 3; ++i) {
                Cr[3 * i + 1] += c[i];
                Cr[3 * i + 2] -= Ld * inv_r * N[i];
                Cp[3 * i + 0] += c[i];
                Cp[3 * i + 2] -= b[i];
                Cz[3 * i + 1] += b[i] + inv_r * N[i];
                Cz[3 * i + 0] -= Ld * inv_r * N[i];
                Dv[3 * i + 0] += b[i] + inv_r * N[i];
                Dv[3 * i + 1] -= Ld * inv_r * N[i];
                Dv[3 * i + 2] += c[i];
            }
            Kc += wq * (Cr * Cr.transpose() + Cp * Cp.transpose() + Cz * Cz.transpose());
            Kd += (wq * pen) * (Dv * Dv.transpose());
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double mij = wq * eps * N[i] * N[j];
                    Me(3 * i + 0, 3 * j + 0) += mij;
                    Me(3 * i + 1, 3 * j + 1) += mij;
                    Me(3 * i + 2, 3 * j + 2) += mij;
                }
        }

        int full[9];
        for (int i = 0; i < 3; ++i)
            for (int cc = 0; cc < 3; ++cc) full[3 * i + cc] = 3 * tri[i] + cc;
        int redidx[9];
        for (int a = 0; a < 9; ++a) redidx[a] = ops.reduced_of(full[a]);
        for (int a = 0; a < 9; ++a) {
            if (redidx[a] < 0) continue;
            for (int bb = 0; bb < 9; ++bb) {
                if (redidx[bb] < 0) continue;
                const double kc = Kc(a, bb), kd = Kd(a, bb), me = Me(a, bb);
                if (kc != 0.0 || kd != 0.0)
                    tk.emplace_back(redidx[a], redidx[bb], kc + kd);
                if (kd != 0.0) tkd.emplace_back(redidx[a], redidx[bb], kd);
                if (me != 0.0) tm.emplace_back(redidx[a], redidx[bb], me);
            }
        }
    }

    ops.K.resize(red, red);
    ops.K.setFromTriplets(tk.begin(), tk.end());
    ops.Kdiv.resize(red, red);
    ops.Kdiv.setFromTriplets(tkd.begin(), tkd.end());
    ops.M.resize(red, red);
    ops.M.setFromTriplets(tm.begin(), tm.end());
    return ops;
}

}  // namespace wgmconv
