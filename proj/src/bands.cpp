#include "tpump/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tp {

void BlochGrid::validate() const {
    if (n_k < 8 || n_t < 8) fail(Error::Kind::InvalidArgument, "grid needs at least 8 points per axis");
    if (!(period > 0)) fail(Error::Kind::InvalidArgument, "grid period must be positive");
}

CMat bloch_hamiltonian_single(double k, double t, const DriveProtocol& drive, Stagger stagger) {
    InstParams p = instantaneous_params(drive, t, 2);
    double s = stagger == Stagger::OddPositive ? 1.0 : -1.0;
    double J = drive.j_hop, d = p.smalldelta, D = p.capdelta[0];
    // intra bond (odd j): -J - d, inter bond (even j): -J + d
    cplx f = cplx(-J - d) + cplx(-J + d) * std::polar(1.0, -k);
    CMat h(2, 2);
    h << s * D, f, std::conj(f), -s * D;
    return h;
}

double plaquette_chern(const VectorField& f, std::vector<double>* curvature) {
    auto link = [&](int i0, int j0, int i1, int j1) {
        const CMat& a = f.at(i0, j0);
        const CMat& b = f.at(i1, j1);
        CMat o = a.adjoint() * b;
        return o.rows() == 1 ? o(0, 0) : o.determinant();
    };
    if (curvature) curvature->assign(static_cast<size_t>(f.n_k) * f.n_t, 0.0);
    double total = 0.0;
    for (int i = 0; i < f.n_k; ++i) {
        int i1 = (i + 1) % f.n_k;
        for (int j = 0; j < f.n_t; ++j) {
            int j1 = (j + 1) % f.n_t;
            cplx loop = link(i, j, i1, j) * link(i1, j, i1, j1) * link(i1, j1, i, j1) * link(i, j1, i, j);
            double F = std::arg(loop);
            if (curvature) (*curvature)[i * f.n_t + j] = F;
            total += F;
        }
    }
    return total / kTwoPi;
}

BandResult compute_bands(const BlochGrid& grid, const MatrixField& field, const ChernOptions& opt) {
    grid.validate();
    BandResult r;
    r.n_k = grid.n_k;
    r.n_t = grid.n_t;
    std::vector<CMat> vecs(static_cast<size_t>(grid.n_k) * grid.n_t);
    double emax = 0.0;
    r.gap_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n_k; ++i) {
        for (int j = 0; j < grid.n_t; ++j) {
            CMat h = field(grid.k(i), grid.t(j));
            Eigen::SelfAdjointEigenSolver<CMat> es(h);
            if (r.n_bands == 0) {
                r.n_bands = static_cast<int>(h.rows());
                r.energies.resize(vecs.size() * r.n_bands);
            }
            const auto& ev = es.eigenvalues();
            for (int m = 0; m < r.n_bands; ++m) {
                r.energies[(i * grid.n_t + j) * r.n_bands + m] = ev[m];
                emax = std::max(emax, std::abs(ev[m]));
                if (m > 0) r.gap_min = std::min(r.gap_min, ev[m] - ev[m - 1]);
            }
            vecs[i * grid.n_t + j] = es.eigenvectors();
        }
    }
    if (r.n_bands > 1 && r.gap_min < opt.gap_tol_rel * emax)
        fail(Error::Kind::GapClosure, "band gap closes on the grid (gap_min=" + std::to_string(r.gap_min) + ")");
    r.curvature.assign(r.energies.size(), 0.0);
    VectorField vf;
    vf.n_k = grid.n_k;
    vf.n_t = grid.n_t;
    vf.vecs.resize(vecs.size());
    for (int m = 0; m < r.n_bands; ++m) {
        for (size_t p = 0; p < vecs.size(); ++p) vf.vecs[p] = vecs[p].col(m);
        std::vector<double> curv;
        double c = plaquette_chern(vf, &curv);
        for (size_t p = 0; p < curv.size(); ++p) r.curvature[p * r.n_bands + m] = curv[p];
        r.chern.push_back(static_cast<int>(std::lround(c)));
    }
    return r;
}

int chern_number(const BlochGrid& grid, const MatrixField& field, int band_index, const ChernOptions& opt) {
    BandResult r = compute_bands(grid, field, opt);
    if (band_index < 0 || band_index >= r.n_bands) fail(Error::Kind::InvalidArgument, "band index out of range");
    return r.chern[band_index];
}

const char* label_name(ComBandLabel l) {
    switch (l) {
        case ComBandLabel::BoundState: return "BoundState";
        case ComBandLabel::Scattering: return "Scattering";
        case ComBandLabel::ResonantIsolated: return "ResonantIsolated";
    }
    return "?";
}

namespace {

LatticeSpec ring_spec(const LatticeSpec& tmpl, int n_cells) {
    LatticeSpec s = LatticeSpec::uniform(2 * n_cells, tmpl.interaction_u.empty() ? 0.0 : tmpl.interaction_u[0],
                                         tmpl.local_dim, Boundary::Periodic, 1);
    s.stagger = tmpl.stagger;
    s.lattice_constant_d = tmpl.lattice_constant_d;
    return s;
}

struct Ring {
    LatticeSpec spec;
    std::shared_ptr<const FockBasis> basis;
    std::vector<int> perm;
    std::vector<int> wraps;
    Eigen::VectorXd odd_dbl, even_dbl, any_dbl;
};

Ring make_ring(const LatticeSpec& tmpl, int n_cells, int n_particles) {
    Ring r;
    r.spec = ring_spec(tmpl, n_cells);
    r.basis = std::make_shared<const FockBasis>(build_fock_basis(r.spec, n_particles));
    const auto& B = *r.basis;
    const int n = r.spec.n_sites;
    r.perm.resize(B.dim());
    r.wraps.resize(B.dim());
    r.odd_dbl = Eigen::VectorXd::Zero(B.dim());
    r.even_dbl = Eigen::VectorXd::Zero(B.dim());
    for (int i = 0; i < B.dim(); ++i) {
        const auto& s = B.states[i];
        std::vector<std::uint8_t> t(n);
        for (int a = 0; a < n; ++a) t[a] = s[(a - 2 + n) % n];
        r.perm[i] = B.index_of.at(t);
        r.wraps[i] = s[n - 2] + s[n - 1];
        for (int a = 0; a < n; ++a) {
            if (s[a] < 2) continue;
            if (r.spec.original_index(a) % 2 != 0)
                r.odd_dbl[i] += 1.0;
            else
                r.even_dbl[i] += 1.0;
        }
    }
    r.any_dbl = r.odd_dbl + r.even_dbl;
    return r;
}

// orthonormal bases of the L eigenspaces of the twisted two-cell translation
std::vector<CMat> sector_bases(const Ring& r, double theta, int n_cells, int n_particles) {
    const int dim = r.basis->dim();
    CMat T = CMat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) T(r.perm[i], i) = std::polar(1.0, -theta * r.wraps[i]);
    std::vector<CMat> out;
    for (int m = 0; m < n_cells; ++m) {
        cplx lam = std::polar(1.0, (kTwoPi * m - n_particles * theta) / n_cells);
        CMat P = CMat::Zero(dim, dim);
        CMat Tc = CMat::Identity(dim, dim);
        CMat Tl = T / lam;
        for (int c = 0; c < n_cells; ++c) {
            P += Tc;
            Tc = Tl * Tc;
        }
        P /= double(n_cells);
        Eigen::SelfAdjointEigenSolver<CMat> es((P + P.adjoint()) / 2.0);
        std::vector<int> keep;
        for (int q = 0; q < dim; ++q)
            if (es.eigenvalues()[q] > 0.5) keep.push_back(q);
        CMat Q(dim, keep.size());
        for (size_t q = 0; q < keep.size(); ++q) Q.col(q) = es.eigenvectors().col(keep[q]);
        out.push_back(Q);
    }
    return out;
}

}  // namespace

Eigen::VectorXd ring_spectrum(const LatticeSpec& tmpl, const DriveProtocol& drive, int n_cells, double theta,
                              double t) {
    LatticeSpec s = ring_spec(tmpl, n_cells);
    s.twist = theta;
    ManyBodyOperator op(s, std::make_shared<const FockBasis>(build_fock_basis(s, 2)));
    HamiltonianMatrix h = op.assemble(instantaneous_params(drive, t, s.n_sites), drive.j_hop);
    return Eigen::SelfAdjointEigenSolver<CMat>(h.to_dense(), Eigen::EigenvaluesOnly).eigenvalues();
}

ComBandResult com_band_structure(const LatticeSpec& spec_template, const DriveProtocol& drive, int n_particles,
                                 int n_cells, const BlochGrid& grid, const ComOptions& opt) {
    grid.validate();
    if (n_particles != 2) fail(Error::Kind::InvalidArgument, "center-of-mass bands need two particles");
    if (n_cells < 2) fail(Error::Kind::InvalidArgument, "ring needs at least two cells");
    if (drive.disorder_w != 0.0) fail(Error::Kind::InvalidArgument, "disorder breaks co-translation symmetry");
    Ring ring = make_ring(spec_template, n_cells, n_particles);
    const int nth = grid.n_k, nt = grid.n_t;

    ComBandResult res;
    res.n_cells = n_cells;
    res.n_theta = nth;
    res.n_t = nt;
    res.gap_min = std::numeric_limits<double>::infinity();

    struct Seed {
        const char* name;
        const Eigen::VectorXd* w;
    };
    const Seed seeds[] = {{"odd_doublon", &ring.odd_dbl}, {"even_doublon", &ring.even_dbl}};

    for (const Seed& sd : seeds) {
        ComBand band;
        band.seed = sd.name;
        band.energies.assign(static_cast<size_t>(nth) * nt, 0.0);
        band.double_occupancy.assign(static_cast<size_t>(nth) * nt, 0.0);
        band.min_gap = std::numeric_limits<double>::infinity();
        VectorField vf;
        vf.n_k = nth;
        vf.n_t = nt;
        vf.vecs.resize(static_cast<size_t>(nth) * nt);
        double dbl_min = 1.0, dbl_seed = 1.0;

        for (int i = 0; i < nth; ++i) {
            double theta = kTwoPi * i / nth;
            LatticeSpec s = ring.spec;
            s.twist = theta;
            ManyBodyOperator op(s, ring.basis);
            auto H = [&](double t) { return op.assemble(instantaneous_params(drive, t, s.n_sites), drive.j_hop).to_dense(); };
            std::vector<CMat> Q = sector_bases(ring, theta, n_cells, n_particles);
            std::vector<CVec> cur(n_cells);
            std::vector<double> ecur(n_cells);

            auto solve = [&](int m, const CMat& h, Eigen::VectorXd& w, CMat& v) {
                Eigen::SelfAdjointEigenSolver<CMat> es(Q[m].adjoint() * h * Q[m]);
                w = es.eigenvalues();
                v = Q[m] * es.eigenvectors();
            };
            auto track_gap = [&](const Eigen::VectorXd& w, int k) {
                double g = std::numeric_limits<double>::infinity();
                for (int q = 0; q < w.size(); ++q)
                    if (q != k) g = std::min(g, std::abs(w[q] - w[k]));
                band.min_gap = std::min(band.min_gap, g);
            };

            CMat h0 = H(0.0);
            for (int m = 0; m < n_cells; ++m) {
                Eigen::VectorXd w;
                CMat v;
                solve(m, h0, w, v);
                int best = 0;
                double bw = -1.0;
                for (int q = 0; q < v.cols(); ++q) {
                    double c = v.col(q).cwiseAbs2().dot(*sd.w);
                    if (c > bw) {
                        bw = c;
                        best = q;
                    }
                }
                dbl_seed = std::min(dbl_seed, v.col(best).cwiseAbs2().dot(ring.any_dbl));
                cur[m] = v.col(best);
                ecur[m] = w[best];
                track_gap(w, best);
            }
            for (int j = 0; j < nt; ++j) {
                if (j > 0) {
                    for (int sub = 1; sub <= opt.substeps; ++sub) {
                        double t = grid.t(j - 1) + (grid.t(j) - grid.t(j - 1)) * sub / opt.substeps;
                        CMat h = H(t);
                        for (int m = 0; m < n_cells; ++m) {
                            Eigen::VectorXd w;
                            CMat v;
                            solve(m, h, w, v);
                            Eigen::VectorXd ov = (v.adjoint() * cur[m]).cwiseAbs2();
                            int k;
                            double omax = ov.maxCoeff(&k);
                            band.min_overlap = std::min(band.min_overlap, omax);
                            cur[m] = v.col(k);
                            ecur[m] = w[k];
                            track_gap(w, k);
                        }
                    }
                }
                CMat col(cur[0].size(), n_cells);
                double e = 0.0, dbl = 0.0;
                for (int m = 0; m < n_cells; ++m) {
                    col.col(m) = cur[m];
                    e += ecur[m];
                    dbl += cur[m].cwiseAbs2().dot(ring.any_dbl);
                }
                vf.vecs[i * nt + j] = col;
                band.energies[i * nt + j] = e / n_cells;
                band.double_occupancy[i * nt + j] = dbl / n_cells;
                dbl_min = std::min(dbl_min, dbl / n_cells);
            }
        }
        if (band.min_overlap < opt.min_overlap)
            fail(Error::Kind::Continuity, std::string("band tracking ambiguous for ") + sd.name +
                                              " (overlap " + std::to_string(band.min_overlap) + ")");
        if (band.min_gap < opt.gap_tol)
            fail(Error::Kind::GapClosure, std::string("tracked band touches another level: ") + sd.name);
        band.chern_raw = plaquette_chern(vf, &band.curvature) / n_particles;
        band.chern = static_cast<int>(std::lround(band.chern_raw));
        if (dbl_seed <= 0.5)
            band.label = ComBandLabel::Scattering;
        else if (dbl_min > 0.5)
            band.label = ComBandLabel::BoundState;
        else
            band.label = ComBandLabel::ResonantIsolated;
        res.gap_min = std::min(res.gap_min, band.min_gap);
        res.bands.push_back(std::move(band));
    }
    return res;
}

HamiltonianMatrix effective_subspace_hamiltonian(const LatticeSpec& spec, const std::vector<double>& delta,
                                                 double smalldelta, double j_hop) {
    spec.validate();
    if (spec.boundary != Boundary::Open) fail(Error::Kind::InvalidArgument, "effective model needs an open chain");
    if (spec.local_dim < 3) fail(Error::Kind::InvalidArgument, "effective model needs local_dim 3");
    const int n = spec.n_sites;
    if (static_cast<int>(delta.size()) != n) fail(Error::Kind::InvalidArgument, "delta list size mismatch");
    HamiltonianMatrix h;
    h.dense = CMat::Zero(2 * n - 1, 2 * n - 1);
    for (int a = 0; a < n; ++a) {
        h.dense(2 * a, 2 * a) = 2.0 * spec.stagger_sign(a) * delta[a] + spec.interaction_u[a];
        if (a + 1 < n) {
            h.dense(2 * a + 1, 2 * a + 1) = spec.stagger_sign(a) * delta[a] + spec.stagger_sign(a + 1) * delta[a + 1];
            double c = std::sqrt(2.0) * (-j_hop + spec.bond_sign(a) * smalldelta);
            h.dense(2 * a, 2 * a + 1) = h.dense(2 * a + 1, 2 * a) = c;
            h.dense(2 * a + 2, 2 * a + 1) = h.dense(2 * a + 1, 2 * a + 2) = c;
        }
    }
    return h;
}

}  // namespace tp
