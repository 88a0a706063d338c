#include "tpump/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tp {

SectorSpace::SectorSpace(const LatticeSpec& s, int n_max) : spec(s) {
    int total = 0;
    for (int n = 0; n <= n_max; ++n) {
        sectors.push_back(std::make_shared<const FockBasis>(build_fock_basis(spec, n)));
        offset.push_back(total);
        total += sectors.back()->dim();
    }
    dim = total;
}

int SectorSpace::particles(int i) const {
    for (int n = n_max(); n >= 0; --n)
        if (i >= offset[n]) return n;
    return 0;
}

const std::vector<std::uint8_t>& SectorSpace::state(int i) const {
    int n = particles(i);
    return sectors[n]->states[i - offset[n]];
}

void NoiseModel::validate() const {
    if (!(t1_eff > 0) || !(tphi_eff > 0)) fail(Error::Kind::InvalidArgument, "noise times must be positive");
}

std::vector<double> ObservableTrace::times() const {
    std::vector<double> v;
    for (const auto& f : frames) v.push_back(f.time);
    return v;
}
std::vector<double> ObservableTrace::com() const {
    std::vector<double> v;
    for (const auto& f : frames) v.push_back(f.com);
    return v;
}
std::vector<double> ObservableTrace::loschmidt() const {
    std::vector<double> v;
    for (const auto& f : frames) v.push_back(f.loschmidt);
    return v;
}

QuantumState prepare_site_excitation(std::shared_ptr<const FockBasis> basis, int site_local, int occupancy) {
    if (site_local < 0 || site_local >= basis->n_sites) fail(Error::Kind::InvalidArgument, "site out of range");
    if (occupancy < 1 || occupancy >= basis->local_dim)
        fail(Error::Kind::InvalidArgument, "occupancy not allowed by local dimension");
    if (occupancy != basis->n_particles)
        fail(Error::Kind::InvalidArgument, "basis particle number does not match occupancy");
    std::vector<std::uint8_t> occ(basis->n_sites, 0);
    occ[site_local] = static_cast<std::uint8_t>(occupancy);
    return prepare_fock_state(std::move(basis), occ);
}

QuantumState prepare_fock_state(std::shared_ptr<const FockBasis> basis, const std::vector<std::uint8_t>& occ) {
    int idx = basis->find(occ);
    if (idx < 0) fail(Error::Kind::InvalidArgument, "occupation pattern not in basis");
    QuantumState s;
    s.amp = CVec::Zero(basis->dim());
    s.amp[idx] = 1.0;
    s.basis = std::move(basis);
    return s;
}

CVec expm_action(const HamiltonianMatrix& h, double dt, const CVec& v, double tol) {
    CVec out = v;
    CVec term = v;
    const cplx f(0.0, -dt);
    for (int k = 1; k < 60; ++k) {
        term = h.apply(term) * (f / double(k));
        out += term;
        if (term.norm() < tol * out.norm()) break;
    }
    return out;
}

namespace {

struct DiagObs {
    Eigen::MatrixXd occ;     // dim x n_sites
    Eigen::VectorXi total;   // particles per state
};

DiagObs diag_obs(const std::vector<const std::vector<std::uint8_t>*>& states, int n_sites) {
    DiagObs d;
    d.occ.resize(states.size(), n_sites);
    d.total.resize(states.size());
    for (size_t i = 0; i < states.size(); ++i) {
        int t = 0;
        for (int a = 0; a < n_sites; ++a) {
            d.occ(i, a) = (*states[i])[a];
            t += (*states[i])[a];
        }
        d.total[i] = t;
    }
    return d;
}

Eigen::MatrixXd pops_from_probs(const Eigen::VectorXd& p, const DiagObs& d) {
    const int n = static_cast<int>(d.occ.cols());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, 3);
    for (int i = 0; i < p.size(); ++i)
        for (int a = 0; a < n; ++a) P(a, static_cast<int>(d.occ(i, a))) += p[i];
    return P;
}

Eigen::MatrixXd gamma_from_probs(const Eigen::VectorXd& p, const DiagObs& d) {
    const int n = static_cast<int>(d.occ.cols());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0 || d.total[i] < 2) continue;
        for (int a = 0; a < n; ++a) {
            double na = d.occ(i, a);
            if (na == 0.0) continue;
            for (int b = 0; b < n; ++b) {
                double nb = d.occ(i, b);
                G(a, b) += p[i] * (a == b ? na * (na - 1.0) : na * nb);
            }
        }
    }
    return G;
}

double com_from_probs(const Eigen::VectorXd& p, const DiagObs& d, const LatticeSpec& spec) {
    Eigen::VectorXd nbar = d.occ.transpose() * p;
    double num = 0.0, den = 0.0;
    for (int a = 0; a < nbar.size(); ++a) {
        num += spec.original_index(a) * nbar[a];
        den += nbar[a];
    }
    return den > 0 ? 0.5 * spec.lattice_constant_d * num / den : 0.0;
}

std::vector<const std::vector<std::uint8_t>*> state_ptrs(const FockBasis& b) {
    std::vector<const std::vector<std::uint8_t>*> v;
    for (const auto& s : b.states) v.push_back(&s);
    return v;
}

std::vector<const std::vector<std::uint8_t>*> state_ptrs(const SectorSpace& sp) {
    std::vector<const std::vector<std::uint8_t>*> v;
    for (const auto& sec : sp.sectors)
        for (const auto& s : sec->states) v.push_back(&s);
    return v;
}

double spectral_bound(const HamiltonianMatrix& h) {
    if (h.sparse) return h.row_sum_norm();
    Eigen::SelfAdjointEigenSolver<CMat> es(h.dense, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// steps as a multiple of the frame count so frames land on step boundaries
int choose_steps(const std::function<double(double)>& bound, double t_final, const StepOptions& opt) {
    const int segs = std::max(1, opt.n_frames - 1);
    if (opt.n_steps > 0) return ((opt.n_steps + segs - 1) / segs) * segs;
    double emax = 0.0;
    const int samples = 64;
    for (int s = 0; s <= samples; ++s) emax = std::max(emax, bound(t_final * s / samples));
    emax *= 1.02;
    long need = static_cast<long>(std::ceil(t_final * emax / opt.max_phase));
    need = std::max<long>(need, segs);
    return static_cast<int>(((need + segs - 1) / segs) * segs);
}

}  // namespace

Eigen::MatrixXd measure_populations(const QuantumState& psi) {
    return pops_from_probs(psi.amp.cwiseAbs2(), diag_obs(state_ptrs(*psi.basis), psi.basis->n_sites));
}

Eigen::MatrixXd measure_populations(const DensityMatrix& rho) {
    return pops_from_probs(rho.rho.diagonal().real(), diag_obs(state_ptrs(*rho.space), rho.space->spec.n_sites));
}

double measure_com(const QuantumState& psi, const LatticeSpec& spec) {
    return com_from_probs(psi.amp.cwiseAbs2(), diag_obs(state_ptrs(*psi.basis), psi.basis->n_sites), spec);
}

double measure_com(const DensityMatrix& rho) {
    return com_from_probs(rho.rho.diagonal().real(), diag_obs(state_ptrs(*rho.space), rho.space->spec.n_sites),
                          rho.space->spec);
}

Eigen::MatrixXd measure_correlations(const QuantumState& psi) {
    return gamma_from_probs(psi.amp.cwiseAbs2(), diag_obs(state_ptrs(*psi.basis), psi.basis->n_sites));
}

Eigen::MatrixXd measure_correlations(const DensityMatrix& rho) {
    return gamma_from_probs(rho.rho.diagonal().real(), diag_obs(state_ptrs(*rho.space), rho.space->spec.n_sites));
}

Eigen::MatrixXd normalized_correlations(const Eigen::MatrixXd& gamma) {
    double m = gamma.size() ? gamma.maxCoeff() : 0.0;
    return m > 0 ? Eigen::MatrixXd(gamma / m) : gamma;
}

double offdiagonal_gamma_fraction(const Eigen::MatrixXd& gamma) {
    double total = gamma.sum();
    if (total <= 0) return 0.0;
    return (total - gamma.trace()) / total;
}

double loschmidt_echo(const QuantumState& psi, const QuantumState& psi0) {
    return std::norm(psi0.amp.dot(psi.amp));
}

UnitaryResult evolve_unitary(const HBuilder& h, const QuantumState& psi0, double t_final, const LatticeSpec& spec,
                             const StepOptions& opt) {
    if (!(t_final > 0)) fail(Error::Kind::InvalidArgument, "t_final must be positive");
    const DiagObs dobs = diag_obs(state_ptrs(*psi0.basis), psi0.basis->n_sites);
    const int nsteps = choose_steps([&](double t) { return spectral_bound(h(t)); }, t_final, opt);
    const int segs = std::max(1, opt.n_frames - 1);
    const int per_frame = nsteps / segs;
    const double dt = t_final / nsteps;

    UnitaryResult res;
    auto& tr = res.trace;
    tr.n_sites = psi0.basis->n_sites;
    tr.first_site = spec.first_site;
    tr.n_steps = nsteps;
    tr.step = dt;

    const double norm0 = psi0.amp.norm();
    auto record = [&](double t, const CVec& v) {
        Frame f;
        f.time = t;
        Eigen::VectorXd p = v.cwiseAbs2();
        f.populations = pops_from_probs(p, dobs);
        f.com = com_from_probs(p, dobs, spec);
        if (opt.record_gamma) f.gamma = gamma_from_probs(p, dobs);
        f.loschmidt = std::norm(psi0.amp.dot(v));
        f.norm = v.norm();
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(f.norm - norm0));
        tr.frames.push_back(std::move(f));
    };

    CVec v = psi0.amp;
    record(0.0, v);
    for (int s = 0; s < nsteps; ++s) {
        double tm = (s + 0.5) * dt;
        double before = v.norm();
        v = expm_action(h(tm), dt, v);
        double drift = std::abs(v.norm() - before);
        tr.max_step_drift = std::max(tr.max_step_drift, drift);
        if (drift > opt.drift_tol)
            fail(Error::Kind::StepTooLarge, "norm drift " + std::to_string(drift) + " at t=" + std::to_string(tm));
        if ((s + 1) % per_frame == 0) record((s + 1) * dt, v);
    }
    res.final_state.basis = psi0.basis;
    res.final_state.amp = v;
    return res;
}

DensityMatrix density_from_state(std::shared_ptr<const SectorSpace> space, const QuantumState& psi) {
    int n = psi.basis->n_particles;
    if (n > space->n_max()) fail(Error::Kind::InvalidArgument, "state has more particles than the sector space");
    DensityMatrix d;
    d.rho = CMat::Zero(space->dim, space->dim);
    int off = space->offset[n];
    int m = psi.basis->dim();
    d.rho.block(off, off, m, m) = psi.amp * psi.amp.adjoint();
    d.space = std::move(space);
    return d;
}

LindbladResult evolve_lindblad(const SectorHBuilder& h, const DensityMatrix& rho0, const NoiseModel& noise,
                               double t_final, const StepOptions& opt) {
    noise.validate();
    if (!(t_final > 0)) fail(Error::Kind::InvalidArgument, "t_final must be positive");
    const SectorSpace& sp = *rho0.space;
    const LatticeSpec& spec = sp.spec;
    const int n = spec.n_sites;
    const int dim = sp.dim;
    const DiagObs dobs = diag_obs(state_ptrs(sp), n);

    const double g1 = noise.relaxation ? 1.0 / noise.t1_eff : 0.0;
    const double gd = noise.dephasing ? 2.0 / noise.tphi_eff : 0.0;

    // lowering operators across sectors
    std::vector<SpMat> lower;
    for (int a = 0; a < n && g1 > 0; ++a) {
        std::vector<Eigen::Triplet<cplx>> trip;
        for (int i = 0; i < dim; ++i) {
            const auto& s = sp.state(i);
            if (s[a] == 0) continue;
            int np = sp.particles(i);
            auto t = s;
            t[a]--;
            int j = sp.sectors[np - 1]->find(t) + sp.offset[np - 1];
            trip.emplace_back(j, i, std::sqrt(g1 * s[a]));
        }
        SpMat L(dim, dim);
        L.setFromTriplets(trip.begin(), trip.end());
        lower.push_back(std::move(L));
    }
    Eigen::MatrixXd deph = gd * dobs.occ * dobs.occ.transpose();
    Eigen::VectorXd G(dim);
    for (int i = 0; i < dim; ++i) {
        double g = 0.0;
        for (int a = 0; a < n; ++a) g += g1 * dobs.occ(i, a) + gd * dobs.occ(i, a) * dobs.occ(i, a);
        G[i] = g;
    }
    auto dissipator = [&](const CMat& r) {
        CMat out = deph.cast<cplx>().cwiseProduct(r);
        for (const auto& L : lower) {
            CMat lr = L * r;
            CMat t = L * CMat(lr.adjoint());
            out += t.adjoint();  // L r L^dag
        }
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) out(i, j) -= 0.5 * (G[i] + G[j]) * r(i, j);
        return out;
    };

    auto full_h = [&](double t) {
        CMat H = CMat::Zero(dim, dim);
        for (int np = 0; np <= sp.n_max(); ++np) {
            int m = sp.sectors[np]->dim();
            if (np == 0) continue;
            H.block(sp.offset[np], sp.offset[np], m, m) = h(np, t).to_dense();
        }
        return H;
    };
    auto bound = [&](double t) {
        double e = 0.0;
        for (int np = 1; np <= sp.n_max(); ++np) e = std::max(e, spectral_bound(h(np, t)));
        return e;
    };
    const int nsteps = choose_steps(bound, t_final, opt);
    const int segs = std::max(1, opt.n_frames - 1);
    const int per_frame = nsteps / segs;
    const double dt = t_final / nsteps;

    LindbladResult res;
    auto& tr = res.trace;
    tr.n_sites = n;
    tr.first_site = spec.first_site;
    tr.n_steps = nsteps;
    tr.step = dt;
    tr.min_eigenvalue = 0.0;

    const double tr0 = rho0.rho.trace().real();
    auto record = [&](double t, const CMat& r) {
        Frame f;
        f.time = t;
        Eigen::VectorXd p = r.diagonal().real();
        f.populations = pops_from_probs(p, dobs);
        f.com = com_from_probs(p, dobs, spec);
        if (opt.record_gamma) f.gamma = gamma_from_probs(p, dobs);
        f.loschmidt = (rho0.rho * r).trace().real();
        f.norm = r.trace().real();
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(f.norm - tr0));
        Eigen::SelfAdjointEigenSolver<CMat> es((r + r.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        double mn = es.eigenvalues().minCoeff();
        tr.min_eigenvalue = std::min(tr.min_eigenvalue, mn);
        if (mn < -1e-5) tr.positivity_warning = true;
        tr.frames.push_back(std::move(f));
    };

    CMat r = rho0.rho;
    record(0.0, r);
    const bool noisy = g1 > 0 || gd > 0;
    for (int s = 0; s < nsteps; ++s) {
        double tm = (s + 0.5) * dt;
        double before = r.trace().real();
        CMat H = full_h(tm);
        Eigen::SelfAdjointEigenSolver<CMat> es(H);
        CVec ph = (es.eigenvalues() * (-0.5 * dt)).unaryExpr([](double x) { return std::polar(1.0, x); });
        CMat U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        r = U * r * U.adjoint();
        if (noisy) {
            CMat k1 = dissipator(r);
            CMat k2 = dissipator(r + 0.5 * dt * k1);
            CMat k3 = dissipator(r + 0.5 * dt * k2);
            CMat k4 = dissipator(r + dt * k3);
            r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        r = U * r * U.adjoint();
        double drift = std::abs(r.trace().real() - before);
        tr.max_step_drift = std::max(tr.max_step_drift, drift);
        if (drift > opt.drift_tol)
            fail(Error::Kind::StepTooLarge, "trace drift " + std::to_string(drift) + " at t=" + std::to_string(tm));
        if ((s + 1) % per_frame == 0) record((s + 1) * dt, r);
    }
    res.final_rho.space = rho0.space;
    res.final_rho.rho = r;
    return res;
}

}  // namespace tp
