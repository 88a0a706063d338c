#include "tpump/model.hpp"

#include <cmath>
#include <random>

namespace tp {

LatticeSpec LatticeSpec::uniform(int n, double u, int local_dim, Boundary b, int first_site) {
    LatticeSpec s;
    s.n_sites = n;
    s.local_dim = local_dim;
    s.interaction_u.assign(n > 0 ? n : 0, u);
    s.boundary = b;
    s.first_site = first_site;
    return s;
}

void LatticeSpec::validate() const {
    if (n_sites < 2) fail(Error::Kind::InvalidArgument, "n_sites must be >= 2");
    if (local_dim != 2 && local_dim != 3) fail(Error::Kind::InvalidArgument, "local_dim must be 2 or 3");
    if (boundary == Boundary::Periodic && n_sites % 2 != 0)
        fail(Error::Kind::InvalidArgument, "periodic lattice needs an even number of sites");
    if (static_cast<int>(interaction_u.size()) != n_sites)
        fail(Error::Kind::InvalidArgument, "interaction_u must have one entry per site");
    for (double u : interaction_u)
        if (!std::isfinite(u)) fail(Error::Kind::InvalidArgument, "interaction_u must be finite");
    if (!(lattice_constant_d > 0)) fail(Error::Kind::InvalidArgument, "lattice constant must be positive");
}

double LatticeSpec::stagger_sign(int a) const {
    bool odd = original_index(a) % 2 != 0;
    if (stagger == Stagger::OddPositive) return odd ? 1.0 : -1.0;
    return odd ? -1.0 : 1.0;
}

void DriveProtocol::validate() const {
    if (!(period > 0)) fail(Error::Kind::InvalidArgument, "period must be positive");
    if (j_hop < 0) fail(Error::Kind::InvalidArgument, "j_hop must be >= 0");
    for (double v : {j_hop, delta0, capdelta0, period, phase0, offset_r, disorder_w})
        if (!std::isfinite(v)) fail(Error::Kind::InvalidArgument, "drive parameters must be finite");
}

std::vector<double> disorder_xi(std::uint64_t seed, int n) {
    std::mt19937_64 gen(seed);
    std::vector<double> xi(n);
    for (auto& x : xi) x = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    return xi;
}

namespace {
InstParams params_with_xi(const DriveProtocol& d, double t, int n, const std::vector<double>* xi) {
    InstParams p;
    double base = 0.0;
    double w = d.omega();
    switch (d.kind) {
        case DriveKind::BulkPump:
            base = std::cos(w * t + d.phase0) + d.offset_r;
            p.smalldelta = d.delta0 * std::sin(w * t + d.phase0);
            break;
        case DriveKind::EdgePump:
            base = std::sin(w * t);
            p.smalldelta = -d.delta0 * std::cos(w * t);
            break;
        case DriveKind::Static:
            base = std::cos(d.phase0) + d.offset_r;
            p.smalldelta = d.delta0 * std::sin(d.phase0);
            break;
    }
    p.capdelta.assign(n, d.capdelta0 * base);
    if (d.kind != DriveKind::EdgePump && d.disorder_w != 0.0) {
        std::vector<double> local;
        if (!xi) {
            local = disorder_xi(d.disorder_seed, n);
            xi = &local;
        }
        for (int l = 0; l < n; ++l) p.capdelta[l] += d.capdelta0 * d.disorder_w * (*xi)[l];
    }
    return p;
}
}  // namespace

InstParams instantaneous_params(const DriveProtocol& drive, double t, int site_count) {
    return params_with_xi(drive, t, site_count, nullptr);
}

InstParams instantaneous_params(const DriveProtocol& drive, double t, const std::vector<double>& xi) {
    return params_with_xi(drive, t, static_cast<int>(xi.size()), &xi);
}

int FockBasis::find(const std::vector<std::uint8_t>& s) const {
    auto it = index_of.find(s);
    return it == index_of.end() ? -1 : it->second;
}

FockBasis build_fock_basis(const LatticeSpec& spec, int n_particles) {
    spec.validate();
    int maxn = (spec.local_dim - 1) * spec.n_sites;
    if (n_particles < 0 || n_particles > maxn)
        fail(Error::Kind::InvalidArgument, "n_particles out of range");
    FockBasis b;
    b.n_sites = spec.n_sites;
    b.local_dim = spec.local_dim;
    b.n_particles = n_particles;
    std::vector<std::uint8_t> cur(spec.n_sites, 0);
    // descending lexicographic: (2,0) before (1,1) before (0,2)
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == spec.n_sites) {
            if (left == 0) b.states.push_back(cur);
            return;
        }
        int top = std::min(spec.local_dim - 1, left);
        for (int v = top; v >= 0; --v) {
            cur[pos] = static_cast<std::uint8_t>(v);
            self(self, pos + 1, left - v);
        }
        cur[pos] = 0;
    };
    rec(rec, 0, n_particles);
    for (int i = 0; i < b.dim(); ++i) b.index_of.emplace(b.states[i], i);
    return b;
}

double HamiltonianMatrix::row_sum_norm() const {
    double m = 0.0;
    if (sparse) {
        Eigen::VectorXd rows = Eigen::VectorXd::Zero(sp.rows());
        for (int k = 0; k < sp.outerSize(); ++k)
            for (SpMat::InnerIterator it(sp, k); it; ++it) rows[it.row()] += std::abs(it.value());
        m = rows.size() ? rows.maxCoeff() : 0.0;
    } else if (dense.size()) {
        m = dense.cwiseAbs().rowwise().sum().maxCoeff();
    }
    return m;
}

HamiltonianMatrix build_single_particle_hamiltonian(const LatticeSpec& spec, double delta, double smalldelta,
                                                    double j_hop) {
    return build_single_particle_hamiltonian(spec, std::vector<double>(spec.n_sites, delta), smalldelta, j_hop);
}

HamiltonianMatrix build_single_particle_hamiltonian(const LatticeSpec& spec, const std::vector<double>& delta,
                                                    double smalldelta, double j_hop) {
    spec.validate();
    const int n = spec.n_sites;
    if (static_cast<int>(delta.size()) != n) fail(Error::Kind::InvalidArgument, "delta list size mismatch");
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int a = 0; a < n; ++a) trip.emplace_back(a, a, spec.stagger_sign(a) * delta[a]);
    for (int a = 0; a < spec.n_bonds(); ++a) {
        int b = (a + 1) % n;
        cplx amp = -j_hop + spec.bond_sign(a) * smalldelta;
        if (b == 0) amp *= std::polar(1.0, spec.twist);
        // a^dag_a a_b
        trip.emplace_back(a, b, amp);
        trip.emplace_back(b, a, std::conj(amp));
    }
    HamiltonianMatrix h;
    h.sparse = n > kSparseThreshold;
    SpMat sp(n, n);
    sp.setFromTriplets(trip.begin(), trip.end());
    if (h.sparse)
        h.sp = std::move(sp);
    else
        h.dense = CMat(sp);
    return h;
}

ManyBodyOperator::ManyBodyOperator(const LatticeSpec& spec, std::shared_ptr<const FockBasis> basis)
    : spec_(spec), basis_(std::move(basis)) {
    spec_.validate();
    const FockBasis& B = *basis_;
    if (B.n_sites != spec_.n_sites || B.local_dim != spec_.local_dim)
        fail(Error::Kind::InvalidArgument, "basis does not match lattice");
    const int n = spec_.n_sites;
    const int dim = B.dim();
    occ_.resize(dim, n);
    interact_.resize(dim);
    for (int i = 0; i < dim; ++i) {
        double e = 0.0;
        for (int a = 0; a < n; ++a) {
            double na = B.states[i][a];
            occ_(i, a) = na;
            e += 0.5 * spec_.interaction_u[a] * na * (na - 1.0);
        }
        interact_[i] = e;
    }
    std::vector<std::uint8_t> t;
    for (int i = 0; i < dim; ++i) {
        const auto& s = B.states[i];
        for (int a = 0; a < spec_.n_bonds(); ++a) {
            int b = (a + 1) % n;
            cplx ph = (b == 0) ? std::polar(1.0, spec_.twist) : cplx(1.0);
            // a^dag_a a_b |s>
            if (s[b] > 0 && s[a] < spec_.local_dim - 1) {
                t = s;
                double f = std::sqrt(double(s[b]) * (s[a] + 1));
                t[b]--;
                t[a]++;
                hops_.push_back({B.index_of.at(t), i, f, spec_.bond_sign(a), ph});
            }
            if (s[a] > 0 && s[b] < spec_.local_dim - 1) {
                t = s;
                double f = std::sqrt(double(s[a]) * (s[b] + 1));
                t[a]--;
                t[b]++;
                hops_.push_back({B.index_of.at(t), i, f, spec_.bond_sign(a), std::conj(ph)});
            }
        }
    }
}

HamiltonianMatrix ManyBodyOperator::assemble(const std::vector<double>& delta, double smalldelta, double j_hop) const {
    const int n = spec_.n_sites;
    const int dim = basis_->dim();
    if (static_cast<int>(delta.size()) != n) fail(Error::Kind::InvalidArgument, "delta list size mismatch");
    Eigen::VectorXd sd(n);
    for (int a = 0; a < n; ++a) sd[a] = spec_.stagger_sign(a) * delta[a];
    Eigen::VectorXd diag = occ_ * sd + interact_;
    HamiltonianMatrix h;
    h.sparse = dim > kSparseThreshold;
    if (h.sparse) {
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.reserve(hops_.size() + dim);
        for (int i = 0; i < dim; ++i) trip.emplace_back(i, i, diag[i]);
        for (const auto& hp : hops_) trip.emplace_back(hp.row, hp.col, hp.amp * (-j_hop + hp.sign * smalldelta) * hp.phase);
        h.sp.resize(dim, dim);
        h.sp.setFromTriplets(trip.begin(), trip.end());
    } else {
        h.dense = CMat::Zero(dim, dim);
        h.dense.diagonal() = diag.cast<cplx>();
        for (const auto& hp : hops_) h.dense(hp.row, hp.col) += hp.amp * (-j_hop + hp.sign * smalldelta) * hp.phase;
    }
    return h;
}

HamiltonianMatrix build_many_body_hamiltonian(const LatticeSpec& spec, const FockBasis& basis,
                                              const std::vector<double>& delta, double smalldelta, double j_hop) {
    ManyBodyOperator op(spec, std::make_shared<const FockBasis>(basis));
    return op.assemble(delta, smalldelta, j_hop);
}

bool is_hermitian(const HamiltonianMatrix& h, double rel_tol) {
    CMat d = h.to_dense();
    double scale = d.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (d - d.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace tp
