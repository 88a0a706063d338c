#include "tpump/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tp {

void FloquetSpec::validate() const {
    if (m_range < 1) fail(Error::Kind::InvalidArgument, "Floquet cutoff M must be >= 1");
    spec.validate();
    drive.validate();
}

double fold_quasienergy(double e, double omega) { return e - omega * std::ceil((e - 0.5 * omega) / omega); }

FourierBlocks drive_fourier_blocks(const FloquetSpec& f) {
    const LatticeSpec& s = f.spec;
    const DriveProtocol& d = f.drive;
    const int n = s.n_sites;
    CMat S = CMat::Zero(n, n), B = CMat::Zero(n, n), K = CMat::Zero(n, n);
    for (int a = 0; a < n; ++a) S(a, a) = s.stagger_sign(a);
    for (int a = 0; a < s.n_bonds(); ++a) {
        int b = (a + 1) % n;
        cplx ph = b == 0 ? std::polar(1.0, s.twist) : cplx(1.0);
        B(a, b) += s.bond_sign(a) * ph;
        B(b, a) += s.bond_sign(a) * std::conj(ph);
        K(a, b) += -ph;
        K(b, a) += -std::conj(ph);
    }
    FourierBlocks fb;
    fb.h0 = d.j_hop * K;
    std::vector<double> stat(n, 0.0);
    if (d.kind != DriveKind::EdgePump) {
        std::vector<double> xi = d.disorder_w != 0.0 ? disorder_xi(d.disorder_seed, n) : std::vector<double>(n, 0.0);
        for (int a = 0; a < n; ++a) stat[a] = d.capdelta0 * (d.offset_r + d.disorder_w * xi[a]);
    }
    const cplx I(0.0, 1.0);
    switch (d.kind) {
        case DriveKind::BulkPump: {
            cplx e = std::polar(1.0, d.phase0);
            fb.hp = 0.5 * d.capdelta0 * e * S + d.delta0 * e / (2.0 * I) * B;
            break;
        }
        case DriveKind::EdgePump:
            fb.hp = d.capdelta0 / (2.0 * I) * S - 0.5 * d.delta0 * B;
            break;
        case DriveKind::Static: {
            fb.hp = CMat::Zero(n, n);
            for (int a = 0; a < n; ++a) stat[a] += d.capdelta0 * std::cos(d.phase0);
            fb.h0 += d.delta0 * std::sin(d.phase0) * B;
            break;
        }
    }
    for (int a = 0; a < n; ++a) fb.h0(a, a) += s.stagger_sign(a) * stat[a];
    return fb;
}

HamiltonianMatrix build_floquet_hamiltonian(const FloquetSpec& f) {
    f.validate();
    const int n = f.spec.n_sites;
    const int M = f.m_range;
    const int nb = 2 * M + 1;
    const double w = f.drive.omega();
    FourierBlocks fb = drive_fourier_blocks(f);
    CMat H = CMat::Zero(n * nb, n * nb);
    for (int bi = 0; bi < nb; ++bi) {
        int m = bi - M;
        H.block(bi * n, bi * n, n, n) = fb.h0 + m * w * CMat::Identity(n, n);
        if (bi > 0) {
            H.block(bi * n, (bi - 1) * n, n, n) = fb.hp;
            H.block((bi - 1) * n, bi * n, n, n) = fb.hp.adjoint();
        }
    }
    HamiltonianMatrix h;
    h.dense = std::move(H);
    return h;
}

FloquetSpectrum floquet_spectrum(const FloquetSpec& f) {
    HamiltonianMatrix h = build_floquet_hamiltonian(f);
    const int n = f.spec.n_sites;
    const int M = f.m_range;
    Eigen::SelfAdjointEigenSolver<CMat> es(h.dense);
    const int dim = static_cast<int>(h.dense.rows());
    FloquetSpectrum out;
    out.omega = f.drive.omega();
    out.weights = es.eigenvectors().cwiseAbs2();
    std::vector<double> central_w(dim);
    for (int q = 0; q < dim; ++q) {
        double mm = 0.0;
        for (int bi = 0; bi < 2 * M + 1; ++bi) {
            double wsum = out.weights.col(q).segment(bi * n, n).sum();
            mm += (bi - M) * wsum;
            if (bi == M) central_w[q] = wsum;
        }
        out.mean_m.push_back(mm);
    }
    // one representative per physical state: the n eigenvectors most concentrated in the m=0 block
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return central_w[a] > central_w[b]; });
    for (int q = 0; q < n; ++q) out.quasienergies.push_back(fold_quasienergy(es.eigenvalues()[order[q]], out.omega));
    std::sort(out.quasienergies.begin(), out.quasienergies.end());
    return out;
}

CMat kxky_bloch_hamiltonian(double kx, double ky, const DriveProtocol& drive) {
    if (drive.kind != DriveKind::BulkPump) fail(Error::Kind::InvalidArgument, "needs the bulk pump protocol");
    double D = drive.capdelta0 * (std::cos(ky + drive.phase0) + drive.offset_r);
    double d = drive.delta0 * std::sin(ky + drive.phase0);
    cplx off = 2.0 * cplx(drive.j_hop * std::cos(kx), d * std::sin(kx));
    CMat h(2, 2);
    h << -D, off, std::conj(off), D;
    return h;
}

EquivalenceReport verify_bloch_equivalence(const DriveProtocol& drive, const BlochGrid& grid, Stagger stagger) {
    grid.validate();
    if (drive.kind != DriveKind::BulkPump) fail(Error::Kind::InvalidArgument, "needs the bulk pump protocol");
    DriveProtocol clean = drive;
    clean.disorder_w = 0.0;
    EquivalenceReport rep;
    for (int i = 0; i < grid.n_k; ++i) {
        for (int j = 0; j < grid.n_t; ++j) {
            double k = grid.k(i), t = grid.t(j);
            Eigen::Vector2d a =
                Eigen::SelfAdjointEigenSolver<CMat>(bloch_hamiltonian_single(k, t, clean, stagger), Eigen::EigenvaluesOnly)
                    .eigenvalues();
            Eigen::Vector2d b = Eigen::SelfAdjointEigenSolver<CMat>(
                                    kxky_bloch_hamiltonian(0.5 * k, clean.omega() * t, clean), Eigen::EigenvaluesOnly)
                                    .eigenvalues();
            rep.max_deviation = std::max(rep.max_deviation, (a - b).cwiseAbs().maxCoeff());
            ++rep.n_points;
        }
    }
    return rep;
}

}  // namespace tp
