#pragma once

#include "tpump/bands.hpp"

namespace tp {

struct FloquetSpec {
    int m_range = 4;  // indices -M..M
    DriveProtocol drive;
    LatticeSpec spec;

    void validate() const;
    int dim() const { return spec.n_sites * (2 * m_range + 1); }
};

struct FloquetSpectrum {
    double omega = 0.0;
    std::vector<double> quasienergies;  // folded to (-w/2, w/2], ascending
    Eigen::MatrixXd weights;            // (2M+1) x N per state, stacked: row block per state
    std::vector<double> mean_m;         // sum_m m * weight, per state
};

double fold_quasienergy(double e, double omega);

// Fourier components of the single-particle H(t) = H0 + Hp e^{iwt} + Hp^dag e^{-iwt}
struct FourierBlocks {
    CMat h0, hp;
};
FourierBlocks drive_fourier_blocks(const FloquetSpec& f);

HamiltonianMatrix build_floquet_hamiltonian(const FloquetSpec& f);
FloquetSpectrum floquet_spectrum(const FloquetSpec& f);

// the 2x2 form in (k_x, k_y) variables
CMat kxky_bloch_hamiltonian(double kx, double ky, const DriveProtocol& drive);

struct EquivalenceReport {
    double max_deviation = 0.0;
    int n_points = 0;
};
EquivalenceReport verify_bloch_equivalence(const DriveProtocol& drive, const BlochGrid& grid,
                                           Stagger stagger = Stagger::OddPositive);

}  // namespace tp
