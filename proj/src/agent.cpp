#include "aqia/agent.hpp"

#include <array>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include <lapacke.h>

namespace aqia {

namespace {

inline double z_of(std::size_t state, int k) { return ((state >> k) & 1U) ? -1.0 : 1.0; }

// Diagonal pieces of the Z-basis operators: sum_k Z_k, sum_bonds Z_k Z_l,
// and the bare diagonal -sum h Z - sum J ZZ.
struct DiagonalTerms {
    Eigen::VectorXd z_sum;
    Eigen::VectorXd zz_sum;
    Eigen::VectorXd bare;
};

DiagonalTerms diagonal_terms(const AgentParams& p) {
    const std::size_t dim = p.dim();
    DiagonalTerms t{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim),
                    Eigen::VectorXd::Zero(dim)};
    for (std::size_t a = 0; a < dim; ++a) {
        double zs = 0.0, field = 0.0;
        for (int k = 0; k < p.n; ++k) {
            const double z = z_of(a, k);
            zs += z;
            field += p.h[k] * z;
        }
        double zz = 0.0, bond = 0.0;
        for (std::size_t b = 0; b < p.bonds.size(); ++b) {
            const double v = z_of(a, p.bonds[b].first) * z_of(a, p.bonds[b].second);
            zz += v;
            bond += p.J[b] * v;
        }
        t.z_sum[a] = zs;
        t.zz_sum[a] = zz;
        t.bare[a] = -field - bond;
    }
    return t;
}

DenseHamiltonian assemble(const AgentParams& p, const Eigen::VectorXd& diag, double flip) {
    const std::size_t dim = p.dim();
    DenseHamiltonian H{Eigen::MatrixXd::Zero(dim, dim)};
    for (std::size_t a = 0; a < dim; ++a) {
        H.entries(a, a) = diag[a];
        for (int k = 0; k < p.n; ++k) {
            const std::size_t b = a ^ (std::size_t{1} << k);
            H.entries(a, b) = flip;
        }
    }
    return H;
}

}  // namespace

void AgentParams::validate() const {
    if (n < 1 || n > kMaxQubits)
        throw std::invalid_argument("agent qubit count " + std::to_string(n) +
                                    " outside [1, " + std::to_string(kMaxQubits) + "]");
    if (h.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("agent needs one longitudinal field per qubit");
    if (J.size() != bonds.size())
        throw std::invalid_argument("agent needs one coupling per bond");
    std::set<Bond> seen;
    for (const auto& [k, l] : bonds) {
        if (k < 0 || l >= n || k >= l)
            throw std::invalid_argument("bond (" + std::to_string(k) + "," + std::to_string(l) +
                                        ") must satisfy 0 <= k < l < n");
        if (!seen.insert({k, l}).second)
            throw std::invalid_argument("duplicate bond (" + std::to_string(k) + "," +
                                        std::to_string(l) + ")");
    }
    for (double v : h)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite longitudinal field");
    for (double v : J)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite coupling");
    if (!std::isfinite(gamma) || gamma < 0.0)
        throw std::invalid_argument("transverse field must be finite and non-negative");
}

std::vector<Bond> chain_bonds(int n) {
    std::vector<Bond> bonds;
    for (int k = 0; k + 1 < n; ++k) bonds.emplace_back(k, k + 1);
    return bonds;
}

std::vector<Bond> ring_bonds(int n) {
    auto bonds = chain_bonds(n);
    if (n > 2) bonds.emplace_back(0, n - 1);
    return bonds;
}

DenseHamiltonian build_hamiltonian(const AgentParams& params) {
    params.validate();
    const auto terms = diagonal_terms(params);
    return assemble(params, terms.bare, -params.gamma);
}

DenseHamiltonian build_mf_hamiltonian(const AgentParams& params, const FeedbackFields& fields) {
    params.validate();
    if (!std::isfinite(fields.phiS) || !std::isfinite(fields.phiB) || !std::isfinite(fields.phiU))
        throw std::invalid_argument("non-finite feedback field");
    const auto terms = diagonal_terms(params);
    const double n = params.n;
    // U-hat = H0 / n, so the U channel rescales the bare Hamiltonian.
    const double scale = 1.0 - fields.phiU / n;
    Eigen::VectorXd diag = scale * terms.bare - (fields.phiS / n) * terms.z_sum;
    if (!params.bonds.empty())
        diag -= (fields.phiB / static_cast<double>(params.bonds.size())) * terms.zz_sum;
    return assemble(params, diag, -params.gamma * scale);
}

GroundState ground_state(const DenseHamiltonian& H) {
    const auto dim = H.entries.rows();
    if (dim != H.entries.cols() || dim == 0)
        throw std::invalid_argument("Hamiltonian must be a non-empty square matrix");
    // Lowest eigenpair only (LAPACK dsyevr, index range [1, 1]); the input is
    // overwritten, so work on a copy.
    Eigen::MatrixXd work = H.entries;
    const auto n = static_cast<lapack_int>(dim);
    lapack_int found = 0;
    double eigenvalue = 0.0;
    GroundState gs;
    gs.amplitudes.resize(dim);
    std::array<lapack_int, 2> support{};
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0,
                                           0.0, 1, 1, 0.0, &found, &eigenvalue,
                                           gs.amplitudes.data(), n, support.data());
    if (info != 0 || found != 1)
        throw std::runtime_error("symmetric eigensolver failed (info = " + std::to_string(info) + ")");
    gs.energy = eigenvalue;
    gs.amplitudes.normalize();
    return gs;
}

Summary measure_summaries(const AgentParams& params, const GroundState& gs) {
    params.validate();
    const std::size_t dim = params.dim();
    if (static_cast<std::size_t>(gs.amplitudes.size()) != dim)
        throw std::invalid_argument("ground state dimension " +
                                    std::to_string(gs.amplitudes.size()) +
                                    " does not match 2^n = " + std::to_string(dim));
    const auto terms = diagonal_terms(params);
    const Eigen::VectorXd& psi = gs.amplitudes;
    double s = 0.0, b = 0.0, diag_energy = 0.0, hopping = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        const double p = psi[a] * psi[a];
        s += p * terms.z_sum[a];
        b += p * terms.zz_sum[a];
        diag_energy += p * terms.bare[a];
        for (int k = 0; k < params.n; ++k) hopping += psi[a] * psi[a ^ (std::size_t{1} << k)];
    }
    const double n = params.n;
    Summary m;
    m.S = s / n;
    m.B = params.bonds.empty() ? 0.0 : b / static_cast<double>(params.bonds.size());
    m.U = (diag_energy - params.gamma * hopping) / n;
    return m;
}

Summary solve_agent(const AgentParams& params, const FeedbackFields& fields) {
    return measure_summaries(params, ground_state(build_mf_hamiltonian(params, fields)));
}

}  // namespace aqia
