/// @file types.hpp
/// @brief Shared scalar/vector/matrix aliases, error types and tolerance knobs.

#ifndef SDD_TYPES_HPP
#define SDD_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sdd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cholesky hit a non-positive pivot; `pivot` is the offending index.
struct NotSpdError : std::runtime_error {
    int pivot;
    explicit NotSpdError(int piv, const std::string& what)
        : std::runtime_error(what), pivot(piv) {}
};

/// A stated hypothesis of the method does not hold for the given input.
struct AssumptionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-convergence / breakdown in an iterative or direct solve.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every tolerance and cutoff used by the library, with its default.
/// Kept in one place so nothing numeric is hard-coded at point of use.
struct Tolerances {
    double sym_check = 1e-12;       // ‖M − Mᵀ‖_max ≤ sym_check·‖M‖_max
    double psd_check = 1e-10;       // min eig ≥ −psd_check·λ_max
    double eig_drop = 1e-12;        // range/kernel split of a PSD matrix
    double pinv_drop = 1e-10;       // eigenvalue drop for pseudo-inverses
    double coarse_drop = 1e-10;       // Gram pivot drop for the dual coarse basis
    double coarse_drop_primal = 1e-6; // same for Z_A: keeps chol(ZᵀAZ) well conditioned
    double pou_check = 1e-15;       // partition-of-unity identities
    double reassembly_check = 1e-12; // split / C̃ᵢ reassembly
    double chol_probe = 1e-10;      // factor reconstruction probes
    int dense_cutoff = 2000;        // local matrices above this are sparse-factored
    int oracle_cap = 5000;          // hard cap on dense oracle dimensions
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

} // namespace sdd

#endif
