/// @file problems.hpp
/// @brief Deterministic desk-scale problem generators with element PSD splits.

#ifndef SDD_PROBLEMS_HPP
#define SDD_PROBLEMS_HPP

#include "sdd/system.hpp"

#include <cstdint>
#include <string>

namespace sdd {

enum class ProblemKind { poisson2d_constrained, mixed_darcy_mac, random_spd_constrained };
enum class CMode { zero, diag_eps };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::mixed_darcy_mac;
    int gx = 16, gy = 16;       // grid dims (grid kinds)
    int n = 200, m = 60;        // explicit sizes (random kind)
    std::uint64_t seed = 1;
    CMode c_mode = CMode::zero;
    double c_eps = 1e-3;
    double kappa_sigma = 1.5;   // log-normal heterogeneity strength
    double mass_coeff = 0.5;    // MAC velocity mass weight
    double constraint_frac = 0.25;  // poisson: m ≈ frac·n (forest-edge constraints)
    bool mac_y_periodic = false;    // wrap the MAC grid in y (one constraint row dropped)

    static ProblemKind kind_from_string(const std::string& s);
    static std::string kind_to_string(ProblemKind k);
};

/// Deterministic in all fields: identical spec gives bit-identical matrices.
SaddleSystem generate(const ProblemSpec& spec);

/// Splitmix/mt-based generator with portable uniform and normal draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next_u64();
    double uniform();                    // [0, 1)
    double normal();                     // Box–Muller
    int uniform_int(int lo, int hi);     // inclusive bounds
private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sdd

#endif
