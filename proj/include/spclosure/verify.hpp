#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spclosure {

struct VerifyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Filter algebra over random (I, J, u): W R = I, inner-product conservation,
/// reconstruction/SGS orthogonality, momentum invariance, energy
/// decomposition.
std::vector<VerifyResult> filter_identity_suite(uint64_t seed, int n_cases);

/// SP structure over random parameters and states (periodic): skew term adds
/// zero energy, dissipative term removes energy, closure momentum is zero,
/// and the semi-discrete energy law balances.
std::vector<VerifyResult> sp_conservation_suite(uint64_t seed, int n_cases);

/// lambda1 = 0 and lambda2 < 0 over the (I, J) grid of the dissipation
/// comparison.
std::vector<VerifyResult> dissipation_grid_suite();

}  // namespace spclosure
