#include "opscale/capacity.hpp"
#include "opscale/moments.hpp"
#include "opscale/solvers.hpp"
#include "opscale/spectral.hpp"

#include <iostream>

int main()
{
    using namespace opscale;
    const Mat B = random_gaussian_squared_matrix(20, 7);
    const auto rep = certify_matrix(B);
    std::cout << "lambda " << rep.lambda << "  epsilon " << rep.epsilon
              << "  gap condition " << (rep.gap_condition_holds ? "yes" : "no") << '\n';

    SolverConfig cfg;
    cfg.eta = 1e-8;
    const auto res = run_matrix_fast_path(B, cfg);
    std::cout << to_string(res.status) << " after " << res.iterations << " iterations, kappa(L) "
              << res.kappa_L << ", kappa(R) " << res.kappa_R << '\n';

    const auto bounds = capacity_bounds(B, rep);
    if (auto cap = matrix_capacity_exact(B))
        std::cout << "capacity " << *cap << " in [" << bounds.lower << ", " << bounds.upper << "]\n";

    Mat P = Mat::Ones(5, 5);
    std::cout << "per(J_5) = " << permanent_bruteforce(P) << '\n';
}
