#include "jjmeta/bessel.hpp"

#include <cmath>
#include <cstdlib>

#include "jjmeta/errors.hpp"

namespace jjmeta {

double bessel_j(int n, double x) {
    if (!(std::abs(x) <= 5.0)) throw PreconditionError("bessel_j: series evaluator limited to |x| <= 5");
    const int order = std::abs(n);
    // J_{-n} = (-1)^n J_n
    const double sign = (n < 0 && order % 2 == 1) ? -1.0 : 1.0;

    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= order; ++k) term *= half / k;  // (x/2)^n / n!
    if (term == 0.0) return 0.0;

    const double q = -half * half;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + order));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sign * sum;
}

} // namespace jjmeta
