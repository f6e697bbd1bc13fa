#pragma once

namespace jjmeta {

/// Bessel function of the first kind J_n(x) by its power series.
/// Relative error below 1e-12 for |x| <= 5; throws PreconditionError beyond.
double bessel_j(int n, double x);

} // namespace jjmeta
