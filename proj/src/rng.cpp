#include "gpvol/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace gpvol {

double Rng::normal() {
    const double u = uniform_open();
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace gpvol
