#pragma once

#include <stdexcept>
#include <string>

namespace epsense {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numerics
struct SingularMatrix : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// spectral
struct AtPole : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };
struct NearDefective : Error { using Error::Error; };

// qfi
struct NotLocalized : Error { using Error::Error; };
struct MultiChannel : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };

// model / cli
struct InvalidModel : Error { using Error::Error; };

} // namespace epsense
