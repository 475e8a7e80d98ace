#pragma once

#include <stdexcept>
#include <string>

namespace pds {

/// Base class for all numerical / modelling failures raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative scheme (quadrature refinement, fixed point) exhausted its budget.
struct NonConverged : Error {
    using Error::Error;
};

/// Quadrature window does not bracket the effective support of the integrand.
struct SupportNotBracketed : Error {
    using Error::Error;
};

/// A transfer-function denominator vanished at an evaluation frequency.
struct SingularTransfer : Error {
    using Error::Error;
};

/// A variance iterate or combination left the feasible cone.
struct NegativeVariance : Error {
    using Error::Error;
};

/// Impulse response failed to decay below the threshold within the time cap.
struct NoDecay : Error {
    using Error::Error;
};

/// Too few response peaks for envelope-based effective measures.
struct NotOscillatory : Error {
    using Error::Error;
};

/// Rare-event probability reached or exceeded 1; forcing model rejected.
struct PrOutOfRange : Error {
    using Error::Error;
};

/// A rare-component support could not be embedded into the synthesis grid.
struct GridMismatch : Error {
    using Error::Error;
};

/// Adaptive step size underflowed during time integration.
struct IntegratorFailure : Error {
    using Error::Error;
};

/// Every cell of a design grid failed to evaluate.
struct AllCellsFailed : Error {
    using Error::Error;
};

/// Run-configuration file is malformed or violates model invariants.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace pds
