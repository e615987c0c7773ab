#pragma once

#include <stdexcept>
#include <string>

namespace fdabs {

/// Thrown when exponents or dimension fall outside the admissible region
/// m_c < m < 1, q > 1, integer N >= 1.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Problem exponents for  u_t = Laplace(u^m) - u^q  on R^N.
///
/// Instances are always valid: the factories reject anything outside the
/// fast-diffusion supercritical range. `critical()` means q was fixed to
/// m + 2/N.
class Params {
public:
    /// q = m + 2/N.
    static Params critical_case(int N, double m);
    /// Explicit absorption exponent. `critical()` is true when q equals
    /// m + 2/N to rounding.
    static Params with_q(int N, double m, double q);

    int N() const noexcept { return N_; }
    double m() const noexcept { return m_; }
    double q() const noexcept { return q_; }
    bool critical() const noexcept { return critical_; }

    /// (N-2)_+/N.
    double m_c() const noexcept;
    /// Branch split: true when m < (N-1)/N, where the subsolution
    /// carries the (1 - gamma/s) factor.
    bool sub_branch_two() const noexcept;

    std::string describe() const;

private:
    Params(int N, double m, double q, bool critical) : N_(N), m_(m), q_(q), critical_(critical) {}

    int N_;
    double m_;
    double q_;
    bool critical_;
};

/// Closed-form constants attached to a parameter set.
struct Constants {
    double q_star;  ///< m + 2/N
    double B0;      ///< (1-m) / (2m(mN-N+2))
    double k;       ///< admissible initial tail exponent, N < k < 2/(1-m)
    double delta;   ///< 1/(1-m) - k/2, supersolution correction exponent
    double gamma;   ///< 1/(2(1-m))
    double s0;      ///< minimal rescaled time for the subsolution (0 when m >= (N-1)/N)
    double alpha;   ///< N/(Nm-N+2), time exponent of the pure fast-diffusion Barenblatt
    double R1;      ///< 2m(mN+2-N)/(1-m), quadratic coefficient of the Bernstein operator
};

Constants derive_constants(const Params& params);

/// x_+ = max(x, 0).
inline double positive_part(double x) noexcept { return x > 0.0 ? x : 0.0; }

}  // namespace fdabs
