#include "fdabs/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fdabs {

namespace {

void check_domain(int N, double m, double q) {
    if (N < 1) {
        throw ParameterError("dimension N must be an integer >= 1, got " + std::to_string(N));
    }
    const double mc = positive_part(N - 2.0) / N;
    if (!(std::isfinite(m) && m > mc && m < 1.0)) {
        std::ostringstream os;
        os << "diffusion exponent m=" << m << " outside (m_c, 1) = (" << mc << ", 1) for N=" << N;
        throw ParameterError(os.str());
    }
    if (!(std::isfinite(q) && q > 1.0)) {
        std::ostringstream os;
        os << "absorption exponent q=" << q << " must exceed 1";
        throw ParameterError(os.str());
    }
}

}  // namespace

Params Params::critical_case(int N, double m) {
    const double q = m + 2.0 / N;
    check_domain(N, m, q);
    return Params(N, m, q, true);
}

Params Params::with_q(int N, double m, double q) {
    check_domain(N, m, q);
    const double qs = m + 2.0 / N;
    const bool crit = std::abs(q - qs) <= 8.0 * std::numeric_limits<double>::epsilon() * qs;
    return Params(N, m, crit ? qs : q, crit);
}

double Params::m_c() const noexcept { return positive_part(N_ - 2.0) / N_; }

bool Params::sub_branch_two() const noexcept { return m_ < (N_ - 1.0) / N_; }

std::string Params::describe() const {
    std::ostringstream os;
    os << "N=" << N_ << " m=" << m_ << " q=" << q_ << (critical_ ? " (critical)" : "");
    return os.str();
}

Constants derive_constants(const Params& p) {
    const double N = p.N();
    const double m = p.m();
    const double q = p.q();
    const double nm = m * N - N + 2.0;  // > 0 for m > m_c

    Constants c{};
    c.q_star = m + 2.0 / N;
    c.B0 = (1.0 - m) / (2.0 * m * nm);
    c.k = N + m * N * nm / (2.0 * (2.0 - m + m * N * (1.0 - m)));
    c.delta = 1.0 / (1.0 - m) - c.k / 2.0;
    c.gamma = 1.0 / (2.0 * (1.0 - m));
    c.alpha = N / nm;
    c.R1 = 2.0 * m * nm / (1.0 - m);
    // For m >= (N-1)/N the subsolution is sigma_A itself, valid for every s > 0.
    c.s0 = p.sub_branch_two() ? std::max(4.0 * q / (1.0 - m), std::pow(2.0, m + 2.0) * q / (q - 1.0)) : 0.0;
    return c;
}

}  // namespace fdabs
