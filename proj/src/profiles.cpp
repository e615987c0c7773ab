#include "fdabs/profiles.hpp"

#include "fdabs/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fdabs {

namespace {

void require_critical(const Params& p, const char* what) {
    if (!p.critical()) {
        throw ParameterError(std::string(what) + " is only defined for q = m + 2/N (got " + p.describe() + ")");
    }
}

void require_positive(double value, const char* name) {
    if (!(value > 0.0)) {
        std::ostringstream os;
        os << name << " must be positive, got " << value;
        throw ParameterError(os.str());
    }
}

}  // namespace

double sigma(double A, double r, const Params& params) {
    require_positive(A, "A");
    const double B0 = derive_constants(params).B0;
    return std::pow(A + B0 * r * r, 1.0 / (params.m() - 1.0));
}

double subsolution_w(double A, double s, double r, const Params& params) {
    require_critical(params, "subsolution_w");
    const double base = sigma(A, r, params);
    if (!params.sub_branch_two()) return base;
    const double gamma = derive_constants(params).gamma;
    if (!(s > gamma)) {
        std::ostringstream os;
        os << "subsolution with m < (N-1)/N needs s > gamma = " << gamma << ", got s = " << s;
        throw ParameterError(os.str());
    }
    return base * (1.0 - gamma / s);
}

double subsolution_w_ds(double A, double s, double r, const Params& params) {
    require_critical(params, "subsolution_w_ds");
    if (!params.sub_branch_two()) return 0.0;
    const double gamma = derive_constants(params).gamma;
    return sigma(A, r, params) * gamma / (s * s);
}

double supersolution_z(double A, double s, double r, const Params& params) {
    require_critical(params, "supersolution_z");
    require_positive(s, "s");
    const Constants c = derive_constants(params);
    const double P = A + c.B0 * r * r;
    return sigma(A, r, params) * (1.0 + std::pow(P, c.delta) / s);
}

double supersolution_z_ds(double A, double s, double r, const Params& params) {
    require_critical(params, "supersolution_z_ds");
    require_positive(s, "s");
    const Constants c = derive_constants(params);
    const double P = A + c.B0 * r * r;
    return -sigma(A, r, params) * std::pow(P, c.delta) / (s * s);
}

double evaluate(const ProfileSpec& spec, double r, const Params& params) {
    switch (spec.kind) {
        case ProfileKind::barenblatt: return sigma(spec.A, r, params);
        case ProfileKind::subsolution: return subsolution_w(spec.A, spec.s, r, params);
        case ProfileKind::supersolution: return supersolution_z(spec.A, spec.s, r, params);
    }
    throw std::logic_error("unknown profile kind");
}

double ell_u(double t, double u_center, double sup_u0, const Params& params) {
    require_positive(t, "t");
    require_positive(u_center, "u(t,0)");
    require_positive(sup_u0, "sup u0");
    const double m = params.m();
    const double q = params.q();
    const double B0 = derive_constants(params).B0;
    const double extra = std::sqrt(positive_part(3.0 - m - 2.0 * q)) * std::pow(sup_u0, 0.5 * (q - 1.0));
    const double bracket = std::pow(u_center, 0.5 * (m - 1.0)) + std::sqrt(B0) * (1.0 + extra * std::sqrt(t)) / std::sqrt(t);
    return std::pow(bracket, 2.0 / (m - 1.0));
}

double flat_decay_bound(double t, double sup_u0, const Params& params) {
    require_positive(sup_u0, "sup u0");
    if (t < 0.0) throw ParameterError("flat_decay_bound needs t >= 0");
    return oracle::flat_ode_exact(t, sup_u0, params);
}

double compute_A_star(const Params& params, double quad_tol) {
    require_critical(params, "A*");
    require_positive(quad_tol, "quad_tol");
    const double N = params.N();
    const double m = params.m();
    const double q = params.q();
    const double weight = 0.5 * (N - 2.0);
    const oracle::PowerIntegrand absorbed{q / (m - 1.0), weight};
    const oracle::PowerIntegrand mass{1.0 / (m - 1.0), weight};
    if (!(absorbed.power + weight < -1.0) || !(mass.power + weight < -1.0)) {
        throw std::logic_error("A* integrands not integrable; parameter validation let through " + params.describe());
    }
    const double num = oracle::quadrature(oracle::MapKind::rational, absorbed, quad_tol);
    const double den = oracle::quadrature(oracle::MapKind::rational, mass, quad_tol);
    const double exponent = N * (1.0 - m) / (2.0 * (N * m + 2.0 - N));
    return std::pow(2.0 * num / (N * den), exponent);
}

PositivityTransform positivity_transform(double t, double sup_u0, const Params& params) {
    require_positive(sup_u0, "sup u0");
    if (t < 0.0) throw ParameterError("positivity_transform needs t >= 0");
    const double a = std::pow(sup_u0, params.q() - 1.0);
    const double b = (1.0 - params.m()) * a;
    return {std::exp(-a * t), std::expm1(b * t) / b};
}

}  // namespace fdabs
