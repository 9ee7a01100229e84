#include "ptrap/multipole_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "ptrap/error.hpp"

namespace ptrap {

MultipoleCoefficients MultipoleCoefficients::from_values(const std::array<double, 6>& v,
                                                         const std::array<double, 6>& s) {
    MultipoleCoefficients c{v[0], v[1], v[2], v[3], v[4], v[5], s};
    return c;
}

double MultipoleCoefficients::quadratic(Axis a) const noexcept {
    switch (a) {
    case Axis::x: return alpha2;
    case Axis::y: return beta2;
    case Axis::z: return gamma2;
    }
    return 0.0;
}

bool MultipoleCoefficients::is_finite() const noexcept {
    const auto v = values();
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

MultipoleCoefficients ideal_coefficients() noexcept { return {0.5, 0.0, 0.0, 0.5, 0.5, -1.0, {}}; }

MultipoleCoefficients paper_table_coefficients() noexcept {
    return {-0.1037, -0.0823, 0.2047, 0.6902, 0.5500, -1.2405, {0.0008, 0.0012, 0.0014, 0.0041, 0.0041, 0.0064}};
}

double evaluate_expansion(const MultipoleCoefficients& c, double r0, double x, double y, double z) noexcept {
    const double u = x / r0, v = y / r0, w = z / r0;
    return c.alpha0 + c.alpha1 * u + c.gamma1 * w + c.alpha2 * u * u + c.beta2 * v * v + c.gamma2 * w * w;
}

std::string Monomial::name() const {
    if (order() == 0) return "1";
    std::string s;
    const auto add = [&](char v, int p) {
        if (p == 0) return;
        s += v;
        if (p > 1) s += "^" + std::to_string(p);
    };
    add('x', px);
    add('y', py);
    add('z', pz);
    return s;
}

std::vector<Monomial> quadrupole_basis() { return {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}}; }

PolynomialFit fit_polynomial(const PotentialGrid& grid, double region_radius, double r0,
                             const std::vector<Monomial>& terms) {
    if (!(region_radius > 0.0) || !(r0 > 0.0)) throw PreconditionError("fit radius and r0 must be positive");
    if (terms.empty()) throw PreconditionError("empty fit basis");
    const GridSpec& s = grid.spec();

    struct Sample {
        double u, v, w, phi;
    };
    std::vector<Sample> samples;
    const double r2 = region_radius * region_radius;
    for (std::size_t k = 0; k < s.nz; ++k) {
        const double z = s.coordinate(Axis::z, k);
        for (std::size_t j = 0; j < s.ny; ++j) {
            const double y = s.coordinate(Axis::y, j);
            for (std::size_t i = 0; i < s.nx; ++i) {
                const double x = s.coordinate(Axis::x, i);
                if (x * x + y * y + z * z > r2) continue;
                const std::size_t n = s.index(i, j, k);
                if (grid.mask.classes[n] != NodeClass::free) continue;
                samples.push_back({x / r0, y / r0, z / r0, grid.values[n]});
            }
        }
    }
    if (samples.size() < 60)
        throw PreconditionError("only " + std::to_string(samples.size())
                                + " free nodes inside the fit region (need >= 60)");
    const auto rows = static_cast<Eigen::Index>(samples.size());
    const auto cols = static_cast<Eigen::Index>(terms.size());
    if (rows <= cols) throw PreconditionError("fewer samples than basis terms");

    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Sample& sm = samples[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Monomial& m = terms[static_cast<std::size_t>(c)];
            A(r, c) = std::pow(sm.u, m.px) * std::pow(sm.v, m.py) * std::pow(sm.w, m.pz);
        }
        b(r) = sm.phi;
    }

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    const double rmax = R.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index c = 0; c < cols; ++c)
        if (!(std::abs(R(c, c)) > 1e-10 * rmax))
            throw PreconditionError("rank-deficient fit basis (term " + terms[static_cast<std::size_t>(c)].name()
                                    + " is not resolved by the samples)");

    const Eigen::VectorXd coef = qr.solve(b);
    const Eigen::VectorXd resid = b - A * coef;

    PolynomialFit fit;
    fit.terms = terms;
    fit.sample_count = samples.size();
    fit.coefficients.assign(coef.data(), coef.data() + cols);
    fit.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(rows));
    fit.max_residual = resid.cwiseAbs().maxCoeff();

    // cov = s^2 (A^T A)^-1 = s^2 R^-1 R^-T
    const double variance = resid.squaredNorm() / static_cast<double>(rows - cols);
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
    fit.sigma.resize(static_cast<std::size_t>(cols));
    for (Eigen::Index c = 0; c < cols; ++c)
        fit.sigma[static_cast<std::size_t>(c)] = std::sqrt(variance * Rinv.row(c).squaredNorm());
    return fit;
}

FitReport fit_multipoles(const PotentialGrid& grid, double region_radius, double r0) {
    const PolynomialFit fit = fit_polynomial(grid, region_radius, r0, quadrupole_basis());
    FitReport report;
    std::array<double, 6> v{}, s{};
    std::copy_n(fit.coefficients.begin(), 6, v.begin());
    std::copy_n(fit.sigma.begin(), 6, s.begin());
    report.coefficients = MultipoleCoefficients::from_values(v, s);
    report.rms_residual = fit.rms_residual;
    report.max_residual = fit.max_residual;
    report.sample_count = fit.sample_count;
    report.fit_region_radius = region_radius;
    return report;
}

double max_fit_region_radius(const TrapGeometry& geom, const GridSpec& spec) noexcept {
    return 0.5 * std::min(geom.r0 - geom.filament_intrusion(), spec.extent);
}

std::vector<OrderResidual> residual_by_order(const PotentialGrid& grid, const FitReport& report) {
    const double r0 = grid.mask.r0;
    std::vector<OrderResidual> out;
    out.push_back({2, 6, report.rms_residual, 0.0});

    std::vector<Monomial> terms = quadrupole_basis();
    for (int order = 3; order <= 4; ++order) {
        for (int px = order; px >= 0; --px)
            for (int py = order - px; py >= 0; --py) {
                if (py % 2 != 0) continue;
                terms.push_back({px, py, order - px - py});
            }
        const PolynomialFit fit = fit_polynomial(grid, report.fit_region_radius, r0, terms);
        const double reduction =
            report.rms_residual > 0.0 ? (report.rms_residual - fit.rms_residual) / report.rms_residual : 0.0;
        out.push_back({order, terms.size(), fit.rms_residual, reduction});
    }
    return out;
}

std::string fit_report_json(const FitReport& report, int indent) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json coeffs;
    const auto v = report.coefficients.values();
    for (std::size_t i = 0; i < 6; ++i) {
        const std::string name(MultipoleCoefficients::names[i]);
        coeffs[name] = {{"value", v[i]}, {"sigma", report.coefficients.sigma[i]}};
    }
    j["coefficients"] = coeffs;
    j["rms_residual"] = report.rms_residual;
    j["max_residual"] = report.max_residual;
    j["sample_count"] = report.sample_count;
    j["fit_region_radius"] = report.fit_region_radius;
    return j.dump(indent);
}

FitReport fit_report_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("fit_report", std::string("invalid JSON: ") + e.what());
    }
    FitReport r;
    std::array<double, 6> v{}, s{};
    if (!j.contains("coefficients") || !j["coefficients"].is_object())
        throw ConfigError("fit_report.coefficients", "missing");
    for (std::size_t i = 0; i < 6; ++i) {
        const std::string name(MultipoleCoefficients::names[i]);
        const auto& c = j["coefficients"];
        if (!c.contains(name)) throw ConfigError("fit_report.coefficients." + name, "missing");
        const auto& e = c[name];
        if (e.is_number()) {
            v[i] = e.get<double>();
        } else if (e.is_object() && e.contains("value") && e["value"].is_number()) {
            v[i] = e["value"].get<double>();
            s[i] = e.value("sigma", 0.0);
        } else {
            throw ConfigError("fit_report.coefficients." + name, "expected a number or {value, sigma}");
        }
    }
    r.coefficients = MultipoleCoefficients::from_values(v, s);
    r.rms_residual = j.value("rms_residual", 0.0);
    r.max_residual = j.value("max_residual", 0.0);
    r.sample_count = j.value("sample_count", std::size_t{0});
    r.fit_region_radius = j.value("fit_region_radius", 0.0);
    return r;
}

std::string coefficients_csv_header() {
    return "alpha0,sigma_alpha0,alpha1,sigma_alpha1,gamma1,sigma_gamma1,alpha2,sigma_alpha2,beta2,sigma_beta2,gamma2,"
           "sigma_gamma2";
}

std::string coefficients_csv_row(const MultipoleCoefficients& c) {
    std::ostringstream os;
    os.precision(10);
    const auto v = c.values();
    for (std::size_t i = 0; i < 6; ++i) {
        if (i) os << ',';
        os << v[i] << ',' << c.sigma[i];
    }
    return os.str();
}

}  // namespace ptrap
