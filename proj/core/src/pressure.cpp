#include "nvdac/pressure.hpp"

#include "nvdac/errors.hpp"

#include <cmath>
#include <sstream>

namespace nvdac {

void PressureModel::validate() const {
    const double values[] = {d_gs0, d_slope, q0, q_slope, a_par0, a_slope, width0, width_slope, p_min, p_max};
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("PressureModel: coefficients must be finite");
    if (!(p_max > p_min)) throw ValidationError("PressureModel: p_max must exceed p_min");
    // Linear coefficients stay positive over the whole range if they do at both ends.
    for (double p : {p_min, p_max}) {
        if (!(d_gs0 + d_slope * p > 0.0)) throw ValidationError("PressureModel: d_gs must stay positive over the range");
        if (!(q0 + q_slope * p > 0.0)) throw ValidationError("PressureModel: |q| must stay positive over the range");
        if (!(a_par0 + a_slope * p > 0.0))
            throw ValidationError("PressureModel: |a_par| must stay positive over the range");
        if (!(width0 + width_slope * p > 0.0))
            throw ValidationError("PressureModel: width must stay positive over the range");
    }
    template_params.validate(false);
}

PressureModel default_paper_model() { return PressureModel{}; }

NVParams params_at(const PressureModel& m, double pressure_gpa) {
    if (!(pressure_gpa >= m.p_min && pressure_gpa <= m.p_max)) {
        std::ostringstream os;
        os << "pressure " << pressure_gpa << " GPa outside model range [" << m.p_min << ", "
           << m.p_max << "]";
        throw RangeError(os.str());
    }
    NVParams p = m.template_params;
    const double sq = p.q < 0.0 ? -1.0 : 1.0;
    const double sa = p.a_par < 0.0 ? -1.0 : 1.0;
    p.d_gs = m.d_gs0 + m.d_slope * pressure_gpa;
    p.q = sq * (m.q0 + m.q_slope * pressure_gpa);
    p.a_par = sa * (m.a_par0 + m.a_slope * pressure_gpa);
    return p;
}

double width_at(const PressureModel& m, double pressure_gpa) {
    if (!(pressure_gpa >= m.p_min && pressure_gpa <= m.p_max))
        throw RangeError("pressure outside model range");
    return m.width0 + m.width_slope * pressure_gpa;
}

void RubyGauge::validate() const {
    if (!(lambda0 >= 694.0 && lambda0 <= 694.5))
        throw ValidationError("RubyGauge: lambda0 must lie in [694.0, 694.5] nm");
    if (!(a_coeff > 0.0)) throw ValidationError("RubyGauge: a_coeff must be > 0");
    if (!(b_coeff > 0.0)) throw ValidationError("RubyGauge: b_coeff must be > 0");
}

double ruby_pressure(const RubyGauge& g, double lambda_nm) {
    g.validate();
    if (!std::isfinite(lambda_nm) || lambda_nm < g.lambda0 - 0.05)
        throw RangeError("ruby wavelength below ambient R1 line: negative pressure");
    return (g.a_coeff / g.b_coeff) * (std::pow(lambda_nm / g.lambda0, g.b_coeff) - 1.0);
}

} // namespace nvdac
