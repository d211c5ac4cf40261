#include "nvdac/spectrum.hpp"

#include "nvdac/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nvdac {

void Spectrum::validate() const {
    if (y.size() != x.size() || sigma.size() != x.size())
        throw ValidationError("spectrum: x, y and sigma must have equal length");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(sigma[i]))
            throw ValidationError("spectrum: non-finite value at row " + std::to_string(i));
        if (sigma[i] < 0.0) throw ValidationError("spectrum: negative sigma at row " + std::to_string(i));
        if (i > 0 && !(x[i] > x[i - 1])) throw ValidationError("spectrum: x must be strictly increasing");
    }
}

Spectrum difference(const Spectrum& a, const Spectrum& b) {
    a.validate();
    b.validate();
    if (a.x != b.x) throw ValidationError("difference: spectra are on different grids");
    Spectrum d = a;
    for (std::size_t i = 0; i < d.size(); ++i) {
        d.y[i] = a.y[i] - b.y[i];
        d.sigma[i] = std::hypot(a.sigma[i], b.sigma[i]);
    }
    return d;
}

namespace {

std::string num(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_num(std::string_view s, std::size_t line, std::size_t col) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1), ++col;
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("expected a number, got '" + std::string(s) + "'", line, col);
    return v;
}

} // namespace

void write_csv(std::ostream& os, const Spectrum& s) {
    s.validate();
    os << "# mode=" << (s.mode.empty() ? "unknown" : s.mode) << " pressure_gpa=" << num(s.pressure_gpa)
       << " field_gauss=" << num(s.field_gauss) << "\n";
    os << "x,y,sigma\n";
    for (std::size_t i = 0; i < s.size(); ++i) os << num(s.x[i]) << ',' << num(s.y[i]) << ',' << num(s.sigma[i]) << '\n';
}

void write_csv(const std::string& path, const Spectrum& s) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open '" + path + "' for writing");
    write_csv(f, s);
}

Spectrum read_csv(std::istream& is) {
    Spectrum s;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line.front() == '#') {
            std::istringstream meta(line.substr(1));
            std::string kv;
            while (meta >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq);
                const std::string val = kv.substr(eq + 1);
                const std::size_t col = line.find(kv) + eq + 2;
                if (key == "mode") s.mode = val;
                else if (key == "pressure_gpa") s.pressure_gpa = val == "nan" ? NAN : parse_num(val, lineno, col);
                else if (key == "field_gauss") s.field_gauss = val == "nan" ? NAN : parse_num(val, lineno, col);
            }
            continue;
        }
        if (!header_seen && !line.empty() && (std::isalpha(static_cast<unsigned char>(line.front())))) {
            header_seen = true;
            continue;
        }
        header_seen = true;
        std::size_t start = 0;
        std::vector<double> fields;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            const std::string_view cell = std::string_view(line).substr(start, comma - start);
            fields.push_back(parse_num(cell, lineno, start + 1));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 2 || fields.size() > 3)
            throw ParseError("expected 2 or 3 columns, got " + std::to_string(fields.size()), lineno, 1);
        s.x.push_back(fields[0]);
        s.y.push_back(fields[1]);
        s.sigma.push_back(fields.size() == 3 ? fields[2] : 0.0);
    }
    if (s.x.empty()) throw ParseError("no data rows", std::max<std::size_t>(lineno, 1), 1);
    s.validate();
    return s;
}

Spectrum read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open '" + path + "'");
    return read_csv(f);
}

} // namespace nvdac
