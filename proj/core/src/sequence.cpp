#include "nvdac/sequence.hpp"

#include "nvdac/errors.hpp"
#include "nvdac/linalg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace nvdac {

std::string_view to_string(PulseKind kind) {
    switch (kind) {
    case PulseKind::laser: return "laser";
    case PulseKind::read: return "laser_read";
    case PulseKind::wait: return "wait";
    case PulseKind::mw: return "mw";
    case PulseKind::rf: return "rf";
    }
    return "?";
}

double Value::resolve(const std::map<std::string, double>& bindings) const {
    if (!is_symbol()) return number;
    const auto it = bindings.find(symbol);
    if (it == bindings.end()) throw ValidationError("unbound sequence variable $" + symbol);
    return it->second;
}

double Pulse::resolved_duration(const std::map<std::string, double>& bindings) const {
    switch (area) {
    case AreaSymbol::pi: return 1.0 / (2.0 * rabi);
    case AreaSymbol::half_pi: return 1.0 / (4.0 * rabi);
    case AreaSymbol::none: break;
    }
    const double d = duration.resolve(bindings);
    if (!(d > 0.0) || !std::isfinite(d))
        throw ValidationError("pulse duration must be positive, got " + std::to_string(d));
    return d;
}

std::vector<double> Sweep::grid() const {
    std::vector<double> x(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        x[static_cast<std::size_t>(i)] =
            points == 1 ? start : start + (stop - start) * static_cast<double>(i) / (points - 1);
    return x;
}

void PulseSequence::validate() const {
    if (pulses.empty()) throw ValidationError("sequence has no pulses");
    bool has_read = false;
    int drives = 0;
    for (const auto& p : pulses) {
        has_read |= p.kind == PulseKind::read;
        drives += p.is_drive() ? 1 : 0;
        if (!cw && !p.has_duration) throw ValidationError("pulse '" + std::string(to_string(p.kind)) + "' needs a duration");
        if (p.has_duration && p.area == AreaSymbol::none) {
            if (p.duration.is_symbol()) {
                if (!sweep || sweep->variable != p.duration.symbol)
                    throw ValidationError("unresolved sweep variable $" + p.duration.symbol);
            } else if (!(p.duration.number > 0.0)) {
                throw ValidationError("pulse duration must be positive");
            }
        }
        if (p.is_drive()) {
            if (!(p.rabi > 0.0)) throw ValidationError("drive rabi frequency must be positive");
            if (p.frequency.is_symbol()) {
                if (!sweep || sweep->variable != p.frequency.symbol)
                    throw ValidationError("unresolved sweep variable $" + p.frequency.symbol);
            } else if (!(p.frequency.number > 0.0)) {
                throw ValidationError("drive frequency must be positive");
            }
        } else if (p.area != AreaSymbol::none) {
            throw ValidationError("pi areas apply to mw/rf drives only");
        }
    }
    if (!has_read) throw ValidationError("sequence has no read pulse");
    if (cw) {
        if (drives > 1) throw ValidationError("cw block supports at most one mw/rf drive");
        bool laser = false;
        for (const auto& p : pulses) laser |= p.kind == PulseKind::laser || p.kind == PulseKind::read;
        if (!laser) throw ValidationError("cw block needs illumination");
    }
    if (sweep) {
        if (sweep->points < 1) throw ValidationError("sweep needs at least one point");
        if (sweep->points > 1 && !(sweep->stop > sweep->start))
            throw ValidationError("sweep stop must exceed start");
    }
    if (!(shots_per_point > 0.0)) throw ValidationError("shots_per_point must be positive");
}

namespace {

struct Token {
    std::string text;
    std::size_t line;
    std::size_t column;
    bool newline{false};
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto flush_newline = [&] { out.push_back({"", line, col, true}); };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            flush_newline();
            ++line;
            col = 1;
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
        } else if (c == '{' || c == '}' || c == ';') {
            out.push_back({std::string(1, c), line, col});
            ++i;
            ++col;
        } else {
            const std::size_t start = i;
            const std::size_t start_col = col;
            while (i < text.size() && std::string_view(" \t\r\n#{};").find(text[i]) == std::string_view::npos) {
                ++i;
                ++col;
            }
            out.push_back({std::string(text.substr(start, i - start)), line, start_col});
        }
    }
    flush_newline();
    return out;
}

std::optional<double> to_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool is_ident(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    PulseSequence run() {
        PulseSequence seq;
        bool seen_pulses = false;
        while (pos_ < toks_.size()) {
            const Token& t = toks_[pos_];
            if (t.newline) { ++pos_; continue; }
            if (t.text == "sweep") {
                if (seq.sweep) fail("duplicate sweep declaration", t);
                ++pos_;
                seq.sweep = parse_sweep(t);
            } else if (t.text == "shots") {
                ++pos_;
                const Token& n = expect_value("shot count");
                const auto v = to_number(n.text);
                if (!v || !(*v > 0.0)) fail("shot count must be a positive number", n);
                seq.shots_per_point = *v;
            } else if (t.text == "cw") {
                if (seq.cw) fail("only one cw block is allowed", t);
                if (seen_pulses) fail("cw block cannot be mixed with pulsed statements", t);
                ++pos_;
                seq.cw = true;
                parse_cw_block(seq);
                seen_pulses = true;
            } else {
                if (seq.cw) fail("pulsed statements cannot follow a cw block", t);
                seq.pulses.push_back(parse_pulse(false));
                seen_pulses = true;
            }
            end_statement();
        }
        resolve_symbols(seq);
        try {
            seq.validate();
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), toks_.front().line, toks_.front().column);
        }
        return seq;
    }

private:
    [[noreturn]] void fail(const std::string& what, const Token& t) const {
        throw ParseError(what, t.line, t.column);
    }

    const Token& peek() const { return toks_[pos_]; }

    bool at_value() const {
        const Token& t = peek();
        return !t.newline && (t.text.starts_with('$') || to_number(t.text).has_value());
    }

    const Token& expect_value(const char* what) {
        const Token& t = peek();
        if (t.newline || t.text == ";" || t.text == "}" || t.text == "{")
            fail(std::string("expected ") + what, t);
        ++pos_;
        return t;
    }

    Value value_of(const Token& t, const char* what) {
        if (t.text.starts_with('$')) {
            const std::string name = t.text.substr(1);
            if (!is_ident(name)) fail("invalid variable name '" + t.text + "'", t);
            symbols_.push_back(t);
            return Value::ref(name);
        }
        const auto v = to_number(t.text);
        if (!v) fail(std::string("expected ") + what + ", got '" + t.text + "'", t);
        return Value::literal(*v);
    }

    double number_of(const Token& t, const char* what) {
        const auto v = to_number(t.text);
        if (!v) fail(std::string("expected ") + what + ", got '" + t.text + "'", t);
        return *v;
    }

    void end_statement() {
        if (pos_ >= toks_.size()) return;
        const Token& t = peek();
        if (!t.newline) fail("unexpected token '" + t.text + "'", t);
        ++pos_;
    }

    Sweep parse_sweep(const Token& kw) {
        Sweep s;
        const Token& name = expect_value("sweep variable");
        if (!is_ident(name.text)) fail("invalid sweep variable '" + name.text + "'", name);
        s.variable = name.text;
        s.start = number_of(expect_value("sweep start"), "sweep start");
        s.stop = number_of(expect_value("sweep stop"), "sweep stop");
        const Token& n = expect_value("sweep point count");
        const double pts = number_of(n, "sweep point count");
        if (pts < 1 || pts != std::floor(pts) || pts > 1e7) fail("sweep point count must be a positive integer", n);
        s.points = static_cast<int>(pts);
        if (s.points > 1 && !(s.stop > s.start)) fail("sweep stop must exceed start", kw);
        return s;
    }

    Pulse parse_pulse(bool in_cw) {
        const Token& kw = peek();
        Pulse p;
        if (kw.text == "laser") p.kind = PulseKind::laser;
        else if (kw.text == "laser_read" || kw.text == "read") p.kind = PulseKind::read;
        else if (kw.text == "wait") p.kind = PulseKind::wait;
        else if (kw.text == "mw") p.kind = PulseKind::mw;
        else if (kw.text == "rf") p.kind = PulseKind::rf;
        else fail("unknown keyword '" + kw.text + "'", kw);
        ++pos_;

        if (p.is_drive()) {
            p.frequency = value_of(expect_value("drive frequency"), "drive frequency");
            const Token& r = expect_value("rabi frequency");
            p.rabi = number_of(r, "rabi frequency");
            if (!(p.rabi > 0.0)) fail("rabi frequency must be positive", r);
        }
        const Token& d = peek();
        if (p.is_drive() && (d.text == "pi" || d.text == "pi/2")) {
            p.area = d.text == "pi" ? AreaSymbol::pi : AreaSymbol::half_pi;
            ++pos_;
        } else if (at_value()) {
            p.duration = value_of(d, "duration");
            ++pos_;
            if (!p.duration.is_symbol() && !(p.duration.number > 0.0)) fail("duration must be positive", d);
        } else if (in_cw) {
            p.has_duration = false;
        } else {
            fail("expected duration after '" + kw.text + "'", d);
        }
        if (p.is_drive() && p.has_duration && at_value()) {
            const Token& ph = peek();
            p.phase = number_of(ph, "phase");
            ++pos_;
        }
        return p;
    }

    void parse_cw_block(PulseSequence& seq) {
        skip_newlines();
        if (peek().text != "{") fail("expected '{' after cw", peek());
        ++pos_;
        for (;;) {
            skip_newlines();
            if (pos_ >= toks_.size()) fail("unterminated cw block", toks_.back());
            if (peek().text == "}") { ++pos_; break; }
            if (peek().text == ";") { ++pos_; continue; }
            seq.pulses.push_back(parse_pulse(true));
            skip_newlines();
            const Token& sep = peek();
            if (sep.text == ";") ++pos_;
            else if (sep.text != "}") fail("expected ';' or '}' in cw block", sep);
        }
    }

    void skip_newlines() {
        while (pos_ + 1 < toks_.size() && toks_[pos_].newline) ++pos_;
    }

    void resolve_symbols(const PulseSequence& seq) const {
        for (const Token& t : symbols_) {
            const std::string name = t.text.substr(1);
            if (!seq.sweep || seq.sweep->variable != name) fail("unresolved sweep variable " + t.text, t);
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_{0};
    std::vector<Token> symbols_;
};

std::string fmt(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string fmt(const Value& v) { return v.is_symbol() ? "$" + v.symbol : fmt(v.number); }

std::string render_pulse(const Pulse& p) {
    std::string out(to_string(p.kind));
    if (p.is_drive()) out += " " + fmt(p.frequency) + " " + fmt(p.rabi);
    if (p.area == AreaSymbol::pi) out += " pi";
    else if (p.area == AreaSymbol::half_pi) out += " pi/2";
    else if (p.has_duration) out += " " + fmt(p.duration);
    if (p.is_drive() && p.has_duration && p.phase != 0.0) out += " " + fmt(p.phase);
    return out;
}

} // namespace

PulseSequence parse_sequence(std::string_view text) { return Parser(text).run(); }

std::string render(const PulseSequence& seq) {
    std::ostringstream os;
    if (seq.cw) {
        os << "cw {";
        for (std::size_t i = 0; i < seq.pulses.size(); ++i)
            os << (i ? "; " : " ") << render_pulse(seq.pulses[i]);
        os << " }\n";
    } else {
        for (const auto& p : seq.pulses) os << render_pulse(p) << '\n';
    }
    if (seq.sweep)
        os << "sweep " << seq.sweep->variable << ' ' << fmt(seq.sweep->start) << ' ' << fmt(seq.sweep->stop)
           << ' ' << seq.sweep->points << '\n';
    if (seq.shots_per_point != PulseSequence{}.shots_per_point) os << "shots " << fmt(seq.shots_per_point) << '\n';
    return os.str();
}

PulseSequence phase_alternated(const PulseSequence& seq) {
    PulseSequence out = seq;
    const auto it = std::find_if(out.pulses.rbegin(), out.pulses.rend(), [](const Pulse& p) { return p.is_drive(); });
    if (it == out.pulses.rend()) throw ValidationError("phase_alternated: sequence has no drive");
    it->phase = std::fmod(it->phase + kPi, kTwoPi);
    return out;
}

} // namespace nvdac
