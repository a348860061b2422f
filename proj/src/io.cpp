#include "pwsfold/io.hpp"

#include "pwsfold/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace pwsfold::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

std::array<expr::Expression, 3> read_field(const json& doc, const std::string& key, bool required) {
    std::array<expr::Expression, 3> out{expr::Expression::constant(0.0), expr::Expression::constant(0.0),
                                        expr::Expression::constant(0.0)};
    if (!doc.contains(key)) {
        if (required) fail(key, "missing");
        return out;
    }
    const json& arr = doc.at(key);
    if (!arr.is_array() || arr.size() != 3) fail(key, "expected an array of 3 expression strings");
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string path = key + "[" + std::to_string(i) + "]";
        if (!arr[i].is_string()) fail(path, "expected an expression string");
        try {
            out[i] = expr::parse_expression(arr[i].get<std::string>());
        } catch (const ParseError& e) {
            fail(path, e.what());
        }
    }
    return out;
}

double read_real(const json& obj, const std::string& parent, const char* key) {
    const std::string path = parent + "." + key;
    if (!obj.contains(key)) fail(path, "missing");
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
}

int read_sign(const json& obj, const std::string& parent, const char* key) {
    const double d = read_real(obj, parent, key);
    if (d != 1.0 && d != -1.0) fail(parent + "." + key, "must be 1 or -1");
    return static_cast<int>(d);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

SystemFile parse_system(const json& doc) {
    if (!doc.is_object()) fail("$", "expected a JSON object");
    if (doc.contains("normal_form")) {
        const json& nf = doc.at("normal_form");
        if (!nf.is_object()) fail("normal_form", "expected an object");
        twofold::TwoFoldParams p;
        p.a1 = read_sign(nf, "normal_form", "a1");
        p.a2 = read_sign(nf, "normal_form", "a2");
        p.b1 = read_real(nf, "normal_form", "b1");
        p.b2 = read_real(nf, "normal_form", "b2");
        p.alpha = read_real(nf, "normal_form", "alpha");
        return {twofold::build_normal_form(p), p};
    }
    auto fplus = read_field(doc, "fplus", true);
    auto fminus = read_field(doc, "fminus", true);
    auto hidden = read_field(doc, "hidden", false);
    return {pws::PiecewiseSystem(std::move(fplus), std::move(fminus), std::move(hidden)), std::nullopt};
}

SystemFile load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
    return parse_system(doc);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json folded_report_json(const twofold::FoldedReport& r, const twofold::TwoFoldClass& c) {
    return {
        {"phi_s", r.phi_s},
        {"u_s", r.u_s},
        {"x2s", r.x2s},
        {"x3s", r.x3s},
        {"p", r.coefficients.p},
        {"q", r.coefficients.q},
        {"r", r.coefficients.r},
        {"folded_class", std::string(twofold::to_string(r.classification.folded_class))},
        {"canard", std::string(twofold::to_string(r.classification.canard))},
        {"flavour", std::string(twofold::to_string(c.flavour))},
        {"determinacy_breaking", c.determinacy_breaking},
    };
}

json folded_reports_json(const twofold::TwoFoldParams& p, const reg::Sigmoid& s) {
    const auto cls = twofold::classify_twofold(p);
    json out = json::array();
    for (double phi : twofold::folded_points(p)) {
        twofold::FoldedReport r;
        r.phi_s = phi;
        r.u_s = s.inverse(phi);
        r.x2s = p.alpha * (phi - 1.0) * (phi - 1.0);
        r.x3s = -p.alpha * (phi + 1.0) * (phi + 1.0);
        bool coefficients = true;
        bool classified = true;
        try {
            r.coefficients = twofold::canonical_coefficients(p, s, phi);
            r.classification = twofold::classify_folded(r.coefficients.p, r.coefficients.q, r.coefficients.r);
        } catch (const DegenerateError&) {
            coefficients = p.alpha != 0.0;
            classified = false;
        }
        json j = folded_report_json(r, cls);
        if (!coefficients) j["p"] = j["q"] = j["r"] = nullptr;
        if (!classified) j["folded_class"] = j["canard"] = nullptr;
        out.push_back(std::move(j));
    }
    return out;
}

json classify_json(const twofold::TwoFoldParams& p, const reg::Sigmoid& s) {
    const auto cls = twofold::classify_twofold(p);
    return {
        {"flavour", std::string(twofold::to_string(cls.flavour))},
        {"determinacy_breaking", cls.determinacy_breaking},
        {"sigmoid", std::string(s.name())},
        {"folded_points", folded_reports_json(p, s)},
    };
}

json fit_json(const twofold::TwoFoldParams& p, const reg::Sigmoid& s) {
    json rows = json::array();
    for (double phi : twofold::folded_points(p)) {
        const auto c = twofold::canonical_coefficients(p, s, phi);
        const auto f = twofold::canonical_fit(p, s, phi);
        auto diff = [](double fit, double closed) { return number_or_null(std::abs(fit - closed) / std::abs(closed)); };
        rows.push_back({
            {"phi_s", phi},
            {"closed_form", {{"p", c.p}, {"q", c.q}, {"r", c.r}}},
            {"fit", {{"p", f.p}, {"q", f.q}, {"r", f.r}}},
            {"relative_difference", {{"p", diff(f.p, c.p)}, {"q", diff(f.q, c.q)}, {"r", diff(f.r, c.r)}}},
            {"fast",
             {{"const", f.fast_const},
              {"x1", f.fast_x1},
              {"x2", f.fast_x2},
              {"x1_squared", f.fast_x1sq},
              {"scale", f.fast_scale}}},
        });
    }
    return {{"sigmoid", std::string(s.name())}, {"folded_points", rows}};
}

void write_trajectory_csv(std::ostream& out, const pws::Trajectory& tr) {
    out << "t,x1,x2,x3,lambda,mode\n";
    for (const auto& s : tr.samples) {
        out << format_number(s.t) << ',' << format_number(s.x[0]) << ',' << format_number(s.x[1]) << ','
            << format_number(s.x[2]) << ',';
        if (s.lambda) out << format_number(*s.lambda);
        out << ',' << pws::to_string(s.mode) << '\n';
    }
}

void write_critical_csv(std::ostream& out, const std::vector<reg::CriticalPoint>& pts) {
    out << "lambda,x2,x3,stability\n";
    for (const auto& p : pts) {
        out << format_number(p.lambda) << ',' << format_number(p.x2) << ',' << format_number(p.x3) << ','
            << reg::to_string(p.stability) << '\n';
    }
}

}  // namespace pwsfold::io
