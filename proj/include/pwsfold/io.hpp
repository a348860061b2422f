#pragma once

// System definition files (JSON), JSON reports and CSV output.

#include "pwsfold/pws.hpp"
#include "pwsfold/regularize.hpp"
#include "pwsfold/twofold.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pwsfold::io {

using json = nlohmann::json;

/// A parsed system file. When `normal_form` is present it drives the run and
/// `system` is the normal form built from it.
struct SystemFile {
    pws::PiecewiseSystem system;
    std::optional<twofold::TwoFoldParams> normal_form;
};

/// Validates the document; InputError messages start with the offending
/// field path, e.g. "normal_form.b1: missing".
SystemFile parse_system(const json& doc);
SystemFile load_system(const std::string& path);

/// %.17g, the fixed formatting of every number written to CSV.
std::string format_number(double v);

json folded_report_json(const twofold::FoldedReport& r, const twofold::TwoFoldClass& c);

/// One report per folded point. Where the coefficients do not exist (alpha = 0
/// or a classification boundary) p, q, r, folded_class and canard are null.
json folded_reports_json(const twofold::TwoFoldParams& p, const reg::Sigmoid& s);

/// {"flavour", "determinacy_breaking", "sigmoid", "folded_points": [...]}.
json classify_json(const twofold::TwoFoldParams& p, const reg::Sigmoid& s);

/// Closed-form coefficients next to the fitted ones for each folded point.
json fit_json(const twofold::TwoFoldParams& p, const reg::Sigmoid& s);

/// Header t,x1,x2,x3,lambda,mode; lambda empty when not on or near the surface.
void write_trajectory_csv(std::ostream& out, const pws::Trajectory& tr);

/// Header lambda,x2,x3,stability.
void write_critical_csv(std::ostream& out, const std::vector<reg::CriticalPoint>& pts);

}  // namespace pwsfold::io
