#pragma once

// CSV and JSON renderings of every result type. CSV numbers use 17
// significant digits with a '.' decimal point regardless of locale. JSON
// documents accept an optional metadata object (as JSON text) that is
// embedded under "metadata".

#include <string>
#include <string_view>

#include <json.hpp>

#include "ifbm/analytics.hpp"
#include "ifbm/calibration.hpp"
#include "ifbm/engine.hpp"
#include "ifbm/feedback.hpp"

namespace ifbm {

enum class Format { Csv, Json };

using Json = nlohmann::ordered_json;

std::string format_double(double v);

/// Parses metadata text; empty text yields an empty object. Throws
/// Error(Domain) for text that is not a JSON object.
Json parse_metadata(std::string_view metadata_json);

std::string to_text(const Json& doc);

Json to_json(const FeedbackParams& params);
Json to_json(const CriticalPoints& cp, const FeedbackParams& params);
Json to_json(const ProcessParams& proc);
Json to_json(const SimConfig& cfg);
Json to_json(const MomentSet& m);
Json to_json(const ChiSquareResult& r);
Json to_json(const Histogram& h);

std::string curve_csv(const Curve& curve);
Json curve_json(const Curve& curve);
/// Critical points, region boundaries and feedback-sign partition.
Json critical_points_json(const FeedbackParams& params);

std::string surface_csv(const Surface& surface);
Json surface_json(const Surface& surface);

std::string pathset_csv(const PathSet& paths);
Json pathset_json(const PathSet& paths);
Json provenance_json(const PathSet& paths);
/// "t,price" table for one path; requires materialized prices.
std::string price_csv(const PathSet& paths, std::uint64_t path);

std::string sample_csv(const ReturnsSample& sample);
Json sample_json(const ReturnsSample& sample);

std::string histogram_csv(const Histogram& h);

Json fit_result_json(const FitResult& result);
std::string fit_surface_csv(std::span<const SurfacePoint> surface);

/// Critical points, regions (or an unsupported-regime notice for K >= 0),
/// feedback-sign partition and exact single-step moments.
Json analysis_json(const FeedbackParams& fb, const ProcessParams& proc);

std::string_view to_string(DriftMode mode);

}  // namespace ifbm
