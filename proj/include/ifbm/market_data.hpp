#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ifbm/engine.hpp"

namespace ifbm {

/// Prices are positive and finite; timestamps, when present, strictly
/// increase (numerically if every stamp parses as a number, otherwise by
/// string order, which is chronological for ISO-8601).
struct PriceSeries {
  std::vector<double> prices;
  std::vector<std::string> timestamps;
  std::string label;

  std::size_t size() const { return prices.size(); }
};

/// Column by header name or by zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

enum class HeaderMode { Auto, Present, Absent };

struct ColumnSpec {
  ColumnRef price = std::string("close");
  std::optional<ColumnRef> timestamp;
  /// Auto treats the first row as a header when its price field is not
  /// numeric; naming a column by string implies a header.
  HeaderMode header = HeaderMode::Auto;
};

/// Parses a comma-separated UTF-8 file. Any invalid row is an Error(Io)
/// naming its 1-based line number.
PriceSeries load_csv(const std::filesystem::path& path, const ColumnSpec& spec = {});

/// Same parser over in-memory text; `source` names the input in messages.
PriceSeries parse_price_csv(const std::string& text, const ColumnSpec& spec,
                            const std::string& source = "<memory>");

/// r_t = ln(P_t / P_{t-1}); n - 1 values tagged Empirical.
ReturnsSample log_returns(const PriceSeries& series);

/// Reads one return per line; blank lines and lines starting with '#' are
/// skipped, and a non-numeric first line is taken as a header.
ReturnsSample load_returns(const std::filesystem::path& path);

}  // namespace ifbm
