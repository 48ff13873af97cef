#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hdi::ingest {

/// Dialect of a wide-format indicator export: one row per (region, indicator),
/// one column per year, blank cells for missing measurements.
struct WideCsvFormat {
    char delimiter = ',';
    std::string region_column = "Area Name";
    std::string indicator_column = "Indicator Name";
    /// Accept thousands separators ("1,095,616") inside quoted numeric cells.
    bool permissive_thousands = false;
    /// Drop rows holding unparsable or non-finite cells and collapse exact
    /// duplicate rows instead of failing.
    bool drop_noise = false;
};

struct RecordKey {
    std::string region;
    std::string indicator;
    int year = 0;

    auto operator<=>(const RecordKey&) const = default;
};

struct Record {
    RecordKey key;
    std::optional<double> value;
};

/// Sparse (region, indicator, year) -> optional value store. Immutable once built.
class IndicatorTable {
public:
    IndicatorTable() = default;

    /// Builds a table from records given in source order. Region and indicator
    /// order follow first appearance; years are ascending.
    /// Throws DuplicateKey or NonFiniteValue.
    static IndicatorTable from_records(std::vector<Record> records);

    [[nodiscard]] const std::vector<std::string>& regions() const noexcept { return regions_; }
    [[nodiscard]] const std::vector<std::string>& indicators() const noexcept { return indicators_; }
    [[nodiscard]] const std::vector<int>& years() const noexcept { return years_; }
    [[nodiscard]] const std::map<RecordKey, std::optional<double>>& records() const noexcept {
        return records_;
    }

    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] std::size_t non_missing_count() const noexcept;

    [[nodiscard]] bool has_region(std::string_view region) const;
    [[nodiscard]] bool has_indicator(std::string_view indicator) const;

    /// Value at the key; nullopt when the cell is blank or absent.
    [[nodiscard]] std::optional<double> value(const std::string& region, const std::string& indicator,
                                              int year) const;

private:
    std::map<RecordKey, std::optional<double>> records_;
    std::vector<std::string> regions_;
    std::vector<std::string> indicators_;
    std::vector<int> years_;
};

struct DroppedRow {
    std::size_t line = 0;
    std::string reason;
};

/// What `drop_noise` removed while parsing.
struct NoiseReport {
    std::vector<DroppedRow> dropped;
    std::size_t duplicates_collapsed = 0;
};

/// Parses wide CSV. Errors: MalformedHeader, MalformedRow, DuplicateKey,
/// UnparsableCell (all ParseError with line/column).
IndicatorTable parse_wide_csv(std::istream& source, const WideCsvFormat& format = {},
                              NoiseReport* noise = nullptr);
IndicatorTable parse_wide_csv_text(std::string_view text, const WideCsvFormat& format = {},
                                   NoiseReport* noise = nullptr);
/// Throws Data/"FileNotFound" when the path cannot be opened.
IndicatorTable parse_wide_csv_file(const std::filesystem::path& path, const WideCsvFormat& format = {},
                                   NoiseReport* noise = nullptr);

/// Writes the table back in wide form. Rows follow region then indicator
/// order; values use shortest round-trip notation.
void write_wide_csv(const IndicatorTable& table, std::ostream& out, const WideCsvFormat& format = {});

struct CompletenessEntry {
    std::string indicator;
    int year = 0;
    std::size_t covered = 0;     ///< regions with a value
    std::size_t considered = 0;  ///< regions in the denominator
    double coverage = 0.0;
    bool complete = false;
};

struct CompletenessReport {
    std::vector<CompletenessEntry> entries;  ///< sorted by indicator, then year
};

/// Coverage of every (indicator, year) pair over `regions` (all table regions
/// when omitted). Throws UnknownRegion, or InvalidArgument for an empty subset.
CompletenessReport completeness(const IndicatorTable& table,
                                const std::optional<std::vector<std::string>>& regions = std::nullopt);

void write_completeness_csv(const CompletenessReport& report, std::ostream& out);
nlohmann::json completeness_to_json(const CompletenessReport& report);

/// Row-complete join: regions having values for every requested indicator in
/// `year`, each mapped to values in request order.
/// Throws UnknownIndicator or EmptyResult.
std::map<std::string, std::vector<double>> slice(const IndicatorTable& table,
                                                 const std::vector<std::string>& indicators, int year);

}  // namespace hdi::ingest
