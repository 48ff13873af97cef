#include "hdi/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hdi/csv.hpp"
#include "hdi/error.hpp"
#include "hdi/numfmt.hpp"

namespace hdi::ingest {

IndicatorTable IndicatorTable::from_records(std::vector<Record> records) {
    IndicatorTable table;
    std::set<std::string> seen_regions;
    std::set<std::string> seen_indicators;
    std::set<int> seen_years;
    for (auto& rec : records) {
        if (rec.value && !std::isfinite(*rec.value)) {
            throw_data("NonFiniteValue", "non-finite value for " + rec.key.region + " / " +
                                             rec.key.indicator + " / " + std::to_string(rec.key.year));
        }
        if (seen_regions.insert(rec.key.region).second) table.regions_.push_back(rec.key.region);
        if (seen_indicators.insert(rec.key.indicator).second) table.indicators_.push_back(rec.key.indicator);
        seen_years.insert(rec.key.year);
        auto [it, inserted] = table.records_.emplace(std::move(rec.key), rec.value);
        if (!inserted) {
            throw_data("DuplicateKey", "duplicate record for " + it->first.region + " / " +
                                           it->first.indicator + " / " + std::to_string(it->first.year));
        }
    }
    table.years_.assign(seen_years.begin(), seen_years.end());
    return table;
}

std::size_t IndicatorTable::non_missing_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const auto& kv) { return kv.second.has_value(); }));
}

bool IndicatorTable::has_region(std::string_view region) const {
    return std::find(regions_.begin(), regions_.end(), region) != regions_.end();
}

bool IndicatorTable::has_indicator(std::string_view indicator) const {
    return std::find(indicators_.begin(), indicators_.end(), indicator) != indicators_.end();
}

std::optional<double> IndicatorTable::value(const std::string& region, const std::string& indicator,
                                            int year) const {
    auto it = records_.find(RecordKey{region, indicator, year});
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

namespace {

struct HeaderLayout {
    std::size_t region_col = 0;
    std::size_t indicator_col = 0;
    std::vector<std::pair<std::size_t, int>> year_cols;
    std::vector<std::string> names;
};

HeaderLayout read_header(const csv::Row& header, const WideCsvFormat& format) {
    HeaderLayout layout;
    std::optional<std::size_t> region_col;
    std::optional<std::size_t> indicator_col;
    std::set<int> years;
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        const std::string name(trim(header.fields[i].text));
        layout.names.push_back(name);
        if (name == format.region_column && !region_col) {
            region_col = i;
        } else if (name == format.indicator_column && !indicator_col) {
            indicator_col = i;
        } else if (auto year = parse_integer(name)) {
            if (!years.insert(static_cast<int>(*year)).second) {
                throw ParseError("MalformedHeader", "year column " + name + " appears twice", header.line, i + 1);
            }
            layout.year_cols.emplace_back(i, static_cast<int>(*year));
        } else {
            throw ParseError("MalformedHeader",
                             "column " + std::to_string(i + 1) + " (\"" + name +
                                 "\") is neither a region, indicator nor year column",
                             header.line, i + 1);
        }
    }
    if (!region_col) {
        throw ParseError("MalformedHeader", "no \"" + format.region_column + "\" column in header", header.line, 0);
    }
    if (!indicator_col) {
        throw ParseError("MalformedHeader", "no \"" + format.indicator_column + "\" column in header",
                         header.line, 0);
    }
    if (layout.year_cols.empty()) {
        throw ParseError("MalformedHeader", "no year columns in header", header.line, 0);
    }
    layout.region_col = *region_col;
    layout.indicator_col = *indicator_col;
    return layout;
}

std::optional<double> parse_cell(const csv::Field& field, const WideCsvFormat& format) {
    std::string_view text = trim(field.text);
    if (format.permissive_thousands && field.quoted && text.find(',') != std::string_view::npos) {
        std::string stripped;
        for (char c : text) {
            if (c != ',') stripped.push_back(c);
        }
        return parse_decimal(stripped);
    }
    return parse_decimal(text);
}

}  // namespace

IndicatorTable parse_wide_csv(std::istream& source, const WideCsvFormat& format, NoiseReport* noise) {
    csv::Reader reader(source, format.delimiter);
    csv::Row row;

    bool have_header = false;
    while (reader.next(row)) {
        if (!csv::is_blank(row)) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw ParseError("MalformedHeader", "input has no header row", 1, 0);
    const HeaderLayout layout = read_header(row, format);

    std::vector<Record> records;
    // (region, indicator) -> (line, cell values) of the row that introduced it
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::vector<std::optional<double>>>> rows_seen;

    while (reader.next(row)) {
        if (csv::is_blank(row)) continue;
        if (row.fields.size() > layout.names.size()) {
            throw ParseError("MalformedRow",
                             "line " + std::to_string(row.line) + " has " + std::to_string(row.fields.size()) +
                                 " fields, header has " + std::to_string(layout.names.size()),
                             row.line, layout.names.size() + 1);
        }
        // Exporters often drop trailing empty cells.
        row.fields.resize(layout.names.size());

        const std::string region(trim(row.fields[layout.region_col].text));
        const std::string indicator(trim(row.fields[layout.indicator_col].text));
        if (region.empty() || indicator.empty()) {
            throw ParseError("MalformedRow", "line " + std::to_string(row.line) + " lacks a region or indicator name",
                             row.line, region.empty() ? layout.region_col + 1 : layout.indicator_col + 1);
        }

        std::vector<std::optional<double>> values;
        values.reserve(layout.year_cols.size());
        std::optional<DroppedRow> drop;
        for (const auto& [col, year] : layout.year_cols) {
            const csv::Field& field = row.fields[col];
            if (trim(field.text).empty()) {
                values.emplace_back(std::nullopt);
                continue;
            }
            auto parsed = parse_cell(field, format);
            if (!parsed) {
                std::string message = "unparsable cell \"" + field.text + "\" at line " + std::to_string(row.line) +
                                      ", column " + std::to_string(col + 1) + " (" + layout.names[col] + ")";
                if (!format.drop_noise) throw ParseError("UnparsableCell", message, row.line, col + 1);
                drop = DroppedRow{row.line, message};
                break;
            }
            values.emplace_back(*parsed);
        }
        if (drop) {
            if (noise) noise->dropped.push_back(*drop);
            continue;
        }

        auto key = std::make_pair(region, indicator);
        if (auto it = rows_seen.find(key); it != rows_seen.end()) {
            if (format.drop_noise && it->second.second == values) {
                if (noise) ++noise->duplicates_collapsed;
                continue;
            }
            throw ParseError("DuplicateKey",
                             "row for \"" + region + "\" / \"" + indicator + "\" at line " + std::to_string(row.line) +
                                 " duplicates line " + std::to_string(it->second.first),
                             row.line, 0);
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            records.push_back(Record{RecordKey{region, indicator, layout.year_cols[i].second}, values[i]});
        }
        rows_seen.emplace(std::move(key), std::make_pair(row.line, std::move(values)));
    }
    return IndicatorTable::from_records(std::move(records));
}

IndicatorTable parse_wide_csv_text(std::string_view text, const WideCsvFormat& format, NoiseReport* noise) {
    std::istringstream in{std::string(text)};
    return parse_wide_csv(in, format, noise);
}

IndicatorTable parse_wide_csv_file(const std::filesystem::path& path, const WideCsvFormat& format,
                                   NoiseReport* noise) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("FileNotFound", "cannot open input file " + path.string());
    try {
        return parse_wide_csv(in, format, noise);
    } catch (const ParseError& e) {
        throw ParseError(e.code(), path.string() + ": " + e.what(), e.line(), e.column());
    }
}

void write_wide_csv(const IndicatorTable& table, std::ostream& out, const WideCsvFormat& format) {
    std::vector<std::string> header{format.region_column, format.indicator_column};
    for (int y : table.years()) header.push_back(std::to_string(y));
    out << csv::join(header, format.delimiter) << '\n';

    // Emit rows in source order: region order, then indicator order, skipping
    // pairs that have no records at all.
    for (const auto& region : table.regions()) {
        for (const auto& indicator : table.indicators()) {
            std::vector<std::string> cells{region, indicator};
            bool any = false;
            for (int y : table.years()) {
                auto it = table.records().find(RecordKey{region, indicator, y});
                if (it != table.records().end()) any = true;
                cells.push_back(it != table.records().end() && it->second ? format_shortest(*it->second) : "");
            }
            if (any) out << csv::join(cells, format.delimiter) << '\n';
        }
    }
}

CompletenessReport completeness(const IndicatorTable& table, const std::optional<std::vector<std::string>>& regions) {
    std::set<std::string> considered;
    if (regions) {
        if (regions->empty()) throw_usage("InvalidArgument", "region subset must not be empty");
        for (const auto& r : *regions) {
            if (!table.has_region(r)) throw_data("UnknownRegion", "region \"" + r + "\" is not in the table");
            considered.insert(r);
        }
    } else {
        considered.insert(table.regions().begin(), table.regions().end());
    }

    std::map<std::pair<std::string, int>, std::size_t> covered;
    for (const auto& [key, value] : table.records()) {
        auto& count = covered[{key.indicator, key.year}];
        if (value && considered.count(key.region)) ++count;
    }

    CompletenessReport report;
    for (const auto& [pair, count] : covered) {
        CompletenessEntry e;
        e.indicator = pair.first;
        e.year = pair.second;
        e.covered = count;
        e.considered = considered.size();
        e.coverage = considered.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(considered.size());
        e.complete = !considered.empty() && count == considered.size();
        report.entries.push_back(std::move(e));
    }
    return report;
}

void write_completeness_csv(const CompletenessReport& report, std::ostream& out) {
    out << "indicator,year,coverage,complete\n";
    for (const auto& e : report.entries) {
        out << csv::join({e.indicator, std::to_string(e.year), format_shortest(e.coverage),
                          e.complete ? "true" : "false"})
            << '\n';
    }
}

nlohmann::json completeness_to_json(const CompletenessReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"indicator", e.indicator},
                           {"year", e.year},
                           {"covered", e.covered},
                           {"considered", e.considered},
                           {"coverage", e.coverage},
                           {"complete", e.complete}});
    }
    return {{"entries", entries}};
}

std::map<std::string, std::vector<double>> slice(const IndicatorTable& table, const std::vector<std::string>& indicators,
                                                 int year) {
    for (const auto& ind : indicators) {
        if (!table.has_indicator(ind)) throw_data("UnknownIndicator", "indicator \"" + ind + "\" is not in the table");
    }
    std::map<std::string, std::vector<double>> out;
    for (const auto& region : table.regions()) {
        std::vector<double> row;
        row.reserve(indicators.size());
        for (const auto& ind : indicators) {
            auto v = table.value(region, ind, year);
            if (!v) break;
            row.push_back(*v);
        }
        if (row.size() == indicators.size()) out.emplace(region, std::move(row));
    }
    if (out.empty()) {
        throw_data("EmptyResult", "no region has values for all requested indicators in " + std::to_string(year));
    }
    return out;
}

}  // namespace hdi::ingest
