#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sesr {

// Accuracy table in the shape of the robustness experiments: one row per
// (classifier, SR method), one accuracy column per attack.
struct ReportRow {
    std::string classifier;
    std::string sr_method;
    std::optional<std::uint64_t> params;
    std::optional<std::uint64_t> macs;
    std::vector<double> accuracy;  // one per attack column, percent

    bool operator==(const ReportRow&) const = default;
};

struct RobustnessReport {
    std::vector<std::string> attack_columns;
    std::vector<ReportRow> rows;
    std::map<std::string, std::string> settings;  // recorded run parameters

    bool operator==(const RobustnessReport&) const = default;
};

// "10.608K" style exact-thousandths parameter formatting.
std::string format_params(std::uint64_t params);
// 3-significant-digit MAC formatting with B/M suffix.
std::string format_macs(std::uint64_t macs);

std::string report_to_csv(const RobustnessReport& report);
RobustnessReport report_from_csv(const std::string& csv);

// Markdown table; per classifier group the best accuracy per attack column
// and the smallest params/MACs entries are bold.
std::string report_to_markdown(const RobustnessReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sesr
