#include "sesr/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sesr/errors.hpp"

namespace sesr {

std::string format_params(std::uint64_t params) {
    if (params < 1000) return std::to_string(params);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", static_cast<double>(params) / 1000.0);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s + "K";
}

std::string format_macs(std::uint64_t macs) {
    char buf[32];
    if (macs >= 100000000ull) {  // 0.1B and up print on the B scale
        std::snprintf(buf, sizeof(buf), "%.3gB", static_cast<double>(macs) / 1e9);
    } else if (macs >= 1000000ull) {
        std::snprintf(buf, sizeof(buf), "%.3gM", static_cast<double>(macs) / 1e6);
    } else {
        std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(macs));
    }
    return buf;
}

namespace {

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::string report_to_csv(const RobustnessReport& report) {
    std::ostringstream out;
    for (const auto& [key, value] : report.settings) out << "# " << key << "=" << value << "\n";
    out << "classifier,sr_method,params,macs";
    for (const auto& attack : report.attack_columns) out << "," << attack;
    out << "\n";
    for (const auto& row : report.rows) {
        out << row.classifier << "," << row.sr_method << ",";
        if (row.params) out << *row.params;
        out << ",";
        if (row.macs) out << *row.macs;
        for (double acc : row.accuracy) out << "," << full_precision(acc);
        out << "\n";
    }
    return out.str();
}

RobustnessReport report_from_csv(const std::string& csv) {
    RobustnessReport report;
    std::istringstream stream(csv);
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(stream, line)) {
        line_no += 1;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                report.settings[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields.size() < 4 || fields[0] != "classifier")
                throw FormatError("report csv: bad header at line " + std::to_string(line_no));
            for (std::size_t i = 4; i < fields.size(); ++i)
                report.attack_columns.push_back(fields[i]);
            header_seen = true;
            continue;
        }
        if (fields.size() != 4 + report.attack_columns.size())
            throw FormatError("report csv: wrong field count at line " + std::to_string(line_no));
        ReportRow row;
        row.classifier = fields[0];
        row.sr_method = fields[1];
        if (!fields[2].empty()) row.params = std::stoull(fields[2]);
        if (!fields[3].empty()) row.macs = std::stoull(fields[3]);
        for (std::size_t i = 4; i < fields.size(); ++i) row.accuracy.push_back(std::stod(fields[i]));
        report.rows.push_back(std::move(row));
    }
    if (!header_seen) throw FormatError("report csv: missing header");
    return report;
}

std::string report_to_markdown(const RobustnessReport& report) {
    std::ostringstream out;
    out << "| Classification Network | SR method | Parameters | MACs |";
    for (const auto& attack : report.attack_columns) out << " " << attack << " |";
    out << "\n|---|---|---|---|";
    for (std::size_t i = 0; i < report.attack_columns.size(); ++i) out << "---|";
    out << "\n";

    // group rows by classifier, preserving order
    std::vector<std::pair<std::string, std::vector<const ReportRow*>>> groups;
    for (const auto& row : report.rows) {
        if (groups.empty() || groups.back().first != row.classifier)
            groups.push_back({row.classifier, {}});
        groups.back().second.push_back(&row);
    }

    char buf[32];
    for (const auto& [classifier, rows] : groups) {
        std::vector<double> best_acc(report.attack_columns.size(), -1.0);
        std::optional<std::uint64_t> min_params, min_macs;
        for (const auto* row : rows) {
            for (std::size_t i = 0; i < row->accuracy.size(); ++i)
                if (row->accuracy[i] > best_acc[i]) best_acc[i] = row->accuracy[i];
            if (row->params && (!min_params || *row->params < *min_params))
                min_params = row->params;
            if (row->macs && (!min_macs || *row->macs < *min_macs)) min_macs = row->macs;
        }
        for (const auto* row : rows) {
            out << "| " << classifier << " | " << row->sr_method << " | ";
            if (row->params) {
                const bool bold = min_params && *row->params == *min_params;
                out << (bold ? "**" : "") << format_params(*row->params) << (bold ? "**" : "");
            } else {
                out << "-";
            }
            out << " | ";
            if (row->macs) {
                const bool bold = min_macs && *row->macs == *min_macs;
                out << (bold ? "**" : "") << format_macs(*row->macs) << (bold ? "**" : "");
            } else {
                out << "-";
            }
            out << " |";
            for (std::size_t i = 0; i < row->accuracy.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.2f", row->accuracy[i]);
                const bool bold = row->accuracy[i] == best_acc[i];
                out << " " << (bold ? "**" : "") << buf << (bold ? "**" : "") << " |";
            }
            out << "\n";
        }
    }
    if (!report.settings.empty()) {
        out << "\n";
        for (const auto& [key, value] : report.settings)
            out << "- " << key << ": " << value << "\n";
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace sesr
