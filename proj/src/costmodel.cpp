#include "sesr/costmodel.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "sesr/models.hpp"

namespace sesr {

DeviceProfile DeviceProfile::from_tops(double tops, double utilization) {
    DeviceProfile d;
    d.peak_macs_per_second = tops * 1e12 / 2.0;  // 1 MAC = 2 ops
    d.utilization = utilization;
    d.validate();
    return d;
}

void DeviceProfile::validate() const {
    if (peak_macs_per_second <= 0.0) throw ConfigError("device: peak MAC rate must be positive");
    if (utilization <= 0.0 || utilization > 1.0)
        throw ConfigError("device: utilization must be in (0,1]");
}

NetworkSpec parse_net_description(const std::string& text, const std::string& source_name) {
    NetworkSpec net;
    net.name = source_name.empty() ? "custom" : source_name;
    net.scale = 1;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw ConfigError("net description" +
                          (source_name.empty() ? std::string() : " '" + source_name + "'") +
                          ", line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(stream, line)) {
        line_no += 1;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op)) continue;  // blank line
        if (op == "conv" || op == "convT") {
            int c_in, c_out, k, stride, pad;
            if (!(ls >> c_in >> c_out >> k >> stride >> pad))
                fail("expected '" + op + " c_in c_out k stride pad'");
            if (c_in <= 0 || c_out <= 0 || k <= 0 || stride <= 0 || pad < 0)
                fail("non-positive extent");
            ConvSpec spec = ConvSpec::explicit_pad(k, c_in, c_out, stride, pad);
            if (op == "convT") {
                int outpad = 0;
                ls >> outpad;  // optional
                spec.output_padding = outpad;
                net.layers.emplace_back(ConvTransposeLayer{spec});
            } else {
                net.layers.emplace_back(ConvLayer{spec});
            }
        } else if (op == "d2s") {
            int block;
            if (!(ls >> block) || block <= 0) fail("expected 'd2s block'");
            net.layers.emplace_back(DepthToSpaceLayer{block});
        } else {
            fail("unknown layer kind '" + op + "'");
        }
        std::string trailing;
        if (ls >> trailing) fail("trailing token '" + trailing + "'");
    }
    return net;
}

NetworkSpec load_net_description(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open net description '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_net_description(buf.str(), path);
}

CostReport stage_cost(const NetworkSpec& net, int input_h, int input_w,
                      const DeviceProfile& device) {
    device.validate();
    CostReport report;
    report.stage = net.name;
    report.params = count_params(net);
    report.macs = count_macs(net, input_h, input_w);
    report.latency_ms =
        static_cast<double>(report.macs) / (device.peak_macs_per_second * device.utilization) *
        1000.0;
    report.fps = report.latency_ms > 0.0 ? 1000.0 / report.latency_ms
                                         : std::numeric_limits<double>::infinity();
    return report;
}

CostReport end_to_end(const CostReport& classification, const CostReport& sr) {
    CostReport total;
    total.stage = "end_to_end";
    total.params = classification.params + sr.params;
    total.macs = classification.macs + sr.macs;
    total.latency_ms = classification.latency_ms + sr.latency_ms;
    total.fps = total.latency_ms > 0.0 ? 1000.0 / total.latency_ms
                                       : std::numeric_limits<double>::infinity();
    return total;
}

double mac_ratio(const NetworkSpec& a, const NetworkSpec& b, int input_h, int input_w) {
    const std::uint64_t macs_a = count_macs(a, input_h, input_w);
    const std::uint64_t macs_b = count_macs(b, input_h, input_w);
    if (macs_a == 0) throw ConfigError("mac_ratio: reference network has zero MACs");
    return static_cast<double>(macs_b) / static_cast<double>(macs_a);
}

double utilization_for(std::uint64_t macs, double target_ms, double peak_macs_per_second) {
    if (target_ms <= 0.0 || peak_macs_per_second <= 0.0)
        throw ConfigError("utilization_for: target latency and peak must be positive");
    return static_cast<double>(macs) / (peak_macs_per_second * target_ms / 1000.0);
}

}  // namespace sesr
