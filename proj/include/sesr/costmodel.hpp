#pragma once

#include <cstdint>
#include <string>

#include "sesr/network.hpp"

namespace sesr {

// Accelerator abstracted to a MAC throughput. TOP/s ratings count 2 ops per
// MAC, so a 0.5 TOP/s device peaks at 0.25e12 MAC/s.
struct DeviceProfile {
    double peak_macs_per_second = 0.25e12;
    double utilization = 1.0;

    static DeviceProfile from_tops(double tops, double utilization = 1.0);
    void validate() const;
};

struct CostReport {
    std::string stage;
    std::uint64_t params = 0;
    std::uint64_t macs = 0;
    double latency_ms = 0.0;
    double fps = 0.0;  // 1000 / latency_ms
};

// Parses the one-layer-per-line description format:
//   conv  c_in c_out k stride pad
//   convT c_in c_out k stride pad [output_pad]
//   d2s   block
// '#' starts a comment. Parse failures name the line.
NetworkSpec parse_net_description(const std::string& text, const std::string& source_name = "");
NetworkSpec load_net_description(const std::string& path);

CostReport stage_cost(const NetworkSpec& net, int input_h, int input_w,
                      const DeviceProfile& device);

// Composes stage reports: latencies add, fps recomputed from the total.
CostReport end_to_end(const CostReport& classification, const CostReport& sr);

// count_macs(b) / count_macs(a) at the given input size.
double mac_ratio(const NetworkSpec& a, const NetworkSpec& b, int input_h, int input_w);

// Utilization that makes `macs` take `target_ms` on the device peak.
double utilization_for(std::uint64_t macs, double target_ms, double peak_macs_per_second);

// Reference MAC figures for networks this project does not build, recorded
// as constants for ratio checks and report rows.
inline constexpr double kEdsrBaseMacs299 = 106e9;
inline constexpr double kEdsrMacs299 = 3400e9;
inline constexpr double kMobileNetV2Macs224 = 300e6;
inline constexpr double kMobileNetV2Macs598 = 2.1e9;

}  // namespace sesr
