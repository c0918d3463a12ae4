#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace sonoloc {

// First-order clock error for one anchor: a Gaussian synchronization residual
// redrawn at every sync epoch plus linear drift accumulated since that epoch.
struct ClockModel {
    double sync_error_std = 100e-6;  // seconds
    double drift_ppm = 0.0;          // max drift-rate magnitude
    double sync_interval = 32.0;     // seconds between resyncs
    std::uint64_t seed = 0;

    void validate() const;
};

// Actual transmit time for a nominal slot epoch, deterministic given the
// model seed. Residuals are independent across anchors and sync intervals;
// each anchor carries a fixed drift rate drawn uniformly in [-ppm, +ppm].
double anchor_tx_time(int anchor_id, double nominal_epoch, const ClockModel& clock);

struct Schedule {
    std::map<int, int> slot_of;  // anchor id -> slot index
    int num_slots = 0;
    double slot_ms = 100.0;

    double round_ms() const { return num_slots * slot_ms; }
    double round_s() const { return round_ms() * 1e-3; }
};

// Assigns each anchor a transmit slot in id order. Optional concurrency
// groups share one slot (spatially separated anchors transmitting together);
// ids not named in any group get their own slot after the grouped ones.
Schedule build_schedule(const std::vector<int>& anchor_ids, double slot_ms,
                        const std::vector<std::vector<int>>& concurrency_groups = {});

// Per-event energy constants for the duty-cycle calculator. The constants
// are user-supplied; nothing here is measured.
struct EnergyModel {
    double sync_cost_j = 0.2;   // per resync (radio wake + exchange)
    double tx_cost_j = 0.05;    // per beacon frame
    double idle_w = 0.0005;     // standby floor
};

struct EnergyBreakdown {
    double sync_w = 0.0;
    double tx_w = 0.0;
    double idle_w = 0.0;

    double total_w() const { return sync_w + tx_w + idle_w; }
    double lifetime_s(double battery_j) const { return battery_j / total_w(); }
};

EnergyBreakdown estimate_duty_cycle_power(const EnergyModel& model, double sync_interval_s,
                                          double beacon_interval_s);

}  // namespace sonoloc
