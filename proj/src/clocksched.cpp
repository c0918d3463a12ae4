#include "sonoloc/clocksched.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "sonoloc/rng.hpp"

namespace sonoloc {

namespace {
// Stream tags for derive_seed so residuals and drift never collide.
constexpr std::uint64_t kSyncStream = 0x53594e43;   // "SYNC"
constexpr std::uint64_t kDriftStream = 0x44524654;  // "DRFT"
}  // namespace

void ClockModel::validate() const {
    if (sync_error_std < 0) throw std::invalid_argument("ClockModel: negative sync_error_std");
    if (sync_interval <= 0) throw std::invalid_argument("ClockModel: sync_interval must be > 0");
}

double anchor_tx_time(int anchor_id, double nominal_epoch, const ClockModel& clock) {
    clock.validate();
    if (nominal_epoch < 0) throw std::invalid_argument("anchor_tx_time: negative epoch");
    if (clock.sync_error_std == 0.0 && clock.drift_ppm == 0.0) return nominal_epoch;

    const auto sync_index = static_cast<std::uint64_t>(nominal_epoch / clock.sync_interval);

    double residual = 0.0;
    if (clock.sync_error_std > 0.0) {
        Rng rng(derive_seed(clock.seed, kSyncStream,
                            (static_cast<std::uint64_t>(anchor_id) << 32) ^ sync_index));
        residual = clock.sync_error_std * rng.gaussian();
    }

    double drift = 0.0;
    if (clock.drift_ppm != 0.0) {
        Rng rng(derive_seed(clock.seed, kDriftStream, static_cast<std::uint64_t>(anchor_id)));
        const double rate = rng.uniform(-clock.drift_ppm, clock.drift_ppm) * 1e-6;
        const double since_sync = nominal_epoch - static_cast<double>(sync_index) * clock.sync_interval;
        drift = rate * since_sync;
    }
    return nominal_epoch + residual + drift;
}

Schedule build_schedule(const std::vector<int>& anchor_ids, double slot_ms,
                        const std::vector<std::vector<int>>& concurrency_groups) {
    if (slot_ms <= 0) throw std::invalid_argument("build_schedule: slot_ms must be positive");
    std::set<int> seen;
    for (int id : anchor_ids)
        if (!seen.insert(id).second)
            throw std::invalid_argument("build_schedule: duplicate anchor id " +
                                        std::to_string(id));

    Schedule s;
    s.slot_ms = slot_ms;
    int next_slot = 0;
    for (const auto& group : concurrency_groups) {
        for (int id : group) {
            if (!seen.count(id))
                throw std::invalid_argument("build_schedule: unknown id in group");
            if (s.slot_of.count(id))
                throw std::invalid_argument("build_schedule: id in multiple groups");
            s.slot_of[id] = next_slot;
        }
        if (!group.empty()) ++next_slot;
    }
    for (int id : anchor_ids)
        if (!s.slot_of.count(id)) s.slot_of[id] = next_slot++;
    s.num_slots = next_slot;
    return s;
}

EnergyBreakdown estimate_duty_cycle_power(const EnergyModel& model, double sync_interval_s,
                                          double beacon_interval_s) {
    if (sync_interval_s <= 0 || beacon_interval_s <= 0)
        throw std::invalid_argument("estimate_duty_cycle_power: intervals must be positive");
    EnergyBreakdown b;
    b.sync_w = model.sync_cost_j / sync_interval_s;
    b.tx_w = model.tx_cost_j / beacon_interval_s;
    b.idle_w = model.idle_w;
    return b;
}

}  // namespace sonoloc
