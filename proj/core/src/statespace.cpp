#include "voxmc/statespace.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace voxmc {

uint64_t pack_counts(const std::vector<int>& counts) {
    if (counts.size() > 8) throw std::invalid_argument("pack_counts: more than 8 slots");
    uint64_t key = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0 || counts[i] > 255)
            throw std::invalid_argument("pack_counts: count out of [0,255]");
        key |= uint64_t(counts[i]) << (8 * i);
    }
    return key;
}

namespace {

int popsum(uint64_t key, int slots) {
    int s = 0;
    for (int i = 0; i < slots; ++i) s += int((key >> (8 * i)) & 0xff);
    return s;
}

// applies deltas to a packed key; false if any slot leaves [0, cap] or the
// total exceeds total_cap
bool apply_deltas(uint64_t key, const std::vector<std::pair<int, int>>& deltas, int slots,
                  int cap, long long total_cap, uint64_t& out) {
    int counts[8];
    for (int i = 0; i < slots; ++i) counts[i] = int((key >> (8 * i)) & 0xff);
    for (const auto& [slot, change] : deltas) {
        counts[slot] += change;
        if (counts[slot] < 0 || counts[slot] > cap) return false;
    }
    long long total = 0;
    for (int i = 0; i < slots; ++i) total += counts[i];
    if (total > total_cap) return false;
    out = 0;
    for (int i = 0; i < slots; ++i) out |= uint64_t(counts[i]) << (8 * i);
    return true;
}

} // namespace

SignalSpace::SignalSpace(int n_voxels, int cap_per_voxel, long long total_cap,
                         long long max_states, const std::vector<int>* allowed_totals)
    : V_(n_voxels), cap_(std::min(cap_per_voxel, 255)), total_cap_(total_cap) {
    if (n_voxels < 1 || n_voxels > 8)
        throw std::invalid_argument("SignalSpace: 1..8 voxels supported");
    if (cap_per_voxel < 0) throw std::invalid_argument("SignalSpace: negative cap");
    if (cap_per_voxel > 255)
        throw std::invalid_argument("SignalSpace: cap above 255 exceeds packing range");
    std::set<long long> allowed;
    if (allowed_totals)
        for (int t : *allowed_totals) allowed.insert(t);
    std::vector<int> counts(V_, 0);
    long long produced = 0;
    auto rec = [&](auto&& rec, int voxel, long long total) -> void {
        if (voxel == V_) {
            if (allowed_totals && !allowed.count(total)) return;
            if (++produced > max_states)
                throw std::runtime_error("SignalSpace: truncated space exceeds max_states");
            keys_.push_back(pack_counts(counts));
            return;
        }
        const int lim = int(std::min<long long>(cap_, total_cap_ - total));
        for (int c = 0; c <= lim; ++c) {
            counts[voxel] = c;
            rec(rec, voxel + 1, total + c);
        }
        counts[voxel] = 0;
    };
    rec(rec, 0, 0);
    std::sort(keys_.begin(), keys_.end(), [&](uint64_t a, uint64_t b) {
        const int ta = popsum(a, V_), tb = popsum(b, V_);
        return ta != tb ? ta < tb : a < b;
    });
    index_.reserve(keys_.size() * 2);
    for (size_t i = 0; i < keys_.size(); ++i) index_.emplace(keys_[i], int(i));
    const int max_total = keys_.empty() ? 0 : popsum(keys_.back(), V_);
    block_of_total_.assign(max_total + 2, 0);
    for (const auto& key : keys_) ++block_of_total_[popsum(key, V_) + 1];
    for (size_t i = 1; i < block_of_total_.size(); ++i)
        block_of_total_[i] += block_of_total_[i - 1];
}

int SignalSpace::total(int idx) const { return popsum(keys_[idx], V_); }

std::pair<int, int> SignalSpace::block_range(int t_lo, int t_hi) const {
    t_lo = std::max(t_lo, 0);
    t_hi = std::min(t_hi, max_total());
    if (t_hi < t_lo) return {0, 0};
    return {block_of_total_[t_lo], block_of_total_[t_hi + 1]};
}

int SignalSpace::index_of_key(uint64_t key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

int SignalSpace::index_of(const std::vector<int>& counts) const {
    return index_of_key(pack_counts(counts));
}

std::vector<int32_t> SignalSpace::shift_table(
    const std::vector<std::pair<int, int>>& deltas) const {
    std::vector<int32_t> table(keys_.size(), -1);
    for (size_t i = 0; i < keys_.size(); ++i) {
        uint64_t out;
        if (apply_deltas(keys_[i], deltas, V_, cap_, total_cap_, out)) {
            auto it = index_.find(out);
            if (it != index_.end()) table[i] = it->second;
        }
    }
    return table;
}

ReceiverSpace::ReceiverSpace(const std::vector<int>& initial,
                             const std::vector<std::vector<std::pair<int, int>>>& maps,
                             int cap_per_slot, long long total_cap, long long max_states)
    : slots_(int(initial.size())) {
    if (slots_ < 0 || slots_ > 8) throw std::invalid_argument("ReceiverSpace: 0..8 slots");
    const int cap = std::min(cap_per_slot, 255);
    if (slots_ == 0) {
        keys_.push_back(0);
        index_.emplace(0, 0);
        block_of_total_ = {0, 1};
        return;
    }
    const uint64_t start = pack_counts(initial);
    std::unordered_map<uint64_t, char> seen;
    std::deque<uint64_t> frontier{start};
    seen.emplace(start, 1);
    while (!frontier.empty()) {
        const uint64_t key = frontier.front();
        frontier.pop_front();
        for (const auto& map : maps) {
            uint64_t out;
            if (!apply_deltas(key, map, slots_, cap, total_cap, out)) continue;
            if (seen.emplace(out, 1).second) {
                if ((long long)seen.size() > max_states)
                    throw std::runtime_error("ReceiverSpace: closure exceeds max_states");
                frontier.push_back(out);
            }
        }
    }
    keys_.reserve(seen.size());
    for (const auto& [key, _] : seen) keys_.push_back(key);
    std::sort(keys_.begin(), keys_.end(), [&](uint64_t a, uint64_t b) {
        const int ta = popsum(a, slots_), tb = popsum(b, slots_);
        return ta != tb ? ta < tb : a < b;
    });
    index_.reserve(keys_.size() * 2);
    for (size_t i = 0; i < keys_.size(); ++i) index_.emplace(keys_[i], int(i));
    const int max_total = keys_.empty() ? 0 : popsum(keys_.back(), slots_);
    block_of_total_.assign(max_total + 2, 0);
    for (const auto& key : keys_) ++block_of_total_[popsum(key, slots_) + 1];
    for (size_t i = 1; i < block_of_total_.size(); ++i)
        block_of_total_[i] += block_of_total_[i - 1];
}

int ReceiverSpace::total(int idx) const { return popsum(keys_[idx], slots_); }

int ReceiverSpace::index_of_key(uint64_t key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

int ReceiverSpace::index_of(const std::vector<int>& counts) const {
    return index_of_key(pack_counts(counts));
}

std::pair<int, int> ReceiverSpace::block(int total) const {
    if (total < 0 || total + 1 >= int(block_of_total_.size())) return {0, 0};
    return {block_of_total_[total], block_of_total_[total + 1]};
}

std::vector<int32_t> ReceiverSpace::shift_table(
    const std::vector<std::pair<int, int>>& deltas) const {
    std::vector<int32_t> table(keys_.size(), -1);
    for (size_t i = 0; i < keys_.size(); ++i) {
        uint64_t out;
        if (apply_deltas(keys_[i], deltas, slots_, 255, 255 * 8, out)) {
            auto it = index_.find(out);
            if (it != index_.end()) table[i] = it->second;
        }
    }
    return table;
}

} // namespace voxmc
