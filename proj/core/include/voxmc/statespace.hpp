#pragma once

#include "voxmc/model.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace voxmc {

// Truncated joint count spaces for exact master-equation work. Counts are
// packed 8 bits per slot into a 64-bit key, so at most 8 slots of at most
// 255 molecules each. Desk-scale systems fit comfortably; anything larger is
// rejected up front.

// All signalling-count vectors (one slot per voxel) with per-voxel cap and a
// cap on the total. Ordered by (total count, packed key) with contiguous
// per-total blocks exposed: diffusion conserves the total, absorption lowers
// it and emission raises it, so the occupied totals form a known window that
// the master-equation sweeps can restrict themselves to.
class SignalSpace {
  public:
    // allowed_totals, when non-null, restricts enumeration to states whose
    // total lies in the set (e.g. the partial sums of a deterministic burst
    // schedule under a reflecting boundary)
    SignalSpace(int n_voxels, int cap_per_voxel, long long total_cap, long long max_states,
                const std::vector<int>* allowed_totals = nullptr);

    int size() const { return int(keys_.size()); }
    int n_voxels() const { return V_; }
    int cap() const { return cap_; }
    long long total_cap() const { return total_cap_; }
    uint64_t key(int idx) const { return keys_[idx]; }
    int count(int idx, int voxel) const { return int((keys_[idx] >> (8 * voxel)) & 0xff); }
    int total(int idx) const;
    int index_of_key(uint64_t key) const; // -1 if absent
    int index_of(const std::vector<int>& counts) const;

    // [first, last) index range of states with totals in [t_lo, t_hi]
    std::pair<int, int> block_range(int t_lo, int t_hi) const;
    int max_total() const { return int(block_of_total_.size()) - 2; }

    // Target-index table for a fixed count-delta map (diffusion hop, boundary
    // loss, emission, burst shift). Targets outside the space are -1.
    std::vector<int32_t> shift_table(const std::vector<std::pair<int, int>>& deltas) const;

  private:
    int V_;
    int cap_;
    long long total_cap_;
    std::vector<uint64_t> keys_;
    std::unordered_map<uint64_t, int> index_;
    std::vector<int> block_of_total_;
};

// Receiver-side count vectors (slots = species x receiver voxel), built as
// the reachability closure of an initial state under a set of delta maps,
// bounded by a per-slot cap and a total cap. States are ordered by
// (total count, packed key) and contiguous per-total blocks are exposed;
// conservation laws then confine the live probability mass to one block.
class ReceiverSpace {
  public:
    ReceiverSpace(const std::vector<int>& initial,
                  const std::vector<std::vector<std::pair<int, int>>>& maps, int cap_per_slot,
                  long long total_cap, long long max_states);

    int size() const { return int(keys_.size()); }
    int n_slots() const { return slots_; }
    uint64_t key(int idx) const { return keys_[idx]; }
    int count(int idx, int slot) const { return int((keys_[idx] >> (8 * slot)) & 0xff); }
    int total(int idx) const;
    int index_of_key(uint64_t key) const;
    int index_of(const std::vector<int>& counts) const;

    // [first, last) index range of states with the given total count
    std::pair<int, int> block(int total) const;
    int max_total() const { return int(block_of_total_.size()) - 1; }

    std::vector<int32_t> shift_table(const std::vector<std::pair<int, int>>& deltas) const;

  private:
    int slots_;
    std::vector<uint64_t> keys_;
    std::unordered_map<uint64_t, int> index_;
    std::vector<int> block_of_total_; // offsets, size max_total+2
};

uint64_t pack_counts(const std::vector<int>& counts);

} // namespace voxmc
