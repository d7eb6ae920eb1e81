#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "tame/tensor.hpp"

namespace tame::buffers {

struct SelectorSample {
    Tensor x;
    int expert_id = 0;  // inferred task label at insertion time
};

struct PruneSample {
    Tensor x;
    int y = 0;  // class label as seen on the stream
};

// Capacity-bounded uniform subsample of a stream: keeps the capacity
// highest-priority items ever offered under i.i.d. N(0,1) priorities.
// Ties break toward the earlier insertion (relevant only for quantized
// floats; continuous priorities tie with probability zero).
template <class P>
class ReservoirBuffer {
public:
    struct Entry {
        float priority;
        uint64_t seq;
        P payload;
    };

    explicit ReservoirBuffer(int capacity, uint64_t seed = 0)
        : capacity_(capacity), rng_(seed) {}

    // Draws its own priority.
    bool offer(P payload) {
        std::normal_distribution<float> n01(0.0f, 1.0f);
        return offer(std::move(payload), n01(rng_));
    }

    // Shared-draw path: the caller owns the priority draw (one draw per
    // sample may feed several buffers).
    bool offer(P payload, float priority) {
        Entry e{priority, next_seq_++, std::move(payload)};
        if (static_cast<int>(entries_.size()) < capacity_) {
            entries_.push_back(std::move(e));
            std::push_heap(entries_.begin(), entries_.end(), worse_first);
            return true;
        }
        if (capacity_ == 0 || !better(e, entries_.front())) return false;
        std::pop_heap(entries_.begin(), entries_.end(), worse_first);
        entries_.back() = std::move(e);
        std::push_heap(entries_.begin(), entries_.end(), worse_first);
        return true;
    }

    // Read-only view of the retained payloads, arbitrary order.
    std::vector<P> drain() const {
        std::vector<P> out;
        out.reserve(entries_.size());
        for (const Entry& e : entries_) out.push_back(e.payload);
        return out;
    }

    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    const std::vector<Entry>& entries() const { return entries_; }

    void restore_entry(P payload, float priority) {
        offer(std::move(payload), priority);
    }

private:
    static bool better(const Entry& a, const Entry& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.seq < b.seq;
    }
    // Heap comparator: top() is the eviction candidate.
    static bool worse_first(const Entry& a, const Entry& b) { return better(a, b); }

    int capacity_;
    uint64_t next_seq_ = 0;
    std::mt19937_64 rng_;
    std::vector<Entry> entries_;
};

// Snapshot format (little-endian): capacity u32, count u32, then per entry
// priority f32, tensor rank u32 + dims u32s + f32 data, label u32.
void save_snapshot(const ReservoirBuffer<SelectorSample>& buf, std::ostream& out);
void save_snapshot(const ReservoirBuffer<PruneSample>& buf, std::ostream& out);
ReservoirBuffer<SelectorSample> load_selector_snapshot(std::istream& in, uint64_t seed = 0);
ReservoirBuffer<PruneSample> load_prune_snapshot(std::istream& in, uint64_t seed = 0);

}  // namespace tame::buffers
