#include "tame/buffers.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace tame::buffers {

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("buffer snapshot truncated");
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_f32(std::ostream& out, float v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(float));
}

float get_f32(std::istream& in) {
    float v;
    in.read(reinterpret_cast<char*>(&v), sizeof(float));
    if (!in) throw std::runtime_error("buffer snapshot truncated");
    return v;
}

void put_entry(std::ostream& out, float priority, const Tensor& x, uint32_t label) {
    put_f32(out, priority);
    put_u32(out, static_cast<uint32_t>(x.shape.size()));
    for (int d : x.shape) put_u32(out, static_cast<uint32_t>(d));
    out.write(reinterpret_cast<const char*>(x.data()),
              static_cast<std::streamsize>(x.values.size() * sizeof(float)));
    put_u32(out, label);
}

struct RawEntry {
    float priority;
    Tensor x;
    uint32_t label;
};

RawEntry get_entry(std::istream& in) {
    RawEntry e;
    e.priority = get_f32(in);
    const uint32_t rank = get_u32(in);
    std::vector<int> dims;
    for (uint32_t i = 0; i < rank; ++i) dims.push_back(static_cast<int>(get_u32(in)));
    e.x = Tensor(dims);
    in.read(reinterpret_cast<char*>(e.x.data()),
            static_cast<std::streamsize>(e.x.values.size() * sizeof(float)));
    if (!in) throw std::runtime_error("buffer snapshot truncated");
    e.label = get_u32(in);
    return e;
}

template <class B>
void save_impl(const B& buf, std::ostream& out, uint32_t (*label_of)(const typename B::Entry&)) {
    put_u32(out, static_cast<uint32_t>(buf.capacity()));
    put_u32(out, static_cast<uint32_t>(buf.size()));
    for (const auto& e : buf.entries()) put_entry(out, e.priority, e.payload.x, label_of(e));
    if (!out) throw std::runtime_error("buffer snapshot write failed");
}

}  // namespace

void save_snapshot(const ReservoirBuffer<SelectorSample>& buf, std::ostream& out) {
    save_impl(buf, out, +[](const ReservoirBuffer<SelectorSample>::Entry& e) {
        return static_cast<uint32_t>(e.payload.expert_id);
    });
}

void save_snapshot(const ReservoirBuffer<PruneSample>& buf, std::ostream& out) {
    save_impl(buf, out, +[](const ReservoirBuffer<PruneSample>::Entry& e) {
        return static_cast<uint32_t>(e.payload.y);
    });
}

ReservoirBuffer<SelectorSample> load_selector_snapshot(std::istream& in, uint64_t seed) {
    const uint32_t cap = get_u32(in);
    const uint32_t count = get_u32(in);
    ReservoirBuffer<SelectorSample> buf(static_cast<int>(cap), seed);
    for (uint32_t i = 0; i < count; ++i) {
        RawEntry e = get_entry(in);
        buf.restore_entry({std::move(e.x), static_cast<int>(e.label)}, e.priority);
    }
    return buf;
}

ReservoirBuffer<PruneSample> load_prune_snapshot(std::istream& in, uint64_t seed) {
    const uint32_t cap = get_u32(in);
    const uint32_t count = get_u32(in);
    ReservoirBuffer<PruneSample> buf(static_cast<int>(cap), seed);
    for (uint32_t i = 0; i < count; ++i) {
        RawEntry e = get_entry(in);
        buf.restore_entry({std::move(e.x), static_cast<int>(e.label)}, e.priority);
    }
    return buf;
}

}  // namespace tame::buffers
