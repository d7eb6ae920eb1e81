#include "tame/experts.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

namespace tame::experts {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("pool checkpoint truncated");
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}
}  // namespace

ExpertPool::ExpertPool(ExpertFactory factory, drift::DetectorConfig detector, uint64_t seed)
    : factory_(std::move(factory)), detector_(detector),
      init_rng_(static_cast<unsigned>(seed)) {
    detector_.validate();
}

ExpertState& ExpertPool::add_expert() {
    const int id = count();
    auto e = std::make_unique<ExpertState>(id, factory_(init_rng_), detector_.window);
    experts_.push_back(std::move(e));
    active_id_ = id;
    return *experts_.back();
}

ExpertState& ExpertPool::adopt_expert(nn::Network net) {
    const int id = count();
    experts_.push_back(std::make_unique<ExpertState>(id, std::move(net), detector_.window));
    active_id_ = id;
    return *experts_.back();
}

void ExpertPool::set_active(int id) {
    if (id < 0 || id >= count()) throw std::invalid_argument("no expert with id " + std::to_string(id));
    active_id_ = id;
}

Decision probe_and_switch(ExpertPool& pool, const Batch& batch, double active_raw_loss,
                          PoolBuffers* bufs) {
    const auto& det = pool.detector();
    const int mf = det.effective_min_fill();
    const int active = pool.active_id();

    for (const auto& ep : pool.all()) {
        const ExpertState& e = *ep;
        if (!e.smoothed.ready()) continue;
        const auto th = drift::get_threshold(e.window, mf);
        if (!th) continue;
        const double le =
            e.id == active ? active_raw_loss : nn::batch_loss(e.net, batch.x, batch.y);
        const double candidate = det.alpha * le + (1.0 - det.alpha) * *e.smoothed.value;
        if (candidate < *th) {
            pool.set_active(e.id);
            return {e.id == active ? Decision::kStay : Decision::kSwitch, e.id};
        }
    }

    ExpertState& fresh = pool.add_expert();
    if (bufs) bufs->register_expert(fresh.id);
    return {Decision::kCreate, fresh.id};
}

StepRecord train_step(ExpertPool& pool, const Batch& batch, const nn::SgdConfig& sgd,
                      double raw_loss, const nn::LossGrads& lg, int64_t step, Event event) {
    ExpertState& a = pool.active();
    const auto th = drift::get_threshold(a.window, pool.detector().effective_min_fill());
    nn::sgd_step(a.net, lg.grads, sgd, a.opt);
    a.window.push(raw_loss);
    return {step,
            a.id,
            raw_loss,
            a.smoothed.ready() ? *a.smoothed.value : kNan,
            th ? *th : kNan,
            event};
}

std::vector<StepRecord> run_stream(ExpertPool& pool, const BatchSource& next_batch,
                                   const DriverConfig& cfg, PoolBuffers& bufs,
                                   std::mt19937_64& priority_rng) {
    cfg.detector.validate();
    cfg.sgd.validate();
    std::vector<StepRecord> trace;
    std::normal_distribution<float> n01(0.0f, 1.0f);
    const int mf = cfg.detector.effective_min_fill();

    int64_t step = 0;
    for (std::optional<Batch> ob = next_batch(); ob; ob = next_batch(), ++step) {
        const Batch& batch = *ob;
        Event event = Event::kNone;

        if (pool.count() == 0) {
            ExpertState& first = pool.add_expert();
            bufs.register_expert(first.id);
            event = Event::kCreate;
        }

        ExpertState& before = pool.active();
        nn::LossGrads lg = nn::loss_and_grads(before.net, batch.x, batch.y);
        before.smoothed.update(lg.loss, cfg.detector.alpha);

        if (event == Event::kNone && drift::is_deviation(before.smoothed, before.window, mf)) {
            const Decision d = probe_and_switch(pool, batch, lg.loss, &bufs);
            if (d.kind == Decision::kSwitch) event = Event::kSwitch;
            if (d.kind == Decision::kCreate) event = Event::kCreate;
            if (pool.active_id() != before.id) {
                // The handoff target trains on the triggering batch.
                lg = nn::loss_and_grads(pool.active().net, batch.x, batch.y);
            }
        }

        trace.push_back(train_step(pool, batch, cfg.sgd, lg.loss, lg, step, event));

        // Reservoir offers: one shared priority draw per sample feeds both
        // the selector buffer and the active task's prune buffer.
        const int active_id = pool.active_id();
        auto prune_it = bufs.prune.find(active_id);
        if (prune_it == bufs.prune.end())
            throw std::runtime_error("no prune buffer registered for expert " +
                                     std::to_string(active_id));
        const int b = batch.x.dim(0);
        const int64_t sample_numel = batch.x.numel() / b;
        std::vector<int> sample_dims(batch.x.shape.begin() + 1, batch.x.shape.end());
        for (int i = 0; i < b; ++i) {
            const float priority = n01(priority_rng);
            Tensor xi(sample_dims);
            std::copy_n(batch.x.data() + i * sample_numel, sample_numel, xi.data());
            bufs.selector.offer({xi, active_id}, priority);
            prune_it->second.offer({std::move(xi), batch.y[static_cast<size_t>(i)]}, priority);
        }
    }
    return trace;
}

void save_pool(const ExpertPool& pool, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    put_u32(f, static_cast<uint32_t>(pool.count()));
    put_u32(f, static_cast<uint32_t>(pool.active_id()));
    for (const auto& e : pool.all()) nn::save_network(e->net, f);
    if (!f) throw std::runtime_error("pool checkpoint write failed");
}

ExpertPool load_pool(const std::string& path, drift::DetectorConfig detector, uint64_t seed) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    const uint32_t n = get_u32(f);
    const uint32_t active = get_u32(f);
    ExpertPool pool([](std::mt19937&) -> nn::Network {
        throw std::runtime_error("loaded pool cannot create experts");
    }, detector, seed);
    for (uint32_t i = 0; i < n; ++i) {
        nn::Network net = nn::load_network(f);
        pool.adopt_expert(std::move(net));
    }
    if (n > 0) pool.set_active(static_cast<int>(active));
    return pool;
}

}  // namespace tame::experts
