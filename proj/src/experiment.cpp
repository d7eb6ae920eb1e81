#include "tame/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tame/kernels.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace tame::experiment {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void stage_fail(const std::string& stage, const std::exception& e) {
    throw std::runtime_error("stage '" + stage + "' failed: " + e.what());
}

uint64_t sub_seed(uint64_t seed, uint32_t tag, uint32_t n = 0) {
    // splitmix-style mixing keeps per-component streams decorrelated.
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1) + 0x85ebca6bULL * (n + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum SeedTag : uint32_t {
    kSeedInit = 1,
    kSeedShuffle = 2,
    kSeedPriority = 3,
    kSeedSelector = 4,
    kSeedSnapshot = 5,
    kSeedRetrain = 6,
};

// --- config -----------------------------------------------------------------

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::invalid_argument("bad boolean value: " + v);
}

}  // namespace

void apply_override(ExperimentConfig& c, const std::string& key_in, const std::string& value) {
    std::string key = key_in;
    // CLI sweep aliases.
    if (key == "Cp") key = "cp";
    if (key == "Cs") key = "cs";

    if (key == "stream") c.stream = value;
    else if (key == "data_dir") c.data_dir = value;
    else if (key == "tasks") c.tasks = std::stoi(value);
    else if (key == "classes_per_task") c.classes_per_task = std::stoi(value);
    else if (key == "revisit") c.revisit = parse_int_list(value);
    else if (key == "epochs") c.epochs = std::stoi(value);
    else if (key == "batch_size") c.batch_size = std::stoi(value);
    else if (key == "alpha") c.alpha = std::stod(value);
    else if (key == "window") c.window = std::stoi(value);
    else if (key == "min_fill") c.min_fill = std::stoi(value);
    else if (key == "cs") c.cs = std::stoi(value);
    else if (key == "cp") c.cp = std::stoi(value);
    else if (key == "expert_prune_rate") c.expert_prune_rate = std::stod(value);
    else if (key == "selector_prune_rate") c.selector_prune_rate = std::stod(value);
    else if (key == "retrain_epochs") c.retrain_epochs = std::stoi(value);
    else if (key == "retrain_lr") c.retrain_lr = std::stod(value);
    else if (key == "retrain_weight_decay") c.retrain_weight_decay = std::stod(value);
    else if (key == "lr") c.lr = std::stod(value);
    else if (key == "momentum") c.momentum = std::stod(value);
    else if (key == "nesterov") c.nesterov = parse_bool(value);
    else if (key == "weight_decay") c.weight_decay = std::stod(value);
    else if (key == "expert_hidden") c.expert_hidden = std::stoi(value);
    else if (key == "selector_hidden") c.selector_hidden = std::stoi(value);
    else if (key == "selector_epochs") c.selector_epochs = std::stoi(value);
    else if (key == "synth_dim") c.synth_dim = std::stoi(value);
    else if (key == "synth_train_per_task") c.synth_train_per_task = std::stoi(value);
    else if (key == "synth_test_per_task") c.synth_test_per_task = std::stoi(value);
    else if (key == "synth_class_sep") c.synth_class_sep = std::stod(value);
    else if (key == "synth_task_spread") c.synth_task_spread = std::stod(value);
    else if (key == "synth_noise") c.synth_noise = std::stod(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "kernels") c.kernels = value;
    else if (key == "out") c.out = value;
    else if (key == "eval_per_segment") c.eval_per_segment = parse_bool(value);
    else if (key == "save_buffers") c.save_buffers = parse_bool(value);
    else throw std::invalid_argument("unknown config key: " + key_in);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

namespace {

// --- pipeline pieces --------------------------------------------------------

stream::TaskStream build_stream_for(const ExperimentConfig& c) {
    if (c.stream == "split_synthetic") {
        stream::SynthSpec spec;
        spec.dim = c.synth_dim;
        spec.tasks = c.tasks;
        spec.classes_per_task = c.classes_per_task;
        spec.train_per_task = c.synth_train_per_task;
        spec.test_per_task = c.synth_test_per_task;
        spec.class_sep = c.synth_class_sep;
        spec.task_spread = c.synth_task_spread;
        spec.noise = c.synth_noise;
        spec.seed = c.seed;
        return stream::build_split_synthetic(spec, c.revisit);
    }
    const std::string train_img = c.data_dir + "/train-images-idx3-ubyte";
    const std::string train_lbl = c.data_dir + "/train-labels-idx1-ubyte";
    const std::string test_img = c.data_dir + "/t10k-images-idx3-ubyte";
    const std::string test_lbl = c.data_dir + "/t10k-labels-idx1-ubyte";
    auto pick = [](const std::string& p) { return fs::exists(p) ? p : p + ".gz"; };
    const idx::IdxData train = idx::load_pair(pick(train_img), pick(train_lbl));
    const idx::IdxData test = idx::load_pair(pick(test_img), pick(test_lbl));
    if (c.stream == "split_mnist") return stream::build_split(train, test, {}, c.revisit);
    if (c.stream == "permuted_mnist")
        return stream::build_permuted(train, test, c.tasks, c.seed, c.revisit);
    throw std::invalid_argument("unknown stream kind: " + c.stream);
}

experts::ExpertFactory make_factory(const ExperimentConfig& c, const stream::TaskStream& s) {
    const int classes = s.classes_per_task;
    const int hidden = c.expert_hidden;
    if (s.input_dims.size() == 3) {
        const int ch = s.input_dims[0], h = s.input_dims[1], w = s.input_dims[2];
        return [=](std::mt19937& rng) {
            nn::Network net = nn::make_conv_expert(ch, h, w, classes, hidden);
            nn::init_kaiming(net, rng);
            return net;
        };
    }
    const int dim = s.input_dims[0];
    return [=](std::mt19937& rng) {
        nn::Network net = nn::make_mlp(dim, hidden, classes);
        nn::init_kaiming(net, rng);
        return net;
    };
}

void write_csv_double(std::FILE* f, double v) {
    if (std::isnan(v)) std::fputs("nan", f);
    else std::fprintf(f, "%.6g", v);
}

void write_trace_csv(const std::string& path, const std::vector<experts::StepRecord>& trace) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fputs("step,active_expert,raw_loss,smoothed_loss,threshold,event\n", f);
    for (const auto& r : trace) {
        std::fprintf(f, "%lld,%d,", static_cast<long long>(r.step), r.expert);
        write_csv_double(f, r.raw_loss);
        std::fputc(',', f);
        write_csv_double(f, r.smoothed);
        std::fputc(',', f);
        write_csv_double(f, r.threshold);
        const char* ev = r.event == experts::Event::kCreate   ? "create"
                         : r.event == experts::Event::kSwitch ? "switch"
                                                              : "none";
        std::fprintf(f, ",%s\n", ev);
    }
    std::fclose(f);
}

void write_matrix_csv(const std::string& path, const metrics::AccuracyMatrix& m, size_t tasks) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fputs("segment", f);
    for (size_t t = 0; t < tasks; ++t) std::fprintf(f, ",task_%zu", t);
    std::fputc('\n', f);
    for (size_t r = 0; r < m.rows.size(); ++r) {
        std::fprintf(f, "%zu", r);
        for (size_t t = 0; t < tasks; ++t) {
            std::fputc(',', f);
            write_csv_double(f, t < m.rows[r].size() ? m.rows[r][t] : kNan);
        }
        std::fputc('\n', f);
    }
    std::fclose(f);
}

void write_predictions_csv(const std::string& path,
                           const std::vector<metrics::PredictionRecord>& preds) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fputs("task,sample,true_class,pred_class,expert\n", f);
    for (const auto& p : preds)
        std::fprintf(f, "%d,%d,%d,%d,%d\n", p.task, p.sample, p.true_global, p.pred_global,
                     p.expert);
    std::fclose(f);
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["stream"] = c.stream;
    j["data_dir"] = c.data_dir;
    j["tasks"] = c.tasks;
    j["classes_per_task"] = c.classes_per_task;
    j["revisit"] = c.revisit;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["alpha"] = c.alpha;
    j["window"] = c.window;
    j["min_fill"] = c.min_fill;
    j["cs"] = c.cs;
    j["cp"] = c.cp;
    j["expert_prune_rate"] = c.expert_prune_rate;
    j["selector_prune_rate"] = c.selector_prune_rate;
    j["retrain_epochs"] = c.retrain_epochs;
    j["retrain_lr"] = c.retrain_lr;
    j["retrain_weight_decay"] = c.retrain_weight_decay;
    j["lr"] = c.lr;
    j["momentum"] = c.momentum;
    j["nesterov"] = c.nesterov;
    j["weight_decay"] = c.weight_decay;
    j["expert_hidden"] = c.expert_hidden;
    j["selector_hidden"] = c.selector_hidden;
    j["selector_epochs"] = c.selector_epochs;
    j["synth_dim"] = c.synth_dim;
    j["synth_train_per_task"] = c.synth_train_per_task;
    j["synth_test_per_task"] = c.synth_test_per_task;
    j["synth_class_sep"] = c.synth_class_sep;
    j["synth_task_spread"] = c.synth_task_spread;
    j["synth_noise"] = c.synth_noise;
    j["seed"] = c.seed;
    j["kernels"] = c.kernels;
    return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;

    try {
        kernels::select(kernels::parse_backend(cfg.kernels.c_str()));
    } catch (const std::exception& e) {
        stage_fail("kernels", e);
    }
    res.kernel_backend = kernels::active().name;

    stream::TaskStream ts;
    try {
        ts = build_stream_for(cfg);
    } catch (const std::exception& e) {
        stage_fail("stream", e);
    }

    drift::DetectorConfig det{cfg.alpha, cfg.window, cfg.min_fill};
    nn::SgdConfig sgd{static_cast<float>(cfg.lr), static_cast<float>(cfg.momentum), cfg.nesterov,
                      static_cast<float>(cfg.weight_decay), cfg.batch_size};
    experts::DriverConfig driver{det, sgd};

    experts::ExpertPool pool(make_factory(cfg, ts), det, sub_seed(cfg.seed, kSeedInit));
    experts::PoolBuffers bufs(cfg.cs, cfg.cp, sub_seed(cfg.seed, kSeedPriority, 1));
    std::mt19937_64 priority_rng(sub_seed(cfg.seed, kSeedPriority));

    const size_t n_tasks = ts.tasks.size();
    std::vector<int> expert_task;  // expert id -> ground-truth task of its creation segment
    res.task_owner.assign(n_tasks, -1);

    // --- driver loop, one segment at a time ---------------------------------
    try {
        for (size_t si = 0; si < ts.segments.size(); ++si) {
            const stream::Segment& seg = ts.segments[si];
            stream::BatchPlan plan{cfg.epochs, cfg.batch_size,
                                   sub_seed(cfg.seed, kSeedShuffle, static_cast<uint32_t>(si))};
            auto src = stream::make_segment_source(seg, plan);
            std::vector<experts::StepRecord> part =
                experts::run_stream(pool, src, driver, bufs, priority_rng);
            for (auto& r : part) r.step += static_cast<int64_t>(res.trace.size());

            for (const auto& r : part) {
                if (r.event == experts::Event::kCreate) {
                    expert_task.push_back(seg.task);
                    if (res.task_owner[static_cast<size_t>(seg.task)] < 0)
                        res.task_owner[static_cast<size_t>(seg.task)] = r.expert;
                    res.create_events++;
                }
            }
            res.trace.insert(res.trace.end(), part.begin(), part.end());
            res.segment_end_steps.push_back(static_cast<int64_t>(res.trace.size()));

            // Snapshot row: selector trained on the current buffer, evaluated
            // on every task seen so far.
            if (cfg.eval_per_segment) {
                selector::LabelMap lm;
                for (int e = 0; e < pool.count(); ++e)
                    lm.push_back(ts.tasks[static_cast<size_t>(expert_task[static_cast<size_t>(e)])]
                                     .classes);
                std::mt19937 srng(
                    static_cast<unsigned>(sub_seed(cfg.seed, kSeedSnapshot, static_cast<uint32_t>(si))));
                selector::TrainSchedule sched;
                sched.epochs = cfg.selector_epochs;
                sched.sgd.batch_size = cfg.batch_size;
                nn::Network snap = selector::train_selector(bufs.selector.drain(), pool.count(),
                                                            cfg.selector_hidden, sched, srng);
                std::vector<bool> seen(n_tasks, false);
                for (size_t sj = 0; sj <= si; ++sj)
                    seen[static_cast<size_t>(ts.segments[sj].task)] = true;
                metrics::EvalResult row_eval = metrics::evaluate(pool, &snap, lm, ts.tasks);
                std::vector<double> row(n_tasks, kNan);
                for (size_t t = 0; t < n_tasks; ++t)
                    if (seen[t]) row[t] = row_eval.per_task[t];
                res.matrix.rows.push_back(std::move(row));
            }
        }
    } catch (const std::exception& e) {
        stage_fail("run_stream", e);
    }
    res.expert_count = pool.count();

    // --- label map from creation bookkeeping --------------------------------
    for (int e = 0; e < pool.count(); ++e)
        res.label_map.push_back(
            ts.tasks[static_cast<size_t>(expert_task[static_cast<size_t>(e)])].classes);

    // --- selector training ---------------------------------------------------
    nn::Network sel;
    std::vector<buffers::SelectorSample> sel_samples;
    try {
        sel_samples = bufs.selector.drain();
        std::mt19937 srng(static_cast<unsigned>(sub_seed(cfg.seed, kSeedSelector)));
        selector::TrainSchedule sched;
        sched.epochs = cfg.selector_epochs;
        sched.sgd.batch_size = cfg.batch_size;
        sel = selector::train_selector(sel_samples, pool.count(), cfg.selector_hidden, sched, srng);
    } catch (const std::exception& e) {
        stage_fail("selector", e);
    }

    // --- pre-prune evaluation -------------------------------------------------
    try {
        const metrics::EvalResult pre = metrics::evaluate(pool, &sel, res.label_map, ts.tasks);
        res.acc_pre_prune = pre.acc;
        res.per_task_pre_prune = pre.per_task;
    } catch (const std::exception& e) {
        stage_fail("evaluate", e);
    }

    // --- pruning and retraining ----------------------------------------------
    try {
        std::mt19937 sel_rng(static_cast<unsigned>(sub_seed(cfg.seed, kSeedRetrain, 0xffff)));
        selector::prune_l1(sel, cfg.selector_prune_rate);
        if (cfg.selector_prune_rate > 0.0) {
            std::vector<Tensor> xs;
            std::vector<int> ys;
            for (const auto& s : sel_samples) {
                xs.push_back(s.x);
                ys.push_back(s.expert_id);
            }
            selector::TrainSchedule sched;
            sched.epochs = cfg.retrain_epochs;
            sched.sgd = nn::SgdConfig{static_cast<float>(cfg.retrain_lr), 0.0f, false,
                                      static_cast<float>(cfg.retrain_weight_decay),
                                      cfg.batch_size};
            selector::train_on_samples(sel, xs, ys, sched, sel_rng);
        }

        selector::RetrainConfig rcfg;
        rcfg.epochs = cfg.retrain_epochs;
        rcfg.sgd = nn::SgdConfig{static_cast<float>(cfg.retrain_lr), 0.0f, false,
                                 static_cast<float>(cfg.retrain_weight_decay), cfg.batch_size};
        for (int e = 0; e < pool.count(); ++e) {
            selector::prune_l1(pool.expert(e).net, cfg.expert_prune_rate);
            auto it = bufs.prune.find(e);
            std::mt19937 rng(
                static_cast<unsigned>(sub_seed(cfg.seed, kSeedRetrain, static_cast<uint32_t>(e))));
            selector::retrain_pruned(pool.expert(e).net,
                                     it == bufs.prune.end()
                                         ? std::vector<buffers::PruneSample>{}
                                         : it->second.drain(),
                                     rcfg, rng);
        }
    } catch (const std::exception& e) {
        stage_fail("prune_retrain", e);
    }

    // --- final evaluation -------------------------------------------------
    try {
        const metrics::EvalResult fin =
            metrics::evaluate(pool, &sel, res.label_map, ts.tasks, &res.predictions);
        res.acc = fin.acc;
        res.per_task = fin.per_task;
    } catch (const std::exception& e) {
        stage_fail("evaluate", e);
    }

    res.params_total = sel.param_count();
    res.params_surviving = sel.surviving_param_count();
    for (int e = 0; e < pool.count(); ++e) {
        res.params_total += pool.expert(e).net.param_count();
        res.params_surviving += pool.expert(e).net.surviving_param_count();
    }

    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // --- artifacts ----------------------------------------------------------
    if (cfg.write_artifacts) {
        try {
            fs::create_directories(cfg.out);
            fs::create_directories(cfg.out + "/checkpoints");
            write_trace_csv(cfg.out + "/trace.csv", res.trace);
            write_matrix_csv(cfg.out + "/acc_matrix.csv", res.matrix, n_tasks);
            write_predictions_csv(cfg.out + "/predictions.csv", res.predictions);

            experts::save_pool(pool, cfg.out + "/checkpoints/pool.tame");
            nn::save_network_file(sel, cfg.out + "/checkpoints/selector.tame");

            json lm;
            lm["label_map"] = res.label_map;
            lm["task_owner"] = res.task_owner;
            lm["classes_per_task"] = ts.classes_per_task;
            std::ofstream(cfg.out + "/checkpoints/label_map.json") << lm.dump(2) << "\n";

            if (cfg.save_buffers) {
                fs::create_directories(cfg.out + "/buffers");
                std::ofstream sf(cfg.out + "/buffers/selector.snap", std::ios::binary);
                buffers::save_snapshot(bufs.selector, sf);
                for (const auto& [id, buf] : bufs.prune) {
                    std::ofstream pf(cfg.out + "/buffers/prune_" + std::to_string(id) + ".snap",
                                     std::ios::binary);
                    buffers::save_snapshot(buf, pf);
                }
            }

            json sum;
            sum["acc"] = res.acc;
            sum["acc_pre_prune"] = res.acc_pre_prune;
            sum["per_task"] = res.per_task;
            sum["per_task_pre_prune"] = res.per_task_pre_prune;
            sum["expert_count"] = res.expert_count;
            sum["create_events"] = res.create_events;
            sum["params_total"] = res.params_total;
            sum["params_surviving"] = res.params_surviving;
            sum["wall_seconds"] = res.wall_seconds;
            sum["kernel_backend"] = res.kernel_backend;
            sum["task_owner"] = res.task_owner;
            sum["config"] = config_json(cfg);
            std::ofstream(cfg.out + "/summary.json") << sum.dump(2) << "\n";
        } catch (const std::exception& e) {
            stage_fail("artifacts", e);
        }
    }
    return res;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& base, const std::string& param,
                              const std::vector<std::string>& values) {
    std::vector<SweepPoint> points;
    for (const std::string& v : values) {
        ExperimentConfig c = base;
        apply_override(c, param, v);
        c.out = base.out + "/" + param + "_" + v;
        const ExperimentResult r = run_experiment(c);
        points.push_back({v, r.acc, r.expert_count});
        std::cout << param << "=" << v << " acc=" << r.acc
                  << " experts=" << r.expert_count << "\n";
    }
    if (base.write_artifacts) {
        fs::create_directories(base.out);
        std::ofstream f(base.out + "/sweep_summary.csv");
        f << param << ",acc,expert_count\n";
        char buf[64];
        for (const auto& p : points) {
            std::snprintf(buf, sizeof buf, "%.6g", p.acc);
            f << p.value << "," << buf << "," << p.expert_count << "\n";
        }
    }
    return points;
}

void check_task_id_firewall(const ExperimentConfig& cfg) {
    auto run_trace = [&](bool poison) {
        stream::TaskStream ts = build_stream_for(cfg);
        if (poison) {
            // Scramble the evaluation-only task metadata; batches unchanged.
            std::mt19937_64 rng(0xdecafu);
            for (auto& seg : ts.segments)
                seg.task = static_cast<int>(rng() % ts.tasks.size());
        }
        drift::DetectorConfig det{cfg.alpha, cfg.window, cfg.min_fill};
        nn::SgdConfig sgd{static_cast<float>(cfg.lr), static_cast<float>(cfg.momentum),
                          cfg.nesterov, static_cast<float>(cfg.weight_decay), cfg.batch_size};
        experts::DriverConfig driver{det, sgd};
        experts::ExpertPool pool(make_factory(cfg, ts), det, sub_seed(cfg.seed, kSeedInit));
        experts::PoolBuffers bufs(cfg.cs, cfg.cp, sub_seed(cfg.seed, kSeedPriority, 1));
        std::mt19937_64 prng(sub_seed(cfg.seed, kSeedPriority));
        std::vector<experts::StepRecord> trace;
        for (size_t si = 0; si < ts.segments.size(); ++si) {
            stream::BatchPlan plan{cfg.epochs, cfg.batch_size,
                                   sub_seed(cfg.seed, kSeedShuffle, static_cast<uint32_t>(si))};
            auto src = stream::make_segment_source(ts.segments[si], plan);
            auto part = experts::run_stream(pool, src, driver, bufs, prng);
            trace.insert(trace.end(), part.begin(), part.end());
        }
        return trace;
    };

    const auto clean = run_trace(false);
    const auto poisoned = run_trace(true);
    if (clean.size() != poisoned.size())
        throw std::runtime_error("task-id firewall breached: trace lengths differ");
    for (size_t i = 0; i < clean.size(); ++i) {
        const auto& a = clean[i];
        const auto& b = poisoned[i];
        const bool eq = a.step == b.step && a.expert == b.expert && a.raw_loss == b.raw_loss &&
                        ((std::isnan(a.smoothed) && std::isnan(b.smoothed)) ||
                         a.smoothed == b.smoothed) &&
                        ((std::isnan(a.threshold) && std::isnan(b.threshold)) ||
                         a.threshold == b.threshold) &&
                        a.event == b.event;
        if (!eq)
            throw std::runtime_error("task-id firewall breached at step " + std::to_string(i));
    }
}

}  // namespace tame::experiment
