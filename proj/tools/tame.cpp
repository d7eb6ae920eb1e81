// Command-line front end: run a configured experiment, sweep a parameter, or
// evaluate saved checkpoints against a data directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tame/experiment.hpp"
#include "tame/kernels.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_eval(const std::string& run_dir, const std::string& data_dir) {
    std::ifstream sf(run_dir + "/summary.json");
    if (!sf) throw std::runtime_error("no summary.json under " + run_dir);
    json sum;
    sf >> sum;

    tame::experiment::ExperimentConfig cfg;
    const json& cj = sum.at("config");
    cfg.stream = cj.at("stream").get<std::string>();
    cfg.tasks = cj.at("tasks").get<int>();
    cfg.classes_per_task = cj.at("classes_per_task").get<int>();
    cfg.revisit = cj.at("revisit").get<std::vector<int>>();
    cfg.seed = cj.at("seed").get<uint64_t>();
    cfg.synth_dim = cj.at("synth_dim").get<int>();
    cfg.synth_test_per_task = cj.at("synth_test_per_task").get<int>();
    cfg.synth_train_per_task = 0;  // eval needs test sets only
    cfg.synth_class_sep = cj.at("synth_class_sep").get<double>();
    cfg.synth_task_spread = cj.at("synth_task_spread").get<double>();
    cfg.synth_noise = cj.at("synth_noise").get<double>();
    cfg.data_dir = data_dir.empty() ? cj.at("data_dir").get<std::string>() : data_dir;

    tame::stream::TaskStream ts;
    if (cfg.stream == "split_synthetic") {
        tame::stream::SynthSpec spec;
        spec.dim = cfg.synth_dim;
        spec.tasks = cfg.tasks;
        spec.classes_per_task = cfg.classes_per_task;
        spec.train_per_task = 2;  // placeholder pool; segments are unused here
        spec.test_per_task = cfg.synth_test_per_task;
        spec.class_sep = cfg.synth_class_sep;
        spec.task_spread = cfg.synth_task_spread;
        spec.noise = cfg.synth_noise;
        spec.seed = cfg.seed;
        ts = tame::stream::build_split_synthetic(spec, cfg.revisit);
    } else {
        auto pick = [&](const std::string& n) {
            const std::string p = cfg.data_dir + "/" + n;
            return fs::exists(p) ? p : p + ".gz";
        };
        const tame::idx::IdxData train =
            tame::idx::load_pair(pick("train-images-idx3-ubyte"), pick("train-labels-idx1-ubyte"));
        const tame::idx::IdxData test =
            tame::idx::load_pair(pick("t10k-images-idx3-ubyte"), pick("t10k-labels-idx1-ubyte"));
        ts = cfg.stream == "split_mnist"
                 ? tame::stream::build_split(train, test, {}, cfg.revisit)
                 : tame::stream::build_permuted(train, test, cfg.tasks, cfg.seed, cfg.revisit);
    }

    std::ifstream lf(run_dir + "/checkpoints/label_map.json");
    if (!lf) throw std::runtime_error("no label_map.json under " + run_dir + "/checkpoints");
    json lm_json;
    lf >> lm_json;
    tame::selector::LabelMap lm = lm_json.at("label_map").get<tame::selector::LabelMap>();

    tame::drift::DetectorConfig det;
    tame::experts::ExpertPool pool =
        tame::experts::load_pool(run_dir + "/checkpoints/pool.tame", det);
    tame::nn::Network sel = tame::nn::load_network_file(run_dir + "/checkpoints/selector.tame");

    const tame::metrics::EvalResult r = tame::metrics::evaluate(pool, &sel, lm, ts.tasks);
    std::cout << "ACC " << r.acc * 100.0 << "%\n";
    for (size_t t = 0; t < r.per_task.size(); ++t)
        std::cout << "task " << t << ": " << r.per_task[t] * 100.0 << "%\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tame: task-agnostic continual learning over expert pools"};
    app.require_subcommand(1);

    std::string config_path, out_dir, kernels_opt, data_dir, checkpoint_dir;
    std::string param, values_csv;
    uint64_t seed = 0;
    bool seed_set = false, firewall = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "override the experiment seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_dir, "override the output directory");
        sub->add_option("--kernels", kernels_opt, "kernel backend: auto|scalar|avx2");
    };

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path, "flat key=value config file")->required();
    run->add_flag("--check-task-id-firewall", firewall,
                  "run the stream twice with poisoned task metadata and compare traces");
    add_common(run);

    CLI::App* sw = app.add_subcommand("sweep", "run the config once per parameter value");
    sw->add_option("--config", config_path, "flat key=value config file")->required();
    sw->add_option("--param", param, "config key to sweep (Cp, Cs, alpha, ...)")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();
    add_common(sw);

    CLI::App* ev = app.add_subcommand("eval", "evaluate saved checkpoints");
    ev->add_option("--checkpoint", checkpoint_dir, "run output directory")->required();
    ev->add_option("--data", data_dir, "data directory override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ev->parsed()) return cmd_eval(checkpoint_dir, data_dir);

        tame::experiment::ExperimentConfig cfg = tame::experiment::load_config(config_path);
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (!kernels_opt.empty()) cfg.kernels = kernels_opt;

        if (run->parsed()) {
            if (firewall) {
                tame::experiment::check_task_id_firewall(cfg);
                std::cout << "task-id firewall holds: traces identical under poisoned ids\n";
                return 0;
            }
            const auto res = tame::experiment::run_experiment(cfg);
            std::cout << "experts " << res.expert_count << "  acc " << res.acc * 100.0
                      << "%  (pre-prune " << res.acc_pre_prune * 100.0 << "%)  params "
                      << res.params_surviving << "/" << res.params_total << "  wall "
                      << res.wall_seconds << "s\n"
                      << "artifacts: " << cfg.out << "\n";
            return 0;
        }
        if (sw->parsed()) {
            tame::experiment::sweep(cfg, param, split_csv(values_csv));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
