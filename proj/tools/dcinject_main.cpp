#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcinject/config.hpp"
#include "dcinject/dataio.hpp"
#include "dcinject/flsim.hpp"
#include "dcinject/metrics.hpp"
#include "dcinject/partition.hpp"
#include "dcinject/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value config file with dotted keys");
    cmd->add_option("--set", args.overrides, "override one config key (repeatable)")
        ->type_name("KEY=VALUE");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the run seed");
}

dcinject::RunConfig resolve_config(const CommonArgs& args) {
    return dcinject::load_run_config(args.config_path, args.overrides, args.seed, args.out_dir);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct LoadedData {
    dcinject::LabeledDataset train;
    dcinject::LabeledDataset test;
};

LoadedData obtain_datasets(const dcinject::RunConfig& cfg) {
    LoadedData data;
    if (!cfg.data_path.empty()) {
        data.train = dcinject::load_dataset(cfg.data_path);
        data.test = dcinject::load_dataset(cfg.data_test_path);
    } else {
        auto split = dcinject::synth_split(cfg.n_per_class, cfg.n_test_per_class,
                                           cfg.n_classes, cfg.height, cfg.width,
                                           cfg.channels, cfg.synth_seed());
        data.train = std::move(split.first);
        data.test = std::move(split.second);
    }
    data.train.validate();
    data.test.validate();
    if (data.train.images.empty() || data.test.images.empty()) {
        throw dcinject::ConfigError("datasets must be nonempty");
    }
    if (!data.train.images[0].same_shape(data.test.images[0]) ||
        data.train.n_classes != data.test.n_classes) {
        throw dcinject::ConfigError("train and test sets must share shape and classes");
    }
    if (cfg.target_label >= data.train.n_classes) {
        throw dcinject::ConfigError("trigger.target_label must be < dataset n_classes");
    }
    return data;
}

void echo_config(const dcinject::RunConfig& cfg, int h, int w) {
    const std::string echoed = cfg.echo(std::make_pair(h, w));
    fs::create_directories(cfg.out);
    write_text(fs::path(cfg.out) / "resolved_config.txt", echoed);
    std::cout << "resolved config:\n" << echoed;
}

ordered_json round_json(const dcinject::RoundReport& report, bool with_secs) {
    ordered_json j;
    j["round"] = report.round;
    j["clean_acc"] = report.clean_acc;
    j["asr"] = report.asr;
    j["sampled"] = report.sampled;
    j["imag_residual"] = report.imag_residual;
    if (with_secs) j["secs"] = report.secs;
    return j;
}

int cmd_synth(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    if (!cfg.data_path.empty()) {
        throw dcinject::ConfigError("synth generates data; data.path must be empty");
    }
    fs::create_directories(cfg.out);
    const auto split = dcinject::synth_split(cfg.n_per_class, cfg.n_test_per_class,
                                             cfg.n_classes, cfg.height, cfg.width,
                                             cfg.channels, cfg.synth_seed());
    const fs::path train_path = fs::path(cfg.out) / "dataset.bin";
    const fs::path test_path = fs::path(cfg.out) / "test.bin";
    dcinject::save_dataset(split.first, train_path.string());
    dcinject::save_dataset(split.second, test_path.string());
    std::cout << "wrote " << train_path.string() << ": " << split.first.size()
              << " samples, " << cfg.height << "x" << cfg.width << "x" << cfg.channels
              << ", " << split.first.n_classes << " classes\n";
    std::cout << "wrote " << test_path.string() << ": " << split.second.size()
              << " samples (matched test split)\n";
    return kExitOk;
}

int cmd_poison(const CommonArgs& args, const std::string& input, const std::string& output) {
    const auto cfg = resolve_config(args);
    auto ds = dcinject::load_dataset(input);
    if (cfg.target_label >= ds.n_classes) {
        throw dcinject::ConfigError("trigger.target_label must be < dataset n_classes");
    }
    const int h = ds.images.empty() ? cfg.height : ds.images[0].height();
    const int w = ds.images.empty() ? cfg.width : ds.images[0].width();
    const auto trigger = cfg.trigger_config(h, w);

    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    dcinject::Rng rng(dcinject::derive_seed(cfg.seed, {0x706f69736fULL}));
    rng.shuffle(order);
    const std::size_t n_poison = static_cast<std::size_t>(
        std::llround(trigger.poison_ratio * static_cast<double>(ds.size())));

    double psnr_sum = 0.0;
    std::size_t finite_count = 0;
    bool any_infinite = false;
    for (std::size_t i = 0; i < n_poison && i < order.size(); ++i) {
        const std::size_t idx = order[i];
        dcinject::Image triggered = dcinject::triggered_image(
            ds.images[idx], trigger, dcinject::image_noise_counter(ds.images[idx]));
        const double p = dcinject::psnr(ds.images[idx], triggered);
        if (std::isinf(p)) {
            any_infinite = true;
        } else {
            psnr_sum += p;
            ++finite_count;
        }
        ds.images[idx] = std::move(triggered);
        ds.labels[idx] = trigger.target_label;
    }
    dcinject::save_dataset(ds, output);

    ordered_json report;
    report["n_total"] = ds.size();
    report["n_poisoned"] = n_poison;
    if (n_poison == 0) {
        report["mean_psnr_db"] = nullptr;
    } else if (finite_count == 0 && any_infinite) {
        report["mean_psnr_db"] = "inf";
    } else {
        report["mean_psnr_db"] = psnr_sum / static_cast<double>(finite_count);
    }
    write_text(fs::path(output).string() + ".stealth.json", report.dump(2) + "\n");
    std::cout << "wrote " << output << "; poisoned " << n_poison << "/" << ds.size()
              << " samples; mean PSNR "
              << (n_poison == 0 ? std::string("n/a")
                               : (finite_count == 0 ? std::string("inf")
                                                   : dcinject::format_double(
                                                         psnr_sum / static_cast<double>(finite_count))))
              << " dB\n";
    return kExitOk;
}

int run_training(const dcinject::RunConfig& cfg, const LoadedData& data,
                 const fs::path& out_dir, bool quiet) {
    const int h = data.train.images[0].height();
    const int w = data.train.images[0].width();
    const auto fed = cfg.federation_config(h, w);
    const auto plan = dcinject::dirichlet_partition(data.train.labels, fed.n_clients,
                                                    cfg.part_alpha, cfg.partition_seed());
    fs::create_directories(out_dir);
    write_text(out_dir / "partition.json", dcinject::partition_report_json(plan) + "\n");

    const auto triggered_test = dcinject::build_triggered_testset(data.test, fed.trigger);
    if (fed.rounds > 0 && triggered_test.images.empty()) {
        throw dcinject::ConfigError("test set has no samples outside the target label");
    }

    std::ofstream results(out_dir / "results.jsonl", std::ios::trunc);
    if (!results) throw std::runtime_error("cannot write results.jsonl");
    const auto on_round = [&](const dcinject::RoundReport& report) {
        results << round_json(report, false).dump() << "\n";
        results.flush();
        if (!quiet) std::cout << round_json(report, true).dump() << "\n";
    };

    const auto result = dcinject::run_federation(fed, plan, data.train, data.test,
                                                 triggered_test, on_round);

    dcinject::save_checkpoint(result.global, (out_dir / "checkpoint_global.bin").string());
    if (fed.personalization == dcinject::Personalization::fedbn) {
        for (const auto& client : result.clients) {
            dcinject::ModelParams personalized = result.global;
            dcinject::set_personal(personalized, client.personal);
            char name[48];
            std::snprintf(name, sizeof(name), "checkpoint_client_%03d.bin", client.id);
            dcinject::save_checkpoint(personalized, (out_dir / name).string());
        }
    }
    if (!result.reports.empty()) {
        const auto& last = result.reports.back();
        std::cout << "final: clean_acc " << dcinject::format_double(last.clean_acc)
                  << ", asr " << dcinject::format_double(last.asr) << "\n";
    }
    return kExitOk;
}

int cmd_train(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto data = obtain_datasets(cfg);
    echo_config(cfg, data.train.images[0].height(), data.train.images[0].width());
    return run_training(cfg, data, cfg.out, false);
}

struct CellResult {
    std::string name;
    std::string config_hash;
    std::vector<double> accs;
    std::vector<double> asrs;
};

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    std_dev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
}

int cmd_ablate(const CommonArgs& args) {
    const auto base = resolve_config(args);
    if (!base.ablate_components && !base.ablate_alpha_sweep) {
        throw dcinject::ConfigError("ablate: enable ablate.components and/or ablate.alpha_sweep");
    }
    fs::create_directories(base.out);
    const fs::path cells_dir = fs::path(base.out) / "cells";
    fs::create_directories(cells_dir);

    struct Cell {
        std::string name;
        dcinject::RunConfig cfg;
    };
    std::vector<Cell> cells;
    if (base.ablate_components) {
        // toggle grid in ascending component count: none, M, W, S, MW, MS, WS, MWS
        const int rows[8][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
        for (const auto& row : rows) {
            Cell cell;
            cell.cfg = base;
            cell.cfg.use_mfreq = row[0] != 0;
            cell.cfg.use_whvs = row[1] != 0;
            cell.cfg.use_scale = row[2] != 0;
            cell.name = std::string("comp_m") + (row[0] ? "1" : "0") + "_w" +
                        (row[1] ? "1" : "0") + "_s" + (row[2] ? "1" : "0");
            cells.push_back(std::move(cell));
        }
    }
    if (base.ablate_alpha_sweep) {
        for (double alpha : {0.1, 0.5, 1.0, 10.0}) {
            Cell cell;
            cell.cfg = base;
            cell.cfg.part_alpha = alpha;
            cell.name = "alpha_" + dcinject::format_double(alpha);
            cells.push_back(std::move(cell));
        }
    }

    std::vector<CellResult> summary;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        CellResult cr;
        cr.name = cells[ci].name;
        for (int rep = 0; rep < base.ablate_n_seeds; ++rep) {
            dcinject::RunConfig cfg = cells[ci].cfg;
            cfg.seed = dcinject::derive_seed(base.seed, {static_cast<std::uint64_t>(rep)});
            cfg.out = (cells_dir / (cr.name + "_seed" + std::to_string(rep))).string();
            if (rep == 0) cr.config_hash = dcinject::fnv1a_hex(cfg.echo());
            const auto data = obtain_datasets(cfg);
            run_training(cfg, data, cfg.out, true);

            // read back the final round from the cell's results file
            std::ifstream in(fs::path(cfg.out) / "results.jsonl");
            std::string line, last;
            while (std::getline(in, line)) {
                if (!line.empty()) last = line;
            }
            if (last.empty()) throw std::runtime_error("ablate: empty results for " + cr.name);
            const auto j = nlohmann::json::parse(last);
            cr.accs.push_back(j.at("clean_acc").get<double>());
            cr.asrs.push_back(j.at("asr").get<double>());
            std::cout << "cell " << cr.name << " seed " << rep << ": clean_acc "
                      << dcinject::format_double(cr.accs.back()) << ", asr "
                      << dcinject::format_double(cr.asrs.back()) << "\n";
        }
        summary.push_back(std::move(cr));
    }

    std::ostringstream csv;
    csv << "cell,config_hash,clean_acc_mean,clean_acc_std,asr_mean,asr_std,n_seeds\n";
    for (const auto& cr : summary) {
        double acc_mean, acc_std, asr_mean, asr_std;
        mean_std(cr.accs, acc_mean, acc_std);
        mean_std(cr.asrs, asr_mean, asr_std);
        csv << cr.name << "," << cr.config_hash << "," << dcinject::format_double(acc_mean)
            << "," << dcinject::format_double(acc_std) << "," << dcinject::format_double(asr_mean)
            << "," << dcinject::format_double(asr_std) << "," << cr.accs.size() << "\n";
    }
    write_text(fs::path(base.out) / "summary.csv", csv.str());
    std::cout << "wrote " << (fs::path(base.out) / "summary.csv").string() << " ("
              << summary.size() << " cells)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-domain backdoor attack lab for personalized federated learning"};
    app.require_subcommand(1);

    CommonArgs synth_args, poison_args, train_args, ablate_args;
    std::string poison_input, poison_output;

    auto* synth = app.add_subcommand("synth", "synthesize a dataset file");
    add_common(synth, synth_args);
    auto* poison = app.add_subcommand("poison", "apply the trigger to a dataset file");
    add_common(poison, poison_args);
    poison->add_option("input", poison_input, "input dataset")->required();
    poison->add_option("output", poison_output, "output dataset")->required();
    auto* train = app.add_subcommand("train", "run a federation");
    add_common(train, train_args);
    auto* ablate = app.add_subcommand("ablate", "component grid and heterogeneity sweep");
    add_common(ablate, ablate_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_args);
        if (poison->parsed()) return cmd_poison(poison_args, poison_input, poison_output);
        if (train->parsed()) return cmd_train(train_args);
        if (ablate->parsed()) return cmd_ablate(ablate_args);
    } catch (const dcinject::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dcinject::NumericalFault& e) {
        std::cerr << "numerical fault: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
