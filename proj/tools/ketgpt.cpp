// ketgpt command-line front end: corpus ingestion, generator/classifier
// training, constrained generation, the random baseline, validation, and
// structural analysis.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ketgpt/classifier.hpp"
#include "ketgpt/corpus.hpp"
#include "ketgpt/generator.hpp"
#include "ketgpt/qasm.hpp"
#include "ketgpt/random_gen.hpp"
#include "ketgpt/structure.hpp"
#include "ketgpt/tensor.hpp"
#include "ketgpt/vocab.hpp"

namespace fs = std::filesystem;
using namespace ketgpt;

namespace {

// Hyperparameters shared by the training subcommands. Precedence:
// built-in defaults < --config file < explicit flags.
struct Hyper {
    nn::ModelConfig model;
    nn::TrainConfig train;
};

void apply_config_file(Hyper& h, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    nlohmann::json j;
    in >> j;
    if (j.contains("n_embd")) h.model.n_embd = j["n_embd"];
    if (j.contains("n_layer")) h.model.n_layer = j["n_layer"];
    if (j.contains("n_head")) h.model.n_head = j["n_head"];
    if (j.contains("n_positions")) h.model.n_positions = j["n_positions"];
    if (j.contains("epochs")) h.train.epochs = j["epochs"];
    if (j.contains("learning_rate")) h.train.learning_rate = j["learning_rate"];
    if (j.contains("batch_size")) h.train.batch_size = j["batch_size"];
}

// Attaches --seed/--config/--jobs plus hyperparameter override flags to a
// training-capable subcommand and returns a callback resolving precedence.
struct HyperFlags {
    std::string config_path;
    int n_embd = -1, n_layer = -1, n_head = -1, n_positions = -1;
    int epochs = -1, batch_size = -1;
    double learning_rate = -1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON hyperparameter file");
        cmd->add_option("--n-embd", n_embd, "embedding width");
        cmd->add_option("--n-layer", n_layer, "transformer layers");
        cmd->add_option("--n-head", n_head, "attention heads");
        cmd->add_option("--n-positions", n_positions, "context length");
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--learning-rate", learning_rate, "AdamW learning rate");
        cmd->add_option("--batch-size", batch_size, "sequences per step");
    }

    Hyper resolve(Hyper h, uint64_t seed) const {
        if (!config_path.empty()) apply_config_file(h, config_path);
        if (n_embd > 0) h.model.n_embd = n_embd;
        if (n_layer > 0) h.model.n_layer = n_layer;
        if (n_head > 0) h.model.n_head = n_head;
        if (n_positions > 0) h.model.n_positions = n_positions;
        if (epochs > 0) h.train.epochs = epochs;
        if (learning_rate > 0) h.train.learning_rate = learning_rate;
        if (batch_size > 0) h.train.batch_size = batch_size;
        h.train.seed = seed;
        return h;
    }
};

Hyper paper_generator_defaults() {
    Hyper h;
    h.model.n_embd = 768;
    h.model.n_layer = 3;
    h.model.n_head = 4;
    h.model.n_positions = 1024;
    h.train.epochs = 5;
    h.train.learning_rate = 5e-5;
    h.train.batch_size = 4;
    return h;
}

Hyper paper_classifier_defaults() {
    Hyper h;
    h.model.n_embd = 768;
    h.model.n_layer = 6;
    h.model.n_head = 12;
    h.model.n_positions = 512;
    h.train.epochs = 3;
    h.train.learning_rate = 5e-5;
    h.train.batch_size = 4;
    return h;
}

std::vector<fs::path> qasm_files_in(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".qasm")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

structure::Source source_from_name(const std::string& name) {
    if (name.rfind("ketgpt_", 0) == 0) return structure::Source::KetGpt;
    if (name.rfind("random_", 0) == 0) return structure::Source::Random;
    return structure::Source::Real;
}

int cmd_ingest(const std::string& dir, const std::string& out) {
    auto res = corpus::ingest(dir);
    res.stats.save_json(out);
    auto v = vocab::build_vocab(res.stats);
    std::cout << "ingested " << res.stats.file_count() << " files ("
              << res.skipped.size() << " skipped), vocabulary " << v.size()
              << " tokens -> " << out << "\n";
    for (const auto& s : res.skipped) std::cout << "  skipped " << s << "\n";
    return 0;
}

int cmd_train_generator(const std::string& stats_path, const std::string& corpus_dir,
                        const std::string& out, const Hyper& h) {
    auto stats = corpus::CorpusStats::load_json(stats_path);
    auto res = corpus::ingest(corpus_dir);
    auto trained = generator::train_generator(res.circuits, stats, h.model, h.train);
    trained.bundle.save(out);
    std::cout << "trained generator on " << res.circuits.size() << " circuits, "
              << h.train.epochs << " epochs; final loss "
              << trained.epoch_losses.back() << " -> " << out << "\n";
    return 0;
}

int cmd_generate(const std::string& model_path, int count, const std::string& out_dir,
                 uint64_t seed, int top_k, int no_repeat) {
    auto bundle = generator::GeneratorBundle::load(model_path);
    fs::create_directories(out_dir);
    nlohmann::json manifest = nlohmann::json::array();
    for (int i = 0; i < count; i++) {
        uint64_t s = seed + static_cast<uint64_t>(i);
        auto t0 = std::chrono::steady_clock::now();
        auto rec = generator::generate(bundle.model, bundle.vocab, bundle.stats, s,
                                       top_k, no_repeat);
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        std::string name = "ketgpt_" + std::to_string(s) + "_" +
                           std::to_string(rec.qubit_count) + "q_" +
                           std::to_string(rec.achieved_gates) + "g.qasm";
        std::ofstream f(fs::path(out_dir) / name);
        f << qasm::serialize(rec.circuit);
        bool valid = qasm::validate(rec.circuit).violations.empty();
        manifest.push_back({{"file", name},
                            {"seed", s},
                            {"qubit_count", rec.qubit_count},
                            {"target_gates", rec.target_gates},
                            {"achieved_gates", rec.achieved_gates},
                            {"stopped_by_eos", rec.stopped_by_eos},
                            {"valid", valid},
                            {"wall_time_s", secs}});
        if (rec.stopped_by_eos && rec.achieved_gates < rec.target_gates)
            std::cout << "warning: " << name << " stopped early at "
                      << rec.achieved_gates << "/" << rec.target_gates
                      << " gates\n";
    }
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << '\n';
    std::cout << "generated " << count << " circuits -> " << out_dir << "\n";
    return 0;
}

int cmd_random(const std::string& stats_path, int count, const std::string& out_dir,
               uint64_t seed) {
    auto stats = corpus::CorpusStats::load_json(stats_path);
    auto v = vocab::build_vocab(stats);
    fs::create_directories(out_dir);
    for (int i = 0; i < count; i++) {
        uint64_t s = seed + static_cast<uint64_t>(i);
        auto c = random_gen::random_circuit(v, stats, s);
        std::string name = "random_" + std::to_string(s) + "_" +
                           std::to_string(c.qreg_sizes.at("q")) + "q_" +
                           std::to_string(qasm::gate_count(c)) + "g.qasm";
        std::ofstream f(fs::path(out_dir) / name);
        f << qasm::serialize(c);
    }
    std::cout << "wrote " << count << " random circuits -> " << out_dir << "\n";
    return 0;
}

int cmd_train_classifier(const std::string& real_dir, const std::string& random_dir,
                         const std::string& out, double split, const Hyper& h) {
    auto real = corpus::ingest(real_dir);
    auto rnd = corpus::ingest(random_dir);
    size_t n = std::min(real.circuits.size(), rnd.circuits.size());
    real.circuits.resize(n);
    real.stats.file_names.resize(n);
    rnd.circuits.resize(n);
    auto res = classifier::train_classifier(real.circuits, rnd.circuits, h.model,
                                            h.train, split, real.stats.file_names);
    res.bundle.save(out);

    nlohmann::json report{
        {"examples_per_class", n},
        {"train_fraction", split},
        {"epoch_losses", res.epoch_losses},
        {"confusion",
         {{"tp", res.held_out.tp},
          {"tn", res.held_out.tn},
          {"fp", res.held_out.fp},
          {"fn", res.held_out.fn}}},
        {"accuracy", res.held_out.accuracy()},
        {"shared_family_prefixes", res.split.shared_prefixes}};
    fs::path report_path = fs::path(out).replace_extension(".eval.json");
    std::ofstream rf(report_path);
    rf << report.dump(2) << '\n';
    std::cout << "held-out accuracy " << res.held_out.accuracy() << " over "
              << res.held_out.total() << " examples -> " << out << ", "
              << report_path.string() << "\n";
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& dir) {
    auto bundle = classifier::ClassifierBundle::load(model_path);
    auto files = qasm_files_in(dir);
    if (files.empty()) throw std::runtime_error("no .qasm files in " + dir);
    int real = 0;
    for (const auto& f : files) {
        auto [label, prob] = bundle.classify_text(read_file(f));
        if (label == 0) real++;
        std::cout << f.filename().string() << " label=" << label
                  << " p=" << prob << "\n";
    }
    std::cout << "real-fraction " << real / static_cast<double>(files.size())
              << " (" << real << "/" << files.size() << ")\n";
    return 0;
}

int cmd_validate(const std::string& dir) {
    auto files = qasm_files_in(dir);
    if (files.empty()) throw std::runtime_error("no .qasm files in " + dir);
    int passed = 0;
    for (const auto& f : files) {
        std::string why;
        try {
            auto parsed = qasm::parse(read_file(f), qasm::ParseMode::Strict);
            auto rep = qasm::validate(parsed.circuit);
            if (rep.violations.empty()) {
                passed++;
                continue;
            }
            why = rep.violations.front().message;
        } catch (const qasm::SyntaxError& e) {
            why = e.what();
        }
        std::cout << f.filename().string() << ": " << why << "\n";
    }
    std::cout.setf(std::ios::fixed);
    std::cout.precision(1);
    std::cout << 100.0 * passed / files.size() << "% valid (" << passed << "/"
              << files.size() << ")\n";
    return 0;
}

int cmd_analyze(const std::vector<std::string>& dirs, const std::string& out) {
    std::vector<structure::MetricRow> rows;
    for (const auto& dir : dirs)
        for (const auto& f : qasm_files_in(dir)) {
            structure::MetricRow r;
            r.name = f.filename().string();
            r.source = source_from_name(r.name);
            r.metrics = structure::extract_metrics(qasm::parse(read_file(f)).circuit);
            rows.push_back(std::move(r));
        }
    if (rows.empty()) throw std::runtime_error("no .qasm files found");
    structure::write_metrics_csv(out, rows);
    std::cout << "wrote metrics for " << rows.size() << " circuits -> " << out
              << "\n";
    return 0;
}

std::vector<structure::MetricRow> read_metrics_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv");
    std::vector<structure::MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        structure::MetricRow r;
        std::getline(ss, cell, ',');
        if (cell == "random") r.source = structure::Source::Random;
        else if (cell == "ketgpt") r.source = structure::Source::KetGpt;
        else r.source = structure::Source::Real;
        std::getline(ss, r.name, ',');
        for (int i = 0; i < structure::kNumMetrics; i++) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("short metrics row: " + line);
            r.metrics[i] = std::stod(cell);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

int cmd_cluster(const std::string& csv, const std::string& out, int k,
                uint64_t seed) {
    auto rows = read_metrics_csv(csv);
    auto report = structure::cluster(rows, k, seed);
    structure::write_clusters_csv(out, report);
    fs::path summary = fs::path(out).replace_extension(".summary.json");
    structure::write_clusters_summary_json(summary, report);
    std::cout << report.total_clusters << " clusters over " << rows.size()
              << " circuits -> " << out << ", " << summary.string() << "\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_selftest() {
    // 1. gradient check on a tiny model, both heads
    nn::ModelConfig cfg;
    cfg.vocab_size = 7;
    cfg.n_embd = 4;
    cfg.n_layer = 1;
    cfg.n_head = 2;
    cfg.n_positions = 8;
    bool ok = true;
    for (bool clf : {false, true}) {
        cfg.classifier_head = clf;
        cfg.causal = !clf;
        auto m = nn::TransformerModel::init(cfg, 3);
        std::vector<int> toks = {0, 3, 4, 5, 6, 1};
        auto grads = nn::TransformerModel::zeros_like(m);
        auto loss_of = [&](const nn::TransformerModel& mm) {
            auto g = nn::TransformerModel::zeros_like(mm);
            if (clf) return nn::loss_and_grad_cls(mm, toks, 1, g);
            auto [l, n] = nn::loss_and_grad_lm(mm, toks, 2, g);
            return l / n;
        };
        if (clf) {
            nn::loss_and_grad_cls(m, toks, 1, grads);
        } else {
            auto [l, n] = nn::loss_and_grad_lm(m, toks, 2, grads);
            grads.for_each_param([&](const std::string&, nn::Tensor2& t) {
                for (auto& v : t.data) v /= n;
            });
        }
        double max_rel = 0.0;
        auto probe = m;
        m.for_each_param([&](const std::string& name, nn::Tensor2& t) {
            nn::Tensor2* pt = nullptr;
            probe.for_each_param([&](const std::string& n2, nn::Tensor2& t2) {
                if (n2 == name) pt = &t2;
            });
            nn::Tensor2* gt = nullptr;
            grads.for_each_param([&](const std::string& n2, nn::Tensor2& t2) {
                if (n2 == name) gt = &t2;
            });
            const double h = 1e-5;
            for (size_t i = 0; i < t.data.size(); i += 7) {
                double orig = pt->data[i];
                pt->data[i] = orig + h;
                double lp = loss_of(probe);
                pt->data[i] = orig - h;
                double lm = loss_of(probe);
                pt->data[i] = orig;
                double fd = (lp - lm) / (2 * h);
                double an = gt->data[i];
                if (std::abs(an) < 1e-8 && std::abs(fd) < 1e-8) continue;
                max_rel = std::max(max_rel,
                                   std::abs(an - fd) /
                                       std::max(std::abs(an), std::abs(fd)));
            }
        });
        std::cout << (clf ? "classifier" : "generator") << " gradient check: max rel "
                  << max_rel << (max_rel < 1e-4 ? " (pass)" : " (FAIL)") << "\n";
        ok = ok && max_rel < 1e-4;
    }

    // 2. attention against a scalar-loop oracle
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 1.0);
    double max_err = 0.0;
    for (int trial = 0; trial < 20; trial++) {
        int T = 1 + static_cast<int>(rng() % 6), D = 1 + static_cast<int>(rng() % 5);
        nn::Tensor2 Q(T, D), K(T, D), V(T, D);
        for (auto* t : {&Q, &K, &V})
            for (auto& v : t->data) v = nd(rng);
        auto out = nn::attention(Q, K, V, true);
        double scale = 1.0 / std::sqrt(static_cast<double>(D));
        for (int i = 0; i < T; i++) {
            std::vector<double> sc(T, -1e300);
            for (int j = 0; j <= i; j++) {
                sc[j] = 0;
                for (int d = 0; d < D; d++) sc[j] += Q.at(i, d) * K.at(j, d);
                sc[j] *= scale;
            }
            double mx = *std::max_element(sc.begin(), sc.end());
            double z = 0;
            for (int j = 0; j <= i; j++) z += std::exp(sc[j] - mx);
            for (int d = 0; d < D; d++) {
                double o = 0;
                for (int j = 0; j <= i; j++)
                    o += std::exp(sc[j] - mx) / z * V.at(j, d);
                max_err = std::max(max_err, std::abs(o - out.at(i, d)));
            }
        }
    }
    std::cout << "attention oracle: max abs err " << max_err
              << (max_err < 1e-10 ? " (pass)" : " (FAIL)") << "\n";
    ok = ok && max_err < 1e-10;
    std::cout << (ok ? "selftest passed" : "selftest FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KetGPT-style quantum-circuit generation toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    uint64_t seed = 0;
    int jobs = 1;

    std::string dir, out, stats_path, corpus_dir, model_path, real_dir, random_dir,
        csv;
    std::vector<std::string> dirs;
    int count = 10, top_k = 5, no_repeat = 15, k_clusters = 6;
    double split = 0.85;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--seed", seed, "random seed")->capture_default_str();
        c->add_option("--jobs", jobs, "worker threads (reserved)");
    };

    auto* c_ingest = app.add_subcommand("ingest", "scan a corpus directory");
    c_ingest->add_option("dir", dir, "corpus directory")->required();
    c_ingest->add_option("--out", out, "stats JSON path")->required();
    add_common(c_ingest);
    HyperFlags hf_ingest;
    hf_ingest.attach(c_ingest);

    auto* c_tg = app.add_subcommand("train-generator", "train the circuit generator");
    c_tg->add_option("stats", stats_path, "stats JSON from ingest")->required();
    c_tg->add_option("--corpus", corpus_dir, "corpus directory")->required();
    c_tg->add_option("--out", out, "checkpoint path")->required();
    add_common(c_tg);
    HyperFlags hf_tg;
    hf_tg.attach(c_tg);

    auto* c_gen = app.add_subcommand("generate", "sample circuits from a checkpoint");
    c_gen->add_option("--model", model_path, "generator checkpoint")->required();
    c_gen->add_option("--count", count, "number of circuits")->capture_default_str();
    c_gen->add_option("--out", out, "output directory")->required();
    c_gen->add_option("--top-k", top_k, "top-k cutoff")->capture_default_str();
    c_gen->add_option("--no-repeat", no_repeat, "no-repeat n-gram window")
        ->capture_default_str();
    add_common(c_gen);
    HyperFlags hf_gen;
    hf_gen.attach(c_gen);

    auto* c_rand = app.add_subcommand("random", "uniform-random baseline circuits");
    c_rand->add_option("--stats", stats_path, "stats JSON from ingest")->required();
    c_rand->add_option("--count", count, "number of circuits")->capture_default_str();
    c_rand->add_option("--out", out, "output directory")->required();
    add_common(c_rand);
    HyperFlags hf_rand;
    hf_rand.attach(c_rand);

    auto* c_tc = app.add_subcommand("train-classifier",
                                    "train the real-vs-random classifier");
    c_tc->add_option("--real", real_dir, "directory of real circuits")->required();
    c_tc->add_option("--random", random_dir, "directory of random circuits")
        ->required();
    c_tc->add_option("--out", out, "checkpoint path")->required();
    c_tc->add_option("--split", split, "train fraction")->capture_default_str();
    add_common(c_tc);
    HyperFlags hf_tc;
    hf_tc.attach(c_tc);

    auto* c_cls = app.add_subcommand("classify", "label circuits with a classifier");
    c_cls->add_option("--model", model_path, "classifier checkpoint")->required();
    c_cls->add_option("dir", dir, "directory of .qasm files")->required();
    add_common(c_cls);
    HyperFlags hf_cls;
    hf_cls.attach(c_cls);

    auto* c_val = app.add_subcommand("validate", "strict-validate a directory");
    c_val->add_option("dir", dir, "directory of .qasm files")->required();
    add_common(c_val);
    HyperFlags hf_val;
    hf_val.attach(c_val);

    auto* c_an = app.add_subcommand("analyze", "extract structural metrics");
    c_an->add_option("dirs", dirs, "directories of .qasm files")->required();
    c_an->add_option("--out", out, "metrics CSV path")->required();
    add_common(c_an);
    HyperFlags hf_an;
    hf_an.attach(c_an);

    auto* c_cl = app.add_subcommand("cluster", "two-level clustering of metrics");
    c_cl->add_option("csv", csv, "metrics CSV from analyze")->required();
    c_cl->add_option("--out", out, "clusters CSV path")->required();
    c_cl->add_option("--k", k_clusters, "clusters per size bucket")
        ->capture_default_str();
    add_common(c_cl);
    HyperFlags hf_cl;
    hf_cl.attach(c_cl);

    auto* c_st = app.add_subcommand("selftest", "gradient and oracle checks");
    add_common(c_st);
    HyperFlags hf_st;
    hf_st.attach(c_st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_ingest) return cmd_ingest(dir, out);
        if (*c_tg)
            return cmd_train_generator(
                stats_path, corpus_dir, out,
                hf_tg.resolve(paper_generator_defaults(), seed));
        if (*c_gen) return cmd_generate(model_path, count, out, seed, top_k, no_repeat);
        if (*c_rand) return cmd_random(stats_path, count, out, seed);
        if (*c_tc)
            return cmd_train_classifier(
                real_dir, random_dir, out, split,
                hf_tc.resolve(paper_classifier_defaults(), seed));
        if (*c_cls) return cmd_classify(model_path, dir);
        if (*c_val) return cmd_validate(dir);
        if (*c_an) return cmd_analyze(dirs, out);
        if (*c_cl) return cmd_cluster(csv, out, k_clusters, seed);
        if (*c_st) return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
