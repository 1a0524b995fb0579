// Command-line front end: training (sgd/cga/hga), stacked pretraining with
// supervised fine-tuning, thread-sweep benchmarking, dataset variant
// generation, and artifact export.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sdae/dataset.hpp"
#include "sdae/evalx.hpp"
#include "sdae/genetic.hpp"
#include "sdae/network.hpp"
#include "sdae/sgd.hpp"

namespace {

using nlohmann::json;

struct TrainFlags {
    std::string images, labels;
    std::string out_model = "model.sdae";
    std::string out_curve = "curve.csv";
    std::string config_path;
    std::size_t hidden = 500;
    std::size_t images_count = 0;  // 0 = all
    int epochs = 15;
    double lr = 0.001;
    double corruption = 0.25;
    unsigned threads = 0;
    std::uint64_t seed = 1;
    // GA flags
    std::size_t population = 0;
    double mutation_rate = -1.0;
    double mutation_amount = -1.0;
    double crossover_rate = -1.0;
    double replacement_fraction = -1.0;
    double power_gamma = -1.0;
    double backprop_fraction = -1.0;
};

std::vector<sdae::Vector> take_images(const sdae::ImageDataset& ds, std::size_t count) {
    if (count == 0 || count >= ds.size()) return ds.images;
    return {ds.images.begin(), ds.images.begin() + std::ptrdiff_t(count)};
}

// JSON config file; flat keys, flags given on the command line win.
void apply_json_config(const std::string& path, sdae::GaConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw sdae::IoError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw sdae::UsageError("bad JSON config " + path + ": " + e.what());
    }
    if (j.contains("population")) cfg.population = j["population"].get<std::size_t>();
    if (j.contains("mutation_rate")) cfg.mutation_rate = j["mutation_rate"].get<double>();
    if (j.contains("mutation_amount")) cfg.mutation_amount = j["mutation_amount"].get<double>();
    if (j.contains("crossover_rate")) cfg.crossover_rate = j["crossover_rate"].get<double>();
    if (j.contains("replacement_fraction"))
        cfg.replacement_fraction = j["replacement_fraction"].get<double>();
    if (j.contains("power_gamma")) cfg.power_gamma = j["power_gamma"].get<double>();
    if (j.contains("backprop_fraction"))
        cfg.backprop_fraction = j["backprop_fraction"].get<double>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("corruption_prob"))
        cfg.corruption.probability = j["corruption_prob"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<unsigned>();
}

void save_single_layer(sdae::DenseTiedLayer layer, const std::string& path) {
    sdae::StackedAutoencoder net;
    net.layers.push_back(std::move(layer));
    sdae::save_model(net, path);
}

int cmd_train(const std::string& optimizer, const TrainFlags& f, const CLI::App* sub) {
    const sdae::ImageDataset ds = sdae::load_idx(f.images, f.labels);
    const std::vector<sdae::Vector> data = take_images(ds, f.images_count);
    if (data.empty()) throw sdae::DataError("dataset is empty");
    const std::size_t m = data.front().size();

    auto flag_given = [&](const std::string& name) { return sub->count(name) > 0; };

    if (optimizer == "sgd") {
        sdae::SgdConfig cfg;
        if (!f.config_path.empty()) {
            sdae::GaConfig tmp = sdae::default_ga_config(m);
            apply_json_config(f.config_path, tmp);
            cfg.learning_rate = tmp.learning_rate;
            cfg.epochs = tmp.epochs;
            cfg.corruption.probability = tmp.corruption.probability;
            cfg.seed = tmp.seed;
            cfg.threads = tmp.threads;
        }
        if (flag_given("--lr") || f.config_path.empty()) cfg.learning_rate = f.lr;
        if (flag_given("--epochs") || f.config_path.empty()) cfg.epochs = f.epochs;
        if (flag_given("--corruption") || f.config_path.empty())
            cfg.corruption.probability = f.corruption;
        if (flag_given("--seed") || f.config_path.empty()) cfg.seed = f.seed;
        if (flag_given("--threads") || f.config_path.empty()) cfg.threads = f.threads;

        sdae::RandomStream init(sdae::derive_key(cfg.seed, sdae::StreamTag::layer_init, 0));
        sdae::DenseTiedLayer layer = sdae::init_layer(m, f.hidden, init);
        const sdae::RunRecord rec = sdae::train_layer_sgd(layer, data, cfg);
        rec.write_csv(f.out_curve);
        save_single_layer(std::move(layer), f.out_model);
        std::printf("optimizer=sgd final_error=%.6g model=%s curve=%s\n", rec.final_error(),
                    f.out_model.c_str(), f.out_curve.c_str());
        return 0;
    }

    sdae::GaConfig cfg = sdae::default_ga_config(m);
    if (!f.config_path.empty()) apply_json_config(f.config_path, cfg);
    if (flag_given("--population")) cfg.population = f.population;
    if (flag_given("--mutation-rate")) cfg.mutation_rate = f.mutation_rate;
    if (flag_given("--mutation-amount")) cfg.mutation_amount = f.mutation_amount;
    if (flag_given("--crossover-rate")) cfg.crossover_rate = f.crossover_rate;
    if (flag_given("--replacement-fraction")) cfg.replacement_fraction = f.replacement_fraction;
    if (flag_given("--power-gamma")) cfg.power_gamma = f.power_gamma;
    if (optimizer == "hga" && flag_given("--backprop-fraction"))
        cfg.backprop_fraction = f.backprop_fraction;
    if (flag_given("--lr")) cfg.learning_rate = f.lr;
    if (flag_given("--epochs")) cfg.epochs = f.epochs;
    if (flag_given("--corruption")) cfg.corruption.probability = f.corruption;
    if (flag_given("--seed")) cfg.seed = f.seed;
    if (flag_given("--threads")) cfg.threads = f.threads;

    const bool hybrid = optimizer == "hga";
    sdae::GaRunResult result = hybrid ? sdae::run_hga(m, f.hidden, data, cfg)
                                      : sdae::run_cga(m, f.hidden, data, cfg);
    result.record.write_csv(f.out_curve);
    save_single_layer(std::move(result.best), f.out_model);
    std::printf("optimizer=%s final_error=%.6g model=%s curve=%s\n", optimizer.c_str(),
                result.record.final_error(), f.out_model.c_str(), f.out_curve.c_str());
    return 0;
}

std::vector<std::size_t> parse_head_spec(const std::string& s) {
    std::vector<std::size_t> sizes;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        sizes.push_back(std::stoul(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (sizes.empty() || sizes.back() != 10) sizes.push_back(10);
    return sizes;
}

struct LayerSpecFlag {
    std::size_t hidden;
    double noise;
};

LayerSpecFlag parse_layer_spec(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw sdae::UsageError("--layer expects hidden:noise, got: " + s);
    LayerSpecFlag out;
    out.hidden = std::stoul(s.substr(0, colon));
    out.noise = std::stod(s.substr(colon + 1));
    return out;
}

int cmd_pretrain_finetune(const std::vector<std::string>& layer_flags,
                          const std::string& head_flag, const std::string& images,
                          const std::string& labels, const std::string& test_images,
                          const std::string& test_labels, std::size_t images_count,
                          int pretrain_epochs, double pretrain_lr, int finetune_epochs,
                          double finetune_lr, const std::string& loss_name,
                          unsigned threads, std::uint64_t seed, const std::string& out_model,
                          const std::string& out_curve) {
    sdae::ImageDataset ds = sdae::load_idx(images, labels);
    if (images_count && images_count < ds.size()) {
        ds.images.resize(images_count);
        ds.labels.resize(images_count);
    }

    std::vector<sdae::PretrainLayerSpec> specs;
    for (std::size_t k = 0; k < layer_flags.size(); ++k) {
        const LayerSpecFlag lf = parse_layer_spec(layer_flags[k]);
        sdae::SgdConfig cfg;
        cfg.learning_rate = pretrain_lr;
        cfg.epochs = pretrain_epochs;
        cfg.threads = threads;
        cfg.seed = seed + k;
        specs.push_back({lf.hidden, lf.noise, cfg});
    }

    sdae::StackedAutoencoder net = sdae::pretrain_stack(specs, ds.images);

    if (!head_flag.empty()) {
        const std::vector<std::size_t> head = parse_head_spec(head_flag);
        sdae::SgdConfig ft;
        ft.learning_rate = finetune_lr;
        ft.epochs = finetune_epochs;
        ft.threads = threads;
        ft.seed = seed + 1000;
        const sdae::FineTuneLoss loss = (loss_name == "crossentropy")
                                            ? sdae::FineTuneLoss::crossentropy_softmax
                                            : sdae::FineTuneLoss::squared_sigmoid;
        const sdae::RunRecord rec = sdae::fine_tune(net, ds, head, ft, loss);
        if (!out_curve.empty()) rec.write_csv(out_curve);

        sdae::ThreadPool pool(sdae::effective_threads(threads));
        double acc;
        if (!test_images.empty()) {
            const sdae::ImageDataset test = sdae::load_idx(test_images, test_labels);
            acc = sdae::accuracy(net, test, pool);
        } else {
            acc = sdae::accuracy(net, ds, pool);
        }
        sdae::save_model(net, out_model);
        std::printf("accuracy=%.6g model=%s\n", acc, out_model.c_str());
    } else {
        sdae::save_model(net, out_model);
        std::printf("accuracy=nan model=%s\n", out_model.c_str());
    }
    return 0;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        if (next > pos) out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

double median3(double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

int cmd_bench(const std::string& images, const std::string& labels,
              const std::string& threads_list, const std::string& hidden_list,
              const std::string& optimizer, std::size_t images_count, double lr,
              double corruption, std::uint64_t seed, const std::string& out_path) {
    const sdae::ImageDataset ds = sdae::load_idx(images, labels);
    const std::vector<sdae::Vector> data = take_images(ds, images_count);
    if (data.empty()) throw sdae::DataError("dataset is empty");
    const std::size_t m = data.front().size();

    const std::vector<std::string> threads = split_list(threads_list);
    const std::vector<std::string> hiddens = split_list(hidden_list);
    if (threads.empty() || hiddens.empty())
        throw sdae::UsageError("--threads-list and --hidden-list must be non-empty");

    std::string csv = "hidden,threads,optimizer,sec_per_epoch\n";
    for (const std::string& hs : hiddens) {
        const std::size_t hidden = std::stoul(hs);
        for (const std::string& ts : threads) {
            const unsigned t = unsigned(std::stoul(ts));
            // one warm-up epoch, then the median of three timed epochs
            sdae::RunRecord rec;
            if (optimizer == "sgd") {
                sdae::SgdConfig cfg;
                cfg.learning_rate = lr;
                cfg.epochs = 4;
                cfg.corruption.probability = corruption;
                cfg.threads = t;
                cfg.seed = seed;
                sdae::RandomStream init(
                    sdae::derive_key(seed, sdae::StreamTag::layer_init, 0));
                sdae::DenseTiedLayer layer = sdae::init_layer(m, hidden, init);
                rec = sdae::train_layer_sgd(layer, data, cfg);
            } else {
                sdae::GaConfig cfg = sdae::default_ga_config(m);
                cfg.learning_rate = lr;
                cfg.epochs = 4;
                cfg.corruption.probability = corruption;
                cfg.threads = t;
                cfg.seed = seed;
                rec = (optimizer == "hga") ? sdae::run_hga(m, hidden, data, cfg).record
                                           : sdae::run_cga(m, hidden, data, cfg).record;
            }
            const auto& r = rec.rows;
            const double sec = median3(r[1].seconds - r[0].seconds,
                                       r[2].seconds - r[1].seconds,
                                       r[3].seconds - r[2].seconds);
            char buf[128];
            std::snprintf(buf, sizeof buf, "%zu,%u,%s,%.6g\n", hidden, t, optimizer.c_str(),
                          sec);
            csv += buf;
        }
    }
    if (out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        sdae::atomic_write(out_path, [&](std::ostream& o) { o << csv; });
        std::printf("bench=%s\n", out_path.c_str());
    }
    return 0;
}

int cmd_gen_variant(const std::string& kind, const std::string& images,
                    const std::string& labels, const std::string& out_images,
                    const std::string& out_labels, const std::string& backgrounds,
                    std::uint64_t seed, bool fixed_angle_given, double fixed_angle) {
    const sdae::ImageDataset ds = sdae::load_idx(images, labels);
    sdae::ImageDataset out;
    if (kind == "bg-rand") {
        sdae::RandomStream rng(sdae::derive_key(seed, sdae::StreamTag::bg_rand));
        out = sdae::gen_bg_rand(ds, rng);
    } else if (kind == "rot") {
        sdae::RandomStream rng(sdae::derive_key(seed, sdae::StreamTag::rotate));
        out = sdae::gen_rot(ds, rng, fixed_angle_given ? &fixed_angle : nullptr);
    } else if (kind == "bg-img") {
        if (backgrounds.empty())
            throw sdae::UsageError("gen-variant bg-img requires --backgrounds");
        sdae::RandomStream rng(sdae::derive_key(seed, sdae::StreamTag::bg_patch));
        out = sdae::gen_bg_img(ds, backgrounds, rng);
    } else {
        throw sdae::UsageError("unknown variant kind: " + kind);
    }
    sdae::save_idx(out, out_images, out_labels);
    std::printf("variant=%s images=%s labels=%s count=%zu\n", kind.c_str(),
                out_images.c_str(), out_labels.c_str(), out.size());
    return 0;
}

int cmd_export(const std::string& kind, const std::string& model_path,
               const std::string& images, const std::string& labels,
               const std::string& out_path, std::size_t count, std::size_t width,
               std::size_t height, std::size_t num_examples, double corruption,
               std::uint64_t seed, unsigned threads) {
    const sdae::StackedAutoencoder net = sdae::load_model(model_path);
    sdae::ThreadPool pool(sdae::effective_threads(threads));

    if (kind == "filters") {
        if (net.layers.empty()) throw sdae::DataError("model has no autoencoder layers");
        sdae::export_filters(net.layers.front(), count, out_path, width, height);
    } else if (kind == "reconstructions") {
        const sdae::ImageDataset ds = sdae::load_idx(images, labels);
        const std::size_t n = std::min<std::size_t>(num_examples, ds.size());
        std::vector<sdae::Vector> ex(ds.images.begin(), ds.images.begin() + std::ptrdiff_t(n));
        sdae::CorruptionSpec spec{sdae::CorruptionKind::masking, corruption};
        sdae::export_reconstructions(net, ex, ds.width, ds.height, spec, seed, out_path, pool);
    } else if (kind == "features") {
        const sdae::ImageDataset ds = sdae::load_idx(images, labels);
        sdae::export_encoded(net, ds, out_path, pool);
    } else {
        throw sdae::UsageError("unknown export kind: " + kind);
    }
    std::printf("export=%s out=%s\n", kind.c_str(), out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stacked denoising autoencoder trainer (SGD / CGA / HGA)"};
    app.require_subcommand(1);

    // ---- train ----
    CLI::App* train = app.add_subcommand("train", "Train a single autoencoder layer");
    train->require_subcommand(1);
    TrainFlags tf;
    std::vector<CLI::App*> train_subs;
    for (const std::string name : {"sgd", "cga", "hga"}) {
        CLI::App* sub = train->add_subcommand(name, "Train with " + name);
        sub->add_option("--images", tf.images, "IDX image file")->required();
        sub->add_option("--labels", tf.labels, "IDX label file")->required();
        sub->add_option("--hidden", tf.hidden, "Hidden unit count");
        sub->add_option("--epochs", tf.epochs, "Training epochs");
        sub->add_option("--lr", tf.lr, "Learning rate");
        sub->add_option("--corruption", tf.corruption, "Masking corruption probability");
        sub->add_option("--threads", tf.threads, "Worker threads (0 = logical cores)");
        sub->add_option("--seed", tf.seed, "RNG seed");
        sub->add_option("--images-count", tf.images_count, "Use only the first N images");
        sub->add_option("--out-model", tf.out_model, "Model output path");
        sub->add_option("--out-curve", tf.out_curve, "Error curve CSV output path");
        sub->add_option("--config", tf.config_path, "JSON config file (flags override)");
        if (name != "sgd") {
            sub->add_option("--population", tf.population, "Population size N");
            sub->add_option("--mutation-rate", tf.mutation_rate, "Mutation rate mr");
            sub->add_option("--mutation-amount", tf.mutation_amount, "Cauchy scale ma");
            sub->add_option("--crossover-rate", tf.crossover_rate, "Crossover rate cr");
            sub->add_option("--replacement-fraction", tf.replacement_fraction,
                            "Replace-worst fraction alpha");
            sub->add_option("--power-gamma", tf.power_gamma, "Power scaling gamma");
        }
        if (name == "hga")
            sub->add_option("--backprop-fraction", tf.backprop_fraction,
                            "Backprop fraction beta");
        train_subs.push_back(sub);
    }

    // ---- pretrain-finetune ----
    CLI::App* pf = app.add_subcommand(
        "pretrain-finetune", "Greedy layer-wise pretraining plus supervised fine-tuning");
    std::string pf_images, pf_labels, pf_test_images, pf_test_labels, pf_head, pf_loss = "squared";
    std::string pf_out_model = "stack.sdae", pf_out_curve;
    std::vector<std::string> pf_layers;
    std::size_t pf_count = 0;
    int pf_pre_epochs = 15, pf_ft_epochs = 30;
    double pf_pre_lr = 0.001, pf_ft_lr = 0.1;
    unsigned pf_threads = 0;
    std::uint64_t pf_seed = 1;
    pf->add_option("--images", pf_images, "IDX image file")->required();
    pf->add_option("--labels", pf_labels, "IDX label file")->required();
    pf->add_option("--test-images", pf_test_images, "IDX test image file");
    pf->add_option("--test-labels", pf_test_labels, "IDX test label file");
    pf->add_option("--layer", pf_layers, "Layer spec hidden:noise (repeatable)")->required();
    pf->add_option("--head", pf_head, "Classifier head sizes, e.g. 500 (10 appended)");
    pf->add_option("--images-count", pf_count, "Use only the first N images");
    pf->add_option("--pretrain-epochs", pf_pre_epochs, "Epochs per pretrained layer");
    pf->add_option("--pretrain-lr", pf_pre_lr, "Pretraining learning rate");
    pf->add_option("--finetune-epochs", pf_ft_epochs, "Fine-tuning epochs");
    pf->add_option("--finetune-lr", pf_ft_lr, "Fine-tuning learning rate");
    pf->add_option("--loss", pf_loss, "Fine-tuning loss: squared | crossentropy");
    pf->add_option("--threads", pf_threads, "Worker threads (0 = logical cores)");
    pf->add_option("--seed", pf_seed, "RNG seed");
    pf->add_option("--out-model", pf_out_model, "Model output path");
    pf->add_option("--out-curve", pf_out_curve, "Fine-tune curve CSV output path");

    // ---- bench ----
    CLI::App* bench = app.add_subcommand("bench", "Thread/hidden sweep benchmark");
    std::string b_images, b_labels, b_threads = "1,4,8", b_hidden = "500,1000";
    std::string b_optimizer = "sgd", b_out;
    std::size_t b_count = 1000;
    double b_lr = 0.001, b_corruption = 0.25;
    std::uint64_t b_seed = 1;
    bench->add_option("--images", b_images, "IDX image file")->required();
    bench->add_option("--labels", b_labels, "IDX label file")->required();
    bench->add_option("--threads-list", b_threads, "Comma list of thread counts");
    bench->add_option("--hidden-list", b_hidden, "Comma list of hidden unit counts");
    bench->add_option("--optimizer", b_optimizer, "sgd | cga | hga")
        ->check(CLI::IsMember({"sgd", "cga", "hga"}));
    bench->add_option("--images-count", b_count, "Use only the first N images");
    bench->add_option("--lr", b_lr, "Learning rate");
    bench->add_option("--corruption", b_corruption, "Masking corruption probability");
    bench->add_option("--seed", b_seed, "RNG seed");
    bench->add_option("--out", b_out, "CSV output path (default stdout)");

    // ---- gen-variant ----
    CLI::App* gen = app.add_subcommand("gen-variant", "Generate bg-rand / bg-img / rot variants");
    std::string g_kind, g_images, g_labels, g_out_images, g_out_labels, g_backgrounds;
    std::uint64_t g_seed = 1;
    double g_fixed_angle = 0.0;
    gen->add_option("kind", g_kind, "bg-rand | bg-img | rot")->required();
    gen->add_option("--images", g_images, "IDX image file")->required();
    gen->add_option("--labels", g_labels, "IDX label file")->required();
    gen->add_option("--out-images", g_out_images, "Output IDX image file")->required();
    gen->add_option("--out-labels", g_out_labels, "Output IDX label file")->required();
    gen->add_option("--backgrounds", g_backgrounds, "Directory of P5 PGM backgrounds (bg-img)");
    gen->add_option("--seed", g_seed, "RNG seed");
    CLI::Option* g_angle_opt =
        gen->add_option("--fixed-angle", g_fixed_angle, "Force this rotation angle (rot)");

    // ---- export ----
    CLI::App* exp = app.add_subcommand("export", "Export filters / reconstructions / features");
    std::string e_kind, e_model, e_images, e_labels, e_out;
    std::size_t e_count = 100, e_width = 0, e_height = 0, e_examples = 10;
    double e_corruption = 0.25;
    std::uint64_t e_seed = 1;
    unsigned e_threads = 0;
    exp->add_option("kind", e_kind, "filters | reconstructions | features")->required();
    exp->add_option("--model", e_model, "Model file")->required();
    exp->add_option("--images", e_images, "IDX image file");
    exp->add_option("--labels", e_labels, "IDX label file");
    exp->add_option("--out", e_out, "Output path")->required();
    exp->add_option("--count", e_count, "Filter count (filters)");
    exp->add_option("--width", e_width, "Filter tile width for non-square inputs");
    exp->add_option("--height", e_height, "Filter tile height for non-square inputs");
    exp->add_option("--num-examples", e_examples, "Example count (reconstructions)");
    exp->add_option("--corruption", e_corruption, "Corruption probability (reconstructions)");
    exp->add_option("--seed", e_seed, "RNG seed");
    exp->add_option("--threads", e_threads, "Worker threads (0 = logical cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        for (std::size_t i = 0; i < train_subs.size(); ++i) {
            if (train_subs[i]->parsed()) {
                static const char* names[] = {"sgd", "cga", "hga"};
                return cmd_train(names[i], tf, train_subs[i]);
            }
        }
        if (pf->parsed())
            return cmd_pretrain_finetune(pf_layers, pf_head, pf_images, pf_labels,
                                         pf_test_images, pf_test_labels, pf_count,
                                         pf_pre_epochs, pf_pre_lr, pf_ft_epochs, pf_ft_lr,
                                         pf_loss, pf_threads, pf_seed, pf_out_model,
                                         pf_out_curve);
        if (bench->parsed())
            return cmd_bench(b_images, b_labels, b_threads, b_hidden, b_optimizer, b_count,
                             b_lr, b_corruption, b_seed, b_out);
        if (gen->parsed())
            return cmd_gen_variant(g_kind, g_images, g_labels, g_out_images, g_out_labels,
                                   g_backgrounds, g_seed, g_angle_opt->count() > 0,
                                   g_fixed_angle);
        if (exp->parsed())
            return cmd_export(e_kind, e_model, e_images, e_labels, e_out, e_count, e_width,
                              e_height, e_examples, e_corruption, e_seed, e_threads);
    } catch (const sdae::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sdae::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const sdae::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
