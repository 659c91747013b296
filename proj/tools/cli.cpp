#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lwgnn/error.hpp"
#include "lwgnn/grad_suite.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/graph_io.hpp"
#include "lwgnn/report.hpp"
#include "lwgnn/synthetic.hpp"
#include "lwgnn/trainer.hpp"

namespace lwgnn::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GraphSource {
    std::vector<std::string> paths;
    std::optional<double> synthetic_h;
    std::size_t synthetic_n = 1000;
    std::size_t synthetic_c = 5;
    std::optional<std::uint64_t> synthetic_seed;  // defaults to the model seed
};

void add_graph_options(CLI::App& cmd, GraphSource& src, bool many_paths) {
    auto* graph = cmd.add_option("--graph", src.paths, many_paths ? "edge-list-json graph file (repeatable: one per split)"
                                                                  : "edge-list-json graph file");
    if (!many_paths) graph->expected(1);
    auto* h = cmd.add_option("--synthetic-h", src.synthetic_h, "target homophily of a generated benchmark graph");
    cmd.add_option("--synthetic-n", src.synthetic_n, "nodes of the generated graph")->capture_default_str();
    cmd.add_option("--synthetic-c", src.synthetic_c, "classes of the generated graph")->capture_default_str();
    cmd.add_option("--synthetic-seed", src.synthetic_seed, "generator and split seed (default: --seed)");
    graph->excludes(h);
}

void require_one_source(const GraphSource& src) {
    if (src.paths.empty() == !src.synthetic_h.has_value()) {
        throw PreconditionError("exactly one of --graph or --synthetic-h is required");
    }
}

Graph synthetic_graph(const GraphSource& src, std::uint64_t seed) {
    return benchmark_graph(benchmark_spec(*src.synthetic_h, src.synthetic_n, src.synthetic_c, seed));
}

Graph ensure_split(Graph g, std::uint64_t seed) {
    if (mask_count(g.train_mask()) != 0) return g;
    if (!g.all_labeled()) throw DataError("graph has no split and unlabeled nodes; add train/val/test masks");
    const auto val = static_cast<std::size_t>(kBenchmarkValFraction * static_cast<double>(g.num_nodes()));
    return g.with_masks(split_nodes(g, kBenchmarkTrainPerClass, val, seed));
}

json source_json(const GraphSource& src, std::uint64_t graph_seed, const std::string& path = {}) {
    if (!path.empty()) return {{"kind", "file"}, {"path", path}};
    const SyntheticSpec s = benchmark_spec(*src.synthetic_h, src.synthetic_n, src.synthetic_c, graph_seed);
    return {{"kind", "synthetic"},
            {"num_nodes", s.num_nodes},
            {"num_classes", s.num_classes},
            {"target_homophily", s.target_homophily},
            {"avg_degree", s.avg_degree},
            {"feature_dim", s.feature_dim},
            {"class_center_separation", s.class_center_separation},
            {"noise_scale", s.noise_scale},
            {"seed", s.seed}};
}

// Training flags; unset flags leave the config-file value (or the default) in place.
struct TrainFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> layers, hidden, inner_steps, max_outer, patience;
    std::optional<double> lr;
    std::optional<std::string> variant;
};

void add_train_options(CLI::App& cmd, TrainFlags& f) {
    cmd.add_option("--config", f.config_path, "JSON file of training settings (flags override it)");
    cmd.add_option("--seed", f.seed, "model seed");
    cmd.add_option("--layers", f.layers, "label-wise layers K");
    cmd.add_option("--hidden", f.hidden, "label-wise width p");
    cmd.add_option("--inner-steps", f.inner_steps, "branch updates per selection update T");
    cmd.add_option("--lr", f.lr, "learning rate for both branches and the selection weights");
    cmd.add_option("--max-outer", f.max_outer, "cap on outer iterations");
    cmd.add_option("--patience", f.patience, "outer iterations without validation improvement");
}

TrainConfig resolve_config(const TrainFlags& f) {
    TrainConfig c;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw PreconditionError("cannot read config file " + f.config_path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw PreconditionError("config file " + f.config_path + ": " + e.what());
        }
        c = config_from_json(doc, c);
    }
    if (f.seed) c.seed = *f.seed;
    if (f.layers) c.layers = *f.layers;
    if (f.hidden) c.hidden = *f.hidden;
    if (f.inner_steps) c.inner_steps = *f.inner_steps;
    if (f.max_outer) c.max_outer = *f.max_outer;
    if (f.patience) c.patience = *f.patience;
    if (f.lr) c.lr_c = c.lr_g = c.lr_phi = *f.lr;
    if (f.variant) c.variant = parse_variant(*f.variant);
    c.validate();
    return c;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

int cmd_train(const GraphSource& src, const TrainFlags& flags, const std::string& out_dir, std::ostream& out) {
    require_one_source(src);
    const TrainConfig config = resolve_config(flags);
    const std::uint64_t graph_seed = src.synthetic_seed.value_or(config.seed);
    const Graph graph = src.synthetic_h ? synthetic_graph(src, graph_seed) : ensure_split(load_graph(src.paths.front()), config.seed);

    const TrainResult result = train(graph, config);
    json doc = report_to_json(result.report);
    doc["data"] = source_json(src, graph_seed, src.paths.empty() ? std::string{} : src.paths.front());
    const fs::path path = prepare_out_dir(out_dir) / "report.json";
    write_json(doc, path);

    const auto& r = result.report;
    out << "variant=" << variant_name(config.variant) << " test_accuracy=" << fixed(r.combined.test, 4)
        << " weight_fc=" << (r.weight_fc ? fixed(*r.weight_fc, 4) : std::string("n/a"))
        << " best_iteration=" << r.best_iteration << " report=" << path.string() << '\n';
    return kOk;
}

int cmd_homophily(const GraphSource& src, std::ostream& out) {
    require_one_source(src);
    const Graph g = src.synthetic_h ? synthetic_graph(src, src.synthetic_seed.value_or(0)) : load_graph(src.paths.front());
    if (!g.has_labels() || !g.all_labeled()) throw DataError("homophily needs every node labeled");
    out << fixed(homophily_ratio(g, g.labels()), 4) << '\n';
    return kOk;
}

int cmd_gradcheck(double tol, std::size_t seeds, bool inject_fault, std::ostream& out) {
    GradSuiteOptions options;
    options.check.tolerance = tol;
    options.seeds = seeds;
    options.inject_fault = inject_fault;
    const GradSuiteReport report = run_grad_suite(options);
    for (const auto& c : report.cases) {
        out << std::left << std::setw(32) << c.name << (c.passed() ? " ok  " : " FAIL") << " seeds=" << c.seeds_run
            << " failed=" << c.seeds_failed << " entries=" << c.entries_checked << " max_rel_err=" << std::scientific
            << std::setprecision(2) << c.max_relative_error << std::defaultfloat << '\n';
    }
    out << (report.passed() ? "gradcheck passed" : "gradcheck FAILED") << " (tol " << tol << ", " << fixed(report.seconds, 2)
        << " s)\n";
    return report.passed() ? kOk : kGradientMismatch;
}

std::string percent(const MeanStd& m) { return fixed(100.0 * m.mean, 1) + " ± " + fixed(100.0 * m.std, 1); }

int cmd_bench(const GraphSource& src, const TrainFlags& flags, const std::string& variants_arg, std::size_t seeds,
              const std::string& out_dir, std::ostream& out) {
    require_one_source(src);
    if (seeds == 0) throw PreconditionError("--seeds must be at least 1");
    const auto names = split_list(variants_arg);
    if (names.empty()) throw PreconditionError("--variants is empty");
    std::vector<Variant> variants;
    for (const auto& n : names) variants.push_back(parse_variant(n));
    const TrainConfig base = resolve_config(flags);

    // One graph per split: every file, or one generated graph per seed.
    std::vector<Graph> graphs;
    if (src.synthetic_h) {
        const std::uint64_t first = src.synthetic_seed.value_or(base.seed);
        for (std::size_t s = 0; s < seeds; ++s) graphs.push_back(synthetic_graph(src, first + s));
    } else {
        for (const auto& p : src.paths) graphs.push_back(ensure_split(load_graph(p), base.seed));
    }

    json rows = json::array();
    out << std::left << std::setw(20) << "variant" << "accuracy (%)     weight_fc  runs\n";
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        std::vector<double> acc, weight;
        for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
            const std::size_t runs = src.synthetic_h ? 1 : seeds;
            for (std::size_t s = 0; s < runs; ++s) {
                TrainConfig cfg = base;
                cfg.seed = base.seed + (src.synthetic_h ? gi : s);
                const TrainReport r = run_ablation(graphs[gi], cfg, variants[vi]).report;
                acc.push_back(r.combined.test);
                if (r.weight_fc) weight.push_back(*r.weight_fc);
            }
        }
        const MeanStd a = mean_std(acc);
        std::string w = "n/a";
        json row = {{"variant", variant_name(variants[vi])}, {"test_accuracy", acc}, {"mean", a.mean}, {"std", a.std}};
        if (!weight.empty()) {
            const MeanStd mw = mean_std(weight);
            w = fixed(mw.mean, 3);
            row["weight_fc"] = weight;
        }
        out << std::left << std::setw(20) << variant_name(variants[vi]) << std::setw(17) << percent(a) << std::setw(11)
            << w << acc.size() << '\n';
        rows.push_back(std::move(row));
    }
    if (!out_dir.empty()) {
        json cfg = config_to_json(base);
        write_json({{"config", cfg}, {"rows", rows}}, prepare_out_dir(out_dir) / "bench.json");
    }
    return kOk;
}

int cmd_depth(const GraphSource& src, const TrainFlags& flags, const std::string& depths_arg, std::size_t seeds,
              std::ostream& out) {
    require_one_source(src);
    if (seeds == 0) throw PreconditionError("--seeds must be at least 1");
    std::vector<std::size_t> depths;
    for (const auto& d : split_list(depths_arg)) {
        try {
            depths.push_back(std::stoul(d));
        } catch (const std::exception&) {
            throw PreconditionError("bad depth '" + d + "'");
        }
    }
    const TrainConfig base = resolve_config(flags);
    const Graph graph = src.synthetic_h ? synthetic_graph(src, src.synthetic_seed.value_or(base.seed))
                                        : ensure_split(load_graph(src.paths.front()), base.seed);
    out << "depth  fc-only (%)      gcn (%)\n";
    for (const auto& row : depth_sweep(graph, base, depths, seeds)) {
        out << std::left << std::setw(7) << row.depth << std::setw(17) << percent(row.fc) << percent(row.gcn) << '\n';
    }
    return kOk;
}

int cmd_generate(const GraphSource& src, std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
    if (!src.synthetic_h) throw PreconditionError("generate needs --synthetic-h");
    const Graph g = synthetic_graph(src, src.synthetic_seed.value_or(seed));
    const fs::path path = prepare_out_dir(out_dir) / "graph.json";
    save_graph(g, path);
    out << "nodes=" << g.num_nodes() << " edges=" << g.num_edges() << " homophily=" << fixed(homophily_ratio(g, g.labels()), 4)
        << " graph=" << path.string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Label-wise message passing GNN with learned model selection", "lwgnn"};
    app.require_subcommand(1);

    GraphSource src;
    TrainFlags flags;
    std::string out_dir = "lwgnn-out";
    double tol = 1e-4;
    std::size_t seeds = 5;
    std::size_t grad_seeds = 20;
    bool inject_fault = false;
    std::string variants = "mlp,gcn,fc,full";
    std::string depths = "2,3,4,5,6";
    std::uint64_t gen_seed = 0;

    auto* train_cmd = app.add_subcommand("train", "train one variant and write report.json");
    add_graph_options(*train_cmd, src, false);
    add_train_options(*train_cmd, flags);
    train_cmd->add_option("--variant", flags.variant, "full, fc-only, fg-only, mlp-only or gnn-pseudo-labels");
    train_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

    auto* homophily_cmd = app.add_subcommand("homophily", "print the edge homophily ratio of a labeled graph");
    add_graph_options(*homophily_cmd, src, false);

    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every differentiable piece");
    grad_cmd->add_option("--tol", tol, "relative tolerance")->capture_default_str();
    grad_cmd->add_option("--seeds", grad_seeds, "random instances per case")->capture_default_str();
    grad_cmd->add_flag("--inject-fault", inject_fault, "corrupt one analytic gradient entry per case (self-test)");

    auto* bench_cmd = app.add_subcommand("bench", "mean ± std test accuracy per variant");
    add_graph_options(*bench_cmd, src, true);
    add_train_options(*bench_cmd, flags);
    bench_cmd->add_option("--variants", variants, "comma-separated variants")->capture_default_str();
    bench_cmd->add_option("--seeds", seeds, "seeds (synthetic: one graph per seed)")->capture_default_str();
    bench_cmd->add_option("--out", out_dir, "directory for bench.json");

    auto* depth_cmd = app.add_subcommand("depth", "fc-only and GCN accuracy across depths");
    add_graph_options(*depth_cmd, src, false);
    add_train_options(*depth_cmd, flags);
    depth_cmd->add_option("--depths", depths, "comma-separated depths")->capture_default_str();
    depth_cmd->add_option("--seeds", seeds, "model seeds per depth")->capture_default_str();

    auto* gen_cmd = app.add_subcommand("generate", "write a benchmark graph as edge-list-json");
    add_graph_options(*gen_cmd, src, false);
    gen_cmd->add_option("--seed", gen_seed, "generator and split seed");
    gen_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*train_cmd) return cmd_train(src, flags, out_dir, out);
        if (*homophily_cmd) return cmd_homophily(src, out);
        if (*grad_cmd) return cmd_gradcheck(tol, grad_seeds, inject_fault, out);
        if (*bench_cmd) return cmd_bench(src, flags, variants, seeds, bench_cmd->count("--out") ? out_dir : "", out);
        if (*depth_cmd) return cmd_depth(src, flags, depths, seeds, out);
        if (*gen_cmd) return cmd_generate(src, gen_seed, out_dir, out);
    } catch (const PreconditionError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const ShapeError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumericError;
    }
    return kConfigError;
}

}  // namespace lwgnn::cli
