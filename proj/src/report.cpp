#include "lwgnn/report.hpp"

#include <fstream>

#include "lwgnn/error.hpp"

namespace lwgnn {
namespace {

using nlohmann::json;

std::string_view optimizer_name(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "adam") return OptimizerKind::Adam;
    if (s == "sgd" || s == "gd") return OptimizerKind::GradientDescent;
    throw PreconditionError("unknown optimizer '" + s + "'");
}

std::string_view snapshot_rule_name(SnapshotRule r) {
    switch (r) {
        case SnapshotRule::Accuracy: return "accuracy";
        case SnapshotRule::Loss: return "loss";
        case SnapshotRule::AccuracyAndLoss: return "accuracy-and-loss";
    }
    return "accuracy";
}

SnapshotRule parse_snapshot_rule(const std::string& s) {
    if (s == "accuracy") return SnapshotRule::Accuracy;
    if (s == "loss") return SnapshotRule::Loss;
    if (s == "accuracy-and-loss") return SnapshotRule::AccuracyAndLoss;
    throw PreconditionError("unknown snapshot rule '" + s + "'");
}

std::string_view fallback_name(EmptyClassFallback f) { return f == EmptyClassFallback::Zero ? "zero" : "class-average"; }

EmptyClassFallback parse_fallback(const std::string& s) {
    if (s == "zero") return EmptyClassFallback::Zero;
    if (s == "class-average") return EmptyClassFallback::ClassAverage;
    throw PreconditionError("unknown empty-class fallback '" + s + "'");
}

json accuracy_json(const SplitAccuracy& a) { return {{"train", a.train}, {"val", a.val}, {"test", a.test}}; }

}  // namespace

json config_to_json(const TrainConfig& c) {
    return {
        {"lr_c", c.lr_c},
        {"lr_g", c.lr_g},
        {"lr_phi", c.lr_phi},
        {"inner_steps", c.inner_steps},
        {"max_outer", c.max_outer},
        {"patience", c.patience},
        {"selection_steps", c.selection_steps},
        {"seed", c.seed},
        {"layers", c.layers},
        {"hidden", c.hidden},
        {"optimizer", optimizer_name(c.optimizer)},
        {"snapshot_rule", snapshot_rule_name(c.snapshot_rule)},
        {"empty_class_fallback", fallback_name(c.fallback)},
        {"fc_dropout", c.fc_dropout},
        {"fc_weight_decay", c.fc_weight_decay},
        {"pseudo_labels_include_val", c.pseudo_labels_include_val},
        {"pseudo_hidden", c.pseudo_hidden},
        {"pseudo_max_epochs", c.pseudo_max_epochs},
        {"pseudo_patience", c.pseudo_patience},
        {"pseudo_lr", c.pseudo_lr},
        {"pseudo_weight_decay", c.pseudo_weight_decay},
        {"gcn_layers", c.gcn_layers},
        {"gcn_hidden", c.gcn_hidden},
        {"gcn_dropout", c.gcn_dropout},
        {"gcn_weight_decay", c.gcn_weight_decay},
        {"variant", variant_name(c.variant)},
    };
}

TrainConfig config_from_json(const json& doc, TrainConfig c) {
    if (!doc.is_object()) throw PreconditionError("config: expected a JSON object");
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "lr_c") c.lr_c = v.get<double>();
            else if (key == "lr_g") c.lr_g = v.get<double>();
            else if (key == "lr_phi") c.lr_phi = v.get<double>();
            else if (key == "lr") c.lr_c = c.lr_g = c.lr_phi = v.get<double>();
            else if (key == "inner_steps") c.inner_steps = v.get<std::size_t>();
            else if (key == "max_outer") c.max_outer = v.get<std::size_t>();
            else if (key == "patience") c.patience = v.get<std::size_t>();
            else if (key == "selection_steps") c.selection_steps = v.get<std::size_t>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "layers") c.layers = v.get<std::size_t>();
            else if (key == "hidden") c.hidden = v.get<std::size_t>();
            else if (key == "optimizer") c.optimizer = parse_optimizer(v.get<std::string>());
            else if (key == "snapshot_rule") c.snapshot_rule = parse_snapshot_rule(v.get<std::string>());
            else if (key == "empty_class_fallback") c.fallback = parse_fallback(v.get<std::string>());
            else if (key == "fc_dropout") c.fc_dropout = v.get<double>();
            else if (key == "fc_weight_decay") c.fc_weight_decay = v.get<double>();
            else if (key == "pseudo_labels_include_val") c.pseudo_labels_include_val = v.get<bool>();
            else if (key == "pseudo_hidden") c.pseudo_hidden = v.get<std::size_t>();
            else if (key == "pseudo_max_epochs") c.pseudo_max_epochs = v.get<std::size_t>();
            else if (key == "pseudo_patience") c.pseudo_patience = v.get<std::size_t>();
            else if (key == "pseudo_lr") c.pseudo_lr = v.get<double>();
            else if (key == "pseudo_weight_decay") c.pseudo_weight_decay = v.get<double>();
            else if (key == "gcn_layers") c.gcn_layers = v.get<std::size_t>();
            else if (key == "gcn_hidden") c.gcn_hidden = v.get<std::size_t>();
            else if (key == "gcn_dropout") c.gcn_dropout = v.get<double>();
            else if (key == "gcn_weight_decay") c.gcn_weight_decay = v.get<double>();
            else if (key == "variant") c.variant = parse_variant(v.get<std::string>());
            else throw PreconditionError("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw PreconditionError(std::string("config: ") + e.what());
    }
    return c;
}

json report_to_json(const TrainReport& r, bool include_wall_clock) {
    json history = json::array();
    for (const auto& h : r.history) {
        history.push_back({{"iteration", h.iteration},
                           {"train_loss", h.train_loss},
                           {"val_loss", h.val_loss},
                           {"val_accuracy", h.val_accuracy},
                           {"weight_fc", h.weight_fc}});
    }
    json accuracy = {{"combined", accuracy_json(r.combined)}};
    accuracy["fc"] = r.fc ? accuracy_json(*r.fc) : json(nullptr);
    accuracy["fg"] = r.fg ? accuracy_json(*r.fg) : json(nullptr);

    json doc = {
        {"schema", kReportSchema},
        {"variant", variant_name(r.config.variant)},
        {"seed", r.config.seed},
        {"config", config_to_json(r.config)},
        {"accuracy", std::move(accuracy)},
        {"weight_fc", r.weight_fc ? json(*r.weight_fc) : json(nullptr)},
        {"weight_fc_at_snapshot", r.weight_fc_at_snapshot ? json(*r.weight_fc_at_snapshot) : json(nullptr)},
        {"selection_steps", r.selection_steps},
        {"pseudo_label_val_accuracy", r.pseudo_label_val_accuracy},
        {"best_iteration", r.best_iteration},
        {"outer_iterations", r.outer_iterations},
        {"history", std::move(history)},
    };
    if (include_wall_clock) doc["wall_clock_seconds"] = r.wall_clock_seconds;
    return doc;
}

void write_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace lwgnn
