#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "synthetic.hpp"

namespace gnnd {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Typed readers over one section; every consumed key is crossed off so
// unknown keys can be reported.
class Section {
public:
    Section(const IniFile& ini, std::string name) : name_(std::move(name)) {
        auto it = ini.sections.find(name_);
        if (it != ini.sections.end()) {
            for (const auto& [k, v] : it->second) pending_[k] = v;
        }
    }
    std::optional<std::string> raw(const std::string& key) {
        auto it = pending_.find(key);
        if (it == pending_.end()) return std::nullopt;
        std::string v = it->second;
        pending_.erase(it);
        return v;
    }
    void str(const std::string& key, std::string& out) {
        if (auto v = raw(key)) out = *v;
    }
    void opt_str(const std::string& key, std::optional<std::string>& out) {
        if (auto v = raw(key)) out = *v;
    }
    void real(const std::string& key, double& out) {
        if (auto v = raw(key)) {
            try {
                out = std::stod(*v);
            } catch (const std::exception&) {
                throw ConfigError("[" + name_ + "] " + key + ": bad number '" + *v + "'");
            }
        }
    }
    template <class T>
    void integer(const std::string& key, T& out) {
        if (auto v = raw(key)) {
            long long x = 0;
            const std::string t = strip(*v);
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
            if (ec != std::errc() || p != t.data() + t.size()) {
                throw ConfigError("[" + name_ + "] " + key + ": bad integer '" + *v + "'");
            }
            out = T(x);
        }
    }
    void finish() const {
        if (!pending_.empty()) {
            throw ConfigError("unknown key '" + pending_.begin()->first + "' in section [" +
                              name_ + "]");
        }
    }

private:
    std::string name_;
    std::map<std::string, std::string> pending_;
};

}  // namespace

IniFile IniFile::parse_text(const std::string& text) {
    IniFile ini;
    std::string current;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string s = strip(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
            current = strip(s.substr(1, s.size() - 2));
            ini.sections[current];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        if (current.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        }
        ini.sections[current][strip(s.substr(0, eq))] = strip(s.substr(eq + 1));
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_ini(IniFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_ini(const IniFile& ini) {
    static const std::set<std::string> known_sections{"dataset", "model",    "train",
                                                      "unlearn", "deletion", "split",
                                                      "run",     "baselines"};
    for (const auto& [name, _] : ini.sections) {
        if (!known_sections.count(name)) throw ConfigError("unknown config section [" + name + "]");
    }

    ExperimentConfig c;
    {
        Section s(ini, "dataset");
        s.str("kind", c.dataset.kind);
        s.str("spec", c.dataset.spec);
        s.integer("gen_seed", c.dataset.gen_seed);
        s.str("path", c.dataset.path);
        s.opt_str("features", c.dataset.features_path);
        s.opt_str("labels", c.dataset.labels_path);
        s.integer("feature_dim_hint", c.dataset.feature_dim_hint);
        s.finish();
        if (c.dataset.kind != "synthetic" && c.dataset.kind != "edge_list") {
            throw ConfigError("dataset.kind must be synthetic or edge_list");
        }
    }
    {
        Section s(ini, "model");
        if (auto v = s.raw("dims")) {
            c.train.hidden_dims.clear();
            for (const std::string& d : split_list(*v)) {
                c.train.hidden_dims.push_back(std::size_t(std::stoul(d)));
            }
            if (c.train.hidden_dims.empty()) throw ConfigError("model.dims must be non-empty");
        }
        s.finish();
    }
    {
        Section s(ini, "train");
        s.integer("epochs", c.train.epochs);
        s.real("lr", c.train.lr);
        s.finish();
    }
    {
        Section s(ini, "unlearn");
        s.real("lambda", c.unlearn_cfg.lambda);
        s.integer("epochs", c.unlearn_cfg.epochs);
        s.real("lr", c.unlearn_cfg.lr);
        s.integer("pairs_per_deleted_edge", c.unlearn_cfg.pairs_per_deleted_edge);
        if (auto v = s.raw("optimizer")) {
            if (*v == "adam") c.unlearn_cfg.optimizer = UnlearnConfig::Optimizer::Adam;
            else if (*v == "sgd") c.unlearn_cfg.optimizer = UnlearnConfig::Optimizer::Sgd;
            else throw ConfigError("unlearn.optimizer must be adam or sgd");
        }
        if (auto v = s.raw("mode")) {
            if (*v == "layer-wise") c.unlearn_cfg.mode = DelMode::LayerWise;
            else if (*v == "last-layer-only") c.unlearn_cfg.mode = DelMode::LastLayerOnly;
            else throw ConfigError("unlearn.mode must be layer-wise or last-layer-only");
        }
        if (auto v = s.raw("activation")) {
            if (*v == "linear") c.unlearn_cfg.activation = DelActivation::Linear;
            else if (*v == "sigmoid") c.unlearn_cfg.activation = DelActivation::Sigmoid;
            else throw ConfigError("unlearn.activation must be linear or sigmoid");
        }
        s.finish();
        c.unlearn_cfg.validate();
    }
    {
        Section s(ini, "deletion");
        s.str("task", c.deletion.task);
        s.real("ratio", c.deletion.ratio);
        if (auto v = s.raw("locality")) {
            std::string t = *v;
            std::transform(t.begin(), t.end(), t.begin(), ::tolower);
            if (t == "in") c.deletion.locality = Locality::In;
            else if (t == "out") c.deletion.locality = Locality::Out;
            else throw ConfigError("deletion.locality must be in or out");
        }
        s.integer("node_count", c.deletion.node_count);
        if (auto v = s.raw("nodes")) {
            for (const std::string& t : split_list(*v)) {
                c.deletion.nodes.push_back(NodeId(std::stol(t)));
            }
        }
        s.finish();
        if (c.deletion.task != "edges" && c.deletion.task != "nodes" &&
            c.deletion.task != "features") {
            throw ConfigError("deletion.task must be edges, nodes or features");
        }
    }
    {
        Section s(ini, "split");
        s.real("test_frac", c.test_frac);
        s.real("val_frac", c.val_frac);
        s.finish();
    }
    {
        Section s(ini, "run");
        if (auto v = s.raw("seeds")) {
            c.seeds.clear();
            for (const std::string& t : split_list(*v)) {
                c.seeds.push_back(std::stoull(t));
            }
        }
        if (auto v = s.raw("methods")) {
            c.methods = split_list(*v);
        }
        s.str("out", c.out_dir);
        s.finish();
    }
    {
        Section s(ini, "baselines");
        s.integer("grad_ascent_steps", c.baselines.grad_ascent_steps);
        s.real("grad_ascent_lr", c.baselines.grad_ascent_lr);
        s.integer("noisy_steps", c.baselines.noisy_steps);
        s.real("noisy_sigma", c.baselines.noisy_sigma);
        s.real("noisy_lr", c.baselines.noisy_lr);
        s.finish();
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("run.seeds must be non-empty");
    static const std::set<std::string> known{"gnndelete", "retrain", "grad_ascent",
                                            "noisy_finetune"};
    for (const std::string& m : methods) {
        if (!known.count(m)) throw ConfigError("unknown method: " + m);
    }
    if (dataset.kind == "synthetic") {
        SyntheticSpec::parse(dataset.spec);  // syntax check
    } else {
        if (!std::filesystem::exists(dataset.path)) {
            throw ConfigError("dataset.path does not exist: " + dataset.path);
        }
        if (dataset.features_path && !std::filesystem::exists(*dataset.features_path)) {
            throw ConfigError("dataset.features does not exist: " + *dataset.features_path);
        }
        if (dataset.labels_path && !std::filesystem::exists(*dataset.labels_path)) {
            throw ConfigError("dataset.labels does not exist: " + *dataset.labels_path);
        }
    }
    if (test_frac < 0 || val_frac < 0 || test_frac + val_frac >= 1.0) {
        throw ConfigError("split fractions must be >= 0 and sum below 1");
    }
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "dataset.kind=" << dataset.kind << '\n';
    if (dataset.kind == "synthetic") {
        out << "dataset.spec=" << SyntheticSpec::parse(dataset.spec).canonical() << '\n';
        out << "dataset.gen_seed=" << dataset.gen_seed << '\n';
    } else {
        out << "dataset.path=" << dataset.path << '\n';
        out << "dataset.features=" << dataset.features_path.value_or("") << '\n';
        out << "dataset.labels=" << dataset.labels_path.value_or("") << '\n';
        out << "dataset.feature_dim_hint=" << dataset.feature_dim_hint << '\n';
    }
    out << "model.dims=";
    for (std::size_t i = 0; i < train.hidden_dims.size(); ++i) {
        if (i) out << ',';
        out << train.hidden_dims[i];
    }
    out << '\n';
    out << "train.epochs=" << train.epochs << '\n';
    out << "train.lr=" << train.lr << '\n';
    out << "unlearn.lambda=" << unlearn_cfg.lambda << '\n';
    out << "unlearn.epochs=" << unlearn_cfg.epochs << '\n';
    out << "unlearn.lr=" << unlearn_cfg.lr << '\n';
    out << "unlearn.optimizer="
        << (unlearn_cfg.optimizer == UnlearnConfig::Optimizer::Adam ? "adam" : "sgd") << '\n';
    out << "unlearn.mode="
        << (unlearn_cfg.mode == DelMode::LayerWise ? "layer-wise" : "last-layer-only") << '\n';
    out << "unlearn.activation="
        << (unlearn_cfg.activation == DelActivation::Linear ? "linear" : "sigmoid") << '\n';
    out << "unlearn.pairs_per_deleted_edge=" << unlearn_cfg.pairs_per_deleted_edge << '\n';
    out << "deletion.task=" << deletion.task << '\n';
    out << "deletion.ratio=" << deletion.ratio << '\n';
    out << "deletion.locality=" << (deletion.locality == Locality::In ? "in" : "out") << '\n';
    out << "deletion.node_count=" << deletion.node_count << '\n';
    out << "deletion.nodes=";
    for (std::size_t i = 0; i < deletion.nodes.size(); ++i) {
        if (i) out << ',';
        out << deletion.nodes[i];
    }
    out << '\n';
    out << "split.test_frac=" << test_frac << '\n';
    out << "split.val_frac=" << val_frac << '\n';
    out << "run.seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) out << ',';
        out << seeds[i];
    }
    out << '\n';
    out << "run.methods=";
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (i) out << ',';
        out << methods[i];
    }
    out << '\n';
    out << "baselines.grad_ascent_steps=" << baselines.grad_ascent_steps << '\n';
    out << "baselines.grad_ascent_lr=" << baselines.grad_ascent_lr << '\n';
    out << "baselines.noisy_steps=" << baselines.noisy_steps << '\n';
    out << "baselines.noisy_sigma=" << baselines.noisy_sigma << '\n';
    out << "baselines.noisy_lr=" << baselines.noisy_lr << '\n';
    return out.str();
}

std::string ExperimentConfig::hash() const {
    std::ostringstream out;
    out << std::hex << fnv1a(canonical());
    return out.str();
}

}  // namespace gnnd
