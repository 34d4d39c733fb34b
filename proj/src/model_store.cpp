#include "model_store.hpp"

#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace isoguard {

using nlohmann::json;

Label ModelBundle::label_score(double score) const {
    return std::visit([&](const auto& l) { return l.label_one(score); }, labeler);
}

std::vector<Label> ModelBundle::label_scores(std::span<const double> scores) const {
    return std::visit([&](const auto& l) { return l.label(scores); }, labeler);
}

std::string ModelBundle::labeler_summary() const {
    std::ostringstream out;
    out.precision(17);
    if (const auto* km = std::get_if<KMeansLabelerModel>(&labeler)) {
        out << "kmeans k=" << km->centroids().size() << " centroids=[";
        for (size_t i = 0; i < km->centroids().size(); ++i) {
            if (i) out << ", ";
            out << km->centroids()[i];
        }
        out << "] normal_cluster=" << km->normal_cluster();
    } else {
        const auto& q = std::get<QuantileLabelerModel>(labeler);
        out << "quantile threshold=" << q.threshold() << " contamination=" << q.contamination()
            << " relative_error=" << q.relative_error();
    }
    return out.str();
}

std::string now_rfc3339_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fingerprint_hex(const std::string& canonical) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

namespace {

// Section-scoped accessors so corrupt documents fail with the section name.
const json& section(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end())
        throw_model(std::string("model file is missing section '") + name + "'");
    return *it;
}

template <typename T>
T field(const json& obj, const char* sec, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end())
        throw_model(std::string("model section '") + sec + "' is missing field '" + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw_model(std::string("model section '") + sec + "' has a malformed field '" + name +
                    "'");
    }
}

json schema_to_json(const FeatureSchema& schema) {
    json cols = json::array();
    for (size_t c = 0; c < schema.columns().size(); ++c) {
        const auto& spec = schema.columns()[c];
        json col = {{"name", spec.name}, {"encoder", encoder_kind_name(spec.kind)}};
        if (spec.kind == EncoderKind::Categorical) {
            json vocab = json::object();
            for (const auto& [value, index] : schema.vocab(c)) vocab[value] = index;
            col["vocab"] = vocab;
        }
        cols.push_back(std::move(col));
    }
    return {{"columns", std::move(cols)},
            {"timezone_offset_minutes", schema.timezone_offset_minutes()}};
}

FeatureSchema schema_from_json(const json& doc) {
    std::vector<ColumnSpec> columns;
    std::vector<std::map<std::string, size_t>> vocabs;
    for (const auto& col : section(doc, "columns")) {
        ColumnSpec spec;
        spec.name = field<std::string>(col, "feature_schema.columns", "name");
        spec.kind =
            encoder_kind_from_name(field<std::string>(col, "feature_schema.columns", "encoder"));
        std::map<std::string, size_t> vocab;
        if (spec.kind == EncoderKind::Categorical) {
            auto it = col.find("vocab");
            if (it == col.end())
                throw_model("model section 'feature_schema' has a categorical column '" +
                            spec.name + "' without a vocab");
            for (const auto& [value, index] : it->items())
                vocab[value] = index.get<size_t>();
        }
        columns.push_back(std::move(spec));
        vocabs.push_back(std::move(vocab));
    }
    return FeatureSchema(std::move(columns), std::move(vocabs),
                         field<int>(doc, "feature_schema", "timezone_offset_minutes"));
}

json forest_to_json(const IsolationForestModel& forest) {
    json trees = json::array();
    for (const auto& tree : forest.trees()) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            if (n.is_external()) {
                nodes.push_back({{"n", n.size}});
            } else {
                nodes.push_back(
                    {{"f", n.split_feature}, {"v", n.split_value}, {"l", n.left}, {"r", n.right}});
            }
        }
        trees.push_back({{"sample_count", tree.sample_count}, {"nodes", std::move(nodes)}});
    }
    const auto& p = forest.params();
    return {{"params",
             {{"num_trees", p.num_trees},
              {"subsample_size", p.subsample_size},
              {"height_limit", p.height_limit},
              {"seed", p.seed}}},
            {"n_train", forest.n_train()},
            {"trees", std::move(trees)}};
}

IsolationForestModel forest_from_json(const json& doc) {
    const json& params_doc = section(doc, "params");
    ForestParams params;
    params.num_trees = field<int>(params_doc, "forest.params", "num_trees");
    params.subsample_size = field<int>(params_doc, "forest.params", "subsample_size");
    params.height_limit = field<int>(params_doc, "forest.params", "height_limit");
    params.seed = field<uint64_t>(params_doc, "forest.params", "seed");

    std::vector<IsolationTree> trees;
    for (const auto& tree_doc : section(doc, "trees")) {
        IsolationTree tree;
        tree.sample_count = field<int64_t>(tree_doc, "forest.trees", "sample_count");
        for (const auto& node_doc : section(tree_doc, "nodes")) {
            TreeNode node;
            if (node_doc.contains("n")) {
                node.size = field<int64_t>(node_doc, "forest.trees.nodes", "n");
                if (node.size < 1) throw_model("model section 'forest' has an external node of size < 1");
            } else {
                node.split_feature = field<int32_t>(node_doc, "forest.trees.nodes", "f");
                node.split_value = field<double>(node_doc, "forest.trees.nodes", "v");
                node.left = field<int32_t>(node_doc, "forest.trees.nodes", "l");
                node.right = field<int32_t>(node_doc, "forest.trees.nodes", "r");
                if (node.left < 0 || node.right < 0)
                    throw_model("model section 'forest' has an internal node with bad children");
            }
            tree.nodes.push_back(node);
        }
        if (tree.nodes.empty()) throw_model("model section 'forest' contains an empty tree");
        for (const auto& n : tree.nodes) {
            if (!n.is_external() && (static_cast<size_t>(n.left) >= tree.nodes.size() ||
                                     static_cast<size_t>(n.right) >= tree.nodes.size()))
                throw_model("model section 'forest' has a child reference out of range");
        }
        trees.push_back(std::move(tree));
    }
    try {
        return IsolationForestModel(std::move(trees), params,
                                    field<int64_t>(doc, "forest", "n_train"));
    } catch (const Error& e) {
        throw_model(std::string("model section 'forest' is inconsistent: ") + e.what());
    }
}

json labeler_to_json(const ModelBundle& bundle) {
    if (const auto* km = std::get_if<KMeansLabelerModel>(&bundle.labeler)) {
        return {{"kind", "kmeans"},
                {"centroids", km->centroids()},
                {"normal_cluster", km->normal_cluster()},
                {"k", km->params().k},
                {"seed", km->params().seed},
                {"max_iter", km->params().max_iter},
                {"tol", km->params().tol},
                {"restarts", km->params().restarts}};
    }
    const auto& q = std::get<QuantileLabelerModel>(bundle.labeler);
    return {{"kind", "quantile"},
            {"threshold", q.threshold()},
            {"contamination", q.contamination()},
            {"relative_error", q.relative_error()}};
}

std::variant<KMeansLabelerModel, QuantileLabelerModel> labeler_from_json(const json& doc) {
    const auto kind = field<std::string>(doc, "labeler", "kind");
    if (kind == "kmeans") {
        KMeansParams params;
        params.k = field<int>(doc, "labeler", "k");
        params.seed = field<uint64_t>(doc, "labeler", "seed");
        params.max_iter = field<int>(doc, "labeler", "max_iter");
        params.tol = field<double>(doc, "labeler", "tol");
        params.restarts = field<int>(doc, "labeler", "restarts");
        try {
            return KMeansLabelerModel(field<std::vector<double>>(doc, "labeler", "centroids"),
                                      field<int>(doc, "labeler", "normal_cluster"), params);
        } catch (const Error& e) {
            throw_model(std::string("model section 'labeler' is inconsistent: ") + e.what());
        }
    }
    if (kind == "quantile") {
        return QuantileLabelerModel(field<double>(doc, "labeler", "threshold"),
                                    field<double>(doc, "labeler", "contamination"),
                                    field<double>(doc, "labeler", "relative_error"));
    }
    throw_model("model section 'labeler' has unknown kind '" + kind + "'");
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    json doc;
    doc["format_version"] = bundle.format_version;
    doc["created_at"] = bundle.created_at.empty() ? now_rfc3339_utc() : bundle.created_at;
    doc["train_fingerprint"] = bundle.train_fingerprint;
    doc["feature_schema"] = schema_to_json(bundle.schema);
    doc["forest"] = forest_to_json(bundle.forest);
    doc["labeler"] = labeler_to_json(bundle);

    std::ofstream out(path);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) throw_io("write failure on '" + path + "'");
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open model file '" + path + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw_model("model file '" + path + "' is not valid JSON");

    const int version = field<int>(doc, "(root)", "format_version");
    if (version != kModelFormatVersion)
        throw_model("unsupported model format_version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kModelFormatVersion) + ")");

    ModelBundle bundle;
    bundle.format_version = version;
    bundle.created_at = field<std::string>(doc, "(root)", "created_at");
    bundle.train_fingerprint = field<std::string>(doc, "(root)", "train_fingerprint");
    bundle.schema = schema_from_json(section(doc, "feature_schema"));
    bundle.forest = forest_from_json(section(doc, "forest"));
    bundle.labeler = labeler_from_json(section(doc, "labeler"));
    return bundle;
}

}  // namespace isoguard
