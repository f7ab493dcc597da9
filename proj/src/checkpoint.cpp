#include "hamlearn/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace hamlearn {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw SchemaError("checkpoint: matrix must be a non-empty array");
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != n_cols) throw SchemaError("checkpoint: ragged matrix");
        for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.begin(), v.end());
}

Eigen::VectorXd vector_from_json(const json& arr) {
    const auto v = arr.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json config_to_json(const MetaOptConfig& config) {
    return {{"hidden_size", config.hidden_size},
            {"n_layers", config.n_layers},
            {"preprocess", to_string(config.preprocess)},
            {"logsign_p", config.logsign_p},
            {"output_scale", config.output_scale}};
}

MetaOptConfig config_from_json(const json& doc) {
    MetaOptConfig c;
    c.hidden_size = doc.at("hidden_size").get<std::size_t>();
    c.n_layers = doc.at("n_layers").get<std::size_t>();
    c.preprocess = parse_preprocess(doc.at("preprocess").get<std::string>());
    c.logsign_p = doc.at("logsign_p").get<double>();
    c.output_scale = doc.at("output_scale").get<double>();
    c.validate();
    return c;
}

json save_checkpoint(const LstmWeights& weights, const MetaOptConfig& config, const json& metadata) {
    weights.check_shape(config);
    json layers = json::array();
    for (const auto& l : weights.layers)
        layers.push_back({{"w_in", matrix_to_json(l.w_in)}, {"w_rec", matrix_to_json(l.w_rec)}, {"bias", vector_to_json(l.bias)}});
    return {{"schema", kCheckpointSchema},
            {"config", config_to_json(config)},
            {"metadata", metadata},
            {"weights", {{"layers", std::move(layers)}, {"readout", vector_to_json(weights.readout)}, {"readout_bias", weights.readout_bias}}}};
}

Checkpoint load_checkpoint(const json& doc) {
    try {
        if (!doc.is_object() || !doc.contains("schema")) throw SchemaError("checkpoint: missing schema tag");
        if (doc.at("schema") != kCheckpointSchema)
            throw SchemaError("checkpoint: unsupported schema " + doc.at("schema").dump() + ", expected " + kCheckpointSchema);
        Checkpoint cp;
        cp.config = config_from_json(doc.at("config"));
        cp.metadata = doc.value("metadata", json::object());
        const json& w = doc.at("weights");
        for (const auto& l : w.at("layers"))
            cp.weights.layers.push_back({matrix_from_json(l.at("w_in")), matrix_from_json(l.at("w_rec")), vector_from_json(l.at("bias"))});
        cp.weights.readout = vector_from_json(w.at("readout"));
        cp.weights.readout_bias = w.at("readout_bias").get<double>();
        try {
            cp.weights.check_shape(cp.config);
        } catch (const std::invalid_argument& e) {
            throw SchemaError(std::string("checkpoint: ") + e.what());
        }
        if (!cp.weights.all_finite()) throw SchemaError("checkpoint: non-finite weights");
        return cp;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

std::string dump_checkpoint(const json& doc) {
    return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("checkpoint: malformed document: ") + e.what());
    }
    return load_checkpoint(doc);
}

Checkpoint read_checkpoint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace hamlearn
