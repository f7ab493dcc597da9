#pragma once

#include "hamlearn/lstm.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace hamlearn {

inline constexpr const char* kCheckpointSchema = "hamlearn.checkpoint/1";

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    LstmWeights weights;
    MetaOptConfig config;
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json config_to_json(const MetaOptConfig& config);
MetaOptConfig config_from_json(const nlohmann::json& doc);

/// Document layout: {schema, config, metadata, weights: {layers: [{w_in, w_rec,
/// bias}], readout, readout_bias}} with matrices as row-major nested arrays.
nlohmann::json save_checkpoint(const LstmWeights& weights, const MetaOptConfig& config,
                               const nlohmann::json& metadata = nlohmann::json::object());

/// Throws SchemaError on a wrong schema tag, missing fields, or weight shapes
/// that disagree with the embedded config.
Checkpoint load_checkpoint(const nlohmann::json& doc);

/// Text forms; parse failures (e.g. truncated files) are SchemaErrors.
std::string dump_checkpoint(const nlohmann::json& doc);
Checkpoint parse_checkpoint(const std::string& text);
Checkpoint read_checkpoint_file(const std::string& path);

}  // namespace hamlearn
