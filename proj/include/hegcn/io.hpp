#pragma once

// File formats.
//
// Tensor file: one line of JSON {"dims":[B,C,T,J],"dtype":"f64","order":"bctj"},
// a newline, then B*C*T*J little-endian doubles.
//
// Adjacency: JSON {"J":n, "partitions":[{"edges":[[i,j],...]}], "directed":false}
// or a dense CSV matrix (one partition).
//
// Model: JSON with "input":{"B","C","T","J"}, "adjacency" (path, inline object
// or "standin"), "seed", and either "preset":"stgcn" with its parameters or an
// explicit "layers" list. "weights" optionally names a manifest
// {"blob":"file.bin","tensors":[{"name","shape","offset"}]} whose tensors
// replace the seeded ones.

#include "hegcn/adjacency.hpp"
#include "hegcn/model.hpp"
#include "hegcn/tensor.hpp"

#include <json.hpp>

#include <string>

namespace hegcn {

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

void write_tensor(const std::string& path, const GraphTensor& x);
GraphTensor read_tensor(const std::string& path);

AdjacencySet adjacency_from_json(const nlohmann::json& j);
nlohmann::json adjacency_to_json(const AdjacencySet& a);
AdjacencySet read_adjacency(const std::string& path);

/// `base_dir` resolves relative file references.
ModelSpec model_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ModelSpec load_model(const std::string& path);
/// Structure only (layer types, shapes, activation coefficients, pruning).
nlohmann::json model_to_json(const ModelSpec& m);

/// Writes every weight tensor to <dir>/<stem>.bin plus a manifest <dir>/<stem>.json.
void save_weights(const ModelSpec& m, const std::string& dir, const std::string& stem = "weights");
void apply_weights(ModelSpec& m, const std::string& manifest_path);

nlohmann::json merged_to_json(const MergedSpatialMatrix& m);

}  // namespace hegcn
