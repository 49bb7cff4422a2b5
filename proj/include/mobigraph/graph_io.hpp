#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mobigraph/graph.hpp"

namespace mobigraph {

// Graph document: node_ids, node_attrs ([x,y] rows), adjacency (row-major
// rows), modality, period, null_mask.
nlohmann::json graph_to_json(const MobilityGraph& g);
MobilityGraph graph_from_json(const nlohmann::json& doc);

nlohmann::json path_to_json(const InterpolationPath& path);

MobilityGraph read_graph(const std::filesystem::path& file);
void write_graph(const std::filesystem::path& file, const MobilityGraph& g);

// Nodes carry x, y (and null); edges carry weight. Upper triangle only.
void write_graphml(std::ostream& os, const MobilityGraph& g);

nlohmann::json read_json(const std::filesystem::path& file);
void write_json(const std::filesystem::path& file, const nlohmann::json& doc);
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace mobigraph
