#include "mobigraph/graph_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "mobigraph/error.hpp"

namespace mobigraph {

using nlohmann::json;

json graph_to_json(const MobilityGraph& g) {
  json attrs = json::array();
  for (Eigen::Index i = 0; i < g.node_attrs.rows(); ++i) {
    attrs.push_back({g.node_attrs(i, 0), g.node_attrs(i, 1)});
  }
  json adj = json::array();
  for (Eigen::Index i = 0; i < g.adjacency.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < g.adjacency.cols(); ++j) row.push_back(g.adjacency(i, j));
    adj.push_back(std::move(row));
  }
  json mask = json::array();
  for (bool b : g.null_mask) mask.push_back(b);
  json doc;
  doc["node_ids"] = g.node_ids;
  doc["node_attrs"] = std::move(attrs);
  doc["adjacency"] = std::move(adj);
  doc["modality"] = std::string(to_string(g.modality));
  doc["period"] = std::string(to_string(g.period));
  doc["null_mask"] = std::move(mask);
  return doc;
}

MobilityGraph graph_from_json(const json& doc) {
  try {
    MobilityGraph g;
    g.node_ids = doc.at("node_ids").get<std::vector<std::int64_t>>();
    const auto n = g.node_ids.size();
    const auto& attrs = doc.at("node_attrs");
    const auto& adj = doc.at("adjacency");
    if (attrs.size() != n || adj.size() != n) {
      throw DimensionError("graph document: " + std::to_string(n) + " node_ids but " +
                           std::to_string(attrs.size()) + " node_attrs and " +
                           std::to_string(adj.size()) + " adjacency rows");
    }
    const auto m = static_cast<Eigen::Index>(n);
    g.node_attrs.resize(m, 2);
    g.adjacency.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& a = attrs.at(i);
      if (a.size() != 2) throw DimensionError("node_attrs row " + std::to_string(i) + " is not [x,y]");
      g.node_attrs(i, 0) = a.at(0).get<double>();
      g.node_attrs(i, 1) = a.at(1).get<double>();
      const auto& row = adj.at(i);
      if (row.size() != n) {
        throw DimensionError("adjacency row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(n));
      }
      for (Eigen::Index j = 0; j < m; ++j) g.adjacency(i, j) = row.at(j).get<double>();
    }
    g.modality = parse_modality(doc.at("modality").get<std::string>());
    g.period = parse_period(doc.value("period", std::string("unspecified")));
    if (doc.contains("null_mask")) {
      g.null_mask = doc.at("null_mask").get<std::vector<bool>>();
    } else {
      g.null_mask.assign(n, false);
    }
    if (auto problems = validate_graph(g); !problems.empty()) {
      throw DataError("invalid graph document: " + problems.front());
    }
    return g;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed graph document: ") + e.what());
  }
}

json path_to_json(const InterpolationPath& path) {
  json out = json::array();
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    json step = graph_to_json(path.steps[k]);
    step["t"] = path.t[k];
    out.push_back(std::move(step));
  }
  return out;
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out << text;
}

void write_json(const std::filesystem::path& file, const json& doc) {
  write_text(file, doc.dump(2) + "\n");
}

MobilityGraph read_graph(const std::filesystem::path& file) {
  return graph_from_json(read_json(file));
}

void write_graph(const std::filesystem::path& file, const MobilityGraph& g) {
  write_json(file, graph_to_json(g));
}

void write_graphml(std::ostream& os, const MobilityGraph& g) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
     << "  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n"
     << "  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n"
     << "  <key id=\"null\" for=\"node\" attr.name=\"null\" attr.type=\"boolean\"/>\n"
     << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
     << "  <graph id=\"" << to_string(g.modality) << "-" << to_string(g.period)
     << "\" edgedefault=\"undirected\">\n";
  // json's number formatting gives shortest round-trip output.
  auto num = [](double v) { return json(v).dump(); };
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    os << "    <node id=\"n" << g.node_ids[i] << "\">"
       << "<data key=\"x\">" << num(g.node_attrs(r, 0)) << "</data>"
       << "<data key=\"y\">" << num(g.node_attrs(r, 1)) << "</data>"
       << "<data key=\"null\">" << (g.null_mask[i] ? "true" : "false") << "</data></node>\n";
  }
  for (Eigen::Index i = 0; i < g.adjacency.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.adjacency.cols(); ++j) {
      if (g.adjacency(i, j) == 0.0) continue;
      os << "    <edge source=\"n" << g.node_ids[i] << "\" target=\"n" << g.node_ids[j] << "\">"
         << "<data key=\"weight\">" << num(g.adjacency(i, j)) << "</data></edge>\n";
    }
  }
  os << "  </graph>\n</graphml>\n";
}

}  // namespace mobigraph
