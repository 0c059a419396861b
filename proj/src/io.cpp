#include "odcal/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace odcal {

using nlohmann::json;

namespace {

json require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw std::invalid_argument(where + ": missing required key '" + key + "'");
  }
  return j.at(key);
}

}  // namespace

std::string network_to_json(const Network& net) {
  json j;
  j["segments"] = json::array();
  for (const Segment& s : net.segments) {
    j["segments"].push_back({{"id", s.id},
                             {"length_km", s.length_km},
                             {"lanes", s.lanes},
                             {"speed_limit_kmh", s.speed_limit_kmh}});
  }
  j["od_pairs"] = net.od_pairs;
  j["paths"] = json::array();
  for (const Path& p : net.paths) {
    j["paths"].push_back(
        {{"id", p.id}, {"od", p.od}, {"segments", p.segments}, {"split", p.split}});
  }
  j["measured_paths"] = net.measured_paths;
  j["measured_segments"] = net.measured_segments;
  return j.dump(2) + "\n";
}

Network network_from_json(const std::string& text) {
  const json j = json::parse(text);
  Network net;
  for (const json& js : require(j, "segments", "network")) {
    Segment s;
    s.id = require(js, "id", "segment").get<std::string>();
    s.length_km = require(js, "length_km", "segment " + s.id).get<double>();
    s.lanes = require(js, "lanes", "segment " + s.id).get<int>();
    s.speed_limit_kmh = require(js, "speed_limit_kmh", "segment " + s.id).get<double>();
    net.segments.push_back(std::move(s));
  }
  net.od_pairs = require(j, "od_pairs", "network").get<std::vector<std::string>>();
  for (const json& jp : require(j, "paths", "network")) {
    Path p;
    p.id = require(jp, "id", "path").get<std::string>();
    p.od = require(jp, "od", "path " + p.id).get<std::string>();
    p.segments = require(jp, "segments", "path " + p.id).get<std::vector<std::string>>();
    p.split = jp.value("split", 1.0);
    net.paths.push_back(std::move(p));
  }
  net.measured_paths = require(j, "measured_paths", "network").get<std::vector<std::string>>();
  net.measured_segments =
      require(j, "measured_segments", "network").get<std::vector<std::string>>();
  return net;
}

std::string measurements_to_json(const FieldMeasurements& m) {
  json j;
  j["paths"] = m.path_travel_time_min;
  j["segments"] = m.segment_counts;
  j["penetration"] = m.penetration;
  if (!m.warnings.empty()) j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

FieldMeasurements measurements_from_json(const std::string& text) {
  const json j = json::parse(text);
  FieldMeasurements m;
  m.path_travel_time_min =
      require(j, "paths", "measurements").get<std::map<std::string, double>>();
  m.segment_counts = require(j, "segments", "measurements").get<std::map<std::string, double>>();
  m.penetration = require(j, "penetration", "measurements").get<double>();
  if (j.contains("warnings")) m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

std::string demand_to_json(const std::vector<std::string>& od_ids, const DemandVector& d) {
  if (static_cast<Eigen::Index>(od_ids.size()) != d.size()) {
    throw std::invalid_argument("demand_to_json: id/vector size mismatch");
  }
  json demand;
  for (std::size_t z = 0; z < od_ids.size(); ++z) {
    demand[od_ids[z]] = d(static_cast<Eigen::Index>(z));
  }
  json j;
  j["demand"] = std::move(demand);
  return j.dump(2) + "\n";
}

DemandVector demand_from_json(const std::string& text, const std::vector<std::string>& od_ids) {
  const json j = json::parse(text);
  const json demand = require(j, "demand", "demand file");
  DemandVector d(od_ids.size());
  for (std::size_t z = 0; z < od_ids.size(); ++z) {
    if (!demand.contains(od_ids[z])) {
      throw std::invalid_argument("demand file missing OD '" + od_ids[z] + "'");
    }
    d(static_cast<Eigen::Index>(z)) = demand.at(od_ids[z]).get<double>();
  }
  return d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string content_fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace odcal
