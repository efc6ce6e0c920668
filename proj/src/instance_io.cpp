#include "gesha/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gesha/errors.hpp"
#include "json.hpp"

namespace gesha {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(path_ + ": " + what);
  }

  [[nodiscard]] bool has(const char* key) const { return node_.contains(key); }

  [[nodiscard]] double number(const char* key) const {
    if (!node_.contains(key)) fail(std::string("missing field '") + key + "'");
    const auto& v = node_.at(key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(std::string("field '") + key + "' must be finite");
    return d;
  }

  [[nodiscard]] double number(const char* key, double fallback) const {
    return node_.contains(key) ? number(key) : fallback;
  }

  [[nodiscard]] std::string text(const char* key) const {
    if (!node_.contains(key)) fail(std::string("missing field '") + key + "'");
    const auto& v = node_.at(key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  [[nodiscard]] std::string text(const char* key, const std::string& fallback) const {
    return node_.contains(key) ? text(key) : fallback;
  }

  [[nodiscard]] const json& array(const char* key) const {
    if (!node_.contains(key)) fail(std::string("missing field '") + key + "'");
    const auto& v = node_.at(key);
    if (!v.is_array()) fail(std::string("field '") + key + "' must be an array");
    return v;
  }

  [[nodiscard]] Reader child(const char* key) const {
    if (!node_.contains(key)) fail(std::string("missing section '") + key + "'");
    return {node_.at(key), path_ + "." + key};
  }

  // A per-step series: an array of length `steps` or a scalar broadcast.
  [[nodiscard]] std::vector<double> series(const char* key, int steps) const {
    if (!node_.contains(key)) return std::vector<double>(static_cast<std::size_t>(steps), 0.0);
    const auto& v = node_.at(key);
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(steps), v.get<double>());
    if (!v.is_array()) fail(std::string("field '") + key + "' must be a number or an array");
    if (static_cast<int>(v.size()) < steps) {
      fail(std::string("field '") + key + "' has " + std::to_string(v.size()) +
           " entries, expected " + std::to_string(steps));
    }
    std::vector<double> out;
    for (int t = 0; t < steps; ++t) {
      if (!v[t].is_number()) fail(std::string("field '") + key + "' must hold numbers");
      out.push_back(v[t].get<double>());
    }
    return out;
  }

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const json& raw() const { return node_; }

 private:
  const json& node_;
  std::string path_;
};

using NameIndex = std::map<std::string, int>;

int lookup(const NameIndex& names, const std::string& key, const Reader& where, const char* what) {
  const auto it = names.find(key);
  if (it == names.end()) where.fail(std::string("unknown ") + what + " '" + key + "'");
  return it->second;
}

template <typename F>
void for_each_item(const Reader& parent, const char* key, F&& f) {
  const auto& arr = parent.array(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    f(Reader(arr[i], parent.path() + "." + key + "[" + std::to_string(i) + "]"));
  }
}

void read_electric(const Reader& r, Instance& inst) {
  auto& e = inst.electric;
  const int steps = inst.time.steps;
  e.base_mva = r.number("base_mva", 100.0);
  e.voll = r.number("voll", 1000.0);
  e.cost_add = r.number("cost_add", e.voll);
  NameIndex buses;
  for_each_item(r, "buses", [&](const Reader& b) {
    const auto name = b.text("name");
    if (!buses.emplace(name, static_cast<int>(e.buses.size())).second) b.fail("duplicate bus " + name);
    e.buses.push_back(name);
    e.load.push_back(b.series("load", steps));
    if (b.has("load_add_cap")) e.load_add_cap.push_back(b.series("load_add_cap", steps));
  });
  if (!e.load_add_cap.empty() && e.load_add_cap.size() != e.buses.size()) {
    r.fail("load_add_cap must be given for all buses or none");
  }
  e.reference_bus = lookup(buses, r.text("reference_bus", e.buses.empty() ? "" : e.buses.front()),
                           r, "bus");
  for_each_item(r, "lines", [&](const Reader& l) {
    e.lines.push_back({l.text("name"), lookup(buses, l.text("from"), l, "bus"),
                       lookup(buses, l.text("to"), l, "bus"), l.number("susceptance"),
                       l.number("limit")});
  });
  for_each_item(r, "generators", [&](const Reader& g) {
    Generator gen;
    gen.name = g.text("name");
    gen.bus = lookup(buses, g.text("bus"), g, "bus");
    gen.pmin = g.number("pmin", 0.0);
    gen.pmax = g.number("pmax");
    gen.ramp = g.number("ramp", gen.pmax);
    gen.cost = g.number("cost");
    gen.cost_up = g.number("cost_up", gen.cost);
    gen.cost_down = g.number("cost_down", gen.cost);
    e.generators.push_back(gen);
  });
  if (r.has("wind_farms")) {
    for_each_item(r, "wind_farms", [&](const Reader& w) {
      e.wind_farms.push_back({w.text("name"), lookup(buses, w.text("bus"), w, "bus"),
                              w.number("capacity")});
    });
  }
}

NameIndex read_gas(const Reader& r, Instance& inst) {
  auto& gas = inst.gas;
  const int steps = inst.time.steps;
  gas.sound_speed = r.number("sound_speed", 350.0);
  gas.shed_cost = r.number("shed_cost", 5.0);
  inst.max_segment_length = r.number("max_segment_length", 10000.0);
  NameIndex nodes;
  for_each_item(r, "nodes", [&](const Reader& n) {
    const auto name = n.text("name");
    if (!nodes.emplace(name, static_cast<int>(gas.nodes.size())).second) n.fail("duplicate node " + name);
    gas.nodes.push_back({name, n.number("pmin"), n.number("pmax")});
    gas.demand.push_back(n.series("demand", steps));
  });
  gas.slack_node = lookup(nodes, r.text("slack_node"), r, "gas node");
  gas.slack_pressure = r.number("slack_pressure");
  for_each_item(r, "pipes", [&](const Reader& p) {
    gas.pipes.push_back({p.text("name"), lookup(nodes, p.text("from"), p, "gas node"),
                         lookup(nodes, p.text("to"), p, "gas node"), p.number("length"),
                         p.number("diameter"), p.number("friction")});
  });
  if (r.has("compressors")) {
    for_each_item(r, "compressors", [&](const Reader& c) {
      Compressor comp;
      comp.name = c.text("name");
      comp.from = lookup(nodes, c.text("from"), c, "gas node");
      comp.to = lookup(nodes, c.text("to"), c, "gas node");
      comp.ratio_min = c.number("ratio_min", 1.0);
      comp.ratio_max = c.number("ratio_max", comp.ratio_min);
      comp.cost = c.number("cost", 0.0);
      if (c.has("flow_min")) comp.flow_min = c.number("flow_min");
      if (c.has("flow_max")) comp.flow_max = c.number("flow_max");
      gas.compressors.push_back(comp);
    });
  }
  for_each_item(r, "supplies", [&](const Reader& s) {
    gas.supplies.push_back({s.text("name"), lookup(nodes, s.text("node"), s, "gas node"),
                            s.number("smin", 0.0), s.number("smax"), s.number("cost")});
  });
  return nodes;
}

}  // namespace

Instance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw DataError(std::string("instance is not valid JSON: ") + err.what());
  }
  const Reader root(doc, "instance");
  Instance inst;
  inst.name = root.text("name", "instance");
  inst.currency = root.text("currency", "USD");

  const auto time = root.child("time");
  const double steps = time.number("steps");
  if (steps != std::floor(steps) || steps < 1) time.fail("steps must be a positive integer");
  inst.time.steps = static_cast<int>(steps);
  inst.time.dt = time.number("dt_seconds", 3600.0);

  read_electric(root.child("electric"), inst);

  NameIndex gas_nodes;
  if (root.has("gas") && !root.raw().at("gas").is_null()) gas_nodes = read_gas(root.child("gas"), inst);

  NameIndex gens;
  for (std::size_t g = 0; g < inst.electric.generators.size(); ++g) {
    gens.emplace(inst.electric.generators[g].name, static_cast<int>(g));
  }
  if (root.has("coupling")) {
    const auto coupling = root.child("coupling");
    for_each_item(coupling, "gfpps", [&](const Reader& c) {
      inst.coupling.gfpps.push_back({lookup(gens, c.text("generator"), c, "generator"),
                                     lookup(gas_nodes, c.text("gas_node"), c, "gas node"),
                                     c.number("heat_rate")});
    });
  }
  inst.finalize();
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string instance_to_json(const Instance& inst) {
  json doc;
  doc["name"] = inst.name;
  doc["currency"] = inst.currency;
  doc["time"] = {{"steps", inst.time.steps}, {"dt_seconds", inst.time.dt}};
  const auto& e = inst.electric;
  json el;
  el["base_mva"] = e.base_mva;
  el["voll"] = e.voll;
  el["cost_add"] = e.cost_add;
  el["reference_bus"] = e.buses.at(e.reference_bus);
  el["buses"] = json::array();
  for (int b = 0; b < e.num_buses(); ++b) {
    json bus = {{"name", e.buses[b]}, {"load", e.load[b]}};
    if (!e.load_add_cap.empty()) bus["load_add_cap"] = e.load_add_cap[b];
    el["buses"].push_back(bus);
  }
  el["lines"] = json::array();
  for (const auto& l : e.lines) {
    el["lines"].push_back({{"name", l.name}, {"from", e.buses[l.from]}, {"to", e.buses[l.to]},
                           {"susceptance", l.susceptance}, {"limit", l.limit}});
  }
  el["generators"] = json::array();
  for (const auto& g : e.generators) {
    el["generators"].push_back({{"name", g.name}, {"bus", e.buses[g.bus]}, {"pmin", g.pmin},
                                {"pmax", g.pmax}, {"ramp", g.ramp}, {"cost", g.cost},
                                {"cost_up", g.cost_up}, {"cost_down", g.cost_down}});
  }
  el["wind_farms"] = json::array();
  for (const auto& w : e.wind_farms) {
    el["wind_farms"].push_back({{"name", w.name}, {"bus", e.buses[w.bus]}, {"capacity", w.capacity}});
  }
  doc["electric"] = el;
  if (!inst.gas.empty()) {
    const auto& g = inst.gas;
    json gs;
    gs["sound_speed"] = g.sound_speed;
    gs["shed_cost"] = g.shed_cost;
    gs["max_segment_length"] = inst.max_segment_length;
    gs["slack_node"] = g.nodes.at(g.slack_node).name;
    gs["slack_pressure"] = g.slack_pressure;
    gs["nodes"] = json::array();
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
      gs["nodes"].push_back({{"name", g.nodes[n].name}, {"pmin", g.nodes[n].pmin},
                             {"pmax", g.nodes[n].pmax}, {"demand", g.demand[n]}});
    }
    gs["pipes"] = json::array();
    for (const auto& p : g.pipes) {
      gs["pipes"].push_back({{"name", p.name}, {"from", g.nodes[p.from].name},
                             {"to", g.nodes[p.to].name}, {"length", p.length},
                             {"diameter", p.diameter}, {"friction", p.friction}});
    }
    gs["compressors"] = json::array();
    for (const auto& c : g.compressors) {
      json comp = {{"name", c.name}, {"from", g.nodes[c.from].name}, {"to", g.nodes[c.to].name},
                   {"ratio_min", c.ratio_min}, {"ratio_max", c.ratio_max}, {"cost", c.cost}};
      if (!std::isnan(c.flow_min)) comp["flow_min"] = c.flow_min;
      if (!std::isnan(c.flow_max)) comp["flow_max"] = c.flow_max;
      gs["compressors"].push_back(comp);
    }
    gs["supplies"] = json::array();
    for (const auto& s : g.supplies) {
      gs["supplies"].push_back({{"name", s.name}, {"node", g.nodes[s.node].name}, {"smin", s.smin},
                                {"smax", s.smax}, {"cost", s.cost}});
    }
    doc["gas"] = gs;
    json gf = json::array();
    for (const auto& link : inst.coupling.gfpps) {
      gf.push_back({{"generator", e.generators[link.generator].name},
                    {"gas_node", g.nodes[link.gas_node].name},
                    {"heat_rate", link.heat_rate}});
    }
    doc["coupling"] = {{"gfpps", gf}};
  }
  return doc.dump(2);
}

}  // namespace gesha
