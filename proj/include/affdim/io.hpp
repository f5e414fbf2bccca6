#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dimension.hpp"
#include "errors.hpp"
#include "ifs.hpp"
#include "pressure.hpp"
#include "spectrum.hpp"

namespace affdim {

using json = nlohmann::json;

/// Seventeen significant digits: enough to reproduce every double exactly.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// System descriptions.
// ---------------------------------------------------------------------------

inline json tail_to_json(const TailGenerator& t) {
  json j;
  j["start_index"] = t.start_index();
  if (const auto* p = std::get_if<PaperTail>(&t.spec())) {
    j["family"] = "paper51";
    j["params"] = {{"beta", p->beta}, {"gamma", p->gamma}, {"b", p->b}, {"d", p->d}, {"x0", p->x0}, {"y0", p->y0}};
  } else {
    const auto& d = std::get<DiagonalTail>(t.spec());
    j["family"] = "diagonal";
    j["params"] = {{"law", d.law == TailLaw::Geometric ? "geometric" : "power"}, {"a0", d.a0}, {"rate", d.rate}, {"tx", d.tx}};
    if (d.major) j["params"]["major"] = *d.major;
  }
  return j;
}

inline json system_to_json(const IfsSystem& s) {
  json j;
  j["maps"] = json::array();
  for (const auto& m : s.explicit_maps()) {
    const Matrix2& A = m.map.linear;
    j["maps"].push_back({{"index", m.index},
                         {"matrix", {A.a(), A.b(), A.c(), A.d()}},
                         {"translation", {m.map.translation.x, m.map.translation.y}}});
  }
  if (s.tail()) j["tail"] = tail_to_json(*s.tail());
  j["separation"] = to_string(s.declared_separation());
  if (!s.gallery().name.empty()) j["gallery"] = {{"name", s.gallery().name}, {"params", s.gallery().params}};
  return j;
}

namespace detail {

inline double num(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw Error(ErrorCode::ConfigParse, std::string("missing number '") + key + "'");
  return j.at(key).get<double>();
}

inline Separation separation_from(const std::string& s) {
  if (s == "none") return Separation::None;
  if (s == "OSC") return Separation::OSC;
  if (s == "SOSC") return Separation::SOSC;
  throw Error(ErrorCode::ConfigParse, "unknown separation '" + s + "'");
}

inline TailGenerator tail_from_json(const json& j) {
  const std::string family = j.value("family", "");
  const json& p = j.at("params");
  const Index start = j.at("start_index").get<Index>();
  if (family == "paper51") {
    return TailGenerator(PaperTail{num(p, "beta"), num(p, "gamma"), num(p, "b"), num(p, "d"), start, num(p, "x0"), num(p, "y0")});
  }
  if (family == "diagonal") {
    DiagonalTail d;
    const std::string law = p.value("law", "geometric");
    if (law != "geometric" && law != "power") throw Error(ErrorCode::ConfigParse, "unknown tail law '" + law + "'");
    d.law = law == "geometric" ? TailLaw::Geometric : TailLaw::Power;
    d.a0 = num(p, "a0");
    d.rate = num(p, "rate");
    d.tx = p.contains("tx") ? num(p, "tx") : 0.0;
    if (p.contains("major")) d.major = num(p, "major");
    d.start = start;
    return TailGenerator(d);
  }
  throw Error(ErrorCode::ConfigParse, "unknown tail family '" + family + "'");
}

}  // namespace detail

inline IfsSystem system_from_json(const json& j) {
  try {
    std::vector<IndexedMap> maps;
    for (const auto& m : j.at("maps")) {
      const auto& a = m.at("matrix");
      const auto& t = m.at("translation");
      if (a.size() != 4 || t.size() != 2) throw Error(ErrorCode::ConfigParse, "matrix needs 4 entries, translation 2");
      maps.push_back({m.at("index").get<Index>(),
                      {Matrix2(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()),
                       {t[0].get<double>(), t[1].get<double>()}}});
    }
    std::optional<TailGenerator> tail;
    if (j.contains("tail") && !j.at("tail").is_null()) tail.emplace(detail::tail_from_json(j.at("tail")));
    GalleryInfo g;
    if (j.contains("gallery")) {
      g.name = j.at("gallery").value("name", "");
      if (j.at("gallery").contains("params")) g.params = j.at("gallery").at("params").get<std::map<std::string, double>>();
    }
    return IfsSystem(std::move(maps), std::move(tail), detail::separation_from(j.value("separation", "none")), std::move(g));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("system description: ") + e.what());
  }
}

inline IfsSystem parse_system(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigParse, e.what());
  }
  return system_from_json(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileIO, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileIO, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::FileIO, "write failed for " + path);
}

inline IfsSystem load_system(const std::string& path) { return parse_system(read_file(path)); }

// ---------------------------------------------------------------------------
// Results.
// ---------------------------------------------------------------------------

inline json to_json(const PressureBound& p) {
  json j{{"subset", p.subset.to_string()}, {"s", p.s},           {"depth", p.depth},
         {"lower", p.lower},               {"upper", p.upper},   {"method", to_string(p.method)},
         {"certified", p.lower_certified}, {"words", p.words_evaluated}};
  if (!std::isnan(p.upper_entry)) j["upper_entry"] = p.upper_entry;
  return j;
}

inline json to_json(const DimensionInterval& d) {
  return {{"subset", d.subset.to_string()}, {"lo", d.lo},
          {"hi", d.hi},                     {"width", d.width()},
          {"certified", d.certified},       {"method", d.method},
          {"depth", d.depth_used},          {"words", d.words_used}};
}

inline json to_json(const SpectrumCloud& c) {
  json j;
  j["gallery"] = c.gallery;
  j["ground_set"] = c.ground_set.to_string();
  j["n_max"] = c.n_max;
  j["universe"] = c.universe;
  j["partial"] = c.partial;
  j["points"] = json::array();
  for (const auto& p : c.points) {
    json q = to_json(p.interval);
    q["route"] = p.route;
    if (!p.note.empty()) q["note"] = p.note;
    j["points"].push_back(std::move(q));
  }
  j["gaps"] = json::array();
  for (const auto& g : c.gaps) j["gaps"].push_back({g.a, g.b});
  j["isolated_candidates"] = json::array();
  for (const auto& i : c.isolated_candidates) {
    json subs = json::array();
    for (const auto& s : i.subsets) subs.push_back(s.to_string());
    j["isolated_candidates"].push_back(
        {{"lo", i.lo}, {"hi", i.hi}, {"subsets", subs}, {"gap_below", {i.below.a, i.below.b}}, {"gap_above", {i.above.a, i.above.b}}});
  }
  return j;
}

/// Flat rows subset;lo;hi;certified;method.
inline std::string to_csv(const SpectrumCloud& c) {
  std::string out = "subset;lo;hi;certified;method\n";
  for (const auto& p : c.points)
    out += p.subset.to_string() + ";" + fmt17(p.interval.lo) + ";" + fmt17(p.interval.hi) + ";" +
           (p.interval.certified ? "true" : "false") + ";" + p.interval.method + "\n";
  return out;
}

struct CsvRow {
  std::string subset;
  double lo = 0.0;
  double hi = 0.0;
  bool certified = false;
  std::string method;
};

inline std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "subset;lo;hi;certified;method") throw Error(ErrorCode::ConfigParse, "bad CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    for (std::size_t q; (q = line.find(';', pos)) != std::string::npos; pos = q + 1) f.push_back(line.substr(pos, q - pos));
    f.push_back(line.substr(pos));
    if (f.size() != 5) throw Error(ErrorCode::ConfigParse, "CSV row needs 5 fields: " + line);
    rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), f[3] == "true", f[4]});
  }
  return rows;
}

}  // namespace affdim
