#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/grid.hpp"
#include "qwalk/walk_spec.hpp"

namespace qwalk {

struct MonodromyConfig {
  std::string path;  // "segment" or "halfcircle"
  double eps = 0.3;
  long steps = 64;
  Json start;  // "auto" or an [re, im] pair
};

/// Fully resolved run configuration.  manifest echoes every value the run
/// uses, defaults included, and parses back to the identical manifest.
struct RunConfig {
  Json manifest;
  LaurentMatrixSymbol walk;
  LatticeState initial;
  TorusGrid grid;
  long t = 0;
  std::vector<long> t_list;
  int axis = 1;
  double exclusion_radius = 0.3;
  MonodromyConfig monodromy;
  std::vector<std::vector<double>> w_list;
  std::vector<std::vector<int>> m_list;

  std::string manifest_text() const { return manifest.dump(2) + "\n"; }
};

namespace detail {

inline Json serialize_walk(const Json& given, const LaurentMatrixSymbol& walk) {
  if (given.contains("name")) {
    Json out;
    out["name"] = given.at("name");
    out["params"] = given.contains("params") ? given.at("params") : Json::object();
    return out;
  }
  // canonical echo of a custom walk, in coefficient map order
  Json out;
  out["d"] = walk.dimension();
  out["n"] = walk.coin_size();
  Json coeffs = Json::array();
  for (const auto& [offset, a] : walk.coefficients()) {
    Json entry;
    entry["offset"] = offset;
    Json rows = Json::array();
    for (int r = 0; r < walk.coin_size(); ++r) {
      Json row = Json::array();
      for (int c = 0; c < walk.coin_size(); ++c)
        row.push_back(Json::array({a(r, c).real(), a(r, c).imag()}));
      rows.push_back(row);
    }
    entry["matrix"] = rows;
    coeffs.push_back(entry);
  }
  out["coefficients"] = coeffs;
  return out;
}

inline CVector parse_coin(const Json& coords, int n) {
  if (static_cast<int>(coords.size()) != n)
    throw std::invalid_argument("initial.coin: expected " + std::to_string(n) +
                                " [re, im] pairs");
  CVector v(n);
  for (int c = 0; c < n; ++c) v(c) = parse_complex(coords[c], "initial.coin");
  if (v.norm() == 0.0) throw std::invalid_argument("initial.coin: zero vector");
  return v;
}

inline Json serialize_coin(const CVector& v) {
  Json out = Json::array();
  for (int c = 0; c < v.size(); ++c)
    out.push_back(Json::array({v(c).real(), v(c).imag()}));
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  Json root = Json::parse(text);
  detail::reject_unknown_keys(root, "config",
                              {"walk", "initial", "grid", "t", "t_list", "axis",
                               "exclusion_radius", "monodromy", "probes"});
  if (!root.contains("walk"))
    throw std::invalid_argument("config: missing required key \"walk\"");

  LaurentMatrixSymbol walk = parse_walk_spec(root.at("walk"));
  const int d = walk.dimension();
  const int n = walk.coin_size();

  Json manifest;
  manifest["walk"] = detail::serialize_walk(root.at("walk"), walk);

  Json grid_spec = root.contains("grid") ? root.at("grid") : Json::object();
  detail::reject_unknown_keys(grid_spec, "grid", {"N", "offset"});
  int N = grid_spec.contains("N") ? grid_spec.at("N").get<int>() : 256;
  double offset = grid_spec.contains("offset") ? grid_spec.at("offset").get<double>() : 0.5;
  TorusGrid grid(d, N, offset);
  manifest["grid"] = {{"N", N}, {"offset", offset}};

  Json init_spec = root.contains("initial") ? root.at("initial") : Json::object();
  detail::reject_unknown_keys(init_spec, "initial",
                              {"type", "site", "coin", "sigma", "file"});
  Json init_echo;
  LatticeState initial = [&]() -> LatticeState {
    if (init_spec.contains("file")) {
      if (init_spec.size() != 1)
        throw std::invalid_argument("initial: \"file\" excludes the other keys");
      std::string path = init_spec.at("file").get<std::string>();
      std::ifstream in(path);
      if (!in) throw std::invalid_argument("initial.file: cannot open " + path);
      Json state_json = Json::parse(in);
      init_echo["file"] = path;
      return parse_state_spec(state_json);
    }
    std::string type =
        init_spec.contains("type") ? init_spec.at("type").get<std::string>() : "delta";
    Offset site = init_spec.contains("site") ? init_spec.at("site").get<Offset>()
                                             : Offset(d, 0);
    if (static_cast<int>(site.size()) != d)
      throw std::invalid_argument("initial.site: expected " + std::to_string(d) +
                                  " coordinates");
    CVector coin;
    if (init_spec.contains("coin")) {
      coin = detail::parse_coin(init_spec.at("coin"), n);
    } else {
      coin = CVector::Zero(n);
      coin(0) = 1.0;
    }
    coin /= coin.norm();
    init_echo["type"] = type;
    init_echo["site"] = site;
    init_echo["coin"] = detail::serialize_coin(coin);
    if (type == "delta") return LatticeState::delta(d, site, coin);
    if (type == "gaussian") {
      double sigma =
          init_spec.contains("sigma") ? init_spec.at("sigma").get<double>() : 3.0;
      init_echo["sigma"] = sigma;
      return LatticeState::gaussian(d, site, sigma, coin);
    }
    throw std::invalid_argument("initial.type: expected \"delta\" or \"gaussian\", got \"" +
                                type + "\"");
  }();
  manifest["initial"] = init_echo;

  long t = root.contains("t") ? root.at("t").get<long>() : 64;
  manifest["t"] = t;
  std::vector<long> t_list = root.contains("t_list")
                                 ? root.at("t_list").get<std::vector<long>>()
                                 : std::vector<long>{64, 128, 256, 512};
  manifest["t_list"] = t_list;

  int axis = root.contains("axis") ? root.at("axis").get<int>() : 1;
  walk.check_axis(axis);
  manifest["axis"] = axis;

  double exclusion_radius =
      root.contains("exclusion_radius") ? root.at("exclusion_radius").get<double>() : 0.3;
  manifest["exclusion_radius"] = exclusion_radius;

  Json mono_spec = root.contains("monodromy") ? root.at("monodromy") : Json::object();
  detail::reject_unknown_keys(mono_spec, "monodromy", {"path", "eps", "steps", "start"});
  MonodromyConfig mono;
  mono.path = mono_spec.contains("path") ? mono_spec.at("path").get<std::string>()
                                         : std::string("segment");
  if (mono.path != "segment" && mono.path != "halfcircle")
    throw std::invalid_argument(
        "monodromy.path: expected \"segment\" or \"halfcircle\", got \"" + mono.path +
        "\"");
  mono.eps = mono_spec.contains("eps") ? mono_spec.at("eps").get<double>() : 0.3;
  mono.steps = mono_spec.contains("steps") ? mono_spec.at("steps").get<long>() : 64;
  mono.start = mono_spec.contains("start") ? mono_spec.at("start") : Json("auto");
  if (!mono.start.is_string() && !(mono.start.is_array() && mono.start.size() == 2))
    throw std::invalid_argument("monodromy.start: expected \"auto\" or an [re, im] pair");
  manifest["monodromy"] = {
      {"path", mono.path}, {"eps", mono.eps}, {"steps", mono.steps}, {"start", mono.start}};

  Json probe_spec = root.contains("probes") ? root.at("probes") : Json::object();
  detail::reject_unknown_keys(probe_spec, "probes", {"w_list", "m_list"});
  std::vector<std::vector<double>> w_list;
  if (probe_spec.contains("w_list")) {
    w_list = probe_spec.at("w_list").get<std::vector<std::vector<double>>>();
  } else {
    for (int i = 0; i < d; ++i) {
      std::vector<double> w(d, 0.0);
      w[i] = 1.0;
      w_list.push_back(w);
    }
  }
  std::vector<std::vector<int>> m_list;
  if (probe_spec.contains("m_list")) {
    m_list = probe_spec.at("m_list").get<std::vector<std::vector<int>>>();
  } else {
    for (int power : {1, 2})
      for (int i = 0; i < d; ++i) {
        std::vector<int> m(d, 0);
        m[i] = power;
        m_list.push_back(m);
      }
  }
  for (const auto& w : w_list)
    if (static_cast<int>(w.size()) != d)
      throw std::invalid_argument("probes.w_list: vectors must have dimension d");
  for (const auto& m : m_list)
    if (static_cast<int>(m.size()) != d)
      throw std::invalid_argument("probes.m_list: multi-indices must have dimension d");
  manifest["probes"] = {{"w_list", w_list}, {"m_list", m_list}};

  return RunConfig{std::move(manifest), std::move(walk),   std::move(initial),
                   grid,                t,                 std::move(t_list),
                   axis,                exclusion_radius,  std::move(mono),
                   std::move(w_list),   std::move(m_list)};
}

}  // namespace qwalk
