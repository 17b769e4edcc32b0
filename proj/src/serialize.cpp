#include "critlab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include "critlab/errors.hpp"

namespace critlab {

namespace {

Json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const Json& j, int dim, const std::string& what) {
  require(j.is_array() && static_cast<int>(j.size()) == dim,
          what + " must be an array of " + std::to_string(dim) + " numbers");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

}  // namespace

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string method_name(Method m) { return m == Method::descent ? "descent" : "shooting"; }

Json to_json(const SobolevReport& r) {
  return Json{{"S", r.S},
              {"c_infty", r.c_infty},
              {"N", r.exps.dim},
              {"p", r.exps.p},
              {"truncation_radius", r.truncation_radius},
              {"grid_size", r.grid_size}};
}

Json to_json(const EnergyReport& r, bool with_history) {
  Json j{{"level", r.level},
         {"Q", r.Q},
         {"iterations", r.iterations},
         {"residual", r.residual},
         {"method", method_name(r.method)},
         {"converged", r.converged},
         {"nehari_defect", r.nehari_defect}};
  if (r.method == Method::shooting) j["shooting_slope"] = r.shooting_slope;
  if (with_history) j["history"] = r.history;
  return j;
}

Json to_json(const OrbitReport& r) {
  Json j;
  if (r.l) {
    j["l"] = *r.l;
  } else {
    j["l"] = "infinite";
    j["l_lower_bound"] = r.sample_floor;
  }
  j["fix_dim"] = r.fix_dim;
  j["witness"] = vector_json(r.witness);
  j["group_order"] = r.group_order;
  j["complete"] = r.complete;
  return j;
}

Json to_json(const MCEstimate& e) {
  return Json{{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

Json to_json(const AdditivityReport& r) {
  Json mult = Json::array();
  for (auto m : r.placement.multiplicity) mult.push_back(m);
  return Json{{"norm_deviation", to_json(r.norm_deviation)},
              {"energy_deviation", to_json(r.energy_deviation)},
              {"norm_total", to_json(r.norm_total)},
              {"energy_total", to_json(r.energy_total)},
              {"norm_prediction", r.norm_prediction},
              {"energy_prediction", r.energy_prediction},
              {"orbit_sizes", mult},
              {"separation_ratio", number_or_null(r.placement.separation_ratio)},
              {"separation_warning", r.placement.warning}};
}

Json to_json(const QuantumReport& r) {
  return Json{{"phi_infty", r.phi},
              {"projected_phi_infty", r.projected_phi},
              {"c_infty", r.c_infty},
              {"tolerance", r.tolerance},
              {"two_cap_level", r.two_cap_level},
              {"above_quantum", r.above_quantum},
              {"two_cap_ok", r.two_cap_ok}};
}

Json to_json(const SmallHoleThreshold& t) {
  return Json{{"R_delta", t.R_delta}, {"level", t.level},       {"c_infty", t.c_infty},
              {"tolerance", t.tolerance}, {"conclusive", t.conclusive}, {"note", t.note}};
}

GroupSpec group_from_json(const Json& j) {
  require(j.is_object() && j.contains("dim") && j.contains("generators"),
          "group: expected an object with \"dim\" and \"generators\"");
  GroupSpec g;
  g.dim = j.at("dim").get<int>();
  require(g.dim >= 1, "group: dim must be >= 1");
  const auto& gens = j.at("generators");
  require(gens.is_array() && !gens.empty(), "group: \"generators\" must be a nonempty array");
  const auto n = static_cast<std::size_t>(g.dim);
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const auto& m = gens[k];
    const std::string tag = "group: generator " + std::to_string(k);
    require(m.is_array(), tag + " must be an array");
    Matrix M(g.dim, g.dim);
    if (m.size() == n * n && !m.front().is_array()) {
      for (std::size_t i = 0; i < n * n; ++i) M(static_cast<Eigen::Index>(i / n), static_cast<Eigen::Index>(i % n)) = m[i].get<double>();
    } else {
      require(m.size() == n, tag + " must have " + std::to_string(n) + " rows or " +
                                 std::to_string(n * n) + " entries");
      for (std::size_t i = 0; i < n; ++i) {
        require(m[i].is_array() && m[i].size() == n, tag + " row " + std::to_string(i) + " has the wrong length");
        for (std::size_t c = 0; c < n; ++c) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = m[i][c].get<double>();
      }
    }
    g.generators.push_back(M);
  }
  g.validate();
  return g;
}

Json to_json(const GroupSpec& g) {
  Json gens = Json::array();
  for (const auto& M : g.generators) {
    Json flat = Json::array();
    for (int i = 0; i < g.dim; ++i) {
      for (int c = 0; c < g.dim; ++c) flat.push_back(M(i, c));
    }
    gens.push_back(flat);
  }
  return Json{{"dim", g.dim}, {"generators", gens}};
}

BubbleConfig bubbles_from_json(const Json& j, const std::filesystem::path& dir) {
  require(j.is_object(), "bubbles: configuration must be a JSON object");
  require(j.contains("N") && j.contains("p"), "bubbles: \"N\" and \"p\" are required");
  Exponents exps{j.at("N").get<int>(), j.at("p").get<double>()};
  exps.validate();
  const double alpha = j.value("alpha", 1.0);
  const auto profile = calibrate_talenti(exps.dim, exps.p, alpha);
  BubbleConfig cfg;
  cfg.dim = exps.dim;
  const GroupSpec trivial{exps.dim, {Matrix::Identity(exps.dim, exps.dim)}};
  if (j.contains("bubbles")) {
    const auto& list = j.at("bubbles");
    require(list.is_array(), "bubbles: \"bubbles\" must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& b = list[i];
      const std::string tag = "bubbles: entry " + std::to_string(i);
      require(b.contains("center") && b.contains("scale"), tag + " needs \"center\" and \"scale\"");
      BubbleEntry e;
      e.bubble.center = vector_from(b.at("center"), exps.dim, tag + " center");
      e.bubble.scale = b.at("scale").get<double>();
      e.bubble.weight = b.value("weight", 1.0);
      e.bubble.profile = profile;
      const GroupSpec gs = b.contains("group") ? group_from_json(b.at("group")) : trivial;
      e.group = close_group(gs, b.value("max_order", kDefaultMaxOrder));
      cfg.bubbles.push_back(std::move(e));
    }
  }
  if (j.contains("base")) {
    const auto file = std::filesystem::path(j.at("base").at("file").get<std::string>());
    const auto path = file.is_absolute() ? file : dir / file;
    std::ifstream in(path);
    require(static_cast<bool>(in), "bubbles: cannot open base profile " + path.string());
    cfg.base = read_csv(in, exps, true);
  }
  cfg.validate();
  return cfg;
}

Json write_family(const CalibratedFamily& fam, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json files = Json::array();
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const std::string name = "omega_" + std::to_string(i + 1) + ".csv";
    std::ofstream out(dir / name);
    if (!out) throw NumericError("write_family: cannot write " + (dir / name).string());
    write_csv(out, fam.omegas[i]);
    files.push_back(name);
  }
  return Json{{"N", fam.spec.exps.dim},
              {"p", fam.spec.exps.p},
              {"R1", fam.spec.R1},
              {"R2", fam.spec.R2},
              {"m", fam.size()},
              {"radii", fam.radii},
              {"levels", fam.levels},
              {"common_level", fam.common_level},
              {"cells_per_piece", fam.cells_per_piece},
              {"files", files}};
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw NumericError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

}  // namespace critlab
