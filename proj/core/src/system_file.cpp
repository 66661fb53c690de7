#include "causalop/system_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "causalop/error.hpp"

namespace causalop::lindyn {

namespace {

Eigen::MatrixXd read_matrix(const YAML::Node& node, Eigen::Index n, const char* name) {
  require(node.IsSequence() && static_cast<Eigen::Index>(node.size()) == n, Errc::config,
          std::string(name) + " must have n rows");
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = node[static_cast<std::size_t>(i)];
    require(row.IsSequence() && static_cast<Eigen::Index>(row.size()) == n, Errc::config,
            std::string(name) + " must have n columns");
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = row[static_cast<std::size_t>(j)].as<double>();
  }
  return out;
}

std::vector<double> read_list(const YAML::Node& node, const char* name) {
  require(node.IsSequence(), Errc::config, std::string(name) + " must be a list");
  return node.as<std::vector<double>>();
}

}  // namespace

SystemDefinition with_modal_damping(MdofSystem system, std::vector<double> modal_xi) {
  system.damping = Eigen::MatrixXd::Zero(system.dofs(), system.dofs());
  const auto modes = modal_decompose(system, modal_xi);
  system.damping = modal_damping_matrix(modes, system.mass);
  return {std::move(system), std::move(modal_xi), "modal_xi"};
}

SystemDefinition with_rayleigh_damping(MdofSystem system, double a, double b) {
  const std::vector<double> zeros(static_cast<std::size_t>(system.dofs()), 0.0);
  system.damping = Eigen::MatrixXd::Zero(system.dofs(), system.dofs());
  const auto modes = modal_decompose(system, zeros);
  const Eigen::VectorXd xi = rayleigh_ratios(modes.omega, a, b);
  system.damping = rayleigh_damping(system, a, b);
  return {std::move(system), std::vector<double>(xi.data(), xi.data() + xi.size()), "rayleigh"};
}

SystemDefinition with_damping_matrix(MdofSystem system) {
  const std::vector<double> zeros(static_cast<std::size_t>(system.dofs()), 0.0);
  const auto modes = modal_decompose(system, zeros);
  std::vector<double> xi(static_cast<std::size_t>(system.dofs()));
  for (Eigen::Index l = 0; l < modes.count(); ++l) {
    const auto phi = modes.phi.col(l);
    // Diagonal projection only; exact when the damping is classical.
    xi[static_cast<std::size_t>(l)] =
        phi.dot(system.damping * phi) / (2.0 * modes.omega[l] * phi.dot(system.mass * phi));
  }
  return {std::move(system), std::move(xi), "matrix"};
}

SystemDefinition parse_system(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(Errc::config, std::string("system file: ") + e.what());
  }
  require(root.IsMap(), Errc::config, "system file must be a mapping");

  static const std::set<std::string> known = {"n", "mass", "stiffness", "damping", "rayleigh",
                                              "modal_xi", "influence", "shear_building", "name"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    require(known.count(key) == 1, Errc::config, "unknown system key '" + key + "'");
  }

  try {
    MdofSystem sys;
    if (root["shear_building"]) {
      const auto sb = root["shear_building"];
      const auto masses = read_list(sb["masses"], "shear_building.masses");
      const auto springs = read_list(sb["stiffness"], "shear_building.stiffness");
      sys = shear_building(masses, springs);
      if (root["n"]) require(root["n"].as<Eigen::Index>() == sys.dofs(), Errc::config, "n disagrees with shear_building");
    } else {
      require(root["n"] && root["mass"] && root["stiffness"], Errc::config,
              "system file needs n, mass and stiffness (or shear_building)");
      const auto n = root["n"].as<Eigen::Index>();
      require(n >= 1, Errc::config, "n must be positive");
      sys.mass = read_matrix(root["mass"], n, "mass");
      sys.stiffness = read_matrix(root["stiffness"], n, "stiffness");
      sys.influence = Eigen::VectorXd::Ones(n);
    }
    const Eigen::Index n = sys.dofs();
    sys.damping = Eigen::MatrixXd::Zero(n, n);
    if (root["influence"]) {
      const auto iota = read_list(root["influence"], "influence");
      require(static_cast<Eigen::Index>(iota.size()) == n, Errc::config, "influence must have n entries");
      sys.influence = Eigen::Map<const Eigen::VectorXd>(iota.data(), n);
    }

    const int choices = int(bool(root["damping"])) + int(bool(root["rayleigh"])) + int(bool(root["modal_xi"]));
    require(choices == 1, Errc::config, "specify exactly one of damping, rayleigh, modal_xi");
    if (root["modal_xi"]) {
      auto xi = read_list(root["modal_xi"], "modal_xi");
      require(static_cast<Eigen::Index>(xi.size()) == n, Errc::config, "modal_xi must have n entries");
      return with_modal_damping(std::move(sys), std::move(xi));
    }
    if (root["rayleigh"]) {
      const auto r = root["rayleigh"];
      require(r["a"] && r["b"], Errc::config, "rayleigh needs a and b");
      return with_rayleigh_damping(std::move(sys), r["a"].as<double>(), r["b"].as<double>());
    }
    sys.damping = read_matrix(root["damping"], n, "damping");
    return with_damping_matrix(std::move(sys));
  } catch (const YAML::Exception& e) {
    fail(Errc::config, std::string("system file: ") + e.what());
  }
}

SystemDefinition load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(bool(in), Errc::config, "cannot open system file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

}  // namespace causalop::lindyn
