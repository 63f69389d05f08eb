#include "specavg/io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <stdexcept>

namespace specavg {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, std::initializer_list<const char*> required,
                const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw std::invalid_argument(std::string("unknown key '") + item.key() + "' in " + what);
  }
  for (const char* key : required) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing key '") + key + "' in " + what);
  }
}

const char* trig_name(Trig t) { return t == Trig::Cos ? "cos" : "sin"; }

Trig trig_from(const std::string& s) {
  if (s == "cos") return Trig::Cos;
  if (s == "sin") return Trig::Sin;
  throw std::invalid_argument("trig pattern entries must be 'cos' or 'sin', got '" + s + "'");
}

GroupKind group_kind_from(const std::string& s) {
  if (s == "trivial") return GroupKind::Trivial;
  if (s == "sign_flips") return GroupKind::SignFlips;
  if (s == "coordinate_permutations") return GroupKind::CoordinatePermutations;
  if (s == "cyclic_rotation") return GroupKind::CyclicRotation;
  throw std::invalid_argument("unknown group kind '" + s + "'");
}

Json element_to_json(const GroupElement& g) {
  if (const auto* s = std::get_if<SignFlip>(&g)) return s->signs;
  if (const auto* p = std::get_if<Permutation>(&g)) return p->image;
  return std::get<Rotation>(g).step;
}

GroupElement element_from_json(GroupKind kind, int parameter, const Json& j) {
  switch (kind) {
    case GroupKind::SignFlips: return SignFlip{j.get<std::vector<int>>()};
    case GroupKind::CyclicRotation: return Rotation{j.get<int>(), parameter};
    case GroupKind::Trivial:
    case GroupKind::CoordinatePermutations: break;
  }
  return Permutation{j.get<std::vector<int>>()};
}

GroupSpec default_group(GroupKind kind, int parameter) {
  switch (kind) {
    case GroupKind::SignFlips: return GroupSpec::sign_flips(parameter);
    case GroupKind::CoordinatePermutations: return GroupSpec::coordinate_permutations(parameter);
    case GroupKind::CyclicRotation: return GroupSpec::cyclic_rotation(parameter);
    case GroupKind::Trivial: break;
  }
  return GroupSpec::trivial(parameter);
}

Json method_to_json(const MethodConfig& m) {
  Json j;
  if (!m.label.empty()) j["label"] = m.label;
  if (m.kind == MethodConfig::Kind::SpecAvg) {
    j["name"] = "spec_avg";
    if (!m.cutoffs.empty()) j["cutoffs"] = m.cutoffs;
    if (m.alpha) j["alpha"] = *m.alpha;
    return j;
  }
  j["name"] = "krr";
  Json k;
  if (m.kernel.kind == KernelConfig::Kind::VonMises) {
    k["kind"] = "von_mises";
    k["bandwidth"] = m.kernel.bandwidth;
  } else {
    k["kind"] = "sobolev";
    k["basis_dim"] = m.kernel.basis_dim;
    k["alpha"] = m.kernel.alpha;
  }
  k["group_averaged"] = m.kernel.group_averaged;
  j["kernel"] = k;
  j["ridges"] = m.ridges;
  return j;
}

MethodConfig method_from_json(const Json& j) {
  check_keys(j, {"name", "label", "cutoffs", "alpha", "kernel", "ridges"}, {"name"}, "method");
  MethodConfig m;
  m.label = j.value("label", std::string());
  const auto name = j.at("name").get<std::string>();
  if (name == "spec_avg") {
    m.kind = MethodConfig::Kind::SpecAvg;
    if (j.contains("kernel") || j.contains("ridges")) throw std::invalid_argument("spec_avg takes cutoffs or alpha");
    if (j.contains("cutoffs")) m.cutoffs = j.at("cutoffs").get<std::vector<std::size_t>>();
    if (j.contains("alpha")) m.alpha = j.at("alpha").get<double>();
  } else if (name == "krr") {
    m.kind = MethodConfig::Kind::Krr;
    if (j.contains("cutoffs") || j.contains("alpha")) throw std::invalid_argument("krr takes kernel and ridges");
    if (!j.contains("ridges")) throw std::invalid_argument("krr needs 'ridges'");
    m.ridges = j.at("ridges").get<std::vector<double>>();
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      check_keys(k, {"kind", "bandwidth", "basis_dim", "alpha", "group_averaged"}, {"kind"}, "kernel");
      const auto kind = k.at("kind").get<std::string>();
      if (kind == "von_mises") {
        m.kernel.kind = KernelConfig::Kind::VonMises;
        m.kernel.bandwidth = k.value("bandwidth", 1.0);
      } else if (kind == "sobolev") {
        m.kernel.kind = KernelConfig::Kind::Sobolev;
        m.kernel.basis_dim = k.value("basis_dim", std::size_t{64});
        m.kernel.alpha = k.value("alpha", 2.0);
      } else {
        throw std::invalid_argument("unknown kernel kind '" + kind + "'");
      }
      m.kernel.group_averaged = k.value("group_averaged", false);
    }
  } else {
    throw std::invalid_argument("unknown method '" + name + "'");
  }
  return m;
}

}  // namespace

Json to_json(const ManifoldSpec& manifold) {
  Json j;
  if (manifold.kind == ManifoldKind::Circle) {
    j["kind"] = "circle";
    j["dimension"] = 1;
  } else {
    j["kind"] = "flat_torus";
    j["dimension"] = manifold.dimension;
    j["basis"] = manifold.basis_mode == BasisMode::CosineOnly ? "cosine_only" : "full_fourier";
  }
  return j;
}

ManifoldSpec manifold_from_json(const Json& j) {
  check_keys(j, {"kind", "dimension", "basis"}, {"kind"}, "manifold");
  ManifoldSpec m;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "circle") {
    m = ManifoldSpec::circle();
    if (j.contains("dimension") && j.at("dimension").get<int>() != 1) throw std::invalid_argument("the circle has dimension 1");
    if (j.contains("basis") && j.at("basis").get<std::string>() != "full_fourier") {
      throw std::invalid_argument("the circle only supports the full Fourier basis");
    }
  } else if (kind == "flat_torus") {
    if (!j.contains("dimension")) throw std::invalid_argument("flat_torus needs 'dimension'");
    m.kind = ManifoldKind::FlatTorus;
    m.dimension = j.at("dimension").get<int>();
    const auto basis = j.value("basis", std::string("full_fourier"));
    if (basis == "full_fourier") {
      m.basis_mode = BasisMode::FullFourier;
    } else if (basis == "cosine_only") {
      m.basis_mode = BasisMode::CosineOnly;
    } else {
      throw std::invalid_argument("unknown basis mode '" + basis + "'");
    }
  } else {
    throw std::invalid_argument("unknown manifold kind '" + kind + "'");
  }
  m.validate();
  return m;
}

Json to_json(const GroupSpec& group) {
  Json j;
  j["kind"] = to_string(group.kind);
  if (group.kind == GroupKind::CyclicRotation) {
    j["order"] = group.parameter;
  } else {
    j["degree"] = group.parameter;
  }
  if (group.generators != default_group(group.kind, group.parameter).generators) {
    Json gens = Json::array();
    for (const auto& g : group.generators) gens.push_back(element_to_json(g));
    j["generators"] = gens;
  }
  return j;
}

GroupSpec group_from_json(const Json& j) {
  check_keys(j, {"kind", "degree", "order", "generators"}, {"kind"}, "group");
  const auto kind = group_kind_from(j.at("kind").get<std::string>());
  const char* key = kind == GroupKind::CyclicRotation ? "order" : "degree";
  if (!j.contains(key)) throw std::invalid_argument(std::string("group needs '") + key + "'");
  if (j.contains(kind == GroupKind::CyclicRotation ? "degree" : "order")) {
    throw std::invalid_argument("group parameter key does not match its kind");
  }
  const int parameter = j.at(key).get<int>();
  if (!j.contains("generators")) return default_group(kind, parameter);
  std::vector<GroupElement> gens;
  for (const auto& g : j.at("generators")) gens.push_back(element_from_json(kind, parameter, g));
  return GroupSpec::with_generators(kind, parameter, std::move(gens));
}

Json to_json(const EigenIndex& index) {
  Json pattern = Json::array();
  for (auto t : index.pattern) pattern.push_back(trig_name(t));
  return {{"frequencies", index.frequencies}, {"pattern", pattern}};
}

EigenIndex eigen_index_from_json(const Json& j) {
  EigenIndex index;
  index.frequencies = j.at("frequencies").get<std::vector<int>>();
  for (const auto& t : j.at("pattern")) index.pattern.push_back(trig_from(t.get<std::string>()));
  if (index.pattern.size() != index.frequencies.size()) throw std::invalid_argument("pattern and frequencies differ in length");
  for (std::size_t i = 0; i < index.frequencies.size(); ++i) {
    if (index.frequencies[i] < 0) throw std::invalid_argument("frequencies must be nonnegative");
    if (index.frequencies[i] == 0 && index.pattern[i] == Trig::Sin) {
      throw std::invalid_argument("zero frequency cannot carry a sine factor");
    }
  }
  return index;
}

Json to_json(const SpectralModel& model) {
  Json j;
  j["manifold"] = to_json(model.basis.manifold());
  j["group"] = to_json(model.group);
  j["alpha"] = model.alpha ? Json(*model.alpha) : Json(nullptr);
  j["cutoff"] = model.cutoff_dim;
  Json coeffs = Json::array();
  for (std::size_t k = 0; k < model.basis.size(); ++k) {
    Json term = to_json(model.basis.indices()[k]);
    term["value"] = model.coefficients[static_cast<Eigen::Index>(k)];
    coeffs.push_back(std::move(term));
  }
  j["coefficients"] = std::move(coeffs);
  if (model.raw_coefficients) {
    j["raw_coefficients"] = std::vector<double>(model.raw_coefficients->data(),
                                                model.raw_coefficients->data() + model.raw_coefficients->size());
  }
  j["oracle_calls"] = {{"eigenfunction_evaluations", model.oracle_calls.eigenfunction_evaluations},
                       {"representation_entries", model.oracle_calls.representation_entries}};
  return j;
}

SpectralModel model_from_json(const Json& j) {
  check_keys(j, {"manifold", "group", "alpha", "cutoff", "coefficients", "raw_coefficients", "oracle_calls"},
             {"manifold", "group", "cutoff", "coefficients"}, "model");
  SpectralModel model;
  const auto manifold = manifold_from_json(j.at("manifold"));
  model.group = group_from_json(j.at("group"));
  check_compatible(model.group, manifold);
  if (j.contains("alpha") && !j.at("alpha").is_null()) model.alpha = j.at("alpha").get<double>();
  model.cutoff_dim = j.at("cutoff").get<std::size_t>();
  model.basis = basis_for_cutoff(manifold, model.cutoff_dim);
  const auto& coeffs = j.at("coefficients");
  if (coeffs.size() != model.basis.size()) {
    throw std::invalid_argument("model lists " + std::to_string(coeffs.size()) + " coefficients, basis for cutoff has " +
                                std::to_string(model.basis.size()));
  }
  model.coefficients.resize(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    check_keys(coeffs[k], {"frequencies", "pattern", "value"}, {"frequencies", "pattern", "value"}, "coefficient");
    if (!(eigen_index_from_json(coeffs[k]) == model.basis.indices()[k])) {
      throw std::invalid_argument("coefficient " + std::to_string(k) + " is out of basis order");
    }
    model.coefficients[static_cast<Eigen::Index>(k)] = coeffs[k].at("value").get<double>();
  }
  if (j.contains("raw_coefficients")) {
    const auto raw = j.at("raw_coefficients").get<std::vector<double>>();
    if (raw.size() != model.basis.size()) throw std::invalid_argument("raw_coefficients do not match basis");
    model.raw_coefficients = Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size()));
  }
  if (j.contains("oracle_calls")) {
    const auto& c = j.at("oracle_calls");
    model.oracle_calls.eigenfunction_evaluations = c.value("eigenfunction_evaluations", std::uint64_t{0});
    model.oracle_calls.representation_entries = c.value("representation_entries", std::uint64_t{0});
  }
  return model;
}

Json to_json(const KernelSpec& kernel) {
  if (const auto* k = std::get_if<VonMises>(&kernel.kind)) {
    return {{"kind", "von_mises"}, {"manifold", to_json(k->manifold)}, {"bandwidth", k->bandwidth}};
  }
  if (const auto* k = std::get_if<TruncatedSobolev>(&kernel.kind)) {
    return {{"kind", "truncated_sobolev"},
            {"manifold", to_json(k->basis.manifold())},
            {"basis_dim", k->basis.size()},
            {"alpha", k->alpha}};
  }
  const auto& k = std::get<GroupAveraged>(kernel.kind);
  return {{"kind", "group_averaged"}, {"inner", to_json(*k.inner)}, {"group", to_json(k.group)}};
}

KernelSpec kernel_from_json(const Json& j) {
  check_keys(j, {"kind", "manifold", "bandwidth", "basis_dim", "alpha", "inner", "group"}, {"kind"}, "kernel");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "von_mises") return von_mises(manifold_from_json(j.at("manifold")), j.at("bandwidth").get<double>());
  if (kind == "truncated_sobolev") {
    const auto manifold = manifold_from_json(j.at("manifold"));
    const auto dim = j.at("basis_dim").get<std::size_t>();
    auto basis = build_basis_within(manifold, dim);
    if (basis.size() != dim) throw std::invalid_argument("basis_dim must end on an eigenspace boundary");
    return truncated_sobolev(std::move(basis), j.at("alpha").get<double>());
  }
  if (kind == "group_averaged") return group_averaged(kernel_from_json(j.at("inner")), group_from_json(j.at("group")));
  throw std::invalid_argument("unknown kernel kind '" + kind + "'");
}

Json to_json(const KrrModel& model) {
  Json points = Json::array();
  for (Eigen::Index i = 0; i < model.points.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(model.points.cols()));
    for (Eigen::Index k = 0; k < model.points.cols(); ++k) row[static_cast<std::size_t>(k)] = model.points(i, k);
    points.push_back(row);
  }
  return {{"points", points},
          {"weights", std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size())},
          {"kernel", to_json(model.kernel->spec())},
          {"ridge", model.ridge},
          {"jitter", model.jitter}};
}

KrrModel krr_model_from_json(const Json& j) {
  check_keys(j, {"points", "weights", "kernel", "ridge", "jitter"}, {"points", "weights", "kernel", "ridge"}, "krr model");
  KrrModel model;
  model.kernel = std::make_shared<const Kernel>(kernel_from_json(j.at("kernel")));
  const auto d = model.kernel->manifold().dimension;
  const auto& pts = j.at("points");
  model.points.resize(static_cast<Eigen::Index>(pts.size()), d);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto row = pts[i].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != d) throw std::invalid_argument("training point has the wrong dimension");
    for (int k = 0; k < d; ++k) model.points(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
  }
  const auto w = j.at("weights").get<std::vector<double>>();
  if (w.size() != pts.size()) throw std::invalid_argument("weights and points differ in count");
  model.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  model.ridge = j.at("ridge").get<double>();
  model.jitter = j.value("jitter", 0.0);
  return model;
}

Json to_json(const TargetSpec& target) {
  if (target.kind == TargetKind::WeightedSquares) return {{"kind", "weighted_squares"}};
  Json terms = Json::array();
  for (const auto& t : target.terms) {
    Json term = to_json(t.index);
    term["value"] = t.value;
    terms.push_back(std::move(term));
  }
  return {{"kind", "synthetic_spectral"}, {"terms", terms}};
}

TargetSpec target_from_json(const Json& j) {
  check_keys(j, {"kind", "terms"}, {"kind"}, "target");
  TargetSpec target;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "weighted_squares") {
    if (j.contains("terms")) throw std::invalid_argument("weighted_squares takes no terms");
    target.kind = TargetKind::WeightedSquares;
    return target;
  }
  if (kind != "synthetic_spectral") throw std::invalid_argument("unknown target kind '" + kind + "'");
  target.kind = TargetKind::SyntheticSpectral;
  for (const auto& t : j.at("terms")) {
    check_keys(t, {"frequencies", "pattern", "value"}, {"frequencies", "pattern", "value"}, "target term");
    target.terms.push_back({eigen_index_from_json(t), t.at("value").get<double>()});
  }
  for (std::size_t a = 0; a < target.terms.size(); ++a) {
    for (std::size_t b = a + 1; b < target.terms.size(); ++b) {
      if (target.terms[a].index == target.terms[b].index) throw std::invalid_argument("target lists a term twice");
    }
  }
  return target;
}

Json to_json(const ExperimentConfig& config) {
  Json methods = Json::array();
  for (const auto& m : config.methods) methods.push_back(method_to_json(m));
  Json j{{"manifold", to_json(config.manifold)},
         {"group", to_json(config.group)},
         {"target", to_json(config.target)},
         {"methods", methods},
         {"n_train", config.n_train},
         {"n_test", config.n_test},
         {"noise_std", config.noise_std},
         {"seeds", config.seeds}};
  if (!config.output.empty()) j["output"] = config.output;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  check_keys(j, {"manifold", "group", "target", "methods", "n_train", "n_test", "noise_std", "seeds", "output"},
             {"manifold", "group", "target", "methods", "n_train", "n_test", "noise_std", "seeds"}, "config");
  ExperimentConfig config;
  config.manifold = manifold_from_json(j.at("manifold"));
  config.group = group_from_json(j.at("group"));
  config.target = target_from_json(j.at("target"));
  for (const auto& m : j.at("methods")) config.methods.push_back(method_from_json(m));
  config.n_train = j.at("n_train").get<std::vector<std::size_t>>();
  config.n_test = j.at("n_test").get<std::size_t>();
  config.noise_std = j.at("noise_std").get<double>();
  config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  config.output = j.value("output", std::string());
  config.validate();
  return config;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(load_json(path)); }

}  // namespace specavg
